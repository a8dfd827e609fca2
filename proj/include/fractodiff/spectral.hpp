#pragma once

#include "errors.hpp"
#include "fraccalc.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace fractodiff {

struct GridFunction {
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(std::size_t n, double fill = 0.0) : values(n, fill) {}
    explicit GridFunction(std::vector<double> v) : values(std::move(v)) {}

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    GridFunction& operator+=(const GridFunction& o) {
        if (o.size() != size()) throw domain_error("grid function size mismatch");
        for (std::size_t i = 0; i < size(); ++i) values[i] += o.values[i];
        return *this;
    }
    GridFunction& operator*=(double c) {
        for (double& v : values) v *= c;
        return *this;
    }
};

inline GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
inline GridFunction operator*(double c, GridFunction a) { return a *= c; }
inline GridFunction operator-(GridFunction a, const GridFunction& b) { return a += -1.0 * b; }

using FieldSeries = BasicTimeSeries<GridFunction>;

struct BoundarySite {
    std::string name;
    double coord;
};

struct SpectralDomain {
    std::string family;  // interval_sfl, interval_rfl, matrix
    std::vector<double> coords;
    std::vector<double> weights;
    std::vector<double> eigenvalues;
    std::vector<double> eigenvectors;  // row-major: mode k occupies [k*n, (k+1)*n)
    double gamma = 1.0;
    double s = 1.0;
    double left = 0.0, right = 1.0;  // interval endpoints
    std::vector<BoundarySite> boundary_sites;

    // derived
    std::vector<double> delta;
    std::vector<double> delta_gamma;
    std::vector<int> nearest_site;
    std::vector<std::vector<std::size_t>> boundary_nodes;  // per site, by increasing delta

    std::size_t n_nodes() const { return coords.size(); }
    std::size_t n_modes() const { return eigenvalues.size(); }

    std::span<const double> mode(std::size_t k) const {
        return {eigenvectors.data() + k * n_nodes(), n_nodes()};
    }

    double inner(std::span<const double> a, std::span<const double> b) const {
        quad::NeumaierSum sum;
        for (std::size_t i = 0; i < n_nodes(); ++i) sum.add(a[i] * b[i] * weights[i]);
        return sum.value();
    }
    double inner(const GridFunction& a, const GridFunction& b) const {
        check(a);
        check(b);
        return inner(std::span<const double>(a.values), std::span<const double>(b.values));
    }
    double norm(const GridFunction& a) const { return std::sqrt(inner(a, a)); }

    // weighted L1 with weight delta^gamma
    double weighted_l1(const GridFunction& a) const {
        check(a);
        quad::NeumaierSum sum;
        for (std::size_t i = 0; i < n_nodes(); ++i)
            sum.add(std::abs(a[i]) * delta_gamma[i] * weights[i]);
        return sum.value();
    }

    std::vector<double> coefficients(const GridFunction& v) const {
        check(v);
        std::vector<double> c(n_modes());
        for (std::size_t k = 0; k < n_modes(); ++k) c[k] = inner(mode(k), v.values);
        return c;
    }

    GridFunction synthesize(const std::vector<double>& c) const {
        if (c.size() != n_modes()) throw domain_error("coefficient count does not match modes");
        GridFunction out(n_nodes());
        for (std::size_t k = 0; k < n_modes(); ++k) {
            if (c[k] == 0.0) continue;
            auto phi = mode(k);
            for (std::size_t i = 0; i < n_nodes(); ++i) out[i] += c[k] * phi[i];
        }
        return out;
    }

    GridFunction mode_function(std::size_t k) const {
        auto m = mode(k);
        return GridFunction(std::vector<double>(m.begin(), m.end()));
    }

    std::size_t site_index(const std::string& name) const {
        for (std::size_t i = 0; i < boundary_sites.size(); ++i)
            if (boundary_sites[i].name == name) return i;
        throw domain_error("unknown boundary site '" + name + "'");
    }

    void check(const GridFunction& g) const {
        if (g.size() != n_nodes())
            throw domain_error("grid function has " + std::to_string(g.size()) +
                               " values, domain has " + std::to_string(n_nodes()) + " nodes");
    }

    // fill delta, weights, sites from coords and the interval endpoints
    void finalize_geometry() {
        std::size_t n = n_nodes();
        delta.resize(n);
        delta_gamma.resize(n);
        nearest_site.resize(n);
        boundary_sites = {{"left", left}, {"right", right}};
        boundary_nodes.assign(2, {});
        for (std::size_t i = 0; i < n; ++i) {
            double dl = coords[i] - left, dr = right - coords[i];
            if (!(dl > 0.0 && dr > 0.0)) throw domain_error("node outside the open interval");
            delta[i] = std::min(dl, dr);
            delta_gamma[i] = std::pow(delta[i], gamma);
            nearest_site[i] = dl <= dr ? 0 : 1;
            boundary_nodes[nearest_site[i]].push_back(i);
        }
        for (auto& list : boundary_nodes)
            std::stable_sort(list.begin(), list.end(),
                             [&](std::size_t a, std::size_t b) { return delta[a] < delta[b]; });
    }
};

namespace detail {

// cyclic Jacobi; a is overwritten, returns eigenvalues, v holds eigenvectors as columns
inline std::vector<double> jacobi_eigen(std::vector<double>& a, std::size_t n, std::vector<double>& v,
                                        double threshold = 1e-13, int max_sweeps = 100) {
    v.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    double scale = 0.0;
    for (double x : a) scale += x * x;
    scale = std::sqrt(scale);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (std::sqrt(2.0 * off) <= threshold * scale) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = a[p * n + q];
                if (std::abs(apq) <= 1e-300) continue;
                double app = a[p * n + p], aqq = a[q * n + q];
                if (std::abs(apq) < 1e-18 * (std::abs(app) + std::abs(aqq))) {
                    a[p * n + q] = a[q * n + p] = 0.0;
                    continue;
                }
                double theta = (aqq - app) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = a[q * n + p] = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = v[k * n + p], vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a[i * n + i];
    return ev;
}

// 4-node Neville extrapolation to delta = 0 with a 3-node consistency check
struct Extrapolated {
    double value;
    double spread;  // |4-node - 3-node|
};

inline Extrapolated extrapolate_four(const std::vector<double>& x, const std::vector<double>& y) {
    double v4 = neville_at_zero(x, y);
    double v3 = neville_at_zero({x[0], x[1], x[2]}, {y[0], y[1], y[2]});
    return {v4, std::abs(v4 - v3)};
}

}  // namespace detail

inline SpectralDomain build_matrix_domain(const std::vector<double>& M, std::vector<double> coords,
                                          std::vector<double> weights, double gamma,
                                          double left = NAN, double right = NAN, double s = 1.0) {
    std::size_t n = coords.size();
    if (n == 0) throw domain_error("matrix domain needs nodes");
    if (M.size() != n * n) throw domain_error("matrix size does not match node count");
    if (weights.size() != n) throw domain_error("weight count does not match node count");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw domain_error("gamma must lie in (0,1]");
    for (double w : weights)
        if (!(w > 0.0)) throw domain_error("quadrature weights must be positive");
    double mscale = 0.0;
    for (double x : M) mscale = std::max(mscale, std::abs(x));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(M[i * n + j] - M[j * n + i]) > 1e-12 * std::max(1.0, mscale))
                throw domain_error("matrix is not symmetric");

    std::vector<double> a = M, v;
    auto ev = detail::jacobi_eigen(a, n, v);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return ev[x] < ev[y]; });

    SpectralDomain d;
    d.family = "matrix";
    d.coords = std::move(coords);
    d.weights = std::move(weights);
    d.gamma = gamma;
    d.s = s;
    if (std::isnan(left)) left = n > 1 ? 2 * d.coords[0] - d.coords[1] : d.coords[0] - 1.0;
    if (std::isnan(right)) right = n > 1 ? 2 * d.coords[n - 1] - d.coords[n - 2] : d.coords[0] + 1.0;
    d.left = left;
    d.right = right;
    d.eigenvalues.resize(n);
    d.eigenvectors.resize(n * n);
    for (std::size_t k = 0; k < n; ++k) {
        d.eigenvalues[k] = ev[order[k]];
        for (std::size_t i = 0; i < n; ++i) d.eigenvectors[k * n + i] = v[i * n + order[k]];
    }
    if (!(d.eigenvalues[0] > 0.0)) throw domain_error("matrix is not positive definite");

    // orthonormalize under the quadrature weights; Gram-Schmidt only inside
    // clusters of (numerically) equal eigenvalues
    auto row = [&](std::size_t k) { return std::span<double>(d.eigenvectors.data() + k * n, n); };
    auto winner = [&](std::span<const double> x, std::span<const double> y) { return d.inner(x, y); };
    std::size_t start = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k > start && std::abs(d.eigenvalues[k] - d.eigenvalues[start]) >
                             1e-10 * std::max(1.0, std::abs(d.eigenvalues[start])))
            start = k;
        for (std::size_t j = start; j < k; ++j) {
            double c = winner(row(k), row(j));
            for (std::size_t i = 0; i < n; ++i) row(k)[i] -= c * row(j)[i];
        }
        double nrm = std::sqrt(winner(row(k), row(k)));
        for (std::size_t i = 0; i < n; ++i) row(k)[i] /= nrm;
        // fix the sign: first significant entry positive
        std::size_t lead = 0;
        double big = 0.0;
        for (std::size_t i = 0; i < n; ++i) big = std::max(big, std::abs(row(k)[i]));
        while (lead < n && std::abs(row(k)[lead]) < 1e-3 * big) ++lead;
        if (lead < n && row(k)[lead] < 0)
            for (std::size_t i = 0; i < n; ++i) row(k)[i] = -row(k)[i];
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = k; j < n; ++j)
            worst = std::max(worst, std::abs(winner(row(k), row(j)) - (j == k ? 1.0 : 0.0)));
    if (worst > 1e-10)
        throw domain_error("eigenvectors are not orthonormal under the quadrature weights (" +
                           std::to_string(worst) + "); the operator is not weight-symmetric");
    d.finalize_geometry();
    return d;
}

// spectral fractional Laplacian on (0, L): sine modes sampled at interior nodes
inline SpectralDomain build_interval_sfl(std::size_t n_modes, double s, double L = 1.0,
                                         std::size_t n_nodes = 0) {
    if (n_modes < 1) throw domain_error("need at least one mode");
    if (!(s > 0.0 && s <= 1.0)) throw domain_error("s must lie in (0,1]");
    if (!(L > 0.0)) throw domain_error("length must be positive");
    if (n_nodes == 0) n_nodes = 8 * n_modes;
    if (n_nodes < 8 * n_modes)
        throw resolution_error("too many modes for the grid: aliasing (need 8 nodes per mode)");
    SpectralDomain d;
    d.family = "interval_sfl";
    d.gamma = 1.0;
    d.s = s;
    d.left = 0.0;
    d.right = L;
    double h = L / (n_nodes + 1.0);
    d.coords.resize(n_nodes);
    d.weights.assign(n_nodes, h);
    for (std::size_t i = 0; i < n_nodes; ++i) d.coords[i] = (i + 1) * h;
    d.eigenvalues.resize(n_modes);
    d.eigenvectors.resize(n_modes * n_nodes);
    double amp = std::sqrt(2.0 / L);
    for (std::size_t k = 0; k < n_modes; ++k) {
        double j = k + 1.0;
        d.eigenvalues[k] = std::pow(j * std::numbers::pi / L, 2.0 * s);
        for (std::size_t i = 0; i < n_nodes; ++i)
            d.eigenvectors[k * n_nodes + i] =
                amp * detail::sin_pi(j * (i + 1.0) / (n_nodes + 1.0));
    }
    d.finalize_geometry();
    return d;
}

// restricted fractional Laplacian stiffness on (0,1), h = 1/n_cells:
// second differences for |z| < h, piecewise-linear data beyond, zero outside
inline std::vector<double> rfl_stiffness(std::size_t n_cells, double s) {
    std::size_t n = n_cells - 1;
    double h = 1.0 / n_cells;
    double C = s * std::pow(4.0, s) * std::exp(log_gamma(0.5 + s)) /
               (std::sqrt(std::numbers::pi) * std::exp(log_gamma(1.0 - s)));
    double hs = std::pow(h, -2.0 * s);
    auto ker = [s](double xi) { return std::pow(xi, -1.0 - 2.0 * s); };
    std::vector<double> beta(n + 1, 0.0);
    beta[1] = quad::gauss_legendre([&](double xi) { return (2.0 - xi) * ker(xi); }, 1.0, 2.0);
    for (std::size_t k = 2; k <= n; ++k) {
        double kd = static_cast<double>(k);
        beta[k] = quad::gauss_legendre([&](double xi) { return (xi - kd + 1.0) * ker(xi); }, kd - 1.0, kd) +
                  quad::gauss_legendre([&](double xi) { return (kd + 1.0 - xi) * ker(xi); }, kd, kd + 1.0);
    }
    double c0 = 1.0 / (2.0 - 2.0 * s);
    std::vector<double> M(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        M[i * n + i] = C * hs * (2.0 * c0 + 1.0 / s);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            std::size_t k = i > j ? i - j : j - i;
            M[i * n + j] = -C * hs * (beta[k] + (k == 1 ? c0 : 0.0));
        }
    }
    return M;
}

inline SpectralDomain build_interval_rfl(std::size_t n_cells, double s) {
    if (s == 1.0) throw domain_error("s = 1 is the classical case; use build_interval_sfl");
    if (!(s > 0.0 && s < 1.0)) throw domain_error("s must lie in (0,1)");
    if (n_cells < 8) throw domain_error("need at least 8 cells");
    std::size_t n = n_cells - 1;
    double h = 1.0 / n_cells;
    std::vector<double> coords(n), weights(n, h);
    for (std::size_t i = 0; i < n; ++i) coords[i] = (i + 1) * h;
    auto d = build_matrix_domain(rfl_stiffness(n_cells, s), coords, weights, s, 0.0, 1.0, s);
    d.family = "interval_rfl";
    return d;
}

inline GridFunction green_apply(const SpectralDomain& d, const GridFunction& f) {
    auto c = d.coefficients(f);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] /= d.eigenvalues[k];
    return d.synthesize(c);
}

// lim g / delta^gamma at a boundary site from the 4 nodes nearest to it
inline detail::Extrapolated boundary_limit_estimate(const SpectralDomain& d, std::size_t site,
                                                    const GridFunction& g) {
    d.check(g);
    if (site >= d.boundary_nodes.size()) throw domain_error("boundary site index out of range");
    const auto& nodes = d.boundary_nodes[site];
    if (nodes.size() < 4) throw resolution_error("fewer than four nodes near the boundary site");
    std::vector<double> x(4), y(4);
    for (int i = 0; i < 4; ++i) {
        x[i] = d.delta[nodes[i]];
        y[i] = g[nodes[i]] / d.delta_gamma[nodes[i]];
    }
    return detail::extrapolate_four(x, y);
}

inline double boundary_limit(const SpectralDomain& d, std::size_t site, const GridFunction& g,
                             double tol = 1e-2) {
    auto e = boundary_limit_estimate(d, site, g);
    double scale = std::max(std::abs(e.value), 1e-12);
    if (!std::isfinite(e.value) || e.spread > tol * scale)
        throw accuracy_error("boundary extrapolation does not settle", e.value, e.spread);
    return e.value;
}

inline double martin_derivative(const SpectralDomain& d, std::size_t site, const GridFunction& f,
                                double tol = 1e-2) {
    return boundary_limit(d, site, green_apply(d, f), tol);
}

// D_gamma phi_k at a site; exact for the sine family
inline double mode_boundary_derivative(const SpectralDomain& d, std::size_t k, std::size_t site) {
    if (d.family == "interval_sfl") {
        double L = d.right - d.left;
        double j = k + 1.0;
        double v = std::sqrt(2.0 / L) * j * std::numbers::pi / L;
        return site == 0 ? v : ((static_cast<int>(j) % 2 == 1) ? v : -v);
    }
    return boundary_limit_estimate(d, site, d.mode_function(k)).value;
}

// A_j = {1/j < delta < 2/j} per side
inline std::vector<std::size_t> concentration_set(const SpectralDomain& d, std::size_t site, int j) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < d.n_nodes(); ++i)
        if (d.nearest_site[i] == static_cast<int>(site) && d.delta[i] > 1.0 / j && d.delta[i] < 2.0 / j)
            out.push_back(i);
    return out;
}

// spatial profile c_j^site: chi_{A_j} / (|A_j| delta^gamma), so that
// sum_i w_i delta_i^gamma c_i = 1
inline GridFunction concentration_profile(const SpectralDomain& d, std::size_t site, int j) {
    auto set = concentration_set(d, site, j);
    if (set.size() < 3)
        throw resolution_error("concentration set A_" + std::to_string(j) +
                               " holds fewer than 3 nodes on side " + d.boundary_sites[site].name);
    double measure = 0.0;
    for (auto i : set) measure += d.weights[i];
    GridFunction c(d.n_nodes());
    for (auto i : set) c[i] = 1.0 / (measure * d.delta_gamma[i]);
    return c;
}

// j = 4, 8, 16, ... while every side keeps >= 3 nodes in A_j and j <= n_modes/2
inline std::vector<int> concentration_schedule(const SpectralDomain& d) {
    std::vector<int> js;
    for (int j = 4; j <= static_cast<int>(d.n_modes() / 2); j *= 2) {
        bool ok = true;
        for (std::size_t site = 0; site < d.boundary_sites.size(); ++site)
            ok = ok && concentration_set(d, site, j).size() >= 3;
        if (!ok) break;
        js.push_back(j);
    }
    return js;
}

struct UStarResult {
    GridFunction u;
    std::vector<int> schedule;
    std::vector<double> cauchy;  // weighted-L1 distance between successive iterates
    int j = 0;
};

inline UStarResult u_star_detailed(const SpectralDomain& d, double tol = 1e-4) {
    auto js = concentration_schedule(d);
    if (js.size() < 2) throw resolution_error("grid too coarse for a concentration schedule");
    UStarResult r;
    GridFunction prev, before;
    for (int j : js) {
        GridFunction f(d.n_nodes());
        for (std::size_t site = 0; site < d.boundary_sites.size(); ++site)
            f += concentration_profile(d, site, j);
        GridFunction u = green_apply(d, f);
        r.schedule.push_back(j);
        r.j = j;
        if (!prev.values.empty()) {
            double diff = d.weighted_l1(u - prev);
            r.cauchy.push_back(diff);
            if (diff < tol) {
                r.u = std::move(u);
                return r;
            }
        }
        r.u = u;
        before = std::move(prev);
        prev = std::move(u);
    }
    throw concentration_error("u* concentration did not reach the Cauchy tolerance",
                              r.cauchy.back(), prev.values, before.values);
}

inline GridFunction u_star(const SpectralDomain& d, double tol = 1e-4) {
    return u_star_detailed(d, tol).u;
}

}  // namespace fractodiff
