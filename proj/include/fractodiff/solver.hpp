#pragma once

#include "fracode.hpp"
#include "spectral.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fractodiff {

struct ProblemSpec {
    DerivativeKind kind = DerivativeKind::caputo;
    FractionalOrder alpha{0.5};
    std::shared_ptr<const SpectralDomain> domain;
    GridFunction u0;
    std::optional<FieldSeries> f;   // absent means zero
    std::vector<TimeSeries> h;      // one per boundary site; empty means zero
    double horizon = 1.0;

    bool has_boundary_data() const {
        for (const auto& s : h)
            for (double v : s.values)
                if (v != 0.0) return true;
        return false;
    }

    void validate(TimeGrid grid) const {
        if (!domain) throw domain_error("problem has no domain");
        if (u0.size() != domain->n_nodes()) throw domain_error("u0 does not live on the domain");
        if (std::abs(grid.horizon() - horizon) > 1e-12 * horizon)
            throw domain_error("time grid does not end at the horizon");
        if (f) {
            if (!(f->grid == grid)) throw domain_error("forcing grid does not match the time grid");
            for (const auto& g : f->values)
                if (g.size() != domain->n_nodes()) throw domain_error("forcing does not live on the domain");
        }
        if (!h.empty()) {
            if (h.size() != domain->boundary_sites.size())
                throw domain_error("boundary data needs one series per boundary site");
            for (const auto& s : h)
                if (!(s.grid == grid)) throw domain_error("boundary data grid does not match the time grid");
        }
    }
};

struct SolveOptions {
    std::vector<int> schedule;  // empty: concentration_schedule(domain)
    double cauchy_tol = 1e-3;
    bool require_convergence = true;
};

struct ConcentrationInfo {
    std::vector<int> schedule;
    std::vector<double> cauchy;  // relative space-time weighted-L1 distance of successive iterates
    int j_used = 0;
    bool converged = false;
};

struct SolveMetadata {
    DerivativeKind kind;
    double alpha;
    std::size_t n_modes;
    std::size_t n_nodes;
    int n_steps;
    double dt;
    std::string quadrature = "product-trapezoid";
    std::optional<ConcentrationInfo> concentration;
};

struct Solution {
    std::shared_ptr<const SpectralDomain> domain;
    DerivativeKind kind;
    double alpha;
    TimeGrid grid;
    // u_k(t) = a_k K_k(t) + r_k(t), K = E_a(-lambda t^a) (Caputo) or P_a (R-L)
    std::vector<double> initial_amplitudes;
    std::vector<std::vector<double>> regular;  // [mode][time node]
    FieldSeries field;
    SolveMetadata meta;

    double kernel(std::size_t k, int n) const {
        double lam = domain->eigenvalues[k];
        double t = grid.t(n);
        if (kind == DerivativeKind::caputo)
            return n == 0 ? 1.0 : ml(alpha, 1.0, -lam * std::pow(t, alpha));
        if (n == 0) return std::numeric_limits<double>::quiet_NaN();
        return p_alpha_scalar(alpha, t, lam);
    }

    double coefficient(std::size_t k, int n) const {
        double a = initial_amplitudes[k];
        return (a != 0.0 ? a * kernel(k, n) : 0.0) + regular[k][n];
    }

    TimeSeries spectral_coeff(std::size_t k) const {
        std::vector<double> v(grid.size());
        for (int n = 0; n <= grid.n_steps; ++n) v[n] = coefficient(k, n);
        bool singular = kind == DerivativeKind::riemann_liouville && initial_amplitudes[k] != 0.0;
        return TimeSeries(grid, std::move(v), singular ? alpha - 1.0 : 0.0);
    }

    // add a field perturbation (projected onto the modes); used by uniqueness checks
    void perturb(const FieldSeries& eta) {
        for (int n = 0; n <= grid.n_steps; ++n) {
            auto c = domain->coefficients(eta[n]);
            for (std::size_t k = 0; k < c.size(); ++k) regular[k][n] += c[k];
            field[n] += domain->synthesize(c);
        }
    }
};

inline GridFunction s_alpha_apply(const SpectralDomain& d, FractionalOrder alpha, double t,
                                  const GridFunction& v) {
    if (!(t >= 0.0)) throw domain_error("S_alpha needs t >= 0");
    if (t == 0.0) return v;
    auto c = d.coefficients(v);
    double ta = std::pow(t, alpha.value());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= ml(alpha, 1.0, -d.eigenvalues[k] * ta);
    return d.synthesize(c);
}

inline GridFunction p_alpha_apply(const SpectralDomain& d, FractionalOrder alpha, double t,
                                  const GridFunction& v) {
    if (t == 0.0) throw singularity_error("P_alpha(t) is singular at t = 0");
    if (!(t > 0.0)) throw domain_error("P_alpha needs t > 0");
    auto c = d.coefficients(v);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= p_alpha_scalar(alpha, t, d.eigenvalues[k]);
    return d.synthesize(c);
}

namespace detail {

// modal coefficients of a field series: [mode][time]
inline std::vector<std::vector<double>> modal_series(const SpectralDomain& d, const FieldSeries& f) {
    std::vector<std::vector<double>> out(d.n_modes(), std::vector<double>(f.size()));
    for (std::size_t n = 0; n < f.size(); ++n) {
        auto c = d.coefficients(f[n]);
        for (std::size_t k = 0; k < c.size(); ++k) out[k][n] = c[k];
    }
    return out;
}

inline FieldSeries synthesize_series(const SpectralDomain& d, const std::vector<std::vector<double>>& c,
                                     TimeGrid grid) {
    FieldSeries out(grid, GridFunction(d.n_nodes()));
    std::vector<double> ck(d.n_modes());
    for (int n = 0; n <= grid.n_steps; ++n) {
        for (std::size_t k = 0; k < d.n_modes(); ++k) ck[k] = c[k][n];
        out[n] = d.synthesize(ck);
    }
    return out;
}

// space-time weighted L1 (trapezoid in time)
inline double spacetime_weighted_l1(const SpectralDomain& d, const FieldSeries& u) {
    double total = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n) {
        double w = (n == 0 || n + 1 == u.size()) ? 0.5 : 1.0;
        double v = d.weighted_l1(u[n]);
        if (std::isfinite(v)) total += w * v * u.grid.dt;
    }
    return total;
}

}  // namespace detail

// per-mode kernel weights reused across solves and residual evaluations
struct ModalKernels {
    TimeGrid grid;
    double alpha;
    std::vector<ProductWeights> p;  // P_a(.; lambda_k)
    std::vector<ProductWeights> e;  // E_a(-lambda_k t^a)
    ProductWeights rl;              // I^{1-a}

    ModalKernels(const SpectralDomain& d, double a, TimeGrid g, bool with_e = true)
        : grid(g), alpha(a), rl(rl_kernel(1.0 - a), g) {
        p.reserve(d.n_modes());
        for (double lam : d.eigenvalues) p.emplace_back(p_kernel(a, lam), g);
        if (with_e) {
            e.reserve(d.n_modes());
            for (double lam : d.eigenvalues) e.emplace_back(e_kernel(a, lam), g);
        }
    }
};

inline Solution solve(const ProblemSpec& p, TimeGrid grid, const SolveOptions& opt = {},
                      const ModalKernels* kernels = nullptr) {
    p.validate(grid);
    const SpectralDomain& d = *p.domain;
    double a = p.alpha.value();
    std::size_t nm = d.n_modes();
    std::optional<ModalKernels> own;
    if (!kernels) {
        own.emplace(d, a, grid, false);
        kernels = &*own;
    }

    Solution sol{p.domain, p.kind, a, grid, d.coefficients(p.u0),
                 std::vector<std::vector<double>>(nm, std::vector<double>(grid.size(), 0.0)),
                 FieldSeries(grid, GridFunction(d.n_nodes())),
                 SolveMetadata{p.kind, a, nm, d.n_nodes(), grid.n_steps, grid.dt, "product-trapezoid", {}}};

    if (p.f) {
        auto fk = detail::modal_series(d, *p.f);
        for (std::size_t k = 0; k < nm; ++k) {
            auto conv = kernels->p[k].apply(fk[k], p.f->interp);
            for (int n = 0; n <= grid.n_steps; ++n) sol.regular[k][n] += conv[n];
        }
    }

    if (p.has_boundary_data()) {
        std::vector<int> js = opt.schedule.empty() ? concentration_schedule(d) : opt.schedule;
        if (js.empty()) throw resolution_error("no admissible concentration index for this grid");
        std::size_t ns = d.boundary_sites.size();
        // g[site][k] = P_k * h_site, computed once for all j
        std::vector<std::vector<std::vector<double>>> g(ns, std::vector<std::vector<double>>(nm));
        for (std::size_t site = 0; site < ns; ++site)
            for (std::size_t k = 0; k < nm; ++k) g[site][k] = kernels->p[k].apply(p.h[site].values, p.h[site].interp);

        ConcentrationInfo info;
        std::vector<std::vector<double>> best, prev_coeffs;
        FieldSeries prev_field(grid, GridFunction(d.n_nodes()));
        FieldSeries last_field = prev_field;
        for (std::size_t idx = 0; idx < js.size(); ++idx) {
            int j = js[idx];
            std::vector<std::vector<double>> c(nm, std::vector<double>(grid.size(), 0.0));
            for (std::size_t site = 0; site < ns; ++site) {
                auto b = d.coefficients(concentration_profile(d, site, j));
                for (std::size_t k = 0; k < nm; ++k)
                    for (int n = 0; n <= grid.n_steps; ++n) c[k][n] += b[k] * g[site][k][n];
            }
            FieldSeries field = detail::synthesize_series(d, c, grid);
            info.schedule.push_back(j);
            if (idx > 0) {
                FieldSeries diff = field;
                for (std::size_t n = 0; n < diff.size(); ++n) diff[n] = field[n] - last_field[n];
                double scale = detail::spacetime_weighted_l1(d, field);
                info.cauchy.push_back(detail::spacetime_weighted_l1(d, diff) / std::max(scale, 1e-300));
            }
            prev_field = std::move(last_field);
            last_field = std::move(field);
            best = std::move(c);
            info.j_used = j;
        }
        info.converged = !info.cauchy.empty() && info.cauchy.back() < opt.cauchy_tol;
        if (!info.converged && opt.require_convergence)
            throw concentration_error("boundary concentration did not settle",
                                      info.cauchy.empty() ? INFINITY : info.cauchy.back(),
                                      last_field.values.back().values, prev_field.values.back().values);
        for (std::size_t k = 0; k < nm; ++k)
            for (int n = 0; n <= grid.n_steps; ++n) sol.regular[k][n] += best[k][n];
        sol.meta.concentration = info;
    }

    std::vector<double> ck(nm);
    for (int n = 0; n <= grid.n_steps; ++n) {
        for (std::size_t k = 0; k < nm; ++k) ck[k] = sol.coefficient(k, n);
        if (n == 0 && p.kind == DerivativeKind::riemann_liouville) {
            bool singular = false;
            for (double a0 : sol.initial_amplitudes) singular = singular || a0 != 0.0;
            if (singular) {
                sol.field[0] = GridFunction(d.n_nodes(), std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            for (std::size_t k = 0; k < nm; ++k) ck[k] = sol.regular[k][0];
        }
        sol.field[n] = d.synthesize(ck);
    }
    return sol;
}

namespace detail {

// int_0^T r(t) q(T - t) dt with r piecewise linear and q read with its own interpolation
inline double reversed_product_integral(const std::vector<double>& r, const std::vector<double>& q,
                                        double dt, Interpolation q_interp,
                                        Interpolation r_interp = Interpolation::linear) {
    std::size_t N = r.size() - 1;
    quad::NeumaierSum sum;
    for (std::size_t m = 0; m < N; ++m) {
        // on [t_m, t_{m+1}], T - t runs over [t_{N-m-1}, t_{N-m}]
        double r0 = r[m], r1 = r_interp == Interpolation::linear ? r[m + 1] : r[m];
        double q0, q1;
        if (q_interp == Interpolation::linear) {
            q0 = q[N - m];
            q1 = q[N - m - 1];
        } else {
            q0 = q1 = q[N - m - 1];
        }
        sum.add(dt / 6.0 * (2.0 * r0 * q0 + r0 * q1 + r1 * q0 + 2.0 * r1 * q1));
    }
    return sum.value();
}

}  // namespace detail

struct WeakDualReport {
    double residual;
    double lhs;
    double rhs;
};

// phi/delta^gamma must stay bounded: reject test functions whose ratio blows up at a site
inline void check_test_weight(const SpectralDomain& d, const FieldSeries& phi) {
    for (const auto& g : phi.values) {
        double scale = 0.0;
        for (std::size_t i = 0; i < d.n_nodes(); ++i) {
            if (!std::isfinite(g[i])) throw domain_error("test function is not finite");
            scale = std::max(scale, std::abs(g[i]) / d.delta_gamma[i]);
        }
        for (std::size_t site = 0; site < d.boundary_nodes.size(); ++site) {
            const auto& nodes = d.boundary_nodes[site];
            if (nodes.size() < 4) continue;
            double r1 = std::abs(g[nodes[0]]) / d.delta_gamma[nodes[0]];
            double r4 = std::abs(g[nodes[3]]) / d.delta_gamma[nodes[3]];
            if (r1 <= 1e-8 * scale) continue;
            double slope = std::log(r1 / std::max(r4, 1e-300)) /
                           std::log(d.delta[nodes[0]] / d.delta[nodes[3]]);
            if (slope < -0.2)
                throw domain_error("test function is not bounded by delta^gamma near site " +
                                   d.boundary_sites[site].name);
        }
    }
}

inline WeakDualReport weak_dual_report(const Solution& u, const ProblemSpec& p, const FieldSeries& phi,
                                       const ModalKernels* kernels = nullptr) {
    const SpectralDomain& d = *p.domain;
    const TimeGrid& grid = u.grid;
    if (!(phi.grid == grid)) throw domain_error("test function grid does not match the solution");
    check_test_weight(d, phi);
    std::optional<ModalKernels> own;
    if (!kernels) {
        own.emplace(d, u.alpha, grid, true);
        kernels = &*own;
    }
    if (kernels->e.empty()) throw domain_error("weak-dual evaluation needs E-kernel weights");
    std::size_t nm = d.n_modes();
    int N = grid.n_steps;
    auto phik = detail::modal_series(d, phi);
    auto a0 = d.coefficients(p.u0);
    std::vector<std::vector<double>> fk;
    if (p.f) fk = detail::modal_series(d, *p.f);

    quad::NeumaierSum lhs, rhs;
    std::vector<std::vector<double>> psi(nm);
    for (std::size_t k = 0; k < nm; ++k) {
        bool active = false;
        for (double v : phik[k]) active = active || v != 0.0;
        psi[k].assign(grid.size(), 0.0);
        if (!active) continue;
        // H[0, phi, 0] coefficient
        psi[k] = kernels->p[k].apply(phik[k], phi.interp);

        // left side: initial part against its closed-form kernel, remainder by product rule
        double ak = u.initial_amplitudes[k];
        if (ak != 0.0) {
            const auto& w = u.kind == DerivativeKind::caputo ? kernels->e[k] : kernels->p[k];
            lhs.add(ak * w.at(N, [&](int m) { return phik[k][m]; }, phi.interp));
        }
        lhs.add(detail::reversed_product_integral(u.regular[k], phik[k], grid.dt, phi.interp));

        // right side
        if (a0[k] != 0.0) {
            if (p.kind == DerivativeKind::caputo)
                rhs.add(a0[k] * kernels->rl.at(N, [&](int m) { return psi[k][m]; }, Interpolation::linear));
            else
                rhs.add(a0[k] * psi[k][N]);
        }
        if (p.f)
            rhs.add(detail::reversed_product_integral(fk[k], psi[k], grid.dt, Interpolation::linear,
                                                      p.f->interp));
    }
    if (p.has_boundary_data()) {
        auto H = detail::synthesize_series(d, psi, grid);
        for (std::size_t site = 0; site < d.boundary_sites.size(); ++site) {
            std::vector<double> dh(grid.size(), 0.0);
            for (int n = 1; n <= N; ++n) dh[n] = boundary_limit_estimate(d, site, H[n]).value;
            rhs.add(detail::reversed_product_integral(p.h[site].values, dh, grid.dt, Interpolation::linear,
                                                      p.h[site].interp));
        }
    }
    return {std::abs(lhs.value() - rhs.value()), lhs.value(), rhs.value()};
}

inline double weak_dual_residual(const Solution& u, const ProblemSpec& p, const FieldSeries& phi,
                                 const ModalKernels* kernels = nullptr) {
    return weak_dual_report(u, p, phi, kernels).residual;
}

// test battery chi_{I_b}(t) chi_{K_a}(x) on interior cells {delta >= delta_min}
struct UniquenessReport {
    double indicator;                // sum of |residual| over the battery
    std::vector<double> residuals;   // signed lhs - rhs per test function
    std::size_t n_tests;
};

inline UniquenessReport uniqueness_indicator(const Solution& u, const ProblemSpec& p, int space_cells,
                                             int time_cells, double delta_min,
                                             const ModalKernels* kernels = nullptr) {
    const SpectralDomain& d = *p.domain;
    const TimeGrid& grid = u.grid;
    if (space_cells < 1 || time_cells < 1) throw domain_error("battery needs at least one cell");
    std::optional<ModalKernels> own;
    if (!kernels) {
        own.emplace(d, u.alpha, grid, true);
        kernels = &*own;
    }
    double lo = d.left + delta_min, hi = d.right - delta_min;
    if (!(hi > lo)) throw domain_error("delta_min leaves no interior");
    UniquenessReport rep{0.0, {}, 0};
    for (int a = 0; a < space_cells; ++a) {
        double x0 = lo + (hi - lo) * a / space_cells, x1 = lo + (hi - lo) * (a + 1) / space_cells;
        GridFunction chi(d.n_nodes());
        for (std::size_t i = 0; i < d.n_nodes(); ++i)
            if (d.coords[i] >= x0 && d.coords[i] < x1) chi[i] = 1.0;
        for (int b = 0; b < time_cells; ++b) {
            int n0 = grid.n_steps * b / time_cells, n1 = grid.n_steps * (b + 1) / time_cells;
            FieldSeries phi(grid, GridFunction(d.n_nodes()));
            phi.interp = Interpolation::piecewise_constant;
            for (int n = n0; n < n1; ++n) phi[n] = chi;
            auto r = weak_dual_report(u, p, phi, kernels);
            rep.residuals.push_back(r.lhs - r.rhs);
            rep.indicator += std::abs(r.lhs - r.rhs);
            ++rep.n_tests;
        }
    }
    return rep;
}

// coefficient of H[0, chi_{[t0,t1]} phi_1, 0](t) on phi_1
inline double compactness_modulus(FractionalOrder alpha, double lambda1, double t0, double t1, double t) {
    if (!(t0 >= 0.0 && t1 > t0)) throw domain_error("need 0 <= t0 < t1");
    double a = alpha.value();
    double s1 = std::max(t - t1, 0.0), s0 = std::max(t - t0, 0.0);
    if (lambda1 == 0.0)
        return (std::pow(s0, a) - std::pow(s1, a)) / gamma_fn(1.0 + a);
    auto E = [&](double s) { return s == 0.0 ? 1.0 : ml(a, 1.0, -lambda1 * std::pow(s, a)); };
    return (E(s1) - E(s0)) / lambda1;
}

// omega_T(h) times the phi_1 ~ delta^gamma comparison constant k2/k1
struct CompactnessBound {
    double omega;
    double k1, k2;
    double factor() const { return omega * k2 / k1; }
};

inline CompactnessBound compactness_bound(const SpectralDomain& d, FractionalOrder alpha, double horizon,
                                          double h) {
    double a = alpha.value();
    double lam = d.eigenvalues[0];
    double m = (1.0 - ml(a, 1.0, -lam * std::pow(h, a))) / lam;
    double omega = m * std::max(1.0, std::pow(horizon, 1.0 - a) / gamma_fn(2.0 - a));
    auto phi = d.mode(0);
    double k1 = INFINITY, k2 = 0.0;
    for (std::size_t i = 0; i < d.n_nodes(); ++i) {
        double r = std::abs(phi[i]) / d.delta_gamma[i];
        k1 = std::min(k1, r);
        k2 = std::max(k2, r);
    }
    return {omega, k1, k2};
}

// f_j(t, x) = sum over sites of h(t, site) c_j^site(x)
inline FieldSeries concentrate_h(const SpectralDomain& d, const std::vector<TimeSeries>& h, int j) {
    if (h.size() != d.boundary_sites.size()) throw domain_error("need one series per boundary site");
    const TimeGrid& grid = h.front().grid;
    FieldSeries out(grid, GridFunction(d.n_nodes()));
    out.interp = h.front().interp;
    for (std::size_t site = 0; site < h.size(); ++site) {
        auto c = concentration_profile(d, site, j);
        for (int n = 0; n <= grid.n_steps; ++n)
            if (h[site][n] != 0.0) out[n] += h[site][n] * c;
    }
    return out;
}

// G[f_j] for h = 1 on every site at one concentration index
inline GridFunction u_star_at(const SpectralDomain& d, int j) {
    GridFunction f(d.n_nodes());
    for (std::size_t site = 0; site < d.boundary_sites.size(); ++site) f += concentration_profile(d, site, j);
    return green_apply(d, f);
}

struct BoundaryRatio {
    double ratio;
    double spread;        // relative disagreement of the 3- and 4-node extrapolants
    bool low_confidence;  // spread above 20%
};

inline BoundaryRatio boundary_ratio(const Solution& u, const SpectralDomain& d, int time_index,
                                    std::size_t site, const GridFunction& ustar) {
    if (time_index <= 0 || time_index > u.grid.n_steps) throw domain_error("boundary ratio needs t > 0");
    const auto& nodes = d.boundary_nodes.at(site);
    if (nodes.size() < 4) throw resolution_error("fewer than four nodes near the boundary site");
    const GridFunction& g = u.field[time_index];
    std::vector<double> x(4), y(4);
    for (int i = 0; i < 4; ++i) {
        x[i] = d.delta[nodes[i]];
        y[i] = g[nodes[i]] / ustar[nodes[i]];
    }
    auto e = detail::extrapolate_four(x, y);
    double rel = e.spread / std::max(std::abs(e.value), 1e-3);
    return {e.value, rel, rel > 0.2};
}

// int_0^T sum_site D_gamma P_a(s, x, site) ds per node; -> u* as T -> infinity
inline GridFunction upsilon_integral(const SpectralDomain& d, FractionalOrder alpha, double T) {
    double a = alpha.value();
    std::vector<double> c(d.n_modes());
    for (std::size_t k = 0; k < d.n_modes(); ++k) {
        double lam = d.eigenvalues[k];
        double ta = std::pow(T, a);
        double m0 = ta * ml(a, a + 1.0, -lam * ta);
        double dsum = 0.0;
        for (std::size_t site = 0; site < d.boundary_sites.size(); ++site)
            dsum += mode_boundary_derivative(d, k, site);
        c[k] = m0 * dsum;
    }
    return d.synthesize(c);
}

}  // namespace fractodiff
