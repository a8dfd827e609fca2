#pragma once

#include "errors.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace fractodiff {

struct TimeGrid {
    double dt;
    int n_steps;

    TimeGrid(double dt_, int n) : dt(dt_), n_steps(n) {
        if (!(dt_ > 0.0)) throw domain_error("time step must be positive");
        if (n < 1) throw domain_error("time grid needs at least one step");
    }
    static TimeGrid over(double horizon, int n) {
        if (!(horizon > 0.0)) throw domain_error("horizon must be positive");
        return TimeGrid(horizon / n, n);
    }
    double t(int k) const { return k * dt; }
    double horizon() const { return n_steps * dt; }
    std::size_t size() const { return static_cast<std::size_t>(n_steps) + 1; }
    bool operator==(const TimeGrid& o) const { return dt == o.dt && n_steps == o.n_steps; }
};

// how a series is read between nodes
enum class Interpolation { linear, piecewise_constant };

template <class T>
struct BasicTimeSeries {
    TimeGrid grid;
    std::vector<T> values;
    // values behave like t^p near 0 (0 means regular)
    double singular_power = 0.0;
    Interpolation interp = Interpolation::linear;

    BasicTimeSeries(TimeGrid g, std::vector<T> v, double p = 0.0,
                    Interpolation i = Interpolation::linear)
        : grid(g), values(std::move(v)), singular_power(p), interp(i) {
        if (values.size() != grid.size())
            throw domain_error("time series length " + std::to_string(values.size()) +
                               " does not match grid size " + std::to_string(grid.size()));
    }
    explicit BasicTimeSeries(TimeGrid g, T fill = T{}) : grid(g), values(g.size(), fill) {}

    std::size_t size() const { return values.size(); }
    T& operator[](std::size_t k) { return values[k]; }
    const T& operator[](std::size_t k) const { return values[k]; }
};

using TimeSeries = BasicTimeSeries<double>;

template <class F>
TimeSeries sample(TimeGrid grid, F&& fn, Interpolation interp = Interpolation::linear) {
    std::vector<double> v(grid.size());
    for (int k = 0; k <= grid.n_steps; ++k) v[k] = fn(grid.t(k));
    return TimeSeries(grid, std::move(v), 0.0, interp);
}

// primitive moments of a convolution kernel K:
// m0(s) = int_0^s K, m1(s) = int_0^s m0
struct KernelMoments {
    std::function<double(double)> m0;
    std::function<double(double)> m1;
};

// (t-s)^{b-1}/Gamma(b)
inline KernelMoments rl_kernel(double beta) {
    double g1 = std::exp(-log_gamma(beta + 1.0)), g2 = std::exp(-log_gamma(beta + 2.0));
    return {[=](double s) { return std::pow(s, beta) * g1; },
            [=](double s) { return std::pow(s, beta + 1.0) * g2; }};
}

// P_a(s; lambda) = s^{a-1} E_{a,a}(-lambda s^a)
inline KernelMoments p_kernel(double alpha, double lambda) {
    auto e1 = ml_evaluator(alpha, alpha + 1.0), e2 = ml_evaluator(alpha, alpha + 2.0);
    auto check = [](const EvalResult& r) {
        if (!(r.est_abs_error <= ml_tolerance(r.value)))
            throw accuracy_error("kernel moment tolerance unreachable", r.value, r.est_abs_error);
        return r.value;
    };
    return {[=](double s) {
                double sa = std::pow(s, alpha);
                return sa * check(e1->evaluate(-lambda * sa));
            },
            [=](double s) {
                double sa = std::pow(s, alpha);
                return s * sa * check(e2->evaluate(-lambda * sa));
            }};
}

// E_a(-lambda s^a)
inline KernelMoments e_kernel(double alpha, double lambda) {
    auto e1 = ml_evaluator(alpha, 2.0), e2 = ml_evaluator(alpha, 3.0);
    auto check = [](const EvalResult& r) {
        if (!(r.est_abs_error <= ml_tolerance(r.value)))
            throw accuracy_error("kernel moment tolerance unreachable", r.value, r.est_abs_error);
        return r.value;
    };
    return {[=](double s) { return s * check(e1->evaluate(-lambda * std::pow(s, alpha))); },
            [=](double s) { return s * s * check(e2->evaluate(-lambda * std::pow(s, alpha))); }};
}

// Product-integration weights on a uniform grid, exact for piecewise linear
// (or piecewise constant) data:
//   u_n = sum_{j<n} lag[j] g_{n-j} + tail[n] g_0
struct ProductWeights {
    TimeGrid grid;
    std::vector<double> lag;      // j = 0..N-1
    std::vector<double> tail;     // n = 0..N
    std::vector<double> cell;     // piecewise constant: m0(s_{q+1}) - m0(s_q)

    ProductWeights(const KernelMoments& k, TimeGrid g) : grid(g) {
        int n = g.n_steps;
        double dt = g.dt;
        std::vector<double> m0(n + 1), m1(n + 1);
        m0[0] = 0.0;
        m1[0] = 0.0;
        for (int j = 1; j <= n; ++j) {
            m0[j] = k.m0(j * dt);
            m1[j] = k.m1(j * dt);
        }
        lag.resize(n);
        tail.assign(n + 1, 0.0);
        cell.resize(n);
        lag[0] = m1[1] / dt;
        for (int j = 1; j < n; ++j) lag[j] = (m1[j + 1] - 2.0 * m1[j] + m1[j - 1]) / dt;
        for (int j = 1; j <= n; ++j) tail[j] = m0[j] - (m1[j] - m1[j - 1]) / dt;
        for (int q = 0; q < n; ++q) cell[q] = m0[q + 1] - m0[q];
    }

    // convolution at node n (n >= 1) of node values g
    template <class Get>
    double at(int n, Get&& g, Interpolation interp) const {
        quad::NeumaierSum sum;
        if (interp == Interpolation::linear) {
            for (int j = 0; j < n; ++j) sum.add(lag[j] * g(n - j));
            sum.add(tail[n] * g(0));
        } else {
            for (int q = 0; q < n; ++q) sum.add(cell[q] * g(n - 1 - q));
        }
        return sum.value();
    }

    std::vector<double> apply(const std::vector<double>& g, Interpolation interp) const {
        std::vector<double> out(g.size(), 0.0);
        auto get = [&](int i) { return g[i]; };
        for (int n = 1; n <= grid.n_steps; ++n) out[n] = at(n, get, interp);
        return out;
    }
};

namespace detail {

// int_a^b (t - tau)^{beta-1} tau^q dtau, 0 <= a < b <= t
inline double singular_cell(double t, double a, double b, double beta, double q) {
    double xa = a / t, xb = std::min(b / t, 1.0);
    double ib = boost::math::beta(q + 1.0, beta, xb);
    double ia = xa > 0.0 ? boost::math::beta(q + 1.0, beta, xa) : 0.0;
    return std::pow(t, beta + q) * (ib - ia);
}

}  // namespace detail

// I^beta w on the grid. For series flagged t^p at the origin the first cells
// integrate tau^p times a linear fit of tau^{-p} w exactly.
inline TimeSeries rl_integral(const TimeSeries& w, double beta) {
    if (!(beta > 0.0)) throw domain_error("fractional integral order must be positive");
    const TimeGrid& g = w.grid;
    int n_all = g.n_steps;
    double p = w.singular_power;
    ProductWeights pw(rl_kernel(beta), g);
    std::vector<double> out(g.size(), 0.0);

    if (p == 0.0) {
        out = pw.apply(w.values, w.interp);
        return TimeSeries(g, std::move(out));
    }
    if (!(p > -1.0)) throw domain_error("singular power must exceed -1 for integrability");

    const int K = std::min(n_all, 16);
    double rg = std::exp(-log_gamma(beta));
    auto reg = [&](int m) { return w.values[m] * std::pow(g.t(m), -p); };
    for (int n = 1; n <= n_all; ++n) {
        double t = g.t(n);
        int cells = std::min(n, K);
        quad::NeumaierSum sum;
        for (int m = 0; m < cells; ++m) {
            double a = g.t(m), b = g.t(m + 1);
            if (m == 0) {
                sum.add(reg(1) * detail::singular_cell(t, a, b, beta, p));
                continue;
            }
            // linear in tau between reg(m) and reg(m+1): reg = c0 + c1 tau
            double c1 = (reg(m + 1) - reg(m)) / g.dt;
            double c0 = reg(m) - c1 * a;
            sum.add(c0 * detail::singular_cell(t, a, b, beta, p));
            sum.add(c1 * detail::singular_cell(t, a, b, beta, p + 1.0));
        }
        double v = sum.value() * rg;
        if (n > K) {
            // remaining cells [t_K, t_n]: plain product trapezoid over n-K lags
            int len = n - K;
            quad::NeumaierSum rest;
            for (int j = 0; j < len; ++j) rest.add(pw.lag[j] * w.values[n - j]);
            rest.add(pw.tail[len] * w.values[K]);
            v += rest.value();
        }
        out[n] = v;
    }
    out[0] = (p + beta > 0.0) ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    return TimeSeries(g, std::move(out), std::min(0.0, p + beta));
}

// L1 scheme
inline TimeSeries caputo_derivative(const TimeSeries& u, FractionalOrder alpha) {
    const TimeGrid& g = u.grid;
    double a = alpha.value();
    double c = std::pow(g.dt, -a) / std::exp(log_gamma(2.0 - a));
    std::vector<double> b(g.size());
    for (int k = 0; k <= g.n_steps; ++k) b[k] = std::pow(k + 1.0, 1.0 - a) - std::pow(k, 1.0 - a);
    std::vector<double> out(g.size(), 0.0);
    for (int n = 1; n <= g.n_steps; ++n) {
        quad::NeumaierSum sum;
        for (int k = 0; k < n; ++k) sum.add(b[k] * (u.values[n - k] - u.values[n - k - 1]));
        out[n] = c * sum.value();
    }
    return TimeSeries(g, std::move(out));
}

// derivative of the discrete I^{1-a}; second-order differences, node 0 undefined
inline TimeSeries rl_derivative(const TimeSeries& u, FractionalOrder alpha) {
    const TimeGrid& g = u.grid;
    if (g.n_steps < 3) throw domain_error("R-L derivative needs at least three steps");
    TimeSeries j = rl_integral(u, 1.0 - alpha.value());
    int n = g.n_steps;
    double h = g.dt;
    std::vector<double> out(g.size());
    out[0] = std::numeric_limits<double>::quiet_NaN();
    out[1] = (-3.0 * j[1] + 4.0 * j[2] - j[3]) / (2.0 * h);
    for (int k = 2; k < n; ++k) out[k] = (j[k + 1] - j[k - 1]) / (2.0 * h);
    out[n] = (3.0 * j[n] - 4.0 * j[n - 1] + j[n - 2]) / (2.0 * h);
    return TimeSeries(g, std::move(out), alpha.value() - 1.0);
}

namespace detail {

// Neville extrapolation of (x_i, y_i) to x = 0
inline double neville_at_zero(std::vector<double> x, std::vector<double> y) {
    std::size_t n = x.size();
    for (std::size_t m = 1; m < n; ++m)
        for (std::size_t i = 0; i + m < n; ++i)
            y[i] = (x[i + m] * y[i] - x[i] * y[i + 1]) / (x[i + m] - x[i]);
    return y[0];
}

}  // namespace detail

// lim_{h->0+} I^{1-a} u(h). At node n the singular monomial c t^{a-1} fitted to
// u_n has I^{1-a} equal to Gamma(a) t_n^{1-a} u_n; these are extrapolated in t^a.
inline double rl_frac_integral_at_zero(const TimeSeries& u, FractionalOrder alpha,
                                       double tol = 1e-3) {
    if (u.grid.n_steps < 4) throw domain_error("need at least four steps to extrapolate");
    double a = alpha.value();
    double ga = std::exp(log_gamma(a));
    std::vector<double> x(4), y(4);
    for (int n = 1; n <= 4; ++n) {
        double t = u.grid.t(n);
        x[n - 1] = std::pow(t, a);
        y[n - 1] = ga * std::pow(t, 1.0 - a) * u.values[n];
    }
    double v4 = detail::neville_at_zero(x, y);
    double v3 = detail::neville_at_zero({x[0], x[1], x[2]}, {y[0], y[1], y[2]});
    if (!std::isfinite(v4) || std::abs(v4 - v3) > tol * std::max(1.0, std::abs(v4)))
        throw accuracy_error("initial-trace extrapolation does not settle", v4, std::abs(v4 - v3));
    return v4;
}

// I^beta w(t) pointwise; tau = t - t y^{1/beta} removes the kernel singularity
template <class F>
double rl_integral_at(F&& w, double beta, double t) {
    if (!(beta > 0.0)) throw domain_error("fractional integral order must be positive");
    if (t <= 0.0) return 0.0;
    auto r = quad::kronrod([&](double y) { return w(t * (1.0 - std::pow(y, 1.0 / beta))); }, 0.0,
                           1.0, 1e-13);
    return std::pow(t, beta) / std::exp(log_gamma(beta + 1.0)) * r.value;
}

// int_0^inf fn(t) e^{-st} dt
template <class F>
double laplace_numeric(F&& fn, double s) {
    if (!(s > 0.0)) throw domain_error("Laplace variable must be positive");
    auto integrand = [&](double t) { return fn(t) * std::exp(-s * t); };
    double total = quad::tanh_sinh(integrand, 0.0, 1.0, 1e-14).value;
    double a = 1.0, prev_peak = INFINITY;
    int growing = 0;
    for (int panel = 0; panel < 200; ++panel) {
        double b = 2.0 * a;
        double peak = 0.0;
        for (int i = 0; i <= 8; ++i) {
            double t = a + (b - a) * i / 8.0;
            peak = std::max(peak, std::abs(fn(t)));
        }
        double part = quad::kronrod(integrand, a, b, 1e-13).value;
        total += part;
        double bound = std::exp(-s * b) * peak;
        if (!std::isfinite(part) || !std::isfinite(bound))
            throw divergence_error("Laplace integrand is not finite");
        if (bound < 1e-14 * std::max(1.0, std::abs(total))) return total;
        growing = (peak * std::exp(-s * a) >= prev_peak) ? growing + 1 : 0;
        if (growing >= 4) throw divergence_error("Laplace integrand does not decay");
        prev_peak = peak * std::exp(-s * a);
        a = b;
        if (a > 1e7) break;
    }
    throw divergence_error("Laplace integrand does not decay within the search range");
}

// implicit L1 time stepping of D^C u + lambda u = f, u(0) = u0
template <class F>
TimeSeries l1_solve_caputo(FractionalOrder alpha, double lambda, double u0, F&& f, TimeGrid g) {
    double a = alpha.value();
    double c = std::pow(g.dt, -a) / std::exp(log_gamma(2.0 - a));
    std::vector<double> b(g.size());
    for (int k = 0; k <= g.n_steps; ++k) b[k] = std::pow(k + 1.0, 1.0 - a) - std::pow(k, 1.0 - a);
    std::vector<double> u(g.size());
    u[0] = u0;
    for (int n = 1; n <= g.n_steps; ++n) {
        quad::NeumaierSum hist;
        for (int k = 1; k < n; ++k) hist.add(b[k] * (u[n - k] - u[n - k - 1]));
        u[n] = (f(g.t(n)) + c * (b[0] * u[n - 1] - hist.value())) / (c * b[0] + lambda);
    }
    return TimeSeries(g, std::move(u));
}

}  // namespace fractodiff
