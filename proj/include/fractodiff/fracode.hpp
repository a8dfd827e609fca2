#pragma once

#include "fraccalc.hpp"

#include <functional>
#include <limits>

namespace fractodiff {

enum class DerivativeKind { caputo, riemann_liouville };

inline const char* to_string(DerivativeKind k) {
    return k == DerivativeKind::caputo ? "caputo" : "riemann-liouville";
}

struct OdeProblem {
    DerivativeKind kind;
    FractionalOrder alpha;
    double lambda = 0.0;
    double initial = 0.0;               // u0, or v0 = lim I^{1-a} v(h)
    std::function<double(double)> forcing;  // empty means zero
    double horizon = 1.0;

    void validate() const {
        if (!(lambda >= 0.0)) throw domain_error("lambda must be non-negative");
        if (!(horizon > 0.0)) throw domain_error("horizon must be positive");
    }
};

namespace detail {

inline std::vector<double> forcing_on_grid(const OdeProblem& p, TimeGrid g) {
    std::vector<double> f(g.size(), 0.0);
    if (p.forcing)
        for (int k = 0; k <= g.n_steps; ++k) f[k] = p.forcing(g.t(k));
    return f;
}

}  // namespace detail

// int_0^{t_n} P_a(t_n - s; lambda) f(s) ds for every node, product trapezoid
inline std::vector<double> p_convolution(double alpha, double lambda, const std::vector<double>& f,
                                         TimeGrid g, Interpolation interp = Interpolation::linear) {
    ProductWeights pw(p_kernel(alpha, lambda), g);
    return pw.apply(f, interp);
}

inline TimeSeries solve_caputo(const OdeProblem& p, TimeGrid g) {
    if (p.kind != DerivativeKind::caputo) throw domain_error("solve_caputo needs a Caputo problem");
    p.validate();
    double a = p.alpha.value();
    auto e = ml_evaluator(a, 1.0);
    auto conv = p_convolution(a, p.lambda, detail::forcing_on_grid(p, g), g);
    std::vector<double> u(g.size());
    u[0] = p.initial;
    for (int n = 1; n <= g.n_steps; ++n)
        u[n] = p.initial * mittag_leffler({a, 1.0}, -p.lambda * std::pow(g.t(n), a)).value + conv[n];
    return TimeSeries(g, std::move(u));
}

// node 0 carries NaN when v0 != 0 (the solution is singular there)
inline TimeSeries solve_riemann(const OdeProblem& p, TimeGrid g) {
    if (p.kind != DerivativeKind::riemann_liouville)
        throw domain_error("solve_riemann needs a Riemann-Liouville problem");
    p.validate();
    double a = p.alpha.value();
    auto conv = p_convolution(a, p.lambda, detail::forcing_on_grid(p, g), g);
    std::vector<double> v(g.size());
    v[0] = p.initial != 0.0 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    for (int n = 1; n <= g.n_steps; ++n)
        v[n] = p.initial * p_alpha_scalar(a, g.t(n), p.lambda) + conv[n];
    return TimeSeries(g, std::move(v), p.initial != 0.0 ? a - 1.0 : 0.0);
}

// pointwise closed forms, used where grid read-outs would add error
inline double caputo_solution_at(double alpha, double lambda, double u0,
                                 const std::function<double(double)>& f, double t) {
    if (t == 0.0) return u0;
    double ta = std::pow(t, alpha);
    double v = u0 * ml(alpha, 1.0, -lambda * ta);
    if (f) {
        // s = t y^{1/a} turns s^{a-1} ds into (t^a / a) dy
        auto e = ml_evaluator(alpha, alpha);
        auto inner = [&](double y) {
            return e->evaluate(-lambda * ta * y).value * f(t - t * std::pow(y, 1.0 / alpha));
        };
        quad::Result r{0.0, 0.0};
        for (double lo : {0.0, 0.125, 0.5}) {
            double hi = lo == 0.0 ? 0.125 : (lo == 0.125 ? 0.5 : 1.0);
            r.value += quad::gauss_legendre(inner, lo, hi);
        }
        v += ta / alpha * r.value;
    }
    return v;
}

inline double riemann_solution_at(double alpha, double lambda, double v0,
                                  const std::function<double(double)>& g, double t) {
    if (t == 0.0) {
        if (v0 != 0.0) throw singularity_error("R-L solution is singular at t = 0");
        return 0.0;
    }
    return v0 * p_alpha_scalar(alpha, t, lambda) + caputo_solution_at(alpha, lambda, 0.0, g, t);
}

struct DualityReport {
    double residual;
    double lhs;
    double rhs;
    bool singular_forcing;  // v0 != 0 makes v(T-t) blow up at t = T
};

// Caputo/R-L integration-by-parts identity, integrated panel by panel over the grid
inline DualityReport duality_residual(FractionalOrder alpha, double lambda, double u0, double v0,
                                      const std::function<double(double)>& f,
                                      const std::function<double(double)>& g, double horizon,
                                      TimeGrid grid) {
    if (std::abs(grid.horizon() - horizon) > 1e-12 * horizon)
        throw domain_error("grid horizon does not match T");
    double a = alpha.value();
    double T = horizon;
    auto fz = [&](double t) { return f ? f(t) : 0.0; };
    auto gz = [&](double t) { return g ? g(t) : 0.0; };
    auto u = [&](double t) { return caputo_solution_at(a, lambda, u0, f, t); };
    auto v = [&](double s) { return riemann_solution_at(a, lambda, v0, g, s); };
    double rg = 1.0 / gamma_fn(1.0 - a);

    // integrand(t, r) with r = T - t supplied accurately near t = T
    auto lhs_fn = [&](double t, double r) {
        double val = v(r) * (-lambda * u(t) + fz(t));
        if (u0 != 0.0) val += u0 * std::pow(t, -a) * rg * v(r);
        return val;
    };
    auto rhs_fn = [&](double t, double r) { return u(t) * (-lambda * v(r) + gz(r)); };

    // end panels are mapped so that t^{-a} and (T-t)^{a-1} become bounded
    auto integrate = [&](auto&& fn) {
        quad::NeumaierSum total;
        int panels = std::max(2, std::min(grid.n_steps, 64));
        double h = T / panels;
        double p0 = 1.0 / (1.0 - a), p1 = 1.0 / a;
        total.add(quad::kronrod(
                      [&](double y) {
                          double t = h * std::pow(y, p0);
                          return fn(t, T - t) * h * p0 * std::pow(y, p0 - 1.0);
                      },
                      0.0, 1.0, 1e-10)
                      .value);
        for (int i = 1; i < panels - 1; ++i)
            total.add(quad::kronrod([&](double t) { return fn(t, T - t); }, i * h, (i + 1) * h, 1e-10)
                          .value);
        total.add(quad::kronrod(
                      [&](double y) {
                          double r = h * std::pow(y, p1);
                          return fn(T - r, r) * h * p1 * std::pow(y, p1 - 1.0);
                      },
                      0.0, 1.0, 1e-10)
                      .value);
        return total.value();
    };

    double lhs = integrate(lhs_fn);
    double rhs = integrate(rhs_fn) + u(T) * v0;
    return {std::abs(lhs - rhs), lhs, rhs, v0 != 0.0};
}

}  // namespace fractodiff
