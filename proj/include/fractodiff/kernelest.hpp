#pragma once

#include "spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace fractodiff {

enum class KernelFamily { whole_space, rfl, cfl, sfl };

inline const char* to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::whole_space: return "whole_space";
        case KernelFamily::rfl: return "rfl";
        case KernelFamily::cfl: return "cfl";
        case KernelFamily::sfl: return "sfl";
    }
    return "?";
}

// t^{-d/2s} ^ t / r^{d+2s}
inline double whole_space_bound(int d, double s, double t, double r) {
    if (d < 1) throw domain_error("dimension must be positive");
    if (!(s > 0.0 && s <= 1.0)) throw domain_error("s must lie in (0, 1]");
    if (!(t > 0.0)) throw domain_error("t must be positive");
    if (!(r >= 0.0)) throw domain_error("r must be non-negative");
    double diag = std::pow(t, -d / (2.0 * s));
    if (r == 0.0) return diag;
    return std::min(diag, t / std::pow(r, d + 2.0 * s));
}

// t^{-d/2s} (1 ^ t^{1/2s}/r)^{d+2s}
inline double whole_space_bound_product(int d, double s, double t, double r) {
    double diag = std::pow(t, -d / (2.0 * s));
    if (r == 0.0) return diag;
    return diag * std::pow(std::min(1.0, std::pow(t, 0.5 / s) / r), d + 2.0 * s);
}

inline double cauchy_kernel(double t, double r) {
    if (!(t > 0.0)) throw domain_error("t must be positive");
    return t / (std::numbers::pi * (r * r + t * t));
}

struct KernelBoundSpec {
    KernelFamily family = KernelFamily::whole_space;
    int d = 1;
    double s = 0.5;

    void validate() const {
        if (d < 1) throw domain_error("dimension must be positive");
        if (!(s > 0.0 && s < 1.0)) throw domain_error("s must lie in (0, 1)");
        if (family == KernelFamily::cfl && !(s > 0.5))
            throw domain_error("censored bound needs s > 1/2");
    }
};

inline double boundary_bound(const KernelBoundSpec& spec, double t, double r, double delta_x,
                             double delta_y) {
    spec.validate();
    double p = whole_space_bound(spec.d, spec.s, t, r);
    double scale = std::pow(t, 0.5 / spec.s);
    auto factor = [&](double delta, double denom, double power) {
        if (std::isinf(delta)) return 1.0;
        return std::pow(std::min(1.0, delta / denom), power);
    };
    switch (spec.family) {
        case KernelFamily::whole_space:
            return p;
        case KernelFamily::rfl:
            return factor(delta_x, scale, spec.s) * factor(delta_y, scale, spec.s) * p;
        case KernelFamily::cfl:
            return factor(delta_x, scale, 2.0 * spec.s - 1.0) * factor(delta_y, scale, 2.0 * spec.s - 1.0) * p;
        case KernelFamily::sfl:
            return factor(delta_x, r + scale, 1.0) * factor(delta_y, r + scale, 1.0) * p;
    }
    return p;
}

struct KernelSample {
    double t, x, y, value;
};

struct SandwichFit {
    double c1, c2;
    double ratio() const { return c2 / c1; }
};

template <class Bound>
SandwichFit sandwich_fit(const std::vector<KernelSample>& samples, Bound&& bound) {
    if (samples.empty()) throw domain_error("no samples to fit");
    SandwichFit fit{INFINITY, 0.0};
    for (const auto& smp : samples) {
        double b = bound(smp.t, smp.x, smp.y);
        if (!(smp.value > 0.0) || !(b > 0.0))
            throw domain_error("sandwich fit needs positive kernel and bound values");
        double q = smp.value / b;
        fit.c1 = std::min(fit.c1, q);
        fit.c2 = std::max(fit.c2, q);
    }
    return fit;
}

// sum_k e^{-lambda_k t} phi_k(x_i) phi_k(x_j)
inline double discrete_heat_kernel(const SpectralDomain& d, double t, std::size_t i, std::size_t j) {
    if (!(t >= 0.0)) throw domain_error("t must be non-negative");
    double sum = 0.0;
    for (std::size_t k = 0; k < d.n_modes(); ++k) {
        auto phi = d.mode(k);
        sum += std::exp(-d.eigenvalues[k] * t) * phi[i] * phi[j];
    }
    return sum;
}

// full matrix of the discrete kernel
inline std::vector<double> discrete_heat_matrix(const SpectralDomain& d, double t) {
    std::size_t n = d.n_nodes();
    std::vector<double> out(n * n, 0.0);
    for (std::size_t k = 0; k < d.n_modes(); ++k) {
        double e = std::exp(-d.eigenvalues[k] * t);
        if (e == 0.0) continue;
        auto phi = d.mode(k);
        for (std::size_t i = 0; i < n; ++i) {
            double a = e * phi[i];
            for (std::size_t j = 0; j < n; ++j) out[i * n + j] += a * phi[j];
        }
    }
    return out;
}

struct SandwichWindow {
    double t_min, t_max;
    int n_times = 8;
    int node_stride = 1;
};

// off-diagonal samples of the discrete kernel on a log-spaced time window
inline std::vector<KernelSample> heat_kernel_samples(const SpectralDomain& d, const SandwichWindow& w) {
    if (!(w.t_min > 0.0 && w.t_max >= w.t_min) || w.n_times < 1 || w.node_stride < 1)
        throw domain_error("invalid sandwich window");
    std::vector<KernelSample> out;
    std::size_t n = d.n_nodes();
    for (int m = 0; m < w.n_times; ++m) {
        double t = w.n_times == 1 ? w.t_min
                                  : w.t_min * std::pow(w.t_max / w.t_min, double(m) / (w.n_times - 1));
        auto K = discrete_heat_matrix(d, t);
        for (std::size_t i = 0; i < n; i += w.node_stride)
            for (std::size_t j = 0; j < n; j += w.node_stride)
                if (i != j) out.push_back({t, d.coords[i], d.coords[j], K[i * n + j]});
    }
    return out;
}

// the fit window starts at t = 10 h^2 for grid spacing h
inline double sandwich_t_min(const SpectralDomain& d) {
    double h = d.coords.size() > 1 ? d.coords[1] - d.coords[0] : 1.0;
    return 10.0 * h * h;
}

}  // namespace fractodiff
