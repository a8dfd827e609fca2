#pragma once

#include "fraccalc.hpp"
#include "specfun.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace fractodiff {

struct IdentityCheck {
    std::string id;
    double measured;   // value of the left side
    double expected;   // closed form
    double error;      // absolute or relative, per `relative`
    double tolerance;
    bool relative;
    bool pass() const { return error <= tolerance; }
};

namespace detail {

inline std::string tag(const char* name, std::initializer_list<std::pair<const char*, double>> params) {
    std::string s = name;
    s += '[';
    bool first = true;
    for (auto [k, v] : params) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "%s%s=%g", first ? "" : ",", k, v);
        s += buf;
        first = false;
    }
    return s + ']';
}

// int_0^R g(t) Phi_a(t) dt over the documented reliable range
template <class G>
double mainardi_integral(double alpha, G&& g) {
    FractionalOrder a(alpha);
    double R = mainardi_reliable_range(a);
    // one adaptive pass: the tolerance must be relative to the whole integral,
    // the far tail is below the series noise floor
    return quad::kronrod([&](double t) { return g(t) * mainardi(a, t).value; }, 0.0, R, 1e-12, 12).value;
}

inline IdentityCheck make_check(std::string id, double measured, double expected, double tol, bool relative) {
    double err = std::abs(measured - expected);
    if (relative) err /= std::abs(expected);
    return {std::move(id), measured, expected, err, tol, relative};
}

}  // namespace detail

inline IdentityCheck mainardi_moment_check(double alpha, double p, double tol = 1e-5) {
    double m = detail::mainardi_integral(alpha, [&](double t) { return p == 0.0 ? 1.0 : std::pow(t, p); });
    double e = gamma_fn(1.0 + p) / gamma_fn(1.0 + alpha * p);
    return detail::make_check(detail::tag("mainardi-moment", {{"alpha", alpha}, {"p", p}}), m, e, tol, true);
}

// int Phi_a(t) e^{-tz} dt = E_a(-z)
inline IdentityCheck mainardi_laplace_check(double alpha, double z, double tol = 1e-6) {
    double m = detail::mainardi_integral(alpha, [&](double t) { return std::exp(-t * z); });
    return detail::make_check(detail::tag("mainardi-laplace", {{"alpha", alpha}, {"z", z}}), m,
                              ml(alpha, 1.0, -z), tol, false);
}

// int t Phi_a(t) e^{-tz} dt = E_{a,a}(-z)/a
inline IdentityCheck mainardi_laplace_moment_check(double alpha, double z, double tol = 1e-6) {
    double m = detail::mainardi_integral(alpha, [&](double t) { return t * std::exp(-t * z); });
    return detail::make_check(detail::tag("mainardi-laplace-moment", {{"alpha", alpha}, {"z", z}}), m,
                              ml(alpha, alpha, -z) / alpha, tol, false);
}

// L[t^{b-1} E_{a,b}(-lambda t^a)](s) = s^{a-b}/(s^a + lambda)
inline IdentityCheck ml_laplace_check(double alpha, double beta, double lambda, double s, double tol = 1e-6) {
    auto e = ml_evaluator(alpha, beta);
    double m = laplace_numeric(
        [&](double t) {
            if (t == 0.0) return beta == 1.0 ? 1.0 : (beta > 1.0 ? 0.0 : INFINITY);
            return std::pow(t, beta - 1.0) * e->evaluate(-lambda * std::pow(t, alpha)).value;
        },
        s);
    double x = std::pow(s, alpha - beta) / (std::pow(s, alpha) + lambda);
    return detail::make_check(
        detail::tag("ml-laplace", {{"alpha", alpha}, {"beta", beta}, {"lambda", lambda}, {"s", s}}), m, x, tol,
        false);
}

inline IdentityCheck ml_recurrence_identity(double alpha, double beta, double z, double tol = 1e-9) {
    double r = ml_recurrence_check({alpha, beta}, z);
    return {detail::tag("ml-recurrence", {{"alpha", alpha}, {"beta", beta}, {"z", z}}), r, 0.0, r, tol, false};
}

// the full battery behind `fractodiff specfun-verify`
inline std::vector<IdentityCheck> specfun_battery() {
    std::vector<IdentityCheck> out;
    out.push_back(detail::make_check("ml-value[alpha=1,beta=1,z=-1]", ml(1.0, 1.0, -1.0), std::exp(-1.0), 1e-10,
                                     false));
    out.push_back(detail::make_check("ml-value[alpha=0.5,beta=1,z=-1]", ml(0.5, 1.0, -1.0),
                                     std::exp(1.0) * std::erfc(1.0), 1e-10, false));
    out.push_back(detail::make_check("ml-value[alpha=0.7,beta=2.3,z=0]", ml(0.7, 2.3, 0.0), 1.0 / gamma_fn(2.3),
                                     1e-12, false));
    out.push_back(detail::make_check("log-gamma[x=5]", log_gamma(5.0), std::log(24.0), 1e-13, true));
    out.push_back(detail::make_check("log-gamma[x=0.5]", log_gamma(0.5), 0.5 * std::log(M_PI), 1e-13, true));
    for (auto [a, b, z] : {std::tuple{0.6, 1.0, -2.0}, {0.9, 1.8, -10.0}, {0.5, 1.5, -50.0}, {0.3, 1.0, -20.0}})
        out.push_back(ml_recurrence_identity(a, b, z));
    for (double a : {0.3, 0.5, 0.7})
        for (double p : {0.0, 0.5, 1.0, 2.0}) out.push_back(mainardi_moment_check(a, p));
    for (double a : {0.3, 0.5, 0.7})
        for (double z : {0.5, 1.0, 4.0}) {
            out.push_back(mainardi_laplace_check(a, z));
            out.push_back(mainardi_laplace_moment_check(a, z));
        }
    for (auto [a, b] : {std::pair{0.5, 1.0}, {0.5, 0.5}, {0.7, 0.7}})
        for (double lam : {1.0, 5.0})
            for (double s : {1.0, 2.0}) out.push_back(ml_laplace_check(a, b, lam, s));
    return out;
}

}  // namespace fractodiff
