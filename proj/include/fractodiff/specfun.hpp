#pragma once

#include "errors.hpp"

#include <quadmath.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace fractodiff {

class FractionalOrder {
public:
    explicit FractionalOrder(double alpha) : alpha_(alpha) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw domain_error("fractional order must lie in (0,1), got " + std::to_string(alpha));
    }
    double value() const { return alpha_; }
    operator double() const { return alpha_; }

private:
    double alpha_;
};

// two-parameter order; alpha = 1 allowed for sanity cases
struct MittagLefflerOrder {
    double alpha;
    double beta;
    MittagLefflerOrder(double a, double b) : alpha(a), beta(b) {
        if (!(a > 0.0 && a <= 1.0)) throw domain_error("Mittag-Leffler alpha must lie in (0,1]");
        if (!(b > 0.0)) throw domain_error("Mittag-Leffler beta must be positive");
    }
};

enum class EvalMethod { series, asymptotic, integral };

inline const char* to_string(EvalMethod m) {
    switch (m) {
        case EvalMethod::series: return "series";
        case EvalMethod::asymptotic: return "asymptotic";
        default: return "integral";
    }
}

struct EvalResult {
    double value;
    double est_abs_error;
    EvalMethod method;
};

struct SignedLogGamma {
    int sign;
    double log_abs;
};

namespace detail {

using quad = __float128;

// sin(pi x) with exact reduction so integers give exact zeros
inline double sin_pi(double x) {
    double n = std::round(x);
    double s = std::sin(std::numbers::pi * (x - n));
    return std::fmod(n, 2.0) != 0.0 ? -s : s;
}

// Lanczos g=7, n=9; x >= 0.5
inline double lanczos_log_gamma(double x) {
    static constexpr double c[9] = {0.99999999999980993,  676.5203681218851,
                                    -1259.1392167224028,  771.32342877765313,
                                    -176.61502916214059,  12.507343278686905,
                                    -0.13857109526572012, 9.9843695780195716e-6,
                                    1.5056327351493116e-7};
    x -= 1.0;
    double a = c[0];
    for (int i = 1; i < 9; ++i) a += c[i] / (x + i);
    double t = x + 7.5;
    return 0.91893853320467274178 + (x + 0.5) * std::log(t) - t + std::log(a);
}

inline quad q_sin_pi(quad x) {
    quad n = roundq(x);
    quad s = sinq(M_PIq * (x - n));
    return fmodq(n, 2) != 0 ? -s : s;
}

// 1/Gamma(x) in extended precision, zero at the poles
inline quad q_rgamma(quad x) {
    if (x <= 0 && x == floorq(x)) return 0;
    if (x >= 0.5Q) return expq(-lgammaq(x));
    return q_sin_pi(x) * expq(lgammaq(1 - x)) / M_PIq;
}

}  // namespace detail

inline SignedLogGamma signed_log_gamma(double x) {
    if (std::isnan(x)) throw domain_error("log_gamma of NaN");
    if (x <= 0.0 && x == std::floor(x))
        throw pole_error("Gamma has a pole at non-positive integer " + std::to_string(x));
    if (x >= 0.5) return {1, detail::lanczos_log_gamma(x)};
    double s = detail::sin_pi(x);
    return {s > 0 ? 1 : -1,
            std::log(std::numbers::pi) - std::log(std::abs(s)) - detail::lanczos_log_gamma(1.0 - x)};
}

inline double log_gamma(double x) {
    if (x <= 0.0 && x == std::floor(x))
        throw pole_error("Gamma has a pole at non-positive integer " + std::to_string(x));
    if (!(x > 0.0)) throw domain_error("log_gamma requires x > 0; use signed_log_gamma");
    return detail::lanczos_log_gamma(x);
}

// entire function 1/Gamma, zero at the poles
inline double reciprocal_gamma(double x) {
    if (x <= 0.0 && x == std::floor(x)) return 0.0;
    auto g = signed_log_gamma(x);
    return g.sign * std::exp(-g.log_abs);
}

inline double gamma_fn(double x) {
    auto g = signed_log_gamma(x);
    return g.sign * std::exp(g.log_abs);
}

// E_{alpha,beta} evaluator with precomputed coefficient tables
class MittagLeffler {
public:
    MittagLeffler(double alpha, double beta) : alpha_(alpha), beta_(beta) {
        MittagLefflerOrder check(alpha, beta);
        std::size_t n = static_cast<std::size_t>(std::ceil(200.0 / alpha)) + 40;
        series_.resize(n);
        series_d_.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            series_[k] = detail::q_rgamma(static_cast<detail::quad>(alpha) * k + beta);
            series_d_[k] = static_cast<double>(series_[k]);
        }
        // 1/Gamma(beta - alpha k) kept as (sign, -ln|Gamma|) to survive large k
        int terms = static_cast<int>(std::ceil(80.0 / alpha)) + 20;
        asym_sign_.assign(terms + 1, 0);
        asym_log_.assign(terms + 1, 0.0);
        for (int k = 1; k <= terms; ++k) {
            double arg = beta - alpha * k;
            if (arg <= 0.0 && arg == std::floor(arg)) continue;
            auto g = signed_log_gamma(arg);
            asym_sign_[k] = g.sign;
            asym_log_[k] = -g.log_abs;
        }
    }

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }

    EvalResult evaluate(double z) const {
        if (std::isnan(z)) throw domain_error("Mittag-Leffler argument is NaN");
        if (z == 0.0) return {static_cast<double>(series_[0]), 0.0, EvalMethod::series};
        if (alpha_ == 1.0 && beta_ == 1.0) {
            double v = std::exp(z);
            return {v, 2e-16 * v, EvalMethod::series};
        }
        if (z > 0.0) return series(z);
        double x = -z;
        double scale = std::pow(x, 1.0 / alpha_);
        if (scale <= kDoubleLimit) return series_double(z);
        if (scale <= kSeriesLimit) return series(z);
        return asymptotic(x, scale);
    }

    double operator()(double z) const { return evaluate(z).value; }

    // no serious cancellation for small |z|: plain double arithmetic suffices
    EvalResult series_double(double z) const {
        double power = 1.0, sum = 0.0, abs_sum = 0.0, prev = INFINITY;
        std::size_t k = 0;
        for (; k < series_d_.size(); ++k) {
            double term = series_d_[k] * power;
            sum += term;
            abs_sum += std::abs(term);
            double m = std::abs(term);
            if (m <= 1e-18 * std::abs(sum) && m <= prev) break;
            prev = m;
            power *= z;
        }
        return {sum, 4e-16 * abs_sum * (1.0 + 1e-2 * k), EvalMethod::series};
    }

    // regime pieces exposed for the overlap checks
    EvalResult series(double z) const {
        using detail::quad;
        quad zq = z, power = 1, sum = 0, comp = 0, abs_sum = 0;
        std::size_t k = 0;
        int small = 0;
        for (; k < series_.size(); ++k) {
            quad term = series_[k] * power;
            quad t = sum + term;
            if (fabsq(sum) >= fabsq(term))
                comp += (sum - t) + term;
            else
                comp += (term - t) + sum;
            sum = t;
            abs_sum += fabsq(term);
            if (fabsq(term) <= 1e-20Q * fabsq(sum) && fabsq(term) <= 1e-36Q * abs_sum * 1e16Q &&
                series_[k] != 0) {
                if (++small >= 2) break;
            } else {
                small = 0;
            }
            power *= zq;
        }
        double v = static_cast<double>(sum + comp);
        double err = static_cast<double>(abs_sum * 1e-32Q) + 2.3e-16 * std::abs(v);
        if (k == series_.size()) err += static_cast<double>(fabsq(series_.back() * power));
        return {v, err, EvalMethod::series};
    }

    EvalResult asymptotic(double x, double scale) const {
        // truncate where the smooth envelope Gamma(1-beta+alpha k)/(pi x^k) is smallest;
        // the sine factor of the reflection formula makes individual terms erratic
        double sum = 0.0, err = 0.0, prev_env = INFINITY;
        double lx = std::log(x);
        bool done = false;
        for (std::size_t k = 1; k < asym_sign_.size(); ++k) {
            double kd = static_cast<double>(k);
            double arg = 1.0 - beta_ + alpha_ * kd;
            double env = arg > 0.0 ? std::exp(std::lgamma(arg) - kd * lx) / std::numbers::pi
                                   : INFINITY;
            if (arg > 1.0 && env > prev_env) {
                err = env;
                done = true;
                break;
            }
            if (env < INFINITY) prev_env = env;
            if (asym_sign_[k] == 0) continue;
            double term = (k % 2 == 1 ? 1.0 : -1.0) * asym_sign_[k] *
                          std::exp(asym_log_[k] - kd * lx);
            sum += term;
            if (env < 1e-18 * std::abs(sum)) {
                err = env;
                done = true;
                break;
            }
        }
        if (!done) err = prev_env;
        // exponentially small remainder of the optimally truncated expansion
        err += std::exp(-scale) * std::pow(scale, 1.0 - beta_) / alpha_;
        err += 2.3e-16 * std::abs(sum);
        return {sum, err, EvalMethod::asymptotic};
    }

    static constexpr double kSeriesLimit = 36.0;
    static constexpr double kDoubleLimit = 3.0;

private:
    double alpha_, beta_;
    std::vector<detail::quad> series_;
    std::vector<double> series_d_;
    std::vector<int> asym_sign_;
    std::vector<double> asym_log_;
};

// shared, immutable evaluators keyed on (alpha, beta)
inline std::shared_ptr<const MittagLeffler> ml_evaluator(double alpha, double beta) {
    static std::mutex mutex;
    static std::map<std::pair<double, double>, std::shared_ptr<const MittagLeffler>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto key = std::make_pair(alpha, beta);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto ev = std::make_shared<const MittagLeffler>(alpha, beta);
    cache.emplace(key, ev);
    return ev;
}

inline double ml_tolerance(double value) { return std::max(1e-10, 1e-12 * std::abs(value)); }

inline EvalResult mittag_leffler(MittagLefflerOrder order, double z) {
    auto r = ml_evaluator(order.alpha, order.beta)->evaluate(z);
    if (!(r.est_abs_error <= ml_tolerance(r.value)))
        throw accuracy_error("Mittag-Leffler tolerance unreachable at z=" + std::to_string(z),
                             r.value, r.est_abs_error);
    return r;
}

// plain-value convenience used across the library
inline double ml(double alpha, double beta, double z) {
    return mittag_leffler(MittagLefflerOrder(alpha, beta), z).value;
}

// |z E_{a,b}(z) - (E_{a,b-a}(z) - 1/Gamma(b-a))|
inline double ml_recurrence_check(MittagLefflerOrder order, double z) {
    double bm = order.beta - order.alpha;
    if (!(bm > 0.0)) throw domain_error("recurrence needs beta - alpha > 0");
    double lhs = z * ml(order.alpha, order.beta, z);
    double rhs = ml(order.alpha, bm, z) - reciprocal_gamma(bm);
    return std::abs(lhs - rhs);
}

namespace detail {

constexpr int kMainardiTerms = 2000;

// 1/(k! Gamma(1 - a(k+1))), built once per alpha
inline std::shared_ptr<const std::vector<quad>> mainardi_coefficients(double alpha) {
    static std::mutex mutex;
    static std::map<double, std::shared_ptr<const std::vector<quad>>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(alpha);
    if (it != cache.end()) return it->second;
    auto c = std::make_shared<std::vector<quad>>(kMainardiTerms);
    for (int k = 0; k < kMainardiTerms; ++k) {
        // log form: both k! and Gamma(a(k+1)) overflow long before the last term
        quad x = 1 - static_cast<quad>(alpha) * (k + 1);
        quad lf = lgammaq(static_cast<quad>(k + 1));
        if (x <= 0 && x == floorq(x))
            (*c)[k] = 0;
        else if (x >= 0.5Q)
            (*c)[k] = expq(-lgammaq(x) - lf);
        else
            (*c)[k] = q_sin_pi(x) * expq(lgammaq(1 - x) - lf) / M_PIq;
    }
    cache.emplace(alpha, c);
    return c;
}

inline EvalResult mainardi_series(double alpha, double t) {
    constexpr int max_terms = kMainardiTerms;
    auto coef = mainardi_coefficients(alpha);
    quad tq = -static_cast<quad>(t), power = 1, sum = 0, comp = 0, abs_sum = 0;
    int small = 0;
    int k = 0;
    for (; k < max_terms; ++k) {
        if (k > 0) power *= tq;
        quad term = power * (*coef)[k];
        quad s = sum + term;
        if (fabsq(sum) >= fabsq(term))
            comp += (sum - s) + term;
        else
            comp += (term - s) + sum;
        sum = s;
        abs_sum += fabsq(term);
        if (t == 0.0) break;
        if (fabsq(term) < 1e-36Q * abs_sum) {
            if (++small >= 2) break;
        } else {
            small = 0;
        }
    }
    double v = static_cast<double>(sum + comp);
    double err = static_cast<double>(abs_sum * 1e-32Q) + 2.3e-16 * std::abs(v);
    if (k == max_terms) err = INFINITY;
    return {v, err, EvalMethod::series};
}

}  // namespace detail

// largest t for which the series meets a 1e-10 error estimate (bisection, cached)
inline double mainardi_reliable_range(FractionalOrder alpha) {
    static std::mutex mutex;
    static std::map<double, double> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(alpha.value());
    if (it != cache.end()) return it->second;
    double lo = 0.0, hi = 1.0;
    while (hi < 1e4 && detail::mainardi_series(alpha, hi).est_abs_error <= 1e-10) {
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        if (detail::mainardi_series(alpha, mid).est_abs_error <= 1e-10)
            lo = mid;
        else
            hi = mid;
    }
    cache.emplace(alpha.value(), lo);
    return lo;
}

inline EvalResult mainardi(FractionalOrder alpha, double t) {
    if (!(t >= 0.0)) throw domain_error("Mainardi function needs t >= 0");
    auto r = detail::mainardi_series(alpha, t);
    if (t > mainardi_reliable_range(alpha) || !(r.est_abs_error <= 1e-9))
        throw accuracy_error("Mainardi series beyond its reliable range at t=" + std::to_string(t),
                             r.value, r.est_abs_error);
    return r;
}

// t^{a-1} E_{a,a}(-lambda t^a); alpha in (0,1]
inline double p_alpha_scalar(double alpha, double t, double lambda) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw domain_error("p_alpha_scalar needs alpha in (0,1]");
    if (!(lambda >= 0.0)) throw domain_error("p_alpha_scalar needs lambda >= 0");
    if (t == 0.0) throw singularity_error("P_alpha is singular at t = 0");
    if (!(t > 0.0)) throw domain_error("p_alpha_scalar needs t > 0");
    if (alpha == 1.0) return std::exp(-lambda * t);
    double ta = std::pow(t, alpha);
    return ta / t * ml(alpha, alpha, -lambda * ta);
}

}  // namespace fractodiff
