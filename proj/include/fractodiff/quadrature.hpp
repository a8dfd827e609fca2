#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <functional>
#include <limits>

namespace fractodiff::quad {

struct Result {
    double value;
    double error;
};

// adaptive Gauss-Kronrod on a finite interval
template <class F>
Result kronrod(F&& f, double a, double b, double tol = 1e-13, unsigned depth = 18) {
    if (a == b) return {0.0, 0.0};
    double err = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, a, b, depth, tol, &err);
    return {v, err};
}

// endpoint singularities (integrable) on a finite interval
template <class F>
Result tanh_sinh(F&& f, double a, double b, double tol = 1e-13) {
    if (a == b) return {0.0, 0.0};
    thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
    double err = 0.0;
    double v = rule.integrate(f, a, b, tol, &err);
    return {v, err};
}

// fixed Gauss-Legendre panel (for smooth integrands inside tight loops)
template <class F>
double gauss_legendre(F&& f, double a, double b) {
    static constexpr double x[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                    0.9445750230732326, 0.9894009349916499};
    static constexpr double w[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                    0.0622535239386479, 0.0271524594117541};
    double c = 0.5 * (a + b), h = 0.5 * (b - a), sum = 0.0;
    for (int i = 0; i < 8; ++i) sum += w[i] * (f(c - h * x[i]) + f(c + h * x[i]));
    return sum * h;
}

// Kahan-Babuska-Neumaier running sum
struct NeumaierSum {
    double sum = 0.0, comp = 0.0;
    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

}  // namespace fractodiff::quad
