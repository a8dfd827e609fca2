#include <fractodiff/fraccalc.hpp>
#include <fractodiff/kernelest.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace fractodiff;

namespace {

// Dirichlet heat kernel on (0,1) by the method of images
double images_kernel(double t, double x, double y) {
    auto G = [t](double z) { return std::exp(-z * z / (4 * t)) / std::sqrt(4 * std::numbers::pi * t); };
    double s = 0.0;
    for (int n = -6; n <= 6; ++n) s += G(x - y + 2 * n) - G(x + y + 2 * n);
    return s;
}

}  // namespace

TEST(CauchyKernel, MatchesFourierIntegral) {
    // (1/pi) int_0^inf e^{-t xi} cos(r xi) dxi as a Laplace transform
    for (auto [t, r] : {std::pair{1.0, 0.0}, {1.0, 1.0}, {0.5, 2.0}, {2.0, 0.3}}) {
        double ref = laplace_numeric([r](double xi) { return std::cos(r * xi); }, t) / std::numbers::pi;
        EXPECT_NEAR(cauchy_kernel(t, r), ref, 1e-10) << t << ' ' << r;
    }
}

TEST(CauchyKernel, UnitMassAndSemigroup) {
    // int_R P_t = 1 and P_a * P_b = P_{a+b}
    double a = 0.3, b = 0.7;
    auto conv = [&](double x) {
        auto f = [&](double u) {
            double y = std::tan(u);
            return cauchy_kernel(a, y) * cauchy_kernel(b, x - y) * (1 + y * y);
        };
        return quad::kronrod(f, -std::numbers::pi / 2, std::numbers::pi / 2, 1e-12).value;
    };
    for (double x : {0.0, 0.5, 3.0}) EXPECT_NEAR(conv(x), cauchy_kernel(a + b, x), 1e-9) << x;
    double mass = quad::kronrod([](double u) { return cauchy_kernel(0.4, std::tan(u)) * (1 + std::tan(u) * std::tan(u)); },
                                -std::numbers::pi / 2, std::numbers::pi / 2, 1e-13)
                      .value;
    EXPECT_NEAR(mass, 1.0, 1e-12);
    EXPECT_THROW(cauchy_kernel(0.0, 1.0), domain_error);
}

TEST(WholeSpaceBound, MinAndProductFormsAgree) {
    for (int d : {1, 2, 3})
        for (double s : {0.25, 0.5, 0.9})
            for (double t : {1e-3, 0.1, 2.0})
                for (double r : {0.0, 1e-3, 0.2, 5.0}) {
                    double a = whole_space_bound(d, s, t, r), b = whole_space_bound_product(d, s, t, r);
                    EXPECT_NEAR(a, b, 1e-12 * a);
                }
}

TEST(WholeSpaceBound, MonotoneInDistance) {
    for (double s : {0.3, 0.75}) {
        double prev = INFINITY;
        for (double r = 0.0; r < 10.0; r += 0.05) {
            double v = whole_space_bound(1, s, 0.2, r);
            EXPECT_LE(v, prev);
            prev = v;
        }
    }
    EXPECT_THROW(whole_space_bound(0, 0.5, 1.0, 1.0), domain_error);
    EXPECT_THROW(whole_space_bound(1, 0.5, 0.0, 1.0), domain_error);
    EXPECT_THROW(whole_space_bound(1, 1.5, 1.0, 1.0), domain_error);
}

TEST(BoundaryBound, FactorsShrinkTowardTheBoundary) {
    for (auto fam : {KernelFamily::rfl, KernelFamily::cfl, KernelFamily::sfl}) {
        KernelBoundSpec spec{fam, 1, 0.75};
        double t = 0.05, r = 0.1;
        double free = whole_space_bound(1, 0.75, t, r);
        EXPECT_DOUBLE_EQ(boundary_bound(spec, t, r, INFINITY, INFINITY), free) << to_string(fam);
        double prev = 0.0;
        for (double dx = 1e-4; dx < 1.0; dx *= 1.5) {
            double v = boundary_bound(spec, t, r, dx, 0.5);
            EXPECT_GE(v, prev);
            EXPECT_LE(v, free * (1 + 1e-15));
            prev = v;
        }
    }
}

TEST(BoundaryBound, SymmetricInEndpoints) {
    KernelBoundSpec spec{KernelFamily::rfl, 1, 0.4};
    EXPECT_DOUBLE_EQ(boundary_bound(spec, 0.1, 0.3, 0.01, 0.2), boundary_bound(spec, 0.1, 0.3, 0.2, 0.01));
}

TEST(BoundaryBound, ApproachesClassicalFactorAsSTendsToOne) {
    // s -> 1: (1 ^ delta/sqrt t) on each side of the Gaussian-order bound
    double t = 0.04, r = 0.3, dx = 0.05, dy = 0.5;
    double classical = std::min(1.0, dx / std::sqrt(t)) * std::min(1.0, dy / std::sqrt(t)) * std::min(1.0 / std::sqrt(t), t / std::pow(r, 3));
    double near = boundary_bound({KernelFamily::rfl, 1, 0.9999}, t, r, dx, dy);
    EXPECT_NEAR(near / classical, 1.0, 1e-3);
}

TEST(BoundaryBound, CensoredNeedsHalf) {
    EXPECT_THROW(boundary_bound({KernelFamily::cfl, 1, 0.5}, 1.0, 0.0, 1.0, 1.0), domain_error);
    EXPECT_NO_THROW(boundary_bound({KernelFamily::cfl, 1, 0.6}, 1.0, 0.0, 1.0, 1.0));
    EXPECT_THROW(boundary_bound({KernelFamily::rfl, 1, 1.0}, 1.0, 0.0, 1.0, 1.0), domain_error);
}

TEST(DiscreteHeatKernel, ClassicalIntervalMatchesImages) {
    auto d = build_interval_sfl(128, 1.0);
    for (double t : {0.002, 0.02, 0.3})
        for (std::size_t i : {5u, 200u, 511u})
            for (std::size_t j : {17u, 512u, 1000u})
                EXPECT_NEAR(discrete_heat_kernel(d, t, i, j), images_kernel(t, d.coords[i], d.coords[j]), 1e-10)
                    << t << ' ' << i << ' ' << j;
}

TEST(DiscreteHeatKernel, ChapmanKolmogorov) {
    auto d = build_interval_rfl(60, 0.5);
    std::size_t n = d.n_nodes();
    auto A = discrete_heat_matrix(d, 0.01), B = discrete_heat_matrix(d, 0.02), C = discrete_heat_matrix(d, 0.03);
    for (std::size_t i = 0; i < n; i += 5)
        for (std::size_t j = 0; j < n; j += 3) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += A[i * n + k] * d.weights[k] * B[k * n + j];
            EXPECT_NEAR(s, C[i * n + j], 1e-10 * std::abs(C[i * n + j]) + 1e-12);
        }
}

TEST(DiscreteHeatKernel, PositiveSymmetricSubMarkov) {
    auto d = build_interval_rfl(80, 0.3);
    std::size_t n = d.n_nodes();
    auto K = discrete_heat_matrix(d, 0.05);
    for (std::size_t i = 0; i < n; ++i) {
        double mass = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            EXPECT_GT(K[i * n + j], 0.0);
            EXPECT_NEAR(K[i * n + j], K[j * n + i], 1e-12 * K[i * n + i]);
            mass += d.weights[j] * K[i * n + j];
        }
        EXPECT_LE(mass, 1.0 + 1e-12);
    }
    EXPECT_NEAR(K[3 * n + 9], discrete_heat_kernel(d, 0.05, 3, 9), 1e-12);
}

TEST(Sandwich, RflRatioWithinCap) {
    auto d = build_interval_rfl(120, 0.5);
    double t0 = std::max(0.01, sandwich_t_min(d));
    auto samples = heat_kernel_samples(d, {t0, 1.0, 5, 3});
    ASSERT_FALSE(samples.empty());
    KernelBoundSpec spec{KernelFamily::rfl, 1, 0.5};
    auto fit = sandwich_fit(samples, [&](double t, double x, double y) {
        return boundary_bound(spec, t, std::abs(x - y), std::min(x, 1 - x), std::min(y, 1 - y));
    });
    EXPECT_GT(fit.c1, 0.0);
    EXPECT_LE(fit.ratio(), 100.0);
}

TEST(Sandwich, RejectsNonPositiveValues) {
    std::vector<KernelSample> s{{0.1, 0.2, 0.3, -1.0}};
    EXPECT_THROW(sandwich_fit(s, [](double, double, double) { return 1.0; }), domain_error);
    EXPECT_THROW(sandwich_fit({}, [](double, double, double) { return 1.0; }), domain_error);
    auto d = build_interval_sfl(4, 1.0);
    EXPECT_THROW(heat_kernel_samples(d, {0.0, 1.0, 4, 1}), domain_error);
}
