#include <fractodiff/specfun.hpp>
#include <fractodiff/verify.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace fractodiff;

namespace {

// plain long double power series, fine for |z| <= 2
long double ml_series_ld(long double a, long double b, long double z) {
    long double sum = 0.0L, zk = 1.0L;
    for (int k = 0; k < 200; ++k) {
        sum += zk / std::tgamma(a * k + b);
        zk *= z;
    }
    return sum;
}

}  // namespace

TEST(LogGamma, MatchesStd) {
    for (double x : {0.1, 0.5, 1.0, 2.5, 7.25, 30.0, 170.5})
        EXPECT_NEAR(log_gamma(x), std::lgamma(x), 1e-12 * std::max(1.0, std::abs(std::lgamma(x)))) << x;
    EXPECT_NEAR(gamma_fn(0.5), std::sqrt(std::numbers::pi), 1e-14);
}

TEST(LogGamma, NegativeArgumentsAndPoles) {
    for (double x : {-0.5, -1.5, -2.3, -7.7}) {
        auto s = signed_log_gamma(x);
        EXPECT_NEAR(s.sign * std::exp(s.log_abs), std::tgamma(x), 1e-12 * std::abs(std::tgamma(x))) << x;
    }
    for (double x : {0.0, -1.0, -2.0, -10.0}) EXPECT_EQ(reciprocal_gamma(x), 0.0) << x;
    EXPECT_THROW(gamma_fn(-3.0), pole_error);
}

TEST(FractionalOrderType, RejectsOutOfRange) {
    EXPECT_THROW(FractionalOrder(0.0), domain_error);
    EXPECT_THROW(FractionalOrder(1.0), domain_error);
    EXPECT_THROW(FractionalOrder(std::nan("")), domain_error);
    EXPECT_NO_THROW(FractionalOrder(0.999));
    EXPECT_THROW(MittagLefflerOrder(1.2, 1.0), domain_error);
    EXPECT_THROW(MittagLefflerOrder(0.5, 0.0), domain_error);
}

TEST(MittagLeffler, HalfOrderAgainstErfc) {
    // E_{1/2}(-x) = exp(x^2) erfc(x)
    for (double x : {0.0, 0.1, 0.5, 1.0, 2.0, 3.0, 4.5}) {
        double want = std::exp(x * x) * std::erfc(x);
        EXPECT_NEAR(ml(0.5, 1.0, -x), want, ml_tolerance(want) * 10) << x;
    }
}

TEST(MittagLeffler, HalfOrderLargeArgumentTail) {
    // erfc underflows in exp(x^2) erfc(x); use the scaled continued-fraction free tail
    for (double x : {8.0, 20.0, 100.0}) {
        double want = 1.0 / (x * std::sqrt(std::numbers::pi)) * (1.0 - 1.0 / (2 * x * x) + 3.0 / (4 * std::pow(x, 4)));
        EXPECT_NEAR(ml(0.5, 1.0, -x), want, 2e-4 * want + 1e-10) << x;
    }
}

TEST(MittagLeffler, ExponentialCases) {
    for (double z : {-30.0, -5.0, -1.0, -1e-3, 0.0, 0.7}) {
        EXPECT_NEAR(ml(1.0, 1.0, z), std::exp(z), ml_tolerance(std::exp(z))) << z;
        double e12 = z == 0.0 ? 1.0 : std::expm1(z) / z;
        EXPECT_NEAR(ml(1.0, 2.0, z), e12, ml_tolerance(e12)) << z;
    }
}

TEST(MittagLeffler, AgreesWithLongDoubleSeries) {
    for (double a : {0.35, 0.6, 0.8})
        for (double b : {0.3, 1.0, 1.7})
            for (double z : {-2.0, -0.75, 0.0, 0.5, 1.5}) {
                double want = static_cast<double>(ml_series_ld(a, b, z));
                EXPECT_NEAR(ml(a, b, z), want, 1e-11 * std::max(1.0, std::abs(want))) << a << ' ' << b << ' ' << z;
            }
}

TEST(MittagLeffler, RegimesAreContinuous) {
    // no jump where evaluation switches between series and asymptotics
    for (double a : {0.3, 0.6, 0.9}) {
        double prev = ml(a, 1.0, -1.0);
        for (double x = 1.0; x <= 80.0; x *= 1.02) {
            double v = ml(a, 1.0, -x);
            EXPECT_GT(v, 0.0);
            EXPECT_LE(v, prev + 1e-12) << a << ' ' << x;
            prev = v;
        }
    }
}

TEST(MittagLeffler, CompletelyMonotoneOnNegativeAxis) {
    // E_a(-x) positive, decreasing, convex
    for (double a : {0.25, 0.5, 0.75}) {
        double h = 0.05;
        for (double x = 0.1; x < 20.0; x += 0.37) {
            double l = ml(a, 1.0, -(x - h)), c = ml(a, 1.0, -x), r = ml(a, 1.0, -(x + h));
            EXPECT_GT(c, 0.0);
            EXPECT_LT(r, l);
            EXPECT_GT(l + r - 2 * c, -1e-10) << a << ' ' << x;
        }
    }
}

TEST(MittagLeffler, RecurrenceProperty) {
    for (double a : {0.3, 0.5, 0.9})
        for (double b : {a + 0.2, 1.0, 2.0})
            for (double z : {-40.0, -7.0, -0.3, 0.4})
                EXPECT_LT(ml_recurrence_check({a, b}, z), 1e-9) << a << ' ' << b << ' ' << z;
}

TEST(MittagLeffler, EvaluatorCacheSharesInstances) {
    EXPECT_EQ(ml_evaluator(0.5, 1.0).get(), ml_evaluator(0.5, 1.0).get());
    EXPECT_NE(ml_evaluator(0.5, 1.0).get(), ml_evaluator(0.5, 0.5).get());
}

TEST(Mainardi, HalfOrderIsGaussian) {
    FractionalOrder a(0.5);
    for (double t : {0.0, 0.3, 1.0, 2.5, 5.0, 9.0}) {
        double want = std::exp(-t * t / 4.0) / std::sqrt(std::numbers::pi);
        EXPECT_NEAR(mainardi(a, t).value, want, 1e-12) << t;
    }
}

TEST(Mainardi, ValueAtZero) {
    for (double a : {0.2, 0.5, 0.8}) EXPECT_NEAR(mainardi(FractionalOrder(a), 0.0).value, 1.0 / gamma_fn(1.0 - a), 1e-13);
}

TEST(Mainardi, RefusesBeyondReliableRange) {
    FractionalOrder a(0.7);
    double R = mainardi_reliable_range(a);
    EXPECT_GT(R, 3.0);
    EXPECT_NO_THROW(mainardi(a, 0.9 * R));
    EXPECT_THROW(mainardi(a, 1.5 * R + 1.0), accuracy_error);
    EXPECT_THROW(mainardi(a, -1.0), domain_error);
}

TEST(Mainardi, NonNegativeDensity) {
    for (double a : {0.3, 0.5, 0.7}) {
        FractionalOrder fa(a);
        double R = mainardi_reliable_range(fa);
        for (double t = 0.0; t < R; t += R / 97) EXPECT_GE(mainardi(fa, t).value, -1e-9) << a << ' ' << t;
    }
}

TEST(PAlpha, Limits) {
    EXPECT_NEAR(p_alpha_scalar(1.0, 0.8, 2.0), std::exp(-1.6), 1e-15);
    EXPECT_THROW(p_alpha_scalar(0.5, 0.0, 1.0), singularity_error);
    EXPECT_THROW(p_alpha_scalar(0.5, 1.0, -1.0), domain_error);
    // lambda = 0: t^{a-1}/Gamma(a)
    EXPECT_NEAR(p_alpha_scalar(0.4, 2.0, 0.0), std::pow(2.0, -0.6) / std::tgamma(0.4), 1e-13);
}

TEST(IdentityBattery, SelectedRowsPass) {
    for (auto c : {mainardi_moment_check(0.5, 2.0), mainardi_laplace_check(0.3, 1.0),
                   mainardi_laplace_moment_check(0.7, 4.0), ml_laplace_check(0.5, 0.5, 5.0, 2.0),
                   ml_recurrence_identity(0.7, 1.0, -3.0)})
        EXPECT_TRUE(c.pass()) << c.id << " err " << c.error;
}
