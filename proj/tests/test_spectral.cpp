#include <fractodiff/spectral.hpp>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fractodiff;

namespace {

std::vector<double> random_spd(std::size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> N;
    Eigen::MatrixXd B(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) B(i, j) = N(rng);
    Eigen::MatrixXd A = B * B.transpose() + static_cast<double>(n) * Eigen::MatrixXd::Identity(n, n);
    std::vector<double> out(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] = A(i, j);
    return out;
}

std::vector<double> uniform_coords(std::size_t n) {
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = (i + 1.0) / (n + 1.0);
    return c;
}

}  // namespace

TEST(MatrixDomain, EigenvaluesMatchEigen) {
    std::size_t n = 24;
    auto M = random_spd(n, 7);
    auto d = build_matrix_domain(M, uniform_coords(n), std::vector<double>(n, 1.0), 1.0, 0.0, 1.0);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(M.data(), n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(d.eigenvalues[k], es.eigenvalues()[k], 1e-10 * es.eigenvalues()[n - 1]);
}

TEST(MatrixDomain, ModesAreEigenpairs) {
    std::size_t n = 16;
    auto M = random_spd(n, 11);
    auto d = build_matrix_domain(M, uniform_coords(n), std::vector<double>(n, 1.0), 1.0, 0.0, 1.0);
    for (std::size_t k = 0; k < n; ++k) {
        auto phi = d.mode(k);
        for (std::size_t i = 0; i < n; ++i) {
            double Mphi = 0.0;
            for (std::size_t j = 0; j < n; ++j) Mphi += M[i * n + j] * phi[j];
            EXPECT_NEAR(Mphi, d.eigenvalues[k] * phi[i], 1e-9 * d.eigenvalues[n - 1]);
        }
        for (std::size_t j = 0; j < n; ++j)
            EXPECT_NEAR(d.inner(d.mode(k), d.mode(j)), k == j ? 1.0 : 0.0, 1e-12);
    }
}

TEST(MatrixDomain, DirichletLaplacianClosedForm) {
    std::size_t n = 40;
    double h = 1.0 / (n + 1);
    std::vector<double> M(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        M[i * n + i] = 2.0 / (h * h);
        if (i + 1 < n) M[i * n + i + 1] = M[(i + 1) * n + i] = -1.0 / (h * h);
    }
    auto d = build_matrix_domain(M, uniform_coords(n), std::vector<double>(n, h), 1.0, 0.0, 1.0);
    for (std::size_t k = 0; k < n; ++k) {
        double want = (2.0 - 2.0 * std::cos((k + 1.0) * std::numbers::pi * h)) / (h * h);
        EXPECT_NEAR(d.eigenvalues[k], want, 1e-10 * want);
    }
}

TEST(MatrixDomain, RejectsBadMatrices) {
    std::vector<double> ns{2.0, 1.0, 0.0, 2.0};
    EXPECT_THROW(build_matrix_domain(ns, {0.3, 0.6}, {0.5, 0.5}, 1.0, 0.0, 1.0), domain_error);
    std::vector<double> indef{1.0, 2.0, 2.0, 1.0};
    EXPECT_THROW(build_matrix_domain(indef, {0.3, 0.6}, {0.5, 0.5}, 1.0, 0.0, 1.0), domain_error);
    EXPECT_THROW(build_matrix_domain({1.0}, {0.5}, {0.0}, 1.0, 0.0, 1.0), domain_error);
    EXPECT_THROW(build_matrix_domain({1.0}, {0.5}, {1.0}, 1.5, 0.0, 1.0), domain_error);
}

TEST(SflDomain, SineModesOrthonormal) {
    auto d = build_interval_sfl(16, 1.0);
    for (std::size_t k = 0; k < 16; ++k)
        for (std::size_t j = 0; j < 16; ++j) EXPECT_NEAR(d.inner(d.mode(k), d.mode(j)), k == j ? 1.0 : 0.0, 1e-12);
    EXPECT_NEAR(d.eigenvalues[2], 9 * std::numbers::pi * std::numbers::pi, 1e-10);
    auto ds = build_interval_sfl(4, 0.5, 2.0);
    EXPECT_NEAR(ds.eigenvalues[1], std::numbers::pi, 1e-14);
}

TEST(SflDomain, RejectsAliasing) {
    EXPECT_THROW(build_interval_sfl(32, 1.0, 1.0, 100), resolution_error);
    EXPECT_THROW(build_interval_sfl(8, 1.5), domain_error);
    EXPECT_THROW(build_interval_sfl(0, 1.0), domain_error);
}

TEST(SflDomain, CoefficientRoundTrip) {
    auto d = build_interval_sfl(12, 1.0);
    std::vector<double> c(12);
    for (std::size_t k = 0; k < 12; ++k) c[k] = std::sin(1.0 + k);
    auto back = d.coefficients(d.synthesize(c));
    for (std::size_t k = 0; k < 12; ++k) EXPECT_NEAR(back[k], c[k], 1e-13);
}

TEST(Green, ClassicalPoissonProblem) {
    // -u'' = 1, u(0) = u(1) = 0: u = x(1-x)/2
    auto d = build_interval_sfl(128, 1.0);
    auto u = green_apply(d, GridFunction(d.n_nodes(), 1.0));
    for (std::size_t i = 0; i < d.n_nodes(); ++i) {
        double x = d.coords[i];
        EXPECT_NEAR(u[i], 0.5 * x * (1 - x), 2e-6);
    }
}

TEST(Green, NormalDerivativeOfPoissonSolution) {
    // mode truncation error decays like 1/N
    auto err = [](std::size_t modes, std::size_t site) {
        auto d = build_interval_sfl(modes, 1.0);
        return std::abs(martin_derivative(d, site, GridFunction(d.n_nodes(), 1.0)) - 0.5);
    };
    for (std::size_t site : {0u, 1u}) {
        double coarse = err(128, site), fine = err(512, site);
        EXPECT_LT(fine, 1e-3);
        EXPECT_LT(fine, coarse / 3);
    }
}

TEST(Green, SymmetricOperator) {
    auto d = build_interval_sfl(32, 0.7);
    GridFunction f(d.n_nodes()), g(d.n_nodes());
    for (std::size_t i = 0; i < d.n_nodes(); ++i) {
        f[i] = std::exp(d.coords[i]);
        g[i] = d.coords[i] * d.coords[i];
    }
    EXPECT_NEAR(d.inner(green_apply(d, f), g), d.inner(f, green_apply(d, g)), 1e-13);
}

TEST(Boundary, ModeDerivativeMatchesExtrapolation) {
    auto d = build_interval_sfl(64, 1.0);
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t site = 0; site < 2; ++site) {
            double exact = mode_boundary_derivative(d, k, site);
            double est = boundary_limit_estimate(d, site, d.mode_function(k)).value;
            EXPECT_NEAR(est, exact, 1e-6 * std::abs(exact)) << k << ' ' << site;
        }
}

TEST(Boundary, ConcentrationProfileHasUnitWeightedMass) {
    auto d = build_interval_sfl(64, 1.0);
    for (int j : concentration_schedule(d))
        for (std::size_t site = 0; site < 2; ++site) {
            auto c = concentration_profile(d, site, j);
            double m = 0.0;
            for (std::size_t i = 0; i < d.n_nodes(); ++i) m += d.weights[i] * d.delta_gamma[i] * c[i];
            EXPECT_NEAR(m, 1.0, 1e-13);
            for (auto i : concentration_set(d, site, j)) {
                EXPECT_GT(d.delta[i], 1.0 / j);
                EXPECT_LT(d.delta[i], 2.0 / j);
            }
        }
}

TEST(UStar, ClassicalIntervalIsOne) {
    // harmonic with unit normal data on both ends
    auto d = build_interval_sfl(256, 1.0);
    auto r = u_star_detailed(d, 1e-3);
    for (std::size_t i = 0; i < d.n_nodes(); ++i)
        if (d.delta[i] >= 0.1) {
            EXPECT_NEAR(r.u[i], 1.0, 1e-3) << d.coords[i];
        }
    for (std::size_t k = 1; k < r.cauchy.size(); ++k) EXPECT_LT(r.cauchy[k], r.cauchy[k - 1]);
}

TEST(UStar, CoarseGridIsReported) {
    EXPECT_THROW(u_star(build_interval_sfl(4, 1.0)), resolution_error);
}

TEST(RflDomain, SpectrumShape) {
    auto d = build_interval_rfl(100, 0.5);
    EXPECT_EQ(d.family, "interval_rfl");
    EXPECT_EQ(d.n_nodes(), 99u);
    for (std::size_t k = 1; k < d.n_modes(); ++k) EXPECT_GE(d.eigenvalues[k], d.eigenvalues[k - 1]);
    // first eigenfunction keeps one sign and is even about 1/2
    auto phi = d.mode(0);
    for (std::size_t i = 0; i < d.n_nodes(); ++i) {
        EXPECT_GT(phi[i] * phi[d.n_nodes() / 2], 0.0);
        EXPECT_NEAR(phi[i], phi[d.n_nodes() - 1 - i], 1e-9);
    }
    EXPECT_THROW(build_interval_rfl(100, 1.0), domain_error);
    EXPECT_THROW(build_interval_rfl(4, 0.5), domain_error);
}

TEST(RflDomain, FirstEigenvalueConverges) {
    // s = 1/2 on (-1,1) has lambda_1 ~ 1.1577738836977; rescaled to (0,1) by 2^{2s}
    double want = 2.0 * 1.1577738836977;
    double e100 = std::abs(build_interval_rfl(100, 0.5).eigenvalues[0] - want);
    double e200 = std::abs(build_interval_rfl(200, 0.5).eigenvalues[0] - want);
    EXPECT_LT(e200, 0.02 * want);
    EXPECT_LT(e200, e100);
}

TEST(RflDomain, EigenvaluesCrossCheckedWithEigen) {
    std::size_t cells = 40, n = cells - 1;
    auto M = rfl_stiffness(cells, 0.3);
    auto d = build_interval_rfl(cells, 0.3);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(M.data(), n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(d.eigenvalues[k], es.eigenvalues()[k], 1e-9 * es.eigenvalues()[n - 1]);
}
