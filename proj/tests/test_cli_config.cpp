#include "config.hpp"
#include "experiments.hpp"

#include <gtest/gtest.h>

using namespace fractodiff;
using namespace fractodiff::cli;

TEST(Overrides, DottedKeysCreateObjects) {
    json cfg = json::object();
    apply_override(cfg, "params.alpha=0.3");
    apply_override(cfg, "domain.family=interval_rfl");
    apply_override(cfg, "schedule=[4,8]");
    EXPECT_EQ(cfg["params"]["alpha"].get<double>(), 0.3);
    EXPECT_EQ(cfg["domain"]["family"], "interval_rfl");
    EXPECT_EQ(cfg["schedule"].get<std::vector<int>>(), (std::vector<int>{4, 8}));
}

TEST(Overrides, ReplacesScalarsWithObjects) {
    json cfg = {{"u0", 1.0}};
    apply_override(cfg, "u0.preset=mode");
    EXPECT_EQ(cfg["u0"]["preset"], "mode");
}

TEST(Overrides, RejectsMalformedAssignments) {
    json cfg = json::object();
    EXPECT_THROW(apply_override(cfg, "novalue"), config_error);
    EXPECT_THROW(apply_override(cfg, "=3"), config_error);
    EXPECT_THROW(apply_override(cfg, "a..b=3"), config_error);
}

TEST(Getters, TypesAndDefaults) {
    json cfg = {{"n", 3}, {"s", "x"}};
    EXPECT_EQ(get_or<int>(cfg, "n", 0), 3);
    EXPECT_EQ(get_or<int>(cfg, "missing", 7), 7);
    EXPECT_THROW(get_or<int>(cfg, "s", 0), config_error);
    EXPECT_THROW(require<double>(cfg, "missing"), config_error);
}

TEST(Problem, DefaultsGiveZeroCaputoProblem) {
    auto setup = make_problem(json::object());
    EXPECT_EQ(setup.problem.kind, DerivativeKind::caputo);
    EXPECT_EQ(setup.grid.n_steps, 50);
    EXPECT_FALSE(setup.problem.f.has_value());
    EXPECT_TRUE(setup.problem.h.empty());
    EXPECT_EQ(setup.problem.domain->n_modes(), 64u);
}

TEST(Problem, ForcingWindowIsPiecewiseConstant) {
    json cfg = {{"domain", {{"n_modes", 4}}}, {"T", 1.0}, {"n_steps", 10},
                {"f", {{"space", {{"preset", "constant"}, {"value", 2.0}}}, {"t0", 0.2}, {"t1", 0.5}}}};
    auto setup = make_problem(cfg);
    const auto& f = *setup.problem.f;
    EXPECT_EQ(f.interp, Interpolation::piecewise_constant);
    for (int n = 0; n < 10; ++n) EXPECT_EQ(f[n][0], (n >= 2 && n < 5) ? 2.0 : 0.0) << n;
}

TEST(Problem, BoundarySeries) {
    json cfg = {{"domain", {{"n_modes", 4}}}, {"n_steps", 3}, {"h", {{"left", 2.0}, {"right", {0.0, 1.0, 2.0, 3.0}}}}};
    auto setup = make_problem(cfg);
    ASSERT_EQ(setup.problem.h.size(), 2u);
    EXPECT_EQ(setup.problem.h[0][2], 2.0);
    EXPECT_EQ(setup.problem.h[1][3], 3.0);
    cfg["h"]["right"] = json::array({1.0});
    EXPECT_THROW(make_problem(cfg), config_error);
}

TEST(Problem, RejectsBadValues) {
    EXPECT_THROW(make_problem({{"alpha", 1.0}}), config_error);
    EXPECT_THROW(make_problem({{"kind", "grunwald"}}), config_error);
    EXPECT_THROW(make_problem({{"T", -1.0}}), config_error);
    EXPECT_THROW(make_problem({{"domain", {{"family", "torus"}}}}), config_error);
    EXPECT_THROW(make_problem({{"domain", {{"n_modes", 8}, {"n_nodes", 10}}}}), config_error);
    EXPECT_THROW(make_problem({{"domain", {{"n_modes", 4}}}, {"u0", {{"preset", "mode"}, {"k", 9}}}}), config_error);
    EXPECT_THROW(make_problem({{"domain", {{"n_modes", 4}}}, {"u0", {{"values", {1.0, 2.0}}}}}), config_error);
    EXPECT_THROW(make_problem({{"f", {{"space", 1.0}, {"t0", 0.5}, {"t1", 0.2}}}}), config_error);
}

TEST(Problem, ModePresetMatchesDomainMode) {
    auto setup = make_problem({{"domain", {{"n_modes", 4}}}, {"u0", {{"preset", "mode"}, {"k", 2}, {"scale", 3.0}}}});
    auto c = setup.problem.domain->coefficients(setup.problem.u0);
    EXPECT_NEAR(c[1], 3.0, 1e-13);
    EXPECT_NEAR(c[0], 0.0, 1e-13);
}

TEST(Experiments, RegistryHasAllNames) {
    for (const char* name : {"duality-sweep", "ustar-laplacian", "boundary-ratio", "compactness", "concentration",
                             "kernel-sandwich", "weak-dual"})
        EXPECT_TRUE(experiments().count(name)) << name;
}

TEST(Experiments, KernelSandwichRejectsWindowBelowFloor) {
    EXPECT_THROW(kernel_sandwich({{"t_min", 1e-7}}), config_error);
}
