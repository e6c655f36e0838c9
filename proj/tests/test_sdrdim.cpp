#include "flmgof/error.hpp"
#include "flmgof/harness/study.hpp"
#include "flmgof/hypotest.hpp"
#include "flmgof/linalg.hpp"
#include "flmgof/process.hpp"
#include "flmgof/sdrdim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace flmgof;

namespace {

Eigen::MatrixXd bm_curves(const GridPtr& g, int n, std::uint64_t seed) {
    Rng rng(seed);
    return ProcessSampler(ProcessKind::brownian_motion(), g).sample(n, rng);
}

Eigen::VectorXd normals(int n, std::uint64_t seed, double sd = 1.0) {
    Rng rng(seed);
    std::normal_distribution<double> z(0.0, sd);
    Eigen::VectorXd v(n);
    for (auto& x : v) x = z(rng);
    return v;
}

double min_weighted_eigenvalue(const Eigen::MatrixXd& entries, const Grid& g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(linalg::weighted_form(entries, g.sqrt_weights()));
    return es.eigenvalues().minCoeff();
}

harness::StudyConfig cell_config(int reps) {
    harness::StudyConfig cfg;
    cfg.replicates = reps;
    cfg.seed = 777;
    return cfg;
}

} // namespace

TEST(Indicative, ZeroResidualsGiveZeroOperator) {
    auto g = make_uniform_grid(20);
    const auto op = indicative_operator(Eigen::VectorXd::Zero(15), bm_curves(g, 15, 1), g);
    EXPECT_EQ(op.entries.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Indicative, SymmetricAndPsd) {
    auto g = make_uniform_grid(30);
    for (std::uint64_t seed : {2, 3, 4}) {
        const auto op = indicative_operator(normals(40, seed), bm_curves(g, 40, seed + 10), g);
        EXPECT_TRUE(op.entries.isApprox(op.entries.transpose(), 1e-14));
        EXPECT_GE(min_weighted_eigenvalue(op.entries, *g), -1e-10);
    }
}

TEST(Indicative, SingleCurveHandOracle) {
    auto g = make_grid({0.0, 0.3, 1.0});
    Eigen::MatrixXd x(1, 3);
    x << 0.5, -1.0, 2.0;
    const double eps = 1.5;
    // Trapezoid weights on {0, 0.3, 1}: 0.15, 0.5, 0.35.
    const double xwx = 0.15 * 0.25 + 0.5 * 1.0 + 0.35 * 4.0;
    const auto op = indicative_operator(Eigen::VectorXd::Constant(1, eps), x, g);
    for (int s = 0; s < 3; ++s)
        for (int t = 0; t < 3; ++t) {
            const double outer = x(0, s) * x(0, t);
            const double expected = eps * eps * outer + eps * eps * outer * xwx;
            EXPECT_NEAR(op.entries(s, t), expected, 1e-13);
        }
}

TEST(Indicative, MismatchedLengthsThrow) {
    auto g = make_uniform_grid(10);
    try {
        indicative_operator(Eigen::VectorXd::Zero(4), bm_curves(g, 5, 1), g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
    }
    EXPECT_THROW(indicative_operator(Eigen::VectorXd::Zero(5), bm_curves(make_uniform_grid(11), 5, 1), g),
                 Error);
}

TEST(Spectrum, ZeroOperator) {
    auto g = make_uniform_grid(12);
    const Eigen::VectorXd ev = operator_spectrum({g, Eigen::MatrixXd::Zero(12, 12)});
    EXPECT_EQ(ev.size(), 12);
    EXPECT_EQ(ev.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Spectrum, RankOneUnitFunction) {
    auto g = make_uniform_grid(41);
    Eigen::VectorXd v = (M_PI * g->nodes().array()).sin().matrix();
    v /= l2_norm(*g, v);
    const Eigen::VectorXd ev = operator_spectrum({g, v * v.transpose()});
    EXPECT_NEAR(ev[0], 1.0, 1e-12);
    EXPECT_LT(ev.tail(ev.size() - 1).cwiseAbs().maxCoeff(), 1e-12);
    for (Eigen::Index i = 1; i < ev.size(); ++i) EXPECT_LE(ev[i], ev[i - 1]);
}

TEST(Spectrum, StableUnderGridRefinement) {
    auto top = [](int M) {
        auto g = make_uniform_grid(M);
        const Eigen::VectorXd t = g->nodes();
        Eigen::MatrixXd e(M, M);
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j)
                e(i, j) = std::exp(-std::pow(t[i] - t[j], 2)) + std::cos(M_PI * t[i]) * std::cos(M_PI * t[j]);
        return operator_spectrum({g, e})[0];
    };
    const double coarse = top(51), fine = top(101);
    EXPECT_NEAR(coarse / fine, 1.0, 0.01);
}

TEST(Ridge, ZeroVarianceGivesFloor) {
    auto g = make_uniform_grid(30);
    Rng rng(5);
    const RidgePair r = null_reference_ridge(bm_curves(g, 64, 6), g, 0.0, 10, rng);
    EXPECT_EQ(r.c1, 1.0 / 8.0);
    EXPECT_EQ(r.c2, 1.0 / 8.0);
}

TEST(Ridge, NeverBelowFloorAndWithinUnitInterval) {
    auto g = make_uniform_grid(30);
    for (double s2 : {1e-6, 0.01, 1.0, 100.0}) {
        Rng rng(7);
        const RidgePair r = null_reference_ridge(bm_curves(g, 50, 8), g, s2, 20, rng);
        EXPECT_GE(r.c1, 1.0 / std::sqrt(50.0));
        EXPECT_GT(r.c1, 0.0);
        EXPECT_LE(r.c1, 2.0);
        EXPECT_EQ(r.c1, r.c2);
    }
}

TEST(Ridge, InvalidInputs) {
    auto g = make_uniform_grid(30);
    Rng rng(1);
    const auto x = bm_curves(g, 20, 2);
    EXPECT_THROW(null_reference_ridge(x, g, 1.0, 0, rng), Error);
    EXPECT_THROW(null_reference_ridge(x, g, -1.0, 5, rng), Error);
    EXPECT_THROW(null_reference_ridge(x, g, std::nan(""), 5, rng), Error);
}

TEST(Ridge, DeterministicGivenSeed) {
    auto g = make_uniform_grid(30);
    const auto x = bm_curves(g, 40, 3);
    Rng a(11), b(11);
    EXPECT_EQ(null_reference_ridge(x, g, 0.3, 25, a).c1, null_reference_ridge(x, g, 0.3, 25, b).c1);
}

TEST(Dimension, Examples) {
    const RidgePair ridge{0.1, 0.1};
    EXPECT_EQ(estimate_dimension(Eigen::VectorXd::Zero(5), ridge), 0);
    Eigen::VectorXd ev(4);
    ev << 10.0, 0.001, 0.0, 0.0;
    EXPECT_EQ(estimate_dimension(ev, ridge), 1);
    ev << 10.0, 0.5, 0.2, 0.0; // s = 0.909, 0.333, 0.167, 0
    EXPECT_EQ(estimate_dimension(ev, ridge), 3);
}

TEST(Dimension, NonincreasingInRidge) {
    const Eigen::VectorXd ev = normals(12, 4).cwiseAbs();
    Eigen::VectorXd sorted = ev;
    std::sort(sorted.data(), sorted.data() + sorted.size(), std::greater<>());
    int previous = estimate_dimension(sorted, {1e-6, 1e-6});
    for (double c = 1e-3; c < 1.0; c *= 1.5) {
        const int q = estimate_dimension(sorted, {c, c});
        EXPECT_LE(q, previous);
        previous = q;
    }
}

TEST(Dimension, InvariantUnderResidualScaling) {
    const Dataset d = generate_dataset(find_scenario("S1"), 2, 100, 30, 12);
    const auto g = d.grid;
    const Eigen::VectorXd eps = d.responses.array() - d.responses.mean();
    double var = eps.squaredNorm() / (eps.size() - 1);
    Rng base_rng(3);
    const RidgePair base_ridge = null_reference_ridge(d.curves, g, var, 50, base_rng);
    const int base_q = estimate_dimension(operator_spectrum(indicative_operator(eps, d.curves, g)), base_ridge);
    for (double kappa : {0.5, 2.0}) {
        const auto op = indicative_operator(kappa * eps, d.curves, g);
        const auto plain = indicative_operator(eps, d.curves, g);
        EXPECT_TRUE(op.entries.isApprox(kappa * kappa * plain.entries, 1e-12));
        Rng rng(3);
        const RidgePair ridge = null_reference_ridge(d.curves, g, kappa * kappa * var, 50, rng);
        EXPECT_EQ(estimate_dimension(operator_spectrum(op), ridge), base_q) << "kappa " << kappa;
    }
}

TEST(NullConsistency, S1SettingKeepsQhatZero) {
    harness::StudyContext ctx;
    const auto res = harness::run_cell(ctx, {"S1", 0, std::nullopt, 100, 30}, cell_config(500));
    EXPECT_EQ(res.row.failures, 0);
    EXPECT_GE(res.row.q0_pct, 95.0);
}

TEST(NullConsistency, EveryScenarioKeepsQhatZero) {
    harness::StudyContext ctx;
    for (const char* id : {"S1", "S2", "S3", "S4", "S5", "S6", "S7", "S8", "S9"}) {
        const auto res = harness::run_cell(ctx, {id, 0, std::nullopt, 100, 30}, cell_config(500));
        EXPECT_GE(res.row.q0_pct, 93.0) << id;
    }
}

class HybridDesign : public ::testing::Test {
protected:
    static harness::PowerRow cell(double delta, int reps) {
        static harness::StudyContext ctx;
        return harness::run_cell(ctx, {"HYB", -1, delta, 100, 200}, cell_config(reps)).row;
    }
};

TEST_F(HybridDesign, QhatPositiveAtFullDeviation) {
    const auto row = cell(1.0, 500);
    EXPECT_GE(100.0 - row.q0_pct, 95.0);
}

TEST_F(HybridDesign, QhatZeroFrequencyNonincreasingInDelta) {
    double previous = 100.0;
    for (double delta : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
        const auto row = cell(delta, 200);
        // Binomial slack: three standard errors at p = 0.5, 200 draws.
        EXPECT_LE(row.q0_pct, previous + 10.6) << "delta " << delta;
        previous = std::min(previous, row.q0_pct);
    }
}
