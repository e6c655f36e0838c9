#include "flmgof/error.hpp"
#include "flmgof/smoother.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace flmgof;

namespace {

Eigen::VectorXd noisy(const GridPtr& g, double sd, std::mt19937_64& rng) {
    std::normal_distribution<double> z(0.0, sd);
    Eigen::VectorXd x(g->size());
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = std::sin(2 * std::numbers::pi * g->node(j)) + z(rng);
    return x;
}

} // namespace

TEST(Smoother, HugePenaltyGivesLeastSquaresLine) {
    auto g = make_uniform_grid(30);
    SplineSmoother s(g, 2);
    std::mt19937_64 rng(1);
    const Eigen::VectorXd x = noisy(g, 0.3, rng);
    const Eigen::VectorXd fit = s.smooth(x, 1e12);
    Eigen::MatrixXd design(30, 2);
    design.col(0).setOnes();
    design.col(1) = g->nodes();
    const Eigen::VectorXd line = design * design.colPivHouseholderQr().solve(x);
    EXPECT_LT((fit - line).norm(), 1e-6);
}

TEST(Smoother, HugePenaltyOrderOneGivesMean) {
    auto g = make_uniform_grid(12);
    SplineSmoother s(g, 1);
    std::mt19937_64 rng(2);
    const Eigen::VectorXd x = noisy(g, 0.3, rng);
    const Eigen::VectorXd fit = s.smooth(x, 1e12);
    EXPECT_LT((fit.array() - x.mean()).abs().maxCoeff(), 1e-6);
}

TEST(Smoother, ZeroPenaltyInterpolates) {
    auto g = make_uniform_grid(30);
    std::mt19937_64 rng(3);
    const Eigen::VectorXd x = noisy(g, 0.3, rng);
    const SmoothCurve c = smooth_curve(GridFunction(g, x), 2, 0.0);
    EXPECT_TRUE(c.values.values() == x);
    EXPECT_EQ(c.lambda1, 0.0);
    EXPECT_TRUE(SplineSmoother(g, 2).hat_matrix(0.0).isIdentity());
}

TEST(Smoother, GcvBeatsRawObservationsOnNoisySine) {
    auto g = make_uniform_grid(64);
    std::mt19937_64 rng(4);
    Eigen::VectorXd truth(64);
    for (int j = 0; j < 64; ++j) truth[j] = std::sin(2 * std::numbers::pi * g->node(j));
    double rmse_fit = 0.0, rmse_raw = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::VectorXd x = noisy(g, 0.1, rng);
        const SmoothCurve c = smooth_curve(GridFunction(g, x), 2, std::nullopt);
        rmse_fit += std::sqrt((c.values.values() - truth).squaredNorm() / 64);
        rmse_raw += std::sqrt((x - truth).squaredNorm() / 64);
    }
    rmse_fit /= 100;
    rmse_raw /= 100;
    EXPECT_LT(rmse_fit, rmse_raw);
    EXPECT_LT(rmse_fit, 0.06);
}

TEST(Smoother, LinearInData) {
    auto g = make_uniform_grid(25);
    SplineSmoother s(g, 2);
    std::mt19937_64 rng(5);
    const Eigen::VectorXd x = noisy(g, 1.0, rng), y = noisy(g, 1.0, rng);
    for (double lam : {1e-8, 1e-4, 1.0}) {
        const Eigen::VectorXd lhs = s.smooth(2.5 * x - 0.7 * y, lam);
        const Eigen::VectorXd rhs = 2.5 * s.smooth(x, lam) - 0.7 * s.smooth(y, lam);
        EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((s.hat_matrix(lam) * x - s.smooth(x, lam)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Smoother, RoughnessNonIncreasingInLambda) {
    auto g = make_uniform_grid(40);
    for (int r : {1, 2}) {
        SplineSmoother s(g, r);
        std::mt19937_64 rng(6);
        const Eigen::VectorXd x = noisy(g, 0.5, rng);
        double prev = INFINITY;
        for (double lam : default_lambda1_grid()) {
            const double rough = s.roughness(s.smooth(x, lam));
            EXPECT_LE(rough, prev * (1 + 1e-9) + 1e-12) << "r=" << r << " lambda1=" << lam;
            prev = rough;
        }
    }
}

TEST(Smoother, PenaltyMatchesCubicRoughnessOfQuadratic) {
    // The natural cubic spline through t^2 is not t^2 itself, but its
    // roughness is bounded by that of t^2 (= 4) and approaches it on fine grids.
    auto g = make_uniform_grid(201);
    SplineSmoother s(g, 2);
    Eigen::VectorXd q = g->nodes().array().square();
    const double rough = s.roughness(q);
    EXPECT_LE(rough, 4.0 + 1e-9);
    EXPECT_GT(rough, 3.5);
    Eigen::VectorXd line = 3.0 - 2.0 * g->nodes().array();
    EXPECT_NEAR(s.roughness(line), 0.0, 1e-8);
}

TEST(Smoother, InsufficientGrid) {
    try {
        SplineSmoother(make_uniform_grid(3), 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::kInsufficientData);
    }
    EXPECT_NO_THROW(SplineSmoother(make_uniform_grid(4), 2));
    EXPECT_NO_THROW(SplineSmoother(make_uniform_grid(2), 1));
}

TEST(Smoother, UnsupportedOrder) {
    try {
        SplineSmoother(make_uniform_grid(20), 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
    }
}

TEST(Smoother, LambdaGridSpansDocumentedRange) {
    const auto& grid = default_lambda1_grid();
    ASSERT_EQ(grid.size(), 40u);
    EXPECT_NEAR(grid.front(), 1e-10, 1e-22);
    EXPECT_NEAR(grid.back(), 1e2, 1e-10);
}

TEST(Smoother, SmoothCurvesRowsMatchSingleCurve) {
    auto g = make_uniform_grid(30);
    SplineSmoother s(g, 2);
    std::mt19937_64 rng(7);
    Eigen::MatrixXd x(3, 30);
    for (int i = 0; i < 3; ++i) x.row(i) = noisy(g, 0.2, rng).transpose();
    const SmoothedSample out = smooth_curves(s, x, std::nullopt);
    for (int i = 0; i < 3; ++i) {
        const SmoothCurve c = smooth_curve(GridFunction(g, x.row(i).transpose()), 2, std::nullopt);
        EXPECT_EQ(out.lambda1[i], c.lambda1);
        EXPECT_LT((out.curves.row(i).transpose() - c.values.values()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Smoother, GcvScoresFiniteAndSelectionOnGrid) {
    auto g = make_uniform_grid(30);
    SplineSmoother s(g, 2);
    std::mt19937_64 rng(8);
    const Eigen::VectorXd x = noisy(g, 0.2, rng);
    for (double lam : default_lambda1_grid()) EXPECT_TRUE(std::isfinite(s.gcv_score(x, lam)));
    const double sel = s.select_lambda(x, default_lambda1_grid());
    const auto& gr = default_lambda1_grid();
    EXPECT_NE(std::find(gr.begin(), gr.end(), sel), gr.end());
}
