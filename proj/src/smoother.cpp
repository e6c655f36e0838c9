#include "flmgof/smoother.hpp"

#include "flmgof/error.hpp"
#include "flmgof/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

namespace flmgof {

namespace {

// Green & Silverman band matrices: for the natural cubic spline through
// values g, int (g'')^2 = g' Q R^{-1} Q' g.
Eigen::MatrixXd cubic_penalty(const Grid& grid) {
    const auto M = static_cast<Eigen::Index>(grid.size());
    const Eigen::VectorXd& t = grid.nodes();
    Eigen::VectorXd h = t.tail(M - 1) - t.head(M - 1);
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(M, M - 2);
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(M - 2, M - 2);
    for (Eigen::Index j = 1; j + 1 < M; ++j) {
        const Eigen::Index c = j - 1;
        Q(j - 1, c) = 1.0 / h[j - 1];
        Q(j, c) = -1.0 / h[j - 1] - 1.0 / h[j];
        Q(j + 1, c) = 1.0 / h[j];
        R(c, c) = (h[j - 1] + h[j]) / 3.0;
        if (c + 1 < M - 2) {
            R(c, c + 1) = h[j] / 6.0;
            R(c + 1, c) = h[j] / 6.0;
        }
    }
    const Eigen::MatrixXd rinv_qt = R.ldlt().solve(Q.transpose());
    return linalg::symmetrize(Q * rinv_qt);
}

// Piecewise-linear interpolant: int (g')^2 = sum (g_{j+1} - g_j)^2 / h_j.
Eigen::MatrixXd linear_penalty(const Grid& grid) {
    const auto M = static_cast<Eigen::Index>(grid.size());
    const Eigen::VectorXd& t = grid.nodes();
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(M, M);
    for (Eigen::Index j = 0; j + 1 < M; ++j) {
        const double inv_h = 1.0 / (t[j + 1] - t[j]);
        P(j, j) += inv_h;
        P(j + 1, j + 1) += inv_h;
        P(j, j + 1) -= inv_h;
        P(j + 1, j) -= inv_h;
    }
    return P;
}

} // namespace

SplineSmoother::SplineSmoother(GridPtr grid, int r) : grid_(std::move(grid)), r_(r) {
    if (r_ != 1 && r_ != 2) fail(ErrorKind::kInvalidArgument, "smoothing order r must be 1 or 2");
    const auto M = static_cast<int>(grid_->size());
    if (M < 2 * r_)
        fail(ErrorKind::kInsufficientData,
             "smoothing needs M >= 2r (M=" + std::to_string(M) + ", r=" + std::to_string(r_) + ")");
    penalty_ = (r_ == 2) ? cubic_penalty(*grid_) : linear_penalty(*grid_);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(penalty_);
    if (es.info() != Eigen::Success) fail(ErrorKind::kNumericFailure, "penalty eigendecomposition failed");
    basis_ = es.eigenvectors();
    penalty_ev_ = es.eigenvalues();
    // The null space (polynomials of degree < r) has dimension exactly r.
    for (int k = 0; k < r_; ++k) penalty_ev_[k] = 0.0;
    penalty_ev_ = penalty_ev_.cwiseMax(0.0);
}

Eigen::VectorXd SplineSmoother::shrink_factors(double lambda1) const {
    const double m = static_cast<double>(grid_->size());
    return (1.0 + m * lambda1 * penalty_ev_.array()).inverse().matrix();
}

Eigen::MatrixXd SplineSmoother::hat_matrix(double lambda1) const {
    if (!(lambda1 >= 0.0)) fail(ErrorKind::kInvalidArgument, "lambda1 must be non-negative");
    const auto M = static_cast<Eigen::Index>(grid_->size());
    if (lambda1 == 0.0) return Eigen::MatrixXd::Identity(M, M);
    return linalg::symmetrize(basis_ * shrink_factors(lambda1).asDiagonal() * basis_.transpose());
}

Eigen::VectorXd SplineSmoother::smooth(const Eigen::Ref<const Eigen::VectorXd>& x, double lambda1) const {
    if (!(lambda1 >= 0.0)) fail(ErrorKind::kInvalidArgument, "lambda1 must be non-negative");
    if (static_cast<std::size_t>(x.size()) != grid_->size())
        fail(ErrorKind::kInvalidArgument, "curve length does not match the smoother grid");
    if (lambda1 == 0.0) return x;
    Eigen::VectorXd out = basis_ * shrink_factors(lambda1).cwiseProduct(basis_.transpose() * x);
    if (!out.allFinite()) fail(ErrorKind::kNumericFailure, "smoothing produced non-finite values");
    return out;
}

namespace {

double gcv_from_coords(const Eigen::VectorXd& coords, const Eigen::VectorXd& f) {
    const double m = static_cast<double>(coords.size());
    const double rss = ((1.0 - f.array()) * coords.array()).square().sum();
    const double denom = 1.0 - f.sum() / m;
    return (rss / m) / (denom * denom);
}

} // namespace

double SplineSmoother::gcv_score(const Eigen::Ref<const Eigen::VectorXd>& x, double lambda1) const {
    return gcv_from_coords(basis_.transpose() * x, shrink_factors(lambda1));
}

double SplineSmoother::select_lambda(const Eigen::Ref<const Eigen::VectorXd>& x,
                                     const std::vector<double>& lambda_grid) const {
    if (lambda_grid.empty()) fail(ErrorKind::kInvalidArgument, "empty lambda1 grid");
    const Eigen::VectorXd coords = basis_.transpose() * x;
    double best = std::numeric_limits<double>::infinity();
    double best_lambda = std::numeric_limits<double>::quiet_NaN();
    for (double l : lambda_grid) {
        const double g = gcv_from_coords(coords, shrink_factors(l));
        if (std::isfinite(g) && g < best) {
            best = g;
            best_lambda = l;
        }
    }
    // A curve with zero roughness scores 0 everywhere; any lambda reproduces it.
    if (!std::isfinite(best_lambda)) best_lambda = lambda_grid.back();
    return best_lambda;
}

double SplineSmoother::roughness(const Eigen::Ref<const Eigen::VectorXd>& g) const {
    const Eigen::VectorXd c = basis_.transpose() * g;
    return (penalty_ev_.array() * c.array().square()).sum();
}

const std::vector<double>& default_lambda1_grid() {
    static const std::vector<double> grid = [] {
        std::vector<double> g(40);
        for (int k = 0; k < 40; ++k) g[static_cast<std::size_t>(k)] = std::pow(10.0, -10.0 + 12.0 * k / 39.0);
        return g;
    }();
    return grid;
}

SmoothCurve smooth_curve(const ObservedCurve& obs, int r, std::optional<double> lambda1) {
    const SplineSmoother smoother(obs.grid(), r);
    const double l = lambda1 ? *lambda1 : smoother.select_lambda(obs.values(), default_lambda1_grid());
    return {GridFunction(obs.grid(), smoother.smooth(obs.values(), l)), l, r};
}

SmoothedSample smooth_curves(const SplineSmoother& smoother, const Eigen::MatrixXd& curves,
                             std::optional<double> lambda1) {
    SmoothedSample out;
    out.curves.resize(curves.rows(), curves.cols());
    out.lambda1.resize(curves.rows());
    for (Eigen::Index i = 0; i < curves.rows(); ++i) {
        const Eigen::VectorXd x = curves.row(i).transpose();
        const double l = lambda1 ? *lambda1 : smoother.select_lambda(x, default_lambda1_grid());
        out.lambda1[i] = l;
        out.curves.row(i) = smoother.smooth(x, l).transpose();
    }
    return out;
}

} // namespace flmgof
