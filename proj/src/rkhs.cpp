#include "flmgof/rkhs.hpp"

#include "flmgof/error.hpp"
#include "flmgof/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <sstream>

namespace flmgof {

namespace {

double k1(double x) { return x - 0.5; }
double k2(double x) {
    const double a = k1(x);
    return 0.5 * (a * a - 1.0 / 12.0);
}
double k4(double x) {
    const double a = k1(x);
    const double a2 = a * a;
    return (a2 * a2 - 0.5 * a2 + 7.0 / 240.0) / 24.0;
}

void require_same_grid(const KernelMatrix& a, const KernelMatrix& b) {
    if (!a.grid || !b.grid || !same_grid(*a.grid, *b.grid))
        fail(ErrorKind::kInvalidArgument, "kernel matrices live on different grids");
    const auto M = static_cast<Eigen::Index>(a.grid->size());
    if (a.entries.rows() != M || a.entries.cols() != M || b.entries.rows() != M || b.entries.cols() != M)
        fail(ErrorKind::kInvalidArgument, "kernel matrix shape does not match the grid");
}

} // namespace

double sobolev_kernel_value(double s, double t) { return k2(s) * k2(t) - k4(std::abs(s - t)); }

KernelMatrix sobolev_kernel(const GridPtr& grid, int m) {
    if (m != 2) fail(ErrorKind::kInvalidArgument, "only the order-2 Sobolev kernel is supported");
    const Eigen::VectorXd& t = grid->nodes();
    const auto M = t.size();
    Eigen::MatrixXd K(M, M);
    for (Eigen::Index a = 0; a < M; ++a)
        for (Eigen::Index b = 0; b <= a; ++b) K(a, b) = K(b, a) = sobolev_kernel_value(t[a], t[b]);
    return {grid, std::move(K)};
}

KernelMatrix covariance_estimate(const GridPtr& grid, const Eigen::MatrixXd& curves) {
    if (curves.rows() < 2) fail(ErrorKind::kInvalidArgument, "covariance needs at least 2 curves");
    if (static_cast<std::size_t>(curves.cols()) != grid->size())
        fail(ErrorKind::kInvalidArgument, "curve length does not match grid size");
    const Eigen::MatrixXd centered = curves.rowwise() - curves.colwise().mean();
    const Eigen::MatrixXd C = centered.transpose() * centered / static_cast<double>(curves.rows());
    return {grid, linalg::symmetrize(C)};
}

GridFunction EigenSystem::phi(Eigen::Index nu) const { return GridFunction(grid, phi_star.col(nu)); }

EigenSystem build_eigensystem(const KernelMatrix& K, const KernelMatrix& C) {
    require_same_grid(K, C);
    if (!K.entries.allFinite() || !C.entries.allFinite())
        fail(ErrorKind::kInvalidArgument, "eigen-system input has non-finite entries");
    const Grid& grid = *K.grid;
    const Eigen::VectorXd& sw = grid.sqrt_weights();
    const auto M = static_cast<Eigen::Index>(grid.size());

    const Eigen::MatrixXd k_hat = linalg::weighted_form(linalg::symmetrize(K.entries), sw);
    const Eigen::MatrixXd c_hat = linalg::weighted_form(linalg::symmetrize(C.entries), sw);
    const Eigen::Index c_rank = linalg::numeric_rank(c_hat);
    if (c_rank == 0) fail(ErrorKind::kInvalidArgument, "covariance has no positive eigenvalue");

    // K~ = (C + K^{-1})^{-1} = K^{1/2} (K^{1/2} C K^{1/2} + I)^{-1} K^{1/2}
    const Eigen::MatrixXd k_half = linalg::psd_sqrt(k_hat);
    const Eigen::MatrixXd inner =
        linalg::symmetrize(k_half * c_hat * k_half) + Eigen::MatrixXd::Identity(M, M);
    const Eigen::MatrixXd k_tilde = linalg::symmetrize(k_half * inner.ldlt().solve(k_half));
    const Eigen::MatrixXd kt_half = linalg::psd_sqrt(k_tilde);
    const Eigen::MatrixXd omega = linalg::symmetrize(kt_half * c_hat * kt_half);

    const auto es = linalg::eigen_descending(omega);
    const double top = es.values[0];
    if (!(top > 0.0)) fail(ErrorKind::kInvalidArgument, "covariance is invisible to the kernel");
    Eigen::Index count = 0;
    while (count < es.values.size() && count < c_rank && es.values[count] > linalg::kSpectralClip * top) ++count;

    EigenSystem sys;
    sys.grid = K.grid;
    sys.rho_tilde = es.values.head(count);
    sys.rho_star.resize(count);
    sys.phi_star.resize(M, count);
    const Eigen::VectorXd inv_sw = sw.cwiseInverse();
    for (Eigen::Index nu = 0; nu < count; ++nu) {
        const double rt = es.values[nu];
        sys.rho_star[nu] = std::max(1.0 / rt - 1.0, 0.0);
        const Eigen::VectorXd phi_hat = kt_half * es.vectors.col(nu) / std::sqrt(rt);
        sys.phi_star.col(nu) = inv_sw.cwiseProduct(phi_hat);
    }
    return sys;
}

SlopeDesign::SlopeDesign(GridPtr grid, const Eigen::MatrixXd& smoothed_curves, const KernelMatrix& K)
    : grid_(std::move(grid)) {
    const Eigen::Index n = smoothed_curves.rows();
    const auto M = static_cast<Eigen::Index>(grid_->size());
    if (n < 4) fail(ErrorKind::kInvalidArgument, "slope estimation needs n >= 4");
    if (smoothed_curves.cols() != M) fail(ErrorKind::kInvalidArgument, "curve length does not match grid size");
    if (!K.grid || !same_grid(*K.grid, *grid_) || K.entries.rows() != M)
        fail(ErrorKind::kInvalidArgument, "kernel matrix is not on the curve grid");
    if (!smoothed_curves.allFinite()) fail(ErrorKind::kInvalidArgument, "curves have non-finite values");

    curve_mean_ = smoothed_curves.colwise().mean().transpose();
    centered_ = smoothed_curves.rowwise() - curve_mean_.transpose();
    kernel_ = K.entries;
    const Eigen::MatrixXd xw = centered_ * grid_->weights().asDiagonal();
    gram_ = linalg::symmetrize(xw * kernel_ * xw.transpose());

    null_design_.resize(n, 3);
    null_design_.col(0).setOnes();
    null_design_.col(1) = xw.rowwise().sum();
    null_design_.col(2) = xw * grid_->nodes();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(null_design_);
    const Eigen::VectorXd sv = svd.singularValues();
    const double cond = sv[2] > 0.0 ? sv[0] / sv[2] : std::numeric_limits<double>::infinity();
    if (!(cond < 1e10)) {
        std::ostringstream os;
        os << "null-space design is rank deficient (condition number " << cond << ")";
        fail(ErrorKind::kNumericFailure, os.str());
    }

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(null_design_);
    const Eigen::MatrixXd q = qr.householderQ();
    q1_ = q.leftCols(3);
    r_ = qr.matrixQR().topLeftCorner(3, 3).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd q2 = q.rightCols(n - 3);
    const auto es = linalg::eigen_descending(linalg::symmetrize(q2.transpose() * gram_ * q2));
    projected_ev_ = es.values.cwiseMax(0.0);
    q2u_ = q2 * es.vectors;
    lambda_scale_ = gram_.trace() / static_cast<double>(n);
    if (!(lambda_scale_ > 0.0) || !std::isfinite(lambda_scale_))
        fail(ErrorKind::kNumericFailure, "curves carry no signal through the kernel");
}

Eigen::VectorXd SlopeDesign::residual_shrink(double lambda) const {
    if (!(lambda > 0.0)) fail(ErrorKind::kInvalidArgument, "lambda must be positive");
    const double mu = 0.5 * static_cast<double>(n()) * lambda;
    return (mu / (projected_ev_.array() + mu)).matrix();
}

double SlopeDesign::degrees_of_freedom(double lambda) const {
    return static_cast<double>(n()) - residual_shrink(lambda).sum();
}

Eigen::VectorXd SlopeDesign::residual_map(double lambda, const Eigen::Ref<const Eigen::VectorXd>& v) const {
    return q2u_ * residual_shrink(lambda).cwiseProduct(q2u_.transpose() * v);
}

double SlopeDesign::gcv_score(double lambda, const Eigen::Ref<const Eigen::VectorXd>& y) const {
    const Eigen::VectorXd s = residual_shrink(lambda);
    const double rss = s.cwiseProduct(q2u_.transpose() * y).squaredNorm();
    const double df_resid = s.sum();
    return static_cast<double>(n()) * rss / (df_resid * df_resid);
}

SlopeDesign::Coefficients SlopeDesign::solve(double lambda, const Eigen::Ref<const Eigen::VectorXd>& y) const {
    if (y.size() != n()) fail(ErrorKind::kInvalidArgument, "response count differs from curve count");
    const double mu = 0.5 * static_cast<double>(n()) * lambda;
    Coefficients out;
    out.residuals = residual_map(lambda, y);
    out.c = out.residuals / mu;
    out.d = r_.triangularView<Eigen::Upper>().solve(q1_.transpose() * (y - gram_ * out.c));
    return out;
}

SlopeEstimate estimate_slope(const SlopeDesign& design, const Eigen::VectorXd& responses, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(ErrorKind::kInvalidArgument, "lambda must be positive");
    const auto coef = design.solve(lambda, responses);
    const Grid& grid = *design.grid();
    const Eigen::MatrixXd xw = design.centered_curves() * grid.weights().asDiagonal();
    Eigen::VectorXd beta = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.size()), coef.d[1]) +
                           coef.d[2] * grid.nodes();
    // (K X_i)(s) = <K(s, .), X_i>
    beta += design.kernel() * (xw.transpose() * coef.c);
    if (!beta.allFinite() || !coef.residuals.allFinite())
        fail(ErrorKind::kNumericFailure, "slope estimate is not finite");
    SlopeEstimate est{GridFunction(design.grid(), std::move(beta)), lambda, coef.residuals,
                      responses - coef.residuals, 0.0};
    est.residual_df = static_cast<double>(design.n()) - design.degrees_of_freedom(lambda);
    return est;
}

SlopeEstimate estimate_slope(const Eigen::MatrixXd& smoothed_curves, const Eigen::VectorXd& responses,
                             const KernelMatrix& K, double lambda, const GridPtr& grid) {
    return estimate_slope(SlopeDesign(grid, smoothed_curves, K), responses, lambda);
}

std::vector<double> default_lambda_grid(double scale) {
    std::vector<double> g(45);
    for (int k = 0; k < 45; ++k) g[static_cast<std::size_t>(k)] = scale * std::pow(10.0, -8.0 + 11.0 * k / 44.0);
    return g;
}

double gcv_select_lambda(const SlopeDesign& design, const Eigen::VectorXd& responses,
                         const std::vector<double>& lambda_grid) {
    if (lambda_grid.empty()) fail(ErrorKind::kInvalidArgument, "empty lambda grid");
    double best = std::numeric_limits<double>::infinity();
    double best_lambda = std::numeric_limits<double>::quiet_NaN();
    for (double l : lambda_grid) {
        if (!(l > 0.0)) fail(ErrorKind::kInvalidArgument, "lambda grid values must be positive");
        const double g = design.gcv_score(l, responses);
        if (std::isfinite(g) && g < best) {
            best = g;
            best_lambda = l;
        }
    }
    if (!std::isfinite(best_lambda)) fail(ErrorKind::kNumericFailure, "GCV is non-finite for every lambda");
    return best_lambda;
}

double gcv_select_lambda(const Eigen::MatrixXd& smoothed_curves, const Eigen::VectorXd& responses,
                         const KernelMatrix& K, const GridPtr& grid, const std::vector<double>& lambda_grid) {
    return gcv_select_lambda(SlopeDesign(grid, smoothed_curves, K), responses, lambda_grid);
}

double rate_lambda(Eigen::Index n, int m, int s) {
    const double k = m + s + 1;
    return std::pow(static_cast<double>(n), -2.0 * k / (2.0 * k + 1.0));
}

} // namespace flmgof
