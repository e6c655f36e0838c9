#include "flmgof/sdrdim.hpp"

#include "flmgof/error.hpp"
#include "flmgof/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace flmgof {

Eigen::MatrixXd indicative_from_moments(const Eigen::MatrixXd& moments, const Eigen::MatrixXd& curves,
                                        const Grid& grid) {
    const Eigen::Index n = curves.rows();
    const Eigen::MatrixXd xw = curves * grid.weights().asDiagonal();
    const Eigen::MatrixXd gram = xw * curves.transpose();
    // E(eps X) (x) E(eps X) contributes the all-ones part, H W H the Gram part.
    const Eigen::MatrixXd mixed = moments.array() * (gram.array() + 1.0);
    const double nn = static_cast<double>(n) * static_cast<double>(n);
    return linalg::symmetrize(curves.transpose() * mixed * curves / nn);
}

IndicativeOperator indicative_operator(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& curves,
                                       const GridPtr& grid) {
    if (residuals.size() != curves.rows())
        fail(ErrorKind::kInvalidArgument, "residual count differs from curve count");
    if (curves.rows() == 0) fail(ErrorKind::kInvalidArgument, "indicative operator needs at least one curve");
    if (static_cast<std::size_t>(curves.cols()) != grid->size())
        fail(ErrorKind::kInvalidArgument, "curve length does not match grid size");
    return {grid, indicative_from_moments(residuals * residuals.transpose(), curves, *grid)};
}

Eigen::VectorXd operator_spectrum(const IndicativeOperator& op) {
    const Eigen::MatrixXd sym = linalg::weighted_form(op.entries, op.grid->sqrt_weights());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    Eigen::VectorXd ev = es.eigenvalues().reverse().cwiseMax(0.0);
    return ev;
}

RidgePair null_reference_ridge(const Eigen::MatrixXd& curves, const GridPtr& grid, double sigma2_hat, int B,
                               Rng& rng) {
    if (B < 1) fail(ErrorKind::kInvalidArgument, "ridge calibration needs B >= 1");
    if (!(sigma2_hat >= 0.0) || !std::isfinite(sigma2_hat))
        fail(ErrorKind::kInvalidArgument, "residual variance must be finite and non-negative");
    const Eigen::Index n = curves.rows();
    if (n < 1) fail(ErrorKind::kInvalidArgument, "ridge calibration needs curves");
    const double sd = std::sqrt(sigma2_hat);
    std::normal_distribution<double> normal(0.0, 1.0);
    // The average of B operators is linear in the averaged second moment of
    // the synthetic residuals, so one operator build suffices.
    Eigen::MatrixXd moments = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd eta(n);
    for (int b = 0; b < B; ++b) {
        for (Eigen::Index i = 0; i < n; ++i) eta[i] = sd * normal(rng);
        moments.selfadjointView<Eigen::Lower>().rankUpdate(eta);
    }
    moments = moments.selfadjointView<Eigen::Lower>();
    moments /= static_cast<double>(B);
    const IndicativeOperator avg{grid, indicative_from_moments(moments, curves, *grid)};
    const double top = operator_spectrum(avg)[0];
    const double s_top = top / (top + 1.0);
    const double c = std::max(2.0 * s_top, 1.0 / std::sqrt(static_cast<double>(n)));
    return {c, c};
}

int estimate_dimension(const Eigen::VectorXd& eigvals, const RidgePair& ridge) {
    int q = 0;
    for (Eigen::Index i = 0; i < eigvals.size(); ++i) {
        const double l = std::max(eigvals[i], 0.0);
        if (l / (l + 1.0) > ridge.c1) ++q;
    }
    return q;
}

} // namespace flmgof
