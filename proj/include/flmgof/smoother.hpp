#pragma once

#include "flmgof/grid.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace flmgof {

/// First-stage penalized spline smoothing of discretely observed curves.
///
/// Minimizes (1/M) sum_j (x_j - g(t_j))^2 + lambda1 int (g^{(r)})^2 over
/// H^r[0,1]; the minimizer is the natural spline of order 2r, so on the
/// grid the fit is (I + M lambda1 P)^{-1} x with P the Gram matrix of the
/// roughness penalty. P is diagonalized once per (grid, r) so that hat
/// matrices and per-curve GCV scores are cheap for every lambda1.
class SplineSmoother {
public:
    /// r in {1, 2}. Throws kInsufficientData when M < 2r and
    /// kInvalidArgument for an unsupported r.
    SplineSmoother(GridPtr grid, int r = 2);

    const GridPtr& grid() const noexcept { return grid_; }
    int order() const noexcept { return r_; }

    /// Roughness Gram matrix: g' P g = int (g^{(r)})^2 for the natural spline
    /// through the grid values g.
    const Eigen::MatrixXd& penalty() const noexcept { return penalty_; }

    /// Linear smoothing operator for a fixed lambda1.
    Eigen::MatrixXd hat_matrix(double lambda1) const;

    Eigen::VectorXd smooth(const Eigen::Ref<const Eigen::VectorXd>& x, double lambda1) const;

    /// GCV score (1/M) RSS / (1 - tr S / M)^2.
    double gcv_score(const Eigen::Ref<const Eigen::VectorXd>& x, double lambda1) const;

    /// Minimizer of the GCV score over `lambda_grid` (first minimum on ties).
    double select_lambda(const Eigen::Ref<const Eigen::VectorXd>& x,
                         const std::vector<double>& lambda_grid) const;

    double roughness(const Eigen::Ref<const Eigen::VectorXd>& g) const;

private:
    Eigen::VectorXd shrink_factors(double lambda1) const;

    GridPtr grid_;
    int r_;
    Eigen::MatrixXd penalty_;
    Eigen::MatrixXd basis_;     // Demmler-Reinsch eigenvectors of P
    Eigen::VectorXd penalty_ev_; // ascending; the r null-space entries are exactly 0
};

/// 40 log-spaced values on [1e-10, 1e2].
const std::vector<double>& default_lambda1_grid();

struct SmoothCurve {
    GridFunction values;
    double lambda1;
    int r;
};

/// `lambda1` empty selects the smoothing parameter by per-curve GCV over
/// default_lambda1_grid(). lambda1 == 0 returns the observations unchanged.
SmoothCurve smooth_curve(const ObservedCurve& obs, int r, std::optional<double> lambda1);

struct SmoothedSample {
    Eigen::MatrixXd curves;        // n x M, one smoothed curve per row
    Eigen::VectorXd lambda1;       // per-curve smoothing parameters
};

/// Smooths every row of `curves` with a shared smoother.
SmoothedSample smooth_curves(const SplineSmoother& smoother, const Eigen::MatrixXd& curves,
                             std::optional<double> lambda1);

} // namespace flmgof
