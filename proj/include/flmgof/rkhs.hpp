#pragma once

#include "flmgof/grid.hpp"

#include <Eigen/Dense>

#include <vector>

namespace flmgof {

/// Bivariate function tabulated at all node pairs of a grid.
struct KernelMatrix {
    GridPtr grid;
    Eigen::MatrixXd entries;
};

/// Reproducing kernel of H1, the complement of the linear functions in the
/// order-2 Sobolev space with norm sum_i (int beta^{(i)})^2 + int (beta'')^2:
///   K(s,t) = k2(s) k2(t) - k4(|s - t|)
/// with the scaled Bernoulli polynomials k1(x) = x - 1/2,
/// k2 = (k1^2 - 1/12)/2 and k4 = (k1^4 - k1^2/2 + 7/240)/24.
double sobolev_kernel_value(double s, double t);

/// Only m == 2 is supported; any other order throws kInvalidArgument.
KernelMatrix sobolev_kernel(const GridPtr& grid, int m = 2);

/// Sample covariance (1/n) sum_i (X_i - Xbar)(s) (X_i - Xbar)(t) of the rows
/// of `curves`. Requires n >= 2.
KernelMatrix covariance_estimate(const GridPtr& grid, const Eigen::MatrixXd& curves);

/// Eigen-system (rho*_nu, phi*_nu) that simultaneously diagonalizes the
/// covariance operator C and the roughness penalty:
///   <C phi*_mu, phi*_nu> = delta_{mu nu},
///   <(C + K^{-1}) phi*_mu, phi*_nu> = (1 + rho*_nu) delta_{mu nu}.
struct EigenSystem {
    GridPtr grid;
    Eigen::VectorXd rho_star;  // ascending, >= 0
    Eigen::MatrixXd phi_star;  // M x count, grid values of phi*_nu per column
    Eigen::VectorXd rho_tilde; // eigenvalues of K~^{1/2} C K~^{1/2}, descending

    Eigen::Index count() const { return rho_star.size(); }
    GridFunction phi(Eigen::Index nu) const;
};

/// Builds the eigen-system through K~ = K^{1/2}(K^{1/2} C K^{1/2} + I)^{-1} K^{1/2}
/// and Omega = K~^{1/2} C K~^{1/2}, all in the quadrature-weighted inner
/// product. Pairs with rho~ below the spectral clip are dropped. Throws
/// kInvalidArgument on non-finite input or when C has no positive
/// eigenvalue.
EigenSystem build_eigensystem(const KernelMatrix& K, const KernelMatrix& C);

/// Penalized regression design for fixed smoothed curves.
///
/// The slope estimate minimizes
///   (1/n) sum_i (Y_i - <X_i, beta>)^2 + (lambda/2) J(beta, beta),
/// J(beta, beta) = int (beta'')^2, over H = span{1, t} + H1. Curves and
/// responses are centered at their sample means. By the representer theorem
/// beta = d_1 + d_2 t + sum_i c_i (K X_i); the linear system is reduced once
/// with a QR factorization of the null-space design and an eigen
/// decomposition of the projected Gram matrix, so every lambda costs O(n^2).
class SlopeDesign {
public:
    /// Throws kInvalidArgument for size mismatches or n < 4, and
    /// kNumericFailure (with a condition number in the message) when the
    /// null-space design is rank deficient.
    SlopeDesign(GridPtr grid, const Eigen::MatrixXd& smoothed_curves, const KernelMatrix& K);

    Eigen::Index n() const { return centered_.rows(); }
    const GridPtr& grid() const { return grid_; }
    const Eigen::MatrixXd& centered_curves() const { return centered_; }
    const Eigen::VectorXd& curve_mean() const { return curve_mean_; }
    /// Sigma_ij = <X_i, K X_j>.
    const Eigen::MatrixXd& gram() const { return gram_; }
    const Eigen::MatrixXd& kernel() const { return kernel_; }
    /// Mean of diag(Sigma): the natural scale for lambda.
    double lambda_scale() const { return lambda_scale_; }

    /// Effective degrees of freedom tr(H(lambda)) of the full fitted-value map
    /// (response centering included).
    double degrees_of_freedom(double lambda) const;

    /// (I - H(lambda)) v for the full fitted-value map.
    Eigen::VectorXd residual_map(double lambda, const Eigen::Ref<const Eigen::VectorXd>& v) const;

    double gcv_score(double lambda, const Eigen::Ref<const Eigen::VectorXd>& y) const;

    struct Coefficients {
        Eigen::Vector3d d; // intercept, constant and linear slope terms
        Eigen::VectorXd c;
        Eigen::VectorXd residuals;
    };
    Coefficients solve(double lambda, const Eigen::Ref<const Eigen::VectorXd>& y) const;

private:
    Eigen::VectorXd residual_shrink(double lambda) const;

    GridPtr grid_;
    Eigen::MatrixXd centered_;
    Eigen::VectorXd curve_mean_;
    Eigen::MatrixXd kernel_;  // K on the grid
    Eigen::MatrixXd gram_;
    Eigen::MatrixXd null_design_; // n x 3: 1, <X_i, 1>, <X_i, t>
    Eigen::MatrixXd q1_;          // n x 3
    Eigen::Matrix3d r_;
    Eigen::MatrixXd q2u_;         // Q2 U, n x (n-2)
    Eigen::VectorXd projected_ev_; // eigenvalues of Q2' Sigma Q2
    double lambda_scale_ = 1.0;
};

struct SlopeEstimate {
    GridFunction beta_hat;
    double lambda;
    Eigen::VectorXd residuals;
    Eigen::VectorXd fitted;
    /// Residual degrees of freedom n - tr H(lambda).
    double residual_df;
};

SlopeEstimate estimate_slope(const SlopeDesign& design, const Eigen::VectorXd& responses, double lambda);

/// Convenience form that builds the design. Requires lambda > 0.
SlopeEstimate estimate_slope(const Eigen::MatrixXd& smoothed_curves, const Eigen::VectorXd& responses,
                             const KernelMatrix& K, double lambda, const GridPtr& grid);

/// Log-spaced lambda values scale * 10^e for e in [-8, 3] (45 points).
std::vector<double> default_lambda_grid(double scale);

/// Lambda minimizing GCV(lambda) = n RSS / (n - tr H)^2 over `lambda_grid`.
/// Non-finite scores are skipped; kNumericFailure if none is finite.
double gcv_select_lambda(const SlopeDesign& design, const Eigen::VectorXd& responses,
                         const std::vector<double>& lambda_grid);

double gcv_select_lambda(const Eigen::MatrixXd& smoothed_curves, const Eigen::VectorXd& responses,
                         const KernelMatrix& K, const GridPtr& grid, const std::vector<double>& lambda_grid);

/// Rate-based penalty lambda = n^{-2k/(2k+1)}, k = m + s + 1.
double rate_lambda(Eigen::Index n, int m = 2, int s = 0);

} // namespace flmgof
