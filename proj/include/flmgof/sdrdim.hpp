#pragma once

#include "flmgof/grid.hpp"
#include "flmgof/random.hpp"

#include <Eigen/Dense>

namespace flmgof {

/// Sample indicative operator
///   M(s,t) = E(eps X)(s) E(eps X)(t) + (H W H)(s,t),
///   E(eps X) = (1/n) sum_j eps_j X_j,  H = (1/n) sum_j eps_j X_j (x) X_j,
/// tabulated on the grid.
struct IndicativeOperator {
    GridPtr grid;
    Eigen::MatrixXd entries;
};

/// Throws kInvalidArgument when the residual count differs from the curve
/// count or n == 0.
IndicativeOperator indicative_operator(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& curves,
                                       const GridPtr& grid);

/// Same operator from a residual second-moment matrix S (n x n):
/// X' (S o (11' + G)) X / n^2 with G_ij = <X_i, X_j>. S = eps eps' gives
/// indicative_operator; S averaged over draws gives the averaged operator.
Eigen::MatrixXd indicative_from_moments(const Eigen::MatrixXd& moments, const Eigen::MatrixXd& curves,
                                        const Grid& grid);

/// Eigenvalues of the operator under the weighted inner product, clipped at
/// zero and sorted in descending order.
Eigen::VectorXd operator_spectrum(const IndicativeOperator& op);

struct RidgePair {
    double c1;
    double c2;
};

inline constexpr int kDefaultRidgeReplicates = 100;

/// Data-driven ridge: averages B indicative operators built from synthetic
/// residuals eta ~ N(0, sigma2_hat), takes the largest eigenvalue l* of the
/// average, s* = l*/(l*+1), and returns c1 = c2 = max(2 s*, n^{-1/2}).
RidgePair null_reference_ridge(const Eigen::MatrixXd& curves, const GridPtr& grid, double sigma2_hat,
                               int B, Rng& rng);

/// Number of normalized eigenvalues s = l/(l+1) strictly above ridge.c1.
int estimate_dimension(const Eigen::VectorXd& eigvals, const RidgePair& ridge);

} // namespace flmgof
