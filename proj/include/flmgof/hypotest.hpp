#pragma once

#include "flmgof/grid.hpp"
#include "flmgof/rkhs.hpp"
#include "flmgof/scenario.hpp"
#include "flmgof/sdrdim.hpp"
#include "flmgof/smoother.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>

namespace flmgof {

enum class SmoothingKernel { kGaussian, kEpanechnikov };

/// How gamma_{n,M} is formed for the V0 branch.
enum class Standardization {
    /// gamma = n^2 / (sigma2_hat ||(I - H) w||^2), the exact conditional
    /// variance of V0 for a linear smoother H with residual variance
    /// sigma2_hat. Scale invariant in Y.
    kResidualProjection,
    /// gamma = n / sigma_n^2 with the eigen-series sigma_n^2 alone.
    kEigenSeries,
};

enum class LambdaRule { kGcv, kRate };

struct TestConfig {
    double weight_scale = 0.01;
    double bandwidth_exponent = -0.4;
    double alpha = 0.05;
    SmoothingKernel kernel = SmoothingKernel::kGaussian;
    int ridge_B = kDefaultRidgeReplicates;
    int smoothing_order = 2;
    std::optional<double> lambda1; // empty: per-curve GCV
    LambdaRule lambda_rule = LambdaRule::kGcv;
    Standardization standardization = Standardization::kResidualProjection;
    /// Seeds the synthetic residuals of the ridge calibration.
    std::uint64_t seed = 0;

    double bandwidth(Eigen::Index n) const;
    /// Throws kInvalidArgument when an invariant fails for sample size n.
    void validate(Eigen::Index n) const;
};

double kernel_density(SmoothingKernel kernel, double u);

/// V0 = (1/n) sum_i eps_i w(X_i), w(X) = weight_scale * ||X||.
double v0(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& curves, const Grid& grid,
          double weight_scale);

/// V1 = sum_{i != j} eps_i eps_j K_h(z_i - z_j) / (n (n - 1)),
/// K_h(u) = K(u/h)/h. Throws kInvalidArgument for h <= 0 or n < 2.
double v1(const Eigen::VectorXd& residuals, const Eigen::VectorXd& scores, double h,
          SmoothingKernel kernel = SmoothingKernel::kGaussian);

/// Studentized V1: n h^{1/2} V1 / sigma_V1 with
/// sigma_V1^2 = (2 / (n (n-1))) sum_{i != j} eps_i^2 eps_j^2 K_h^2(z_i - z_j) h.
double v1_studentized(const Eigen::VectorXd& residuals, const Eigen::VectorXd& scores, double h,
                      SmoothingKernel kernel = SmoothingKernel::kGaussian);

struct StandardizingFactor {
    double gamma;
    double sigma_n2;
};

/// sigma_n^2 = sum_nu w_nu^2 / (1 + lambda rho*_nu)^2 with
/// w_nu = <X_w, phi*_nu>, X_w = (1/n) sum_i X_i w(X_i); gamma = n / sigma_n^2.
/// Throws kDegenerateVariance when sigma_n^2 is not positive and finite.
StandardizingFactor standardizing_factor(const EigenSystem& eigsys, double lambda,
                                         const Eigen::MatrixXd& curves, double weight_scale);

/// P(chi^2_1 > x) = erfc(sqrt(x/2)). Throws kInvalidArgument for x < 0.
double chi2_upper_tail(double x);
/// P(N(0,1) > z).
double normal_upper_tail(double z);

struct TestDiagnostics {
    double lambda = 0.0;
    double lambda_scale = 0.0;
    double residual_df = 0.0;
    double sigma2_hat = 0.0;       // sample variance of residuals (ridge input)
    double sigma2_unbiased = 0.0;  // RSS / (n - tr H) (V0 studentization)
    double v0_variance = 0.0;      // ||(I - H) w||^2 / n
    RidgePair ridge{0.0, 0.0};
    double top_normalized_eigenvalue = 0.0;
    Eigen::Index eigen_count = 0;
    double bandwidth = 0.0;
    double mean_lambda1 = 0.0;
};

/// Stand-alone component tests evaluated on the same fit.
struct ComponentTests {
    double v0_statistic = 0.0; // gamma V0^2, chi^2_1 reference
    double v0_p_value = 1.0;
    double v1_z = 0.0;          // studentized V1, N(0,1) upper tail
    double v1_p_value = 1.0;
};

struct TestReport {
    double T_n = 0.0;
    int q_hat = 0;
    double V0 = 0.0;
    double V1 = 0.0;
    double gamma = 0.0;
    double sigma_n2 = 0.0; // eigen-series value, reported for every run
    double p_value = 1.0;
    bool reject = false;
    double alpha = 0.05;
    TestDiagnostics diagnostics;
    ComponentTests components;
    Eigen::VectorXd beta_hat;
};

/// Per-grid objects that every test on that grid reuses.
class GridResources {
public:
    GridResources(GridPtr grid, int smoothing_order);

    const GridPtr& grid() const { return grid_; }
    const SplineSmoother& smoother() const { return smoother_; }
    const KernelMatrix& kernel() const { return kernel_; }

private:
    GridPtr grid_;
    SplineSmoother smoother_;
    KernelMatrix kernel_;
};

/// Full pipeline: smooth, select lambda, estimate the slope, build the
/// eigen-system, calibrate the ridge, estimate q, then
///   T_n = gamma |V0^2| if q_hat == 0, gamma |V1| otherwise,
/// and p = P(chi^2_1 > T_n). Errors carry the failing stage.
TestReport hybrid_test(const Dataset& data, const TestConfig& config);
TestReport hybrid_test(const Dataset& data, const TestConfig& config, const GridResources& resources);

} // namespace flmgof
