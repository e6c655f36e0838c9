#pragma once

#include "flmgof/grid.hpp"
#include "flmgof/random.hpp"

#include <Eigen/Dense>

#include <string>

namespace flmgof {

enum class ProcessTag {
    kBrownianMotion,
    kBrownianBridge,
    kOrnsteinUhlenbeck,
    kGeometricBrownian,
    kCosineSeries,
};

/// Predictor process family and its parameters. Parameters are validated
/// by the named constructors.
class ProcessKind {
public:
    static ProcessKind brownian_motion();
    static ProcessKind brownian_bridge();
    /// X(t) = sigma/sqrt(2 alpha) e^{-alpha t} B(e^{2 alpha t}); with
    /// `stationary_init` false the driving path is re-anchored so X(0)=0.
    static ProcessKind ornstein_uhlenbeck(double alpha = 1.0 / 3.0, double sigma = 1.0,
                                          bool stationary_init = true);
    static ProcessKind geometric_brownian(double s0 = 2.0, double mu = 0.5, double sigma = 1.0);
    /// sum_{j<=20} xi_j sqrt(2) cos(j pi t), xi_j ~ N(0, j^{-2l}), l in {1,2}.
    static ProcessKind cosine_series(int l);

    ProcessTag tag() const noexcept { return tag_; }
    double alpha() const noexcept { return alpha_; }
    double sigma() const noexcept { return sigma_; }
    double s0() const noexcept { return s0_; }
    double mu() const noexcept { return mu_; }
    int l() const noexcept { return l_; }
    bool stationary_init() const noexcept { return stationary_; }

    std::string name() const;

    bool operator==(const ProcessKind&) const = default;

private:
    ProcessKind() = default;

    ProcessTag tag_ = ProcessTag::kBrownianMotion;
    double alpha_ = 0.0;
    double sigma_ = 0.0;
    double s0_ = 0.0;
    double mu_ = 0.0;
    int l_ = 0;
    bool stationary_ = true;
};

inline constexpr int kBrownianTerms = 100;
inline constexpr int kCosineSeriesTerms = 20;

/// Brownian eigenfunction sqrt(2) sin((j - 1/2) pi t), j >= 1.
double bm_eigenfunction(int j, double t);
/// Brownian-bridge eigenfunction sqrt(2) sin(j pi t), j >= 1.
double bridge_eigenfunction(int j, double t);
/// Cosine basis sqrt(2) cos(j pi t), j >= 1.
double cosine_basis(int j, double t);

/// Sampler with the truncated Karhunen-Loeve basis for one (process, grid)
/// pair evaluated once. Draw order does not depend on the grid, so the
/// same seed yields the same underlying paths at every resolution.
class ProcessSampler {
public:
    ProcessSampler(ProcessKind kind, GridPtr grid);

    const ProcessKind& kind() const noexcept { return kind_; }
    const GridPtr& grid() const noexcept { return grid_; }

    Eigen::VectorXd sample(Rng& rng) const;
    /// n x M matrix, one path per row, drawn in row order.
    Eigen::MatrixXd sample(Eigen::Index n, Rng& rng) const;

private:
    Eigen::MatrixXd transform(Eigen::MatrixXd raw) const;

    ProcessKind kind_;
    GridPtr grid_;
    Eigen::MatrixXd basis_;   // terms x M
};

GridFunction sample_process(const ProcessKind& kind, const GridPtr& grid, Rng& rng);

} // namespace flmgof
