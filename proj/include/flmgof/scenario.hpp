#pragma once

#include "flmgof/grid.hpp"
#include "flmgof/process.hpp"
#include "flmgof/random.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace flmgof {

enum class SlopeBasis {
    kBrownianSine, // sqrt(2) sin((j - 1/2) pi t)
    kBridgeSine,   // sqrt(2) sin(j pi t)
    kCosine,       // sqrt(2) cos(j pi t)
};

/// sum_k coefficients[k] * basis_{k+1}(t)
struct BasisExpansion {
    SlopeBasis basis = SlopeBasis::kBrownianSine;
    std::vector<double> coefficients;
    bool operator==(const BasisExpansion&) const = default;
};

enum class ClosedFormSlope {
    kLogCosine,         // log(15 t^2 + 10) + cos(4 pi t)
    kSineMinusCosine,   // sin(2 pi t) - cos(2 pi t)
    kVertexQuadratic,   // t - (t - 0.75)^2
    kCenteredQuadratic, // pi^2 (t^2 - 1/3)
};

using SlopeSpec = std::variant<BasisExpansion, ClosedFormSlope>;

double evaluate_slope(const SlopeSpec& slope, double t);
GridFunction slope_function(const SlopeSpec& slope, const GridPtr& grid);

enum class DeviationKind {
    kNorm = 1,              // ||X||
    kSineKernel = 2,        // 25 int int sin(2 pi t s) s(1-s) t(1-t) X(s) X(t)
    kExpWeightedSquare = 3, // <e^{-X}, X^2>
    kSineSquaredNorm = 4,   // 0.25 sin(<X, X>)
};

/// A data-generating design Y = <X, beta> + delta * l(X) + eta.
struct ScenarioSpec {
    std::string id;
    SlopeSpec slope;
    ProcessKind process = ProcessKind::brownian_motion();
    DeviationKind deviation = DeviationKind::kNorm;
    std::array<double, 3> delta_levels{0.0, 0.0, 0.0};
    /// Fixed noise standard deviation; when absent the noise variance is
    /// calibrated so that the null model has the target R^2.
    std::optional<double> noise_sd;
    double r_squared = 0.95;
};

/// The nine built-in scenarios S1..S9 followed by the hybrid-effect design
/// "HYB" (Brownian predictor, cosine-series slope, 0.25 sin(<X,X>) deviation,
/// eta ~ N(0, 0.15^2), delta levels 0, 0.6, 1).
const std::vector<ScenarioSpec>& builtin_scenarios();
/// Throws kInvalidArgument for an unknown id.
const ScenarioSpec& find_scenario(std::string_view id);
/// Looks `id` up in `registry` first, then among the built-ins.
const ScenarioSpec& find_scenario(std::string_view id, const std::vector<ScenarioSpec>& registry);

GridFunction scenario_beta(std::string_view id, const GridPtr& grid);

/// Evaluates a deviation functional on grid curves. The double-integral
/// kernel of kSineKernel is tabulated once per grid.
class DeviationEvaluator {
public:
    DeviationEvaluator(DeviationKind kind, GridPtr grid);

    double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    /// One value per row of `curves`.
    Eigen::VectorXd rows(const Eigen::MatrixXd& curves) const;

private:
    DeviationKind kind_;
    GridPtr grid_;
    Eigen::MatrixXd weighted_kernel_; // W S W for kSineKernel
};

/// Deviation index j in {1,2,3} (4 for the hybrid design).
double deviation(int j, const GridFunction& x);
double deviation(DeviationKind kind, const GridFunction& x);

inline constexpr int kDefaultCalibrationDraws = 100000;

/// sigma^2 = v (1 - R^2) / R^2. Throws kCalibrationFailure for v <= 0.
double noise_variance_for(double signal_variance, double r_squared);

/// Monte-Carlo calibration of the noise variance: Var[<X, beta>] estimated
/// from `n_cal` simulated curves, then converted with noise_variance_for.
double calibrate_noise(const ScenarioSpec& spec, const GridPtr& grid, Rng& rng,
                       int n_cal = kDefaultCalibrationDraws);

struct DatasetTruth {
    std::string scenario;
    double delta = 0.0;
    double noise_variance = 0.0;
    std::uint64_t seed = 0;
};

/// n curves on a shared grid (one per row) with their scalar responses.
struct Dataset {
    GridPtr grid;
    Eigen::MatrixXd curves;
    Eigen::VectorXd responses;
    std::optional<DatasetTruth> truth;

    Eigen::Index n() const { return curves.rows(); }
    Eigen::Index M() const { return curves.cols(); }
    /// Throws kInvalidArgument when the shape invariants fail.
    void validate() const;
};

struct GenerationRequest {
    double delta = 0.0;
    int n = 100;
    int M = 30;
    std::uint64_t seed = 0;
    double noise_variance = 0.0;
};

/// Draws a dataset with explicit delta and noise variance. Curves are drawn
/// first (row by row), then the noise; a fixed seed reproduces the dataset
/// bit for bit.
Dataset generate_dataset(const ScenarioSpec& spec, const GenerationRequest& request);

/// Seed used for the noise calibration inside the convenience overload.
inline constexpr std::uint64_t kCalibrationSeed = 0x5eedca11b0a7e5ULL;

/// Deviation level d in {0,1,2}; the noise comes from spec.noise_sd or from
/// calibrate_noise on an M-point grid with kCalibrationSeed.
Dataset generate_dataset(const ScenarioSpec& spec, int d, int n, int M, std::uint64_t seed);

/// Noise variance the convenience overload would use for (spec, M).
double resolve_noise_variance(const ScenarioSpec& spec, int M, int n_cal = kDefaultCalibrationDraws);

} // namespace flmgof
