#include "flmgof/scenario.hpp"

#include "flmgof/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace flmgof {

using std::numbers::pi;

namespace {

double basis_value(SlopeBasis basis, int j, double t) {
    switch (basis) {
    case SlopeBasis::kBrownianSine: return bm_eigenfunction(j, t);
    case SlopeBasis::kBridgeSine: return bridge_eigenfunction(j, t);
    case SlopeBasis::kCosine: return cosine_basis(j, t);
    }
    return 0.0;
}

std::vector<double> alternating_cosine_coefficients(double scale) {
    std::vector<double> c(20);
    for (int j = 1; j <= 20; ++j) c[static_cast<std::size_t>(j - 1)] = scale * ((j % 2 == 0) ? 1.0 : -1.0) / (j * j);
    return c;
}

std::vector<ScenarioSpec> make_builtins() {
    const double r2 = std::numbers::sqrt2;
    std::vector<ScenarioSpec> s;
    auto add = [&](std::string id, SlopeSpec slope, ProcessKind process, DeviationKind dev,
                   std::array<double, 3> deltas) {
        ScenarioSpec spec;
        spec.id = std::move(id);
        spec.slope = std::move(slope);
        spec.process = process;
        spec.deviation = dev;
        spec.delta_levels = deltas;
        s.push_back(std::move(spec));
    };
    const auto bm = ProcessKind::brownian_motion();
    const auto ou = ProcessKind::ornstein_uhlenbeck(1.0 / 3.0, 1.0, true);
    add("S1", BasisExpansion{SlopeBasis::kBrownianSine, {2 / r2, 4 / r2, 5 / r2}}, bm, DeviationKind::kNorm,
        {0.0, 0.25, 0.75});
    add("S2", BasisExpansion{SlopeBasis::kBridgeSine, {2 / r2, 4 / r2, 5 / r2}}, ProcessKind::brownian_bridge(),
        DeviationKind::kSineKernel, {0.0, -2.0, -7.5});
    add("S3", BasisExpansion{SlopeBasis::kBrownianSine, {0.0, 2 / r2, 4 / r2, 0.0, 0.0, 0.0, 5 / r2}}, bm,
        DeviationKind::kNorm, {0.0, -0.2, -0.5});
    const double s4 = std::pow(2.0, 1.5);
    add("S4", BasisExpansion{SlopeBasis::kCosine, alternating_cosine_coefficients(s4)},
        ProcessKind::cosine_series(1), DeviationKind::kSineKernel, {0.0, -1.0, -3.0});
    add("S5", BasisExpansion{SlopeBasis::kCosine, alternating_cosine_coefficients(s4)},
        ProcessKind::cosine_series(2), DeviationKind::kSineKernel, {0.0, -1.0, -3.0});
    add("S6", ClosedFormSlope::kLogCosine, bm, DeviationKind::kNorm, {0.0, 0.2, 1.0});
    add("S7", ClosedFormSlope::kSineMinusCosine, ou, DeviationKind::kSineKernel, {0.0, -0.25, -1.0});
    add("S8", ClosedFormSlope::kVertexQuadratic, ou, DeviationKind::kExpWeightedSquare, {0.0, -0.01, -0.1});
    add("S9", ClosedFormSlope::kCenteredQuadratic, ProcessKind::geometric_brownian(2.0, 0.5, 1.0),
        DeviationKind::kExpWeightedSquare, {0.0, 0.5, 2.5});
    // sum_j 4 (-1)^j j^{-2} cos(j pi t) in the sqrt(2)-normalized cosine basis.
    add("HYB", BasisExpansion{SlopeBasis::kCosine, alternating_cosine_coefficients(4.0 / r2)}, bm,
        DeviationKind::kSineSquaredNorm, {0.0, 0.6, 1.0});
    s.back().noise_sd = 0.15;
    return s;
}

} // namespace

double evaluate_slope(const SlopeSpec& slope, double t) {
    if (const auto* e = std::get_if<BasisExpansion>(&slope)) {
        double v = 0.0;
        for (std::size_t k = 0; k < e->coefficients.size(); ++k)
            if (e->coefficients[k] != 0.0) v += e->coefficients[k] * basis_value(e->basis, static_cast<int>(k) + 1, t);
        return v;
    }
    switch (std::get<ClosedFormSlope>(slope)) {
    case ClosedFormSlope::kLogCosine: return std::log(15.0 * t * t + 10.0) + std::cos(4.0 * pi * t);
    case ClosedFormSlope::kSineMinusCosine: return std::sin(2.0 * pi * t) - std::cos(2.0 * pi * t);
    case ClosedFormSlope::kVertexQuadratic: return t - (t - 0.75) * (t - 0.75);
    case ClosedFormSlope::kCenteredQuadratic: return pi * pi * (t * t - 1.0 / 3.0);
    }
    return 0.0;
}

GridFunction slope_function(const SlopeSpec& slope, const GridPtr& grid) {
    return GridFunction::from(grid, [&](double t) { return evaluate_slope(slope, t); });
}

const std::vector<ScenarioSpec>& builtin_scenarios() {
    static const std::vector<ScenarioSpec> all = make_builtins();
    return all;
}

const ScenarioSpec& find_scenario(std::string_view id) {
    for (const auto& s : builtin_scenarios())
        if (s.id == id) return s;
    fail(ErrorKind::kInvalidArgument, "unknown scenario id '" + std::string(id) + "'");
}

const ScenarioSpec& find_scenario(std::string_view id, const std::vector<ScenarioSpec>& registry) {
    for (const auto& s : registry)
        if (s.id == id) return s;
    return find_scenario(id);
}

GridFunction scenario_beta(std::string_view id, const GridPtr& grid) {
    return slope_function(find_scenario(id).slope, grid);
}

DeviationEvaluator::DeviationEvaluator(DeviationKind kind, GridPtr grid) : kind_(kind), grid_(std::move(grid)) {
    if (kind_ == DeviationKind::kSineKernel) {
        const Eigen::VectorXd& t = grid_->nodes();
        const Eigen::VectorXd& w = grid_->weights();
        const auto M = t.size();
        weighted_kernel_.resize(M, M);
        for (Eigen::Index a = 0; a < M; ++a)
            for (Eigen::Index b = 0; b < M; ++b)
                weighted_kernel_(a, b) = w[a] * w[b] * 25.0 * std::sin(2.0 * pi * t[a] * t[b]) * t[a] *
                                         (1.0 - t[a]) * t[b] * (1.0 - t[b]);
    }
}

double DeviationEvaluator::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    const Eigen::VectorXd& w = grid_->weights();
    switch (kind_) {
    case DeviationKind::kNorm: return std::sqrt((w.array() * x.array().square()).sum());
    case DeviationKind::kSineKernel: return x.dot(weighted_kernel_ * x);
    case DeviationKind::kExpWeightedSquare:
        return (w.array() * (-x.array()).exp() * x.array().square()).sum();
    case DeviationKind::kSineSquaredNorm: return 0.25 * std::sin((w.array() * x.array().square()).sum());
    }
    return 0.0;
}

Eigen::VectorXd DeviationEvaluator::rows(const Eigen::MatrixXd& curves) const {
    Eigen::VectorXd out(curves.rows());
    for (Eigen::Index i = 0; i < curves.rows(); ++i) out[i] = (*this)(curves.row(i).transpose());
    return out;
}

double deviation(DeviationKind kind, const GridFunction& x) {
    return DeviationEvaluator(kind, x.grid())(x.values());
}

double deviation(int j, const GridFunction& x) {
    if (j < 1 || j > 4) fail(ErrorKind::kInvalidArgument, "deviation index must be in 1..4");
    return deviation(static_cast<DeviationKind>(j), x);
}

double noise_variance_for(double signal_variance, double r_squared) {
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
        fail(ErrorKind::kCalibrationFailure, "signal variance must be positive, got " + std::to_string(signal_variance));
    if (!(r_squared > 0.0 && r_squared < 1.0)) fail(ErrorKind::kInvalidArgument, "R^2 must lie in (0, 1)");
    return signal_variance * (1.0 - r_squared) / r_squared;
}

double calibrate_noise(const ScenarioSpec& spec, const GridPtr& grid, Rng& rng, int n_cal) {
    if (n_cal < 10000) fail(ErrorKind::kInvalidArgument, "noise calibration needs at least 1e4 draws");
    const ProcessSampler sampler(spec.process, grid);
    const Eigen::VectorXd beta_w = grid->weights().cwiseProduct(slope_function(spec.slope, grid).values());
    // Chan et al. pairwise merge of chunk means and sums of squares.
    double count = 0.0, mean = 0.0, m2 = 0.0;
    constexpr int kChunk = 10000;
    for (int done = 0; done < n_cal; done += kChunk) {
        const int m = std::min(kChunk, n_cal - done);
        const Eigen::VectorXd s = sampler.sample(m, rng) * beta_w;
        const double cm = s.mean();
        const double cm2 = (s.array() - cm).square().sum();
        const double delta = cm - mean;
        const double total = count + m;
        mean += delta * m / total;
        m2 += cm2 + delta * delta * count * m / total;
        count = total;
    }
    const double var = m2 / (count - 1.0);
    return noise_variance_for(var, spec.r_squared);
}

void Dataset::validate() const {
    if (!grid) fail(ErrorKind::kInvalidArgument, "dataset without grid");
    if (n() < 2) fail(ErrorKind::kInvalidArgument, "dataset needs n >= 2");
    if (static_cast<std::size_t>(M()) != grid->size())
        fail(ErrorKind::kInvalidArgument, "curve length does not match grid size");
    if (responses.size() != n()) fail(ErrorKind::kInvalidArgument, "curve count differs from response count");
    if (!curves.allFinite() || !responses.allFinite()) fail(ErrorKind::kInvalidArgument, "dataset has non-finite values");
}

Dataset generate_dataset(const ScenarioSpec& spec, const GenerationRequest& req) {
    if (req.n < 2) fail(ErrorKind::kInvalidArgument, "dataset needs n >= 2");
    if (!(req.noise_variance >= 0.0)) fail(ErrorKind::kInvalidArgument, "noise variance must be non-negative");
    auto grid = make_uniform_grid(req.M);
    Rng rng(req.seed);
    const ProcessSampler sampler(spec.process, grid);
    Dataset ds;
    ds.grid = grid;
    ds.curves = sampler.sample(req.n, rng);
    const Eigen::VectorXd beta_w = grid->weights().cwiseProduct(slope_function(spec.slope, grid).values());
    ds.responses = ds.curves * beta_w;
    if (req.delta != 0.0) ds.responses += req.delta * DeviationEvaluator(spec.deviation, grid).rows(ds.curves);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = std::sqrt(req.noise_variance);
    for (Eigen::Index i = 0; i < ds.responses.size(); ++i) ds.responses[i] += sd * normal(rng);
    ds.truth = DatasetTruth{spec.id, req.delta, req.noise_variance, req.seed};
    return ds;
}

double resolve_noise_variance(const ScenarioSpec& spec, int M, int n_cal) {
    if (spec.noise_sd) return *spec.noise_sd * *spec.noise_sd;
    Rng rng(kCalibrationSeed);
    return calibrate_noise(spec, make_uniform_grid(M), rng, n_cal);
}

Dataset generate_dataset(const ScenarioSpec& spec, int d, int n, int M, std::uint64_t seed) {
    if (d < 0 || d > 2) fail(ErrorKind::kInvalidArgument, "deviation level d must be 0, 1 or 2");
    GenerationRequest req;
    req.delta = spec.delta_levels[static_cast<std::size_t>(d)];
    req.n = n;
    req.M = M;
    req.seed = seed;
    req.noise_variance = resolve_noise_variance(spec, M);
    return generate_dataset(spec, req);
}

} // namespace flmgof
