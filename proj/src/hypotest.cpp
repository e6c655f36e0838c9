#include "flmgof/hypotest.hpp"

#include "flmgof/error.hpp"
#include "flmgof/random.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace flmgof {

namespace {

template <class F>
auto staged(const char* stage, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        if (!e.stage().empty()) throw;
        throw e.with_stage(stage);
    }
}

Eigen::VectorXd weights_of(const Eigen::MatrixXd& curves, const Grid& grid, double weight_scale) {
    return weight_scale * row_norms(grid, curves);
}

Eigen::MatrixXd kernel_table(const Eigen::VectorXd& scores, double h, SmoothingKernel kernel) {
    const Eigen::Index n = scores.size();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            k(i, j) = kernel_density(kernel, (scores[i] - scores[j]) / h) / h;
    k.diagonal().setZero();
    return k;
}

void check_pairs(const Eigen::VectorXd& residuals, const Eigen::VectorXd& scores, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) fail(ErrorKind::kInvalidArgument, "bandwidth must be positive");
    if (residuals.size() != scores.size()) fail(ErrorKind::kInvalidArgument, "residual and score counts differ");
    if (residuals.size() < 2) fail(ErrorKind::kInvalidArgument, "V1 needs n >= 2");
}

} // namespace

double TestConfig::bandwidth(Eigen::Index n) const {
    return std::pow(static_cast<double>(n), bandwidth_exponent);
}

void TestConfig::validate(Eigen::Index n) const {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::kInvalidArgument, "alpha must lie in (0, 1)");
    if (!(weight_scale > 0.0) || !std::isfinite(weight_scale))
        fail(ErrorKind::kInvalidArgument, "weight scale must be positive");
    if (ridge_B < 1) fail(ErrorKind::kInvalidArgument, "ridge replicate count must be >= 1");
    if (smoothing_order != 1 && smoothing_order != 2)
        fail(ErrorKind::kInvalidArgument, "smoothing order must be 1 or 2");
    if (lambda1 && (!(*lambda1 >= 0.0) || !std::isfinite(*lambda1)))
        fail(ErrorKind::kInvalidArgument, "lambda1 must be finite and non-negative");
    if (n >= 2) {
        const double h = bandwidth(n);
        if (!(h > 0.0 && h < 1.0)) fail(ErrorKind::kInvalidArgument, "bandwidth n^e must lie in (0, 1)");
    }
}

double kernel_density(SmoothingKernel kernel, double u) {
    switch (kernel) {
    case SmoothingKernel::kGaussian:
        return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    case SmoothingKernel::kEpanechnikov:
        return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    }
    return 0.0;
}

double v0(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& curves, const Grid& grid, double weight_scale) {
    if (residuals.size() != curves.rows()) fail(ErrorKind::kInvalidArgument, "residual and curve counts differ");
    if (residuals.size() == 0) fail(ErrorKind::kInvalidArgument, "V0 needs n >= 1");
    return residuals.dot(weights_of(curves, grid, weight_scale)) / static_cast<double>(residuals.size());
}

double v1(const Eigen::VectorXd& residuals, const Eigen::VectorXd& scores, double h, SmoothingKernel kernel) {
    check_pairs(residuals, scores, h);
    const double n = static_cast<double>(residuals.size());
    const Eigen::MatrixXd k = kernel_table(scores, h, kernel);
    return residuals.dot(k * residuals) / (n * (n - 1.0));
}

double v1_studentized(const Eigen::VectorXd& residuals, const Eigen::VectorXd& scores, double h,
                      SmoothingKernel kernel) {
    check_pairs(residuals, scores, h);
    const double n = static_cast<double>(residuals.size());
    const Eigen::MatrixXd k = kernel_table(scores, h, kernel);
    const double stat = residuals.dot(k * residuals) / (n * (n - 1.0));
    const Eigen::VectorXd e2 = residuals.array().square();
    const double var = 2.0 * h * e2.dot(k.array().square().matrix() * e2) / (n * (n - 1.0));
    if (!(var > 0.0) || !std::isfinite(var))
        fail(ErrorKind::kDegenerateVariance, "V1 variance estimate is not positive");
    return n * std::sqrt(h) * stat / std::sqrt(var);
}

StandardizingFactor standardizing_factor(const EigenSystem& eigsys, double lambda, const Eigen::MatrixXd& curves,
                                         double weight_scale) {
    if (eigsys.count() == 0) fail(ErrorKind::kInvalidArgument, "empty eigen-system");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(ErrorKind::kInvalidArgument, "lambda must be positive");
    const Grid& grid = *eigsys.grid;
    if (static_cast<std::size_t>(curves.cols()) != grid.size())
        fail(ErrorKind::kInvalidArgument, "curve length does not match grid size");
    const double n = static_cast<double>(curves.rows());
    const Eigen::VectorXd w = weights_of(curves, grid, weight_scale);
    const Eigen::VectorXd xw = curves.transpose() * w / n;
    const Eigen::VectorXd wnu = eigsys.phi_star.transpose() * grid.weights().cwiseProduct(xw);
    const Eigen::ArrayXd denom = (1.0 + lambda * eigsys.rho_star.array()).square();
    const double sigma_n2 = (wnu.array().square() / denom).sum();
    if (!(sigma_n2 > 0.0) || !std::isfinite(sigma_n2))
        fail(ErrorKind::kDegenerateVariance, "eigen-series variance sigma_n^2 is not positive");
    return {n / sigma_n2, sigma_n2};
}

double chi2_upper_tail(double x) {
    if (!(x >= 0.0)) fail(ErrorKind::kInvalidArgument, "chi-square argument must be non-negative");
    return std::erfc(std::sqrt(0.5 * x));
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

GridResources::GridResources(GridPtr grid, int smoothing_order)
    : grid_(std::move(grid)), smoother_(grid_, smoothing_order), kernel_(sobolev_kernel(grid_)) {}

TestReport hybrid_test(const Dataset& data, const TestConfig& config) {
    const GridResources resources = staged("setup", [&] { return GridResources(data.grid, config.smoothing_order); });
    return hybrid_test(data, config, resources);
}

TestReport hybrid_test(const Dataset& data, const TestConfig& config, const GridResources& resources) {
    const Eigen::Index n = data.n();
    staged("validate", [&] {
        data.validate();
        config.validate(n);
        if (n < 10) fail(ErrorKind::kInsufficientData, "the test needs at least 10 curves");
        if (!same_grid(*data.grid, *resources.grid()))
            fail(ErrorKind::kInvalidArgument, "dataset grid differs from the resource grid");
        if (resources.smoother().order() != config.smoothing_order)
            fail(ErrorKind::kInvalidArgument, "resource smoothing order differs from the configuration");
    });
    const GridPtr& grid = resources.grid();

    TestReport report;
    report.alpha = config.alpha;
    auto& diag = report.diagnostics;

    const SmoothedSample smoothed =
        staged("smoothing", [&] { return smooth_curves(resources.smoother(), data.curves, config.lambda1); });
    diag.mean_lambda1 = smoothed.lambda1.mean();

    const SlopeDesign design = staged("slope", [&] { return SlopeDesign(grid, smoothed.curves, resources.kernel()); });
    const SlopeEstimate fit = staged("slope", [&] {
        const double lambda = config.lambda_rule == LambdaRule::kGcv
                                  ? gcv_select_lambda(design, data.responses, default_lambda_grid(design.lambda_scale()))
                                  : rate_lambda(n);
        return estimate_slope(design, data.responses, lambda);
    });
    diag.lambda = fit.lambda;
    diag.lambda_scale = design.lambda_scale();
    diag.residual_df = fit.residual_df;
    report.beta_hat = fit.beta_hat.values();

    const Eigen::MatrixXd& xc = design.centered_curves();
    const Eigen::VectorXd& eps = fit.residuals;
    const double nd = static_cast<double>(n);

    const EigenSystem eigsys = staged("eigensystem", [&] {
        return build_eigensystem(resources.kernel(), covariance_estimate(grid, smoothed.curves));
    });
    diag.eigen_count = eigsys.count();

    const StandardizingFactor series =
        staged("standardization", [&] { return standardizing_factor(eigsys, fit.lambda, xc, config.weight_scale); });
    report.sigma_n2 = series.sigma_n2;

    const double rss = eps.squaredNorm();
    diag.sigma2_hat = (eps.array() - eps.mean()).square().sum() / (nd - 1.0);
    diag.sigma2_unbiased = rss / fit.residual_df;
    report.gamma = staged("standardization", [&] {
        if (config.standardization == Standardization::kEigenSeries) return series.gamma;
        const Eigen::VectorXd w = weights_of(xc, *grid, config.weight_scale);
        const double proj = design.residual_map(fit.lambda, w).squaredNorm();
        diag.v0_variance = proj / nd;
        const double denom = diag.sigma2_unbiased * proj;
        if (!(denom > 0.0) || !std::isfinite(denom))
            fail(ErrorKind::kDegenerateVariance, "V0 variance estimate is not positive");
        return nd * nd / denom;
    });

    staged("dimension", [&] {
        Rng rng(derive_seed(config.seed, {hash_label("ridge")}));
        diag.ridge = null_reference_ridge(xc, grid, diag.sigma2_hat, config.ridge_B, rng);
        const Eigen::VectorXd spectrum = operator_spectrum(indicative_operator(eps, xc, grid));
        diag.top_normalized_eigenvalue = spectrum[0] / (spectrum[0] + 1.0);
        report.q_hat = estimate_dimension(spectrum, diag.ridge);
    });

    staged("statistic", [&] {
        const double h = config.bandwidth(n);
        diag.bandwidth = h;
        const Eigen::VectorXd scores = xc * grid->weights().cwiseProduct(report.beta_hat);
        report.V0 = v0(eps, xc, *grid, config.weight_scale);
        report.V1 = v1(eps, scores, h, config.kernel);

        auto& comp = report.components;
        comp.v0_statistic = report.gamma * report.V0 * report.V0;
        comp.v0_p_value = chi2_upper_tail(comp.v0_statistic);
        comp.v1_z = v1_studentized(eps, scores, h, config.kernel);
        comp.v1_p_value = normal_upper_tail(comp.v1_z);

        report.T_n = report.q_hat == 0 ? comp.v0_statistic : report.gamma * std::abs(report.V1);
        if (!std::isfinite(report.T_n)) fail(ErrorKind::kNumericFailure, "test statistic is not finite");
        report.p_value = chi2_upper_tail(report.T_n);
        report.reject = report.p_value < config.alpha;
    });
    return report;
}

} // namespace flmgof
