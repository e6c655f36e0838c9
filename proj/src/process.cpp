#include "flmgof/process.hpp"

#include "flmgof/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace flmgof {

using std::numbers::pi;

ProcessKind ProcessKind::brownian_motion() {
    ProcessKind k;
    k.tag_ = ProcessTag::kBrownianMotion;
    return k;
}

ProcessKind ProcessKind::brownian_bridge() {
    ProcessKind k;
    k.tag_ = ProcessTag::kBrownianBridge;
    return k;
}

ProcessKind ProcessKind::ornstein_uhlenbeck(double alpha, double sigma, bool stationary_init) {
    if (!(alpha > 0.0) || !(sigma > 0.0)) fail(ErrorKind::kInvalidArgument, "OU needs alpha > 0 and sigma > 0");
    ProcessKind k;
    k.tag_ = ProcessTag::kOrnsteinUhlenbeck;
    k.alpha_ = alpha;
    k.sigma_ = sigma;
    k.stationary_ = stationary_init;
    return k;
}

ProcessKind ProcessKind::geometric_brownian(double s0, double mu, double sigma) {
    if (!(s0 > 0.0) || !(sigma > 0.0) || !std::isfinite(mu))
        fail(ErrorKind::kInvalidArgument, "GBM needs s0 > 0 and sigma > 0");
    ProcessKind k;
    k.tag_ = ProcessTag::kGeometricBrownian;
    k.s0_ = s0;
    k.mu_ = mu;
    k.sigma_ = sigma;
    return k;
}

ProcessKind ProcessKind::cosine_series(int l) {
    if (l != 1 && l != 2) fail(ErrorKind::kInvalidArgument, "cosine series needs l in {1, 2}");
    ProcessKind k;
    k.tag_ = ProcessTag::kCosineSeries;
    k.l_ = l;
    return k;
}

std::string ProcessKind::name() const {
    std::ostringstream os;
    switch (tag_) {
    case ProcessTag::kBrownianMotion: return "BM";
    case ProcessTag::kBrownianBridge: return "BB";
    case ProcessTag::kOrnsteinUhlenbeck:
        os << "OU(alpha=" << alpha_ << ",sigma=" << sigma_ << (stationary_ ? ",stationary" : ",zero-start") << ")";
        return os.str();
    case ProcessTag::kGeometricBrownian:
        os << "GBM(s0=" << s0_ << ",mu=" << mu_ << ",sigma=" << sigma_ << ")";
        return os.str();
    case ProcessTag::kCosineSeries:
        os << "COS(l=" << l_ << ")";
        return os.str();
    }
    return "?";
}

double bm_eigenfunction(int j, double t) { return std::numbers::sqrt2 * std::sin((j - 0.5) * pi * t); }
double bridge_eigenfunction(int j, double t) { return std::numbers::sqrt2 * std::sin(j * pi * t); }
double cosine_basis(int j, double t) { return std::numbers::sqrt2 * std::cos(j * pi * t); }

ProcessSampler::ProcessSampler(ProcessKind kind, GridPtr grid) : kind_(kind), grid_(std::move(grid)) {
    const auto M = static_cast<Eigen::Index>(grid_->size());
    const Eigen::VectorXd& t = grid_->nodes();
    const bool cosine = kind_.tag() == ProcessTag::kCosineSeries;
    const int terms = cosine ? kCosineSeriesTerms : kBrownianTerms;
    basis_.resize(terms, M);
    for (int j = 1; j <= terms; ++j) {
        const double bm_scale = 1.0 / ((j - 0.5) * pi);
        for (Eigen::Index c = 0; c < M; ++c) {
            double v = 0.0;
            switch (kind_.tag()) {
            case ProcessTag::kBrownianMotion:
            case ProcessTag::kGeometricBrownian:
                v = bm_scale * bm_eigenfunction(j, t[c]);
                break;
            case ProcessTag::kBrownianBridge:
                v = bm_scale * (bm_eigenfunction(j, t[c]) - t[c] * bm_eigenfunction(j, 1.0));
                break;
            case ProcessTag::kOrnsteinUhlenbeck: {
                // B(e^{2 a t}) on [1, e^{2a}] from a standard path on [0,1]:
                // B(c u) has the law of sqrt(c) B(u).
                const double a = kind_.alpha();
                const double span = std::exp(2.0 * a);
                const double u = std::exp(2.0 * a * t[c]) / span;
                double path = bm_eigenfunction(j, u);
                if (!kind_.stationary_init()) path -= bm_eigenfunction(j, 1.0 / span);
                const double gain = kind_.sigma() / std::sqrt(2.0 * a) * std::exp(-a * t[c]) * std::sqrt(span);
                v = bm_scale * gain * path;
                break;
            }
            case ProcessTag::kCosineSeries:
                v = std::pow(static_cast<double>(j), -kind_.l()) * cosine_basis(j, t[c]);
                break;
            }
            basis_(j - 1, c) = v;
        }
    }
}

Eigen::MatrixXd ProcessSampler::transform(Eigen::MatrixXd raw) const {
    if (kind_.tag() != ProcessTag::kGeometricBrownian) return raw;
    const Eigen::VectorXd& t = grid_->nodes();
    const double drift = kind_.mu() - 0.5 * kind_.sigma() * kind_.sigma();
    for (Eigen::Index r = 0; r < raw.rows(); ++r)
        for (Eigen::Index c = 0; c < raw.cols(); ++c)
            raw(r, c) = kind_.s0() * std::exp(drift * t[c] + kind_.sigma() * raw(r, c));
    return raw;
}

Eigen::MatrixXd ProcessSampler::sample(Eigen::Index n, Rng& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd z(n, basis_.rows());
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index j = 0; j < z.cols(); ++j) z(r, j) = normal(rng);
    return transform(z * basis_);
}

Eigen::VectorXd ProcessSampler::sample(Rng& rng) const { return sample(1, rng).row(0).transpose(); }

GridFunction sample_process(const ProcessKind& kind, const GridPtr& grid, Rng& rng) {
    return GridFunction(grid, ProcessSampler(kind, grid).sample(rng));
}

} // namespace flmgof
