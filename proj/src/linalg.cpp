#include "flmgof/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>

namespace flmgof::linalg {

SymmetricEigen eigen_descending(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    // Eigen returns ascending order.
    return {es.eigenvalues().reverse(), es.eigenvectors().rowwise().reverse()};
}

namespace {

template <class F>
Eigen::MatrixXd spectral_map(const Eigen::MatrixXd& a, F&& f) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double top = std::max(ev.maxCoeff(), 0.0);
    const double cut = kSpectralClip * top;
    Eigen::VectorXd mapped(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) mapped[i] = (top > 0.0 && ev[i] > cut) ? f(ev[i]) : 0.0;
    const Eigen::MatrixXd& v = es.eigenvectors();
    return symmetrize(v * mapped.asDiagonal() * v.transpose());
}

} // namespace

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a) {
    return spectral_map(a, [](double x) { return std::sqrt(x); });
}

Eigen::MatrixXd psd_pinv(const Eigen::MatrixXd& a) {
    return spectral_map(a, [](double x) { return 1.0 / x; });
}

Eigen::Index numeric_rank(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double top = ev.maxCoeff();
    if (!(top > 0.0)) return 0;
    return (ev.array() > kSpectralClip * top).count();
}

Eigen::MatrixXd weighted_form(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& sqrt_weights) {
    return sqrt_weights.asDiagonal() * kernel * sqrt_weights.asDiagonal();
}

} // namespace flmgof::linalg
