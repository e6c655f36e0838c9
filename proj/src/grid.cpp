#include "flmgof/grid.hpp"

#include "flmgof/error.hpp"

#include <cmath>
#include <string>

namespace flmgof {

Grid::Grid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    const auto M = nodes_.size();
    if (M < 2) fail(ErrorKind::kInvalidArgument, "grid needs at least 2 nodes");
    if (nodes_.front() != 0.0 || nodes_.back() != 1.0)
        fail(ErrorKind::kInvalidArgument, "grid must start at 0 and end at 1");
    for (std::size_t j = 0; j + 1 < M; ++j) {
        if (!std::isfinite(nodes_[j]) || !(nodes_[j] < nodes_[j + 1]))
            fail(ErrorKind::kInvalidArgument, "grid nodes must be strictly increasing (node " +
                                                  std::to_string(j) + ")");
    }
    node_vec_ = Eigen::Map<const Eigen::VectorXd>(nodes_.data(), static_cast<Eigen::Index>(M));
    weights_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(M));
    for (std::size_t j = 0; j + 1 < M; ++j) {
        const double h = nodes_[j + 1] - nodes_[j];
        weights_[j] += 0.5 * h;
        weights_[j + 1] += 0.5 * h;
    }
    sqrt_weights_ = weights_.cwiseSqrt();
}

bool Grid::is_uniform(double tol) const {
    const double h = 1.0 / static_cast<double>(size() - 1);
    for (std::size_t j = 0; j + 1 < size(); ++j)
        if (std::abs(nodes_[j + 1] - nodes_[j] - h) > tol) return false;
    return true;
}

GridPtr make_uniform_grid(int M) {
    if (M < 2) fail(ErrorKind::kInvalidArgument, "uniform grid needs M >= 2, got " + std::to_string(M));
    std::vector<double> nodes(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j) nodes[static_cast<std::size_t>(j)] = static_cast<double>(j) / (M - 1);
    nodes.back() = 1.0;
    return std::make_shared<const Grid>(std::move(nodes));
}

GridPtr make_grid(std::vector<double> nodes) { return std::make_shared<const Grid>(std::move(nodes)); }

GridFunction::GridFunction(GridPtr grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) fail(ErrorKind::kInvalidArgument, "grid function without grid");
    if (static_cast<std::size_t>(values_.size()) != grid_->size())
        fail(ErrorKind::kInvalidArgument, "grid function length does not match grid size");
    if (!values_.allFinite()) fail(ErrorKind::kInvalidArgument, "grid function has non-finite values");
}

bool same_grid(const Grid& a, const Grid& b) { return &a == &b || a == b; }

double inner_product(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& f,
                     const Eigen::Ref<const Eigen::VectorXd>& g) {
    if (static_cast<std::size_t>(f.size()) != grid.size() || static_cast<std::size_t>(g.size()) != grid.size())
        fail(ErrorKind::kInvalidArgument, "inner product of vectors not on the grid");
    return (grid.weights().array() * (f.array() * g.array())).sum();
}

double inner_product(const GridFunction& f, const GridFunction& g) {
    if (!same_grid(*f.grid(), *g.grid())) fail(ErrorKind::kInvalidArgument, "inner product across different grids");
    return inner_product(*f.grid(), f.values(), g.values());
}

double l2_norm(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& f) {
    return std::sqrt(inner_product(grid, f, f));
}

double l2_norm(const GridFunction& f) { return l2_norm(*f.grid(), f.values()); }

Eigen::VectorXd row_norms(const Grid& grid, const Eigen::MatrixXd& curves) {
    return (curves.array().square().rowwise() * grid.weights().transpose().array()).rowwise().sum().sqrt();
}

} // namespace flmgof
