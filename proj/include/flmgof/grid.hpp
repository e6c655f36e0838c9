#pragma once

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <vector>

namespace flmgof {

/// Quadrature grid on [0,1] with trapezoid weights.
///
/// Nodes are strictly increasing with nodes[0]=0 and nodes[M-1]=1; the
/// weights are positive and sum to one. All functional objects of an
/// analysis (curves, slopes, eigenfunctions, kernels) live on one grid.
class Grid {
public:
    /// Builds a grid from explicit nodes. Throws kInvalidArgument when the
    /// node invariants are violated.
    explicit Grid(std::vector<double> nodes);

    std::size_t size() const noexcept { return nodes_.size(); }
    const Eigen::VectorXd& nodes() const noexcept { return node_vec_; }
    const Eigen::VectorXd& weights() const noexcept { return weights_; }
    /// Elementwise square roots of the weights; maps grid values into the
    /// coordinates where the weighted inner product is the Euclidean one.
    const Eigen::VectorXd& sqrt_weights() const noexcept { return sqrt_weights_; }
    double node(std::size_t j) const { return nodes_[j]; }
    bool is_uniform(double tol = 1e-12) const;

    bool operator==(const Grid& other) const { return nodes_ == other.nodes_; }

private:
    std::vector<double> nodes_;
    Eigen::VectorXd node_vec_;
    Eigen::VectorXd weights_;
    Eigen::VectorXd sqrt_weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_uniform_grid(int M);
GridPtr make_grid(std::vector<double> nodes);

/// Real values at every node of a shared grid.
class GridFunction {
public:
    GridFunction(GridPtr grid, Eigen::VectorXd values);

    template <class F>
    static GridFunction from(GridPtr grid, F&& f) {
        Eigen::VectorXd v(grid->size());
        for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = f(grid->node(j));
        return GridFunction(std::move(grid), std::move(v));
    }

    const GridPtr& grid() const noexcept { return grid_; }
    const Eigen::VectorXd& values() const noexcept { return values_; }
    double operator[](Eigen::Index j) const { return values_[j]; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }

private:
    GridPtr grid_;
    Eigen::VectorXd values_;
};

using ObservedCurve = GridFunction;

bool same_grid(const Grid& a, const Grid& b);

double inner_product(const GridFunction& f, const GridFunction& g);
double l2_norm(const GridFunction& f);

// Raw-vector forms used by the matrix-level code paths.
double inner_product(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& f,
                     const Eigen::Ref<const Eigen::VectorXd>& g);
double l2_norm(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& f);

/// Row-wise L2 norms of an n x M matrix of curves.
Eigen::VectorXd row_norms(const Grid& grid, const Eigen::MatrixXd& curves);

} // namespace flmgof
