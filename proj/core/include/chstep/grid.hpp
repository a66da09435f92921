#pragma once

#include "chstep/types.hpp"

#include <Eigen/Sparse>

#include <atomic>
#include <cstdint>

namespace chstep {

/// Uniform cell-centered grid on (0,Lx) x (0,Ly) with nx*ny cells.
struct GridSpec {
    int nx = 0;
    int ny = 0;
    double Lx = 0.0;
    double Ly = 0.0;

    GridSpec() = default;
    GridSpec(int nx_, int ny_, double Lx_, double Ly_);

    bool valid() const { return nx >= 1 && ny >= 1 && Lx > 0.0 && Ly > 0.0; }
    int size() const { return nx * ny; }
    double hx() const { return Lx / nx; }
    double hy() const { return Ly / ny; }

    // cell centers; row-major ordering, x fastest
    double x(int i) const { return Lx * (i + 0.5) / nx; }
    double y(int j) const { return Ly * (j + 0.5) / ny; }
    int index(int i, int j) const { return j * nx + i; }
};

/// Sparse symmetric positive semidefinite matrix A such that -A is the
/// 5-point homogeneous-Neumann Laplacian (ghost cells reflect the boundary
/// value, so A*1 = 0 and all row sums vanish).
///
/// Immutable after construction; apply() may be called concurrently.  The
/// matvec counter is atomic and exact once all applications have completed.
class LaplacianOperator {
public:
    /// Wrap an explicit sparse symmetric matrix.  Used by build_laplacian and
    /// as a seam for synthetic operators in tests; `spec` may be left empty
    /// when the operator does not come from a grid.
    explicit LaplacianOperator(Eigen::SparseMatrix<double> matrix, GridSpec spec = {});

    LaplacianOperator(const LaplacianOperator& other);
    LaplacianOperator(LaplacianOperator&& other) noexcept;
    LaplacianOperator& operator=(const LaplacianOperator&) = delete;

    int size() const { return static_cast<int>(matrix_.rows()); }
    const GridSpec& spec() const { return spec_; }
    const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }

    /// A*v; increments the matvec counter.
    StateVector apply(const StateVector& v) const;

    /// Exact maximum absolute column sum, precomputed at construction.
    double one_norm() const { return one_norm_; }

    std::uint64_t apply_count() const { return apply_count_.load(std::memory_order_relaxed); }
    void reset_apply_count() const { apply_count_.store(0, std::memory_order_relaxed); }

private:
    Eigen::SparseMatrix<double> matrix_;
    GridSpec spec_;
    double one_norm_ = 0.0;
    mutable std::atomic<std::uint64_t> apply_count_{0};
};

/// Assemble the Neumann Laplacian for `spec`.  Requires nx, ny >= 2.
LaplacianOperator build_laplacian(const GridSpec& spec);

/// Exact 1-norm of a sparse matrix (maximum absolute column sum).
double one_norm(const Eigen::SparseMatrix<double>& m);

}  // namespace chstep
