#include "chstep/grid.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace chstep {

std::uint64_t state_checksum(const StateVector& v) {
    std::uint64_t h = 1469598103934665603ULL;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::uint64_t bits;
        const double x = v[i];
        static_assert(sizeof(bits) == sizeof(x));
        std::memcpy(&bits, &x, sizeof(bits));
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffu;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

GridSpec::GridSpec(int nx_, int ny_, double Lx_, double Ly_)
    : nx(nx_), ny(ny_), Lx(Lx_), Ly(Ly_) {
    if (nx < 1 || ny < 1)
        throw std::invalid_argument("GridSpec: nx and ny must be positive");
    if (!(Lx > 0.0) || !(Ly > 0.0))
        throw std::invalid_argument("GridSpec: Lx and Ly must be positive");
}

LaplacianOperator::LaplacianOperator(Eigen::SparseMatrix<double> matrix, GridSpec spec)
    : matrix_(std::move(matrix)), spec_(spec) {
    if (matrix_.rows() != matrix_.cols())
        throw std::invalid_argument("LaplacianOperator: matrix must be square");
    matrix_.makeCompressed();
    one_norm_ = chstep::one_norm(matrix_);
}

LaplacianOperator::LaplacianOperator(const LaplacianOperator& other)
    : matrix_(other.matrix_), spec_(other.spec_), one_norm_(other.one_norm_) {
    apply_count_.store(other.apply_count(), std::memory_order_relaxed);
}

LaplacianOperator::LaplacianOperator(LaplacianOperator&& other) noexcept
    : matrix_(std::move(other.matrix_)), spec_(other.spec_), one_norm_(other.one_norm_) {
    apply_count_.store(other.apply_count(), std::memory_order_relaxed);
}

StateVector LaplacianOperator::apply(const StateVector& v) const {
    if (v.size() != matrix_.rows())
        throw std::invalid_argument("LaplacianOperator::apply: dimension mismatch");
    apply_count_.fetch_add(1, std::memory_order_relaxed);
    return matrix_ * v;
}

double one_norm(const Eigen::SparseMatrix<double>& m) {
    double best = 0.0;
    for (int k = 0; k < m.outerSize(); ++k) {
        double colsum = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
            colsum += std::abs(it.value());
        best = std::max(best, colsum);
    }
    return best;
}

LaplacianOperator build_laplacian(const GridSpec& spec) {
    if (spec.nx < 2 || spec.ny < 2)
        throw std::invalid_argument("build_laplacian: nx and ny must be at least 2");
    if (!spec.valid())
        throw std::invalid_argument("build_laplacian: invalid grid spec");

    const int nx = spec.nx;
    const int ny = spec.ny;
    const double wx = 1.0 / (spec.hx() * spec.hx());
    const double wy = 1.0 / (spec.hy() * spec.hy());

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(5) * spec.size());

    // A = -Laplacian: each existing neighbor adds w to the diagonal and -w to
    // the off-diagonal; a missing neighbor is the reflected ghost cell and
    // contributes nothing.
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int row = spec.index(i, j);
            double diag = 0.0;
            if (i > 0) {
                triplets.emplace_back(row, spec.index(i - 1, j), -wx);
                diag += wx;
            }
            if (i < nx - 1) {
                triplets.emplace_back(row, spec.index(i + 1, j), -wx);
                diag += wx;
            }
            if (j > 0) {
                triplets.emplace_back(row, spec.index(i, j - 1), -wy);
                diag += wy;
            }
            if (j < ny - 1) {
                triplets.emplace_back(row, spec.index(i, j + 1), -wy);
                diag += wy;
            }
            triplets.emplace_back(row, row, diag);
        }
    }

    Eigen::SparseMatrix<double> a(spec.size(), spec.size());
    a.setFromTriplets(triplets.begin(), triplets.end());
    return LaplacianOperator(std::move(a), spec);
}

}  // namespace chstep
