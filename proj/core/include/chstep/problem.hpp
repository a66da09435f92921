#pragma once

#include "chstep/grid.hpp"

#include <mutex>
#include <optional>

namespace chstep {

/// Double-well free energy F(c) = (1 - c^2)^2 / 4.
double free_energy(double c);
/// F'(c) = c (c^2 - 1).
double free_energy_prime(double c);

/// Interfacial parameter eps_m = h m / (2 sqrt(2) artanh(9/10)): the value
/// for which the concentration transitions between the pure phases over m
/// cells of width h.
double epsilon_m(double h, int m);

/// Diagonal of the Jacobian of c -> F'(c) at y: 3 y_i^2 - 1.
StateVector jacobian_diag(const StateVector& y);

/// Semi-discrete Cahn-Hilliard problem y' = -A (F'(y) + eps^2 A y).
struct CahnHilliardProblem {
    LaplacianOperator A;
    double epsilon = 0.0;
    bool use_eyre = false;  // convex-splitting stabilization

    CahnHilliardProblem(LaplacianOperator a, double eps, bool eyre = false);

    int size() const { return A.size(); }

    /// Full nonlinear right-hand side; two applications of A.
    StateVector rhs(const StateVector& y) const;
};

/// How the spectral bound of the linearized operator is obtained.
enum class NormMode {
    exact_product,  // 1-norm of the assembled sparse product
    upper_bound,    // ||A||_1 (||J + sI||_1 + eps^2 ||A||_1), overestimates
};

/// Per-step frozen linear model of the Cahn-Hilliard right-hand side around
/// y_ref:  y'(t) = -A_hat y(t) + g,  with
///
///   A_hat = A (J + eps^2 A + sI),   g = A (J y_ref + s y_ref - F'(y_ref)),
///
/// where J = diag(3 y_ref^2 - 1) and s = 1 with the Eyre splitting, else 0.
/// Immutable after construction; apply() is safe to call concurrently and
/// one application counts as one matvec (the artifact's cost unit).
class LinearizedSystem {
public:
    LinearizedSystem(const CahnHilliardProblem& problem, StateVector y_ref);

    int size() const { return static_cast<int>(y_ref_.size()); }
    const CahnHilliardProblem& problem() const { return *problem_; }
    const StateVector& y_ref() const { return y_ref_; }
    const StateVector& jac_diag() const { return jac_diag_; }
    const StateVector& forcing() const { return forcing_; }
    bool use_eyre() const { return problem_->use_eyre; }

    /// A_hat * v (one diagonal scaling, two applications of A).
    StateVector apply(const StateVector& v) const;

    /// g - A_hat * y; the starting residual of the frozen linear model.
    StateVector residual0(const StateVector& y) const;

    /// Exact ||A_hat||_1 from the explicitly assembled sparse product
    /// (assembled lazily, once).
    double one_norm() const;
    /// Cheap overestimate ||A||_1 (||J + sI||_1 + eps^2 ||A||_1).
    double one_norm_bound() const;
    double one_norm(NormMode mode) const;

    /// Number of A_hat applications since construction.
    std::uint64_t matvec_count() const { return matvecs_.load(std::memory_order_relaxed); }

private:
    const CahnHilliardProblem* problem_;
    StateVector y_ref_;
    StateVector jac_diag_;      // 3 y^2 - 1
    StateVector shifted_diag_;  // jac_diag + s
    StateVector forcing_;
    mutable std::once_flag norm_once_;
    mutable double one_norm_exact_ = -1.0;
    mutable std::atomic<std::uint64_t> matvecs_{0};
};

/// Build the per-step linearized system (plain or Eyre, per the problem flag).
LinearizedSystem linearize(const CahnHilliardProblem& problem, const StateVector& y_n);

inline StateVector apply_A_hat(const LinearizedSystem& sys, const StateVector& v) {
    return sys.apply(v);
}
inline double one_norm_A_hat(const LinearizedSystem& sys) { return sys.one_norm(); }

}  // namespace chstep
