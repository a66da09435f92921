#pragma once

#include "chstep/problem.hpp"

#include <Eigen/Dense>

namespace chstep {

/// exp(M) for a small dense matrix, by Pade approximation with scaling and
/// squaring (orders 3/5/7/9/13 selected from the 1-norm).
Eigen::MatrixXd expm_dense(const Eigen::MatrixXd& m);

/// phi(M) with phi(z) = (e^z - 1)/z, phi(0) = 1, computed as the top-right
/// block of exp([[M, I], [0, 0]]).  Intended for small matrices.
Eigen::MatrixXd phi_dense(const Eigen::MatrixXd& m);

/// phi(M) * c without forming phi(M), via exp([[M, c], [0, 0]]).
Eigen::VectorXd phi_apply(const Eigen::MatrixXd& m, const Eigen::VectorXd& c);

/// Arnoldi output V, H with  A_hat V_m = V_{m+1} H_{m+1,m};  the first m+1
/// columns of V and the top-left (m+1) x m block of H are valid.
struct KrylovDecomposition {
    Eigen::MatrixXd V;  // N x (m_max+1)
    Eigen::MatrixXd H;  // (m_max+1) x m_max
    double beta = 0.0;  // norm of the starting vector before normalization
    int m = 0;          // completed Arnoldi steps

    int max_dim() const { return static_cast<int>(H.cols()); }
    /// Subdiagonal entry h_{m+1,m} of the last completed step.
    double h_next() const { return m > 0 ? H(m, m - 1) : 0.0; }
    Eigen::Ref<const Eigen::MatrixXd> h_square() const { return H.topLeftCorner(m, m); }
    Eigen::Ref<const Eigen::MatrixXd> basis() const { return V.leftCols(m); }
};

/// Allocate the decomposition and normalize the starting vector.  beta = 0
/// yields an empty decomposition (stationary starting residual).
KrylovDecomposition arnoldi_start(const StateVector& r0, int m_max);

enum class ArnoldiStatus {
    ok,
    breakdown,  // h_{m+1,m} at working precision: exact invariant subspace
};

/// One more Arnoldi step with modified Gram-Schmidt (one reorthogonalization
/// pass when the projected norm drops below half the input norm).  Exactly
/// one application of A_hat.
ArnoldiStatus arnoldi_extend(const LinearizedSystem& sys, KrylovDecomposition& decomp,
                             double breakdown_tol);

/// Relative residual norm of the Krylov approximation to the frozen linear
/// IVP at elapsed time t:  h_{m+1,m} * t * |e_m^T phi(-t H_mm) e_1|.
double krylov_resnorm(const KrylovDecomposition& decomp, double t);

/// How the admissible sub-step is located once m_max is reached.  The
/// residual norm is nondecreasing in t for Eyre-split systems, which makes
/// bisection exact; the scan mode is a diagnostic fallback.
enum class RtSearch { bisection, scan };

struct PhiStepResult {
    double tau_accepted = 0.0;
    StateVector y_next;
    double resnorm = 0.0;         // relative residual at tau_accepted
    int m_used = 0;               // Krylov dimension consumed (= matvecs of the sweep)
    bool converged_early = false; // accepted the full requested step
    double beta = 0.0;
    Eigen::MatrixXd h_used;       // (m_used+1) x m_used Hessenberg block, for diagnostics
};

/// One EE2 step y(t_n + tau) = y_n + tau phi(-tau A_hat)(g - A_hat y_n),
/// evaluated in a Krylov subspace of dimension at most m_max.  The residual
/// is checked at the requested step each iteration; if the space fills up,
/// the largest sub-step with relative residual <= tol_phi is accepted
/// instead (nonlinear residual-time restarting).
///
/// `r0` optionally supplies the precomputed starting residual g - A_hat y_n
/// (the caller may already have it from the tolerance selection); otherwise
/// it is computed here, costing one extra matvec.
///
/// Throws KrylovStepFailure when no positive sub-step is admissible.
PhiStepResult ee2_krylov_step(const LinearizedSystem& sys, const StateVector& y_n,
                              double tau0, double tol_phi, int m_max,
                              const StateVector* r0 = nullptr,
                              RtSearch search = RtSearch::bisection);

struct ConstantStepResult {
    StateVector y_next;
    int sweeps = 0;          // Krylov restarts used
    double last_resnorm = 0.0;
};

/// Advance the frozen linear IVP across the full interval [0, tau] by chained
/// residual-time restarts: accept the largest admissible sub-step, restart
/// from the new state, repeat until the accumulated time equals tau.
ConstantStepResult ee2_constant_step(const LinearizedSystem& sys, const StateVector& y_n,
                                     double tau, double tol_phi, int m_max,
                                     const StateVector* r0 = nullptr,
                                     RtSearch search = RtSearch::bisection);

}  // namespace chstep
