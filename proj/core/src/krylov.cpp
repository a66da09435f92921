#include "chstep/krylov.hpp"

#include <Eigen/LU>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace chstep {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Pade numerator coefficients and 1-norm thresholds from Higham's scaling
// and squaring method (SIAM J. Matrix Anal. Appl. 26(4), 2005).
MatrixXd pade_solve(const MatrixXd& u, const MatrixXd& v) {
    // exp(M) ~ q(M)^{-1} p(M) with p = v + u, q = v - u
    return (v - u).partialPivLu().solve(v + u);
}

MatrixXd expm_pade(const MatrixXd& m, const std::vector<double>& b) {
    const int k = static_cast<int>(m.rows());
    const MatrixXd id = MatrixXd::Identity(k, k);
    const MatrixXd m2 = m * m;
    if (b.size() == 4) {  // order 3
        MatrixXd u = m * (b[3] * m2 + b[1] * id);
        MatrixXd v = b[2] * m2 + b[0] * id;
        return pade_solve(u, v);
    }
    const MatrixXd m4 = m2 * m2;
    if (b.size() == 6) {  // order 5
        MatrixXd u = m * (b[5] * m4 + b[3] * m2 + b[1] * id);
        MatrixXd v = b[4] * m4 + b[2] * m2 + b[0] * id;
        return pade_solve(u, v);
    }
    const MatrixXd m6 = m4 * m2;
    if (b.size() == 8) {  // order 7
        MatrixXd u = m * (b[7] * m6 + b[5] * m4 + b[3] * m2 + b[1] * id);
        MatrixXd v = b[6] * m6 + b[4] * m4 + b[2] * m2 + b[0] * id;
        return pade_solve(u, v);
    }
    if (b.size() == 10) {  // order 9
        const MatrixXd m8 = m6 * m2;
        MatrixXd u = m * (b[9] * m8 + b[7] * m6 + b[5] * m4 + b[3] * m2 + b[1] * id);
        MatrixXd v = b[8] * m8 + b[6] * m6 + b[4] * m4 + b[2] * m2 + b[0] * id;
        return pade_solve(u, v);
    }
    // order 13
    MatrixXd u = m * (m6 * (b[13] * m6 + b[11] * m4 + b[9] * m2) +
                      b[7] * m6 + b[5] * m4 + b[3] * m2 + b[1] * id);
    MatrixXd v = m6 * (b[12] * m6 + b[10] * m4 + b[8] * m2) +
                 b[6] * m6 + b[4] * m4 + b[2] * m2 + b[0] * id;
    return pade_solve(u, v);
}

}  // namespace

Eigen::MatrixXd expm_dense(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("expm_dense: matrix must be square");
    if (m.rows() == 0)
        return m;

    static const std::vector<double> b3 = {120, 60, 12, 1};
    static const std::vector<double> b5 = {30240, 15120, 3360, 420, 30, 1};
    static const std::vector<double> b7 = {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1};
    static const std::vector<double> b9 = {17643225600., 8821612800., 2075673600., 302702400.,
                                           30270240., 2162160., 110880., 3960., 90., 1.};
    static const std::vector<double> b13 = {64764752532480000., 32382376266240000.,
                                            7771770303897600., 1187353796428800.,
                                            129060195264000., 10559470521600., 670442572800.,
                                            33522128640., 1323241920., 40840800., 960960.,
                                            16380., 182., 1.};

    const double nrm = m.cwiseAbs().colwise().sum().maxCoeff();
    if (nrm <= 1.495585217958292e-2) return expm_pade(m, b3);
    if (nrm <= 2.539398330063230e-1) return expm_pade(m, b5);
    if (nrm <= 9.504178996162932e-1) return expm_pade(m, b7);
    if (nrm <= 2.097847961257068) return expm_pade(m, b9);

    const double theta13 = 5.371920351148152;
    int squarings = 0;
    double scale = 1.0;
    if (nrm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
        scale = std::ldexp(1.0, -squarings);
    }
    MatrixXd result = expm_pade(m * scale, b13);
    for (int i = 0; i < squarings; ++i)
        result = result * result;
    return result;
}

Eigen::MatrixXd phi_dense(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("phi_dense: matrix must be square");
    const int k = static_cast<int>(m.rows());
    MatrixXd augmented = MatrixXd::Zero(2 * k, 2 * k);
    augmented.topLeftCorner(k, k) = m;
    augmented.topRightCorner(k, k) = MatrixXd::Identity(k, k);
    return expm_dense(augmented).topRightCorner(k, k);
}

Eigen::VectorXd phi_apply(const Eigen::MatrixXd& m, const Eigen::VectorXd& c) {
    if (m.rows() != m.cols() || m.rows() != c.size())
        throw std::invalid_argument("phi_apply: dimension mismatch");
    const int k = static_cast<int>(m.rows());
    MatrixXd augmented = MatrixXd::Zero(k + 1, k + 1);
    augmented.topLeftCorner(k, k) = m;
    augmented.block(0, k, k, 1) = c;
    return expm_dense(augmented).block(0, k, k, 1);
}

KrylovDecomposition arnoldi_start(const StateVector& r0, int m_max) {
    if (m_max < 1)
        throw std::invalid_argument("arnoldi_start: m_max must be at least 1");
    KrylovDecomposition decomp;
    decomp.V = MatrixXd::Zero(r0.size(), m_max + 1);
    decomp.H = MatrixXd::Zero(m_max + 1, m_max);
    decomp.beta = r0.norm();
    decomp.m = 0;
    if (decomp.beta > 0.0)
        decomp.V.col(0) = r0 / decomp.beta;
    return decomp;
}

ArnoldiStatus arnoldi_extend(const LinearizedSystem& sys, KrylovDecomposition& decomp,
                             double breakdown_tol) {
    const int j = decomp.m;
    if (j >= decomp.max_dim())
        throw std::logic_error("arnoldi_extend: decomposition is full");
    if (j > 0 && decomp.H(j, j - 1) == 0.0)
        throw std::logic_error("arnoldi_extend: cannot extend past a breakdown");

    StateVector w = sys.apply(decomp.V.col(j));
    const double norm_before = w.norm();
    for (int i = 0; i <= j; ++i) {
        const double h = w.dot(decomp.V.col(i));
        decomp.H(i, j) = h;
        w -= h * decomp.V.col(i);
    }
    // one refinement pass against lost orthogonality under heavy cancellation
    if (w.norm() < 0.5 * norm_before) {
        for (int i = 0; i <= j; ++i) {
            const double h = w.dot(decomp.V.col(i));
            decomp.H(i, j) += h;
            w -= h * decomp.V.col(i);
        }
    }
    const double h_next = w.norm();
    decomp.H(j + 1, j) = h_next;
    decomp.m = j + 1;
    if (h_next <= breakdown_tol)
        return ArnoldiStatus::breakdown;
    decomp.V.col(j + 1) = w / h_next;
    return ArnoldiStatus::ok;
}

double krylov_resnorm(const KrylovDecomposition& decomp, double t) {
    if (decomp.m < 1)
        throw std::invalid_argument("krylov_resnorm: empty decomposition");
    const double h_next = decomp.h_next();
    if (t == 0.0 || h_next == 0.0)
        return 0.0;
    const int m = decomp.m;
    VectorXd e1 = VectorXd::Zero(m);
    e1[0] = 1.0;
    const VectorXd u = t * phi_apply(-t * decomp.h_square(), e1);
    return h_next * std::abs(u[m - 1]);
}

namespace {

double rt_find_substep(const KrylovDecomposition& decomp, double tau0, double tol_phi,
                       RtSearch search) {
    if (search == RtSearch::scan) {
        constexpr int points = 1000;
        for (int k = points; k >= 1; --k) {
            const double s = tau0 * k / points;
            if (krylov_resnorm(decomp, s) <= tol_phi)
                return s;
        }
        return 0.0;
    }
    // resnorm(0) = 0 <= tol_phi and resnorm(tau0) > tol_phi here
    double lo = 0.0;
    double hi = tau0;
    for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (krylov_resnorm(decomp, mid) <= tol_phi)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace

PhiStepResult ee2_krylov_step(const LinearizedSystem& sys, const StateVector& y_n,
                              double tau0, double tol_phi, int m_max,
                              const StateVector* r0, RtSearch search) {
    if (!(tau0 > 0.0))
        throw std::invalid_argument("ee2_krylov_step: tau0 must be positive");
    if (m_max < 1)
        throw std::invalid_argument("ee2_krylov_step: m_max must be at least 1");

    const StateVector residual = r0 ? *r0 : sys.residual0(y_n);
    PhiStepResult result;
    result.beta = residual.norm();
    if (result.beta == 0.0) {
        // stationary point of the frozen model
        result.tau_accepted = tau0;
        result.y_next = y_n;
        result.converged_early = true;
        return result;
    }

    KrylovDecomposition decomp = arnoldi_start(residual, m_max);
    const double breakdown_tol = 1e-14 * sys.one_norm_bound();

    double tau = 0.0;
    double resnorm = 0.0;
    bool converged = false;
    for (int j = 1; j <= m_max; ++j) {
        const ArnoldiStatus status = arnoldi_extend(sys, decomp, breakdown_tol);
        resnorm = krylov_resnorm(decomp, tau0);
        if (status == ArnoldiStatus::breakdown || resnorm <= tol_phi) {
            tau = tau0;
            converged = true;
            break;
        }
        if (j == m_max) {
            tau = rt_find_substep(decomp, tau0, tol_phi, search);
            if (!(tau > 0.0))
                throw KrylovStepFailure(
                    "ee2_krylov_step: no admissible sub-step in [0, tau0]; "
                    "shrink tau0 or raise m_max");
            resnorm = krylov_resnorm(decomp, tau);
        }
    }

    const int m = decomp.m;
    VectorXd e1 = VectorXd::Zero(m);
    e1[0] = 1.0;
    const VectorXd u = tau * phi_apply(-tau * decomp.h_square(), e1);
    result.tau_accepted = tau;
    result.y_next = y_n + decomp.basis() * (decomp.beta * u);
    result.resnorm = resnorm;
    result.m_used = m;
    result.converged_early = converged;
    result.h_used = decomp.H.topLeftCorner(m + 1, m);
    return result;
}

ConstantStepResult ee2_constant_step(const LinearizedSystem& sys, const StateVector& y_n,
                                     double tau, double tol_phi, int m_max,
                                     const StateVector* r0, RtSearch search) {
    if (!(tau > 0.0))
        throw std::invalid_argument("ee2_constant_step: tau must be positive");
    ConstantStepResult result;
    result.y_next = y_n;
    double remaining = tau;
    const StateVector* start = r0;
    while (remaining > 0.0) {
        PhiStepResult sweep = ee2_krylov_step(sys, result.y_next, remaining, tol_phi,
                                              m_max, start, search);
        start = nullptr;  // later sweeps restart from the advanced state
        result.y_next = std::move(sweep.y_next);
        result.last_resnorm = sweep.resnorm;
        ++result.sweeps;
        if (sweep.converged_early)
            break;
        if (!(sweep.tau_accepted > remaining * 1e-14))
            throw KrylovStepFailure("ee2_constant_step: no progress across the step interval");
        remaining -= sweep.tau_accepted;
    }
    return result;
}

}  // namespace chstep
