#include "chstep/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace chstep {

double free_energy(double c) {
    const double w = 1.0 - c * c;
    return 0.25 * w * w;
}

double free_energy_prime(double c) { return c * (c * c - 1.0); }

double epsilon_m(double h, int m) {
    if (!(h > 0.0))
        throw std::invalid_argument("epsilon_m: h must be positive");
    if (m < 1)
        throw std::invalid_argument("epsilon_m: m must be a positive integer");
    return h * m / (2.0 * std::sqrt(2.0) * std::atanh(0.9));
}

StateVector jacobian_diag(const StateVector& y) {
    return 3.0 * y.array().square() - 1.0;
}

CahnHilliardProblem::CahnHilliardProblem(LaplacianOperator a, double eps, bool eyre)
    : A(std::move(a)), epsilon(eps), use_eyre(eyre) {
    if (!(epsilon > 0.0))
        throw std::invalid_argument("CahnHilliardProblem: epsilon must be positive");
}

StateVector CahnHilliardProblem::rhs(const StateVector& y) const {
    const double eps2 = epsilon * epsilon;
    StateVector mu = y.unaryExpr([](double c) { return free_energy_prime(c); });
    mu += eps2 * A.apply(y);
    return -A.apply(mu);
}

LinearizedSystem::LinearizedSystem(const CahnHilliardProblem& problem, StateVector y_ref)
    : problem_(&problem), y_ref_(std::move(y_ref)) {
    if (y_ref_.size() != problem.size())
        throw std::invalid_argument("LinearizedSystem: state dimension mismatch");
    const double s = problem.use_eyre ? 1.0 : 0.0;
    jac_diag_ = jacobian_diag(y_ref_);
    shifted_diag_ = jac_diag_.array() + s;
    StateVector tmp = shifted_diag_.cwiseProduct(y_ref_) -
                      y_ref_.unaryExpr([](double c) { return free_energy_prime(c); });
    forcing_ = problem.A.apply(tmp);
}

StateVector LinearizedSystem::apply(const StateVector& v) const {
    if (v.size() != y_ref_.size())
        throw std::invalid_argument("LinearizedSystem::apply: dimension mismatch");
    matvecs_.fetch_add(1, std::memory_order_relaxed);
    const double eps2 = problem_->epsilon * problem_->epsilon;
    StateVector inner = shifted_diag_.cwiseProduct(v) + eps2 * problem_->A.apply(v);
    return problem_->A.apply(inner);
}

StateVector LinearizedSystem::residual0(const StateVector& y) const {
    return forcing_ - apply(y);
}

double LinearizedSystem::one_norm() const {
    std::call_once(norm_once_, [this] {
        const int n = size();
        const double eps2 = problem_->epsilon * problem_->epsilon;
        Eigen::SparseMatrix<double> diag(n, n);
        diag.reserve(Eigen::VectorXi::Constant(n, 1));
        for (int i = 0; i < n; ++i)
            diag.insert(i, i) = shifted_diag_[i];
        Eigen::SparseMatrix<double> inner = eps2 * problem_->A.matrix() + diag;
        Eigen::SparseMatrix<double> product = problem_->A.matrix() * inner;
        one_norm_exact_ = chstep::one_norm(product);
    });
    return one_norm_exact_;
}

double LinearizedSystem::one_norm_bound() const {
    const double eps2 = problem_->epsilon * problem_->epsilon;
    const double norm_a = problem_->A.one_norm();
    const double norm_diag = shifted_diag_.cwiseAbs().maxCoeff();
    return norm_a * (norm_diag + eps2 * norm_a);
}

double LinearizedSystem::one_norm(NormMode mode) const {
    return mode == NormMode::exact_product ? one_norm() : one_norm_bound();
}

LinearizedSystem linearize(const CahnHilliardProblem& problem, const StateVector& y_n) {
    return LinearizedSystem(problem, y_n);
}

}  // namespace chstep
