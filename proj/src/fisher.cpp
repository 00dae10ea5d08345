#include "nessqfi/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "nessqfi/errors.hpp"
#include "nessqfi/lindblad.hpp"

namespace nessqfi {

namespace {

struct Eigenbasis {
    Eigen::VectorXd p;
    Eigen::MatrixXcd u;
};

Eigenbasis eigenbasis(const DenseOperator& rho) {
    if (rho.rows() != rho.cols()) throw PreconditionError("state must be square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()));
    if (es.info() != Eigen::Success) throw NumericalError("state eigensolve failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

// SLD in the eigenbasis of ρ, with the support check applied.
Eigen::MatrixXcd sld_eigenbasis(const Eigenbasis& eb, const DenseOperator& drho) {
    if (drho.rows() != eb.u.rows() || drho.cols() != eb.u.cols()) throw PreconditionError("dimension mismatch");
    const Eigen::MatrixXcd d = eb.u.adjoint() * drho * eb.u;
    const double tol = kSupportTolerance * eb.p.cwiseAbs().maxCoeff();
    const Eigen::Index dim = d.rows();
    Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k)
        for (Eigen::Index m = 0; m < dim; ++m) {
            const double s = eb.p(k) + eb.p(m);
            if (s > tol) {
                l(k, m) = 2.0 * d(k, m) / s;
            } else if (std::abs(d(k, m)) > 1e-8) {
                throw NumericalError("derivative has weight outside the support of the state");
            }
        }
    return l;
}

} // namespace

DenseOperator sld(const DenseOperator& rho, const DenseOperator& drho) {
    const Eigenbasis eb = eigenbasis(rho);
    return eb.u * sld_eigenbasis(eb, drho) * eb.u.adjoint();
}

double qfi_dense(const DenseOperator& rho, const DenseOperator& drho) {
    const Eigenbasis eb = eigenbasis(rho);
    const Eigen::MatrixXcd d = eb.u.adjoint() * drho * eb.u;
    const Eigen::MatrixXcd l = sld_eigenbasis(eb, drho);
    // F = Σ_kl L_kl d_lk = Tr(L dρ); exact zeros on the off-support pairs.
    double f = 0.0;
    for (Eigen::Index k = 0; k < d.rows(); ++k)
        for (Eigen::Index m = 0; m < d.cols(); ++m) f += (l(k, m) * d(m, k)).real();
    return std::max(f, 0.0);
}

double fisher_cross(const DenseOperator& rho, const DenseOperator& drho_x, const DenseOperator& drho_y) {
    const Eigenbasis eb = eigenbasis(rho);
    const Eigen::MatrixXcd lx = sld_eigenbasis(eb, drho_x);
    const Eigen::MatrixXcd ly = sld_eigenbasis(eb, drho_y);
    const Eigen::MatrixXcd anti = lx * ly + ly * lx;
    double f = 0.0;
    for (Eigen::Index k = 0; k < anti.rows(); ++k) f += eb.p(k) * anti(k, k).real();
    return 0.5 * f;
}

double optimal_estimator_variance(const DenseOperator& rho, const DenseOperator& zeta, int m) {
    if (m < 1) throw PreconditionError("repetition count m must be >= 1");
    const Complex mean = (zeta * rho).trace();
    const Complex second = (zeta * zeta * rho).trace();
    return (second.real() - mean.real() * mean.real()) / m;
}

double relative_error(double x_value, const FisherEstimate& fisher, int m) {
    if (x_value == 0.0) throw PreconditionError("relative error undefined at x = 0");
    if (m < 1) throw PreconditionError("repetition count m must be >= 1");
    if (fisher.value.sign <= 0) throw PreconditionError("zero Fisher information: estimation impossible");
    // 1/(|x| sqrt(m F)) evaluated in the log domain.
    return std::exp(-std::log(std::fabs(x_value)) - 0.5 * (std::log(static_cast<double>(m)) + fisher.value.log_abs));
}

double sld_measurement_fisher(const DenseOperator& rho, const DenseOperator& drho) {
    const DenseOperator l = sld(rho, drho);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (l + l.adjoint()));
    const double tol = kSupportTolerance * eigenbasis(rho).p.cwiseAbs().maxCoeff();
    double f = 0.0;
    for (Eigen::Index k = 0; k < es.eigenvectors().cols(); ++k) {
        const auto v = es.eigenvectors().col(k);
        const double p = (v.adjoint() * rho * v)(0, 0).real();
        const double dp = (v.adjoint() * drho * v)(0, 0).real();
        if (p > tol) f += dp * dp / p;
    }
    return f;
}

double fidelity(const DenseOperator& rho, const DenseOperator& sigma) {
    const Eigenbasis eb = eigenbasis(rho);
    const Eigen::VectorXd sq = eb.p.cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXcd root = eb.u * sq.asDiagonal() * eb.u.adjoint();
    const Eigen::MatrixXcd inner = root * sigma * root;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
    const double t = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return t * t;
}

DenseOperator richardson_derivative(const std::function<DenseOperator(double)>& f, double x, double h,
                                    double tolerance) {
    if (!(h > 0.0)) throw PreconditionError("derivative step must be > 0");
    const DenseOperator hi = f(x + h), lo = f(x - h);
    const DenseOperator coarse = (hi - lo) / (2.0 * h);
    const DenseOperator fine = (f(x + h / 2.0) - f(x - h / 2.0)) / h;
    const DenseOperator extrapolated = (4.0 * fine - coarse) / 3.0;
    const double scale = extrapolated.norm();
    // Differences below the cancellation floor carry no information either way.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(hi.norm(), lo.norm()) / h;
    if (scale > 0.0 && (extrapolated - fine).norm() > tolerance * scale + floor)
        throw NumericalError("derivative did not converge: Richardson estimates differ by " +
                             std::to_string((extrapolated - fine).norm() / scale));
    return extrapolated;
}

double derivative_step(double x) { return x == 0.0 ? 1e-4 : 1e-4 * std::fabs(x); }

double& parameter_ref(ChainParams& params, Parameter parameter) {
    switch (parameter) {
    case Parameter::J: return params.j_coupling;
    case Parameter::delta: return params.delta;
    case Parameter::lambda: return params.lambda;
    case Parameter::mu: return params.mu;
    }
    throw PreconditionError("unknown parameter");
}

DenseOperator build_state(const ChainParams& params, StateBuilder builder) {
    switch (builder) {
    case StateBuilder::oracle: return steady_state_nullspace(build_liouvillian(params));
    case StateBuilder::perturbative: return ness_perturbative(params).rho;
    case StateBuilder::mu1:
        return ness_mu1(params, kCalibratedEpsilonRatio * params.lambda / params.j_coupling);
    }
    throw PreconditionError("unknown state builder");
}

FisherEstimate qfi_parametric(const ChainParams& params, Parameter parameter, StateBuilder builder) {
    params.validate();
    require_dense_sites(params.n);
    if (builder == StateBuilder::mu1 && parameter == Parameter::mu)
        throw PreconditionError("the mu = 1 builder cannot vary mu");
    if (builder == StateBuilder::mu1 && (parameter == Parameter::lambda || parameter == Parameter::J)) {
        // ρ depends on λ and J only through ε = cλ/J; differentiate exactly along s(ε).
        const double c = kCalibratedEpsilonRatio;
        const Mu1Tangent t = ness_mu1_tangent(params, c * params.lambda / params.j_coupling);
        const double deps = parameter == Parameter::lambda
                                ? c / params.j_coupling
                                : -c * params.lambda / (params.j_coupling * params.j_coupling);
        FisherEstimate est;
        est.value = LogReal::from_double(qfi_dense(t.rho, deps * t.drho_depsilon));
        est.method = FisherMethod::exact_dense;
        est.parameter = parameter;
        est.params = params;
        return est;
    }
    ChainParams probe = params;
    const double x0 = parameter_ref(probe, parameter);
    const double h = derivative_step(x0);
    auto state_at = [&](double x) {
        ChainParams q = params;
        parameter_ref(q, parameter) = x;
        return build_state(q, builder);
    };
    const DenseOperator rho = build_state(params, builder);
    const DenseOperator drho = richardson_derivative(state_at, x0, h);
    FisherEstimate est;
    est.value = LogReal::from_double(qfi_dense(rho, drho));
    est.method = FisherMethod::exact_dense;
    est.parameter = parameter;
    est.params = params;
    return est;
}

} // namespace nessqfi
