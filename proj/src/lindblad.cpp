#include "nessqfi/lindblad.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "nessqfi/errors.hpp"
#include "nessqfi/mpo.hpp"

namespace nessqfi {

namespace {

void require_liouvillian_sites(int n) {
    if (n > kMaxLiouvillianSites)
        throw PreconditionError("Liouvillian is capped at n <= " + std::to_string(kMaxLiouvillianSites) +
                                " (got n = " + std::to_string(n) + ")");
}

// Sum of L_k† L_k.
DenseOperator jump_load(const Liouvillian& l) {
    const Eigen::Index dim = l.hamiltonian.rows();
    DenseOperator k = DenseOperator::Zero(dim, dim);
    for (const auto& j : l.jumps) k += j.adjoint() * j;
    return k;
}

// G = −iH − ½λK, so that L(ρ) = Gρ + ρG† + λ Σ L_k ρ L_k†.
DenseOperator drift(const Liouvillian& l) {
    return Complex{0.0, -1.0} * l.hamiltonian - 0.5 * l.params.lambda * jump_load(l);
}

struct ColumnEntries {
    std::vector<std::vector<std::pair<int, Complex>>> cols;
};

ColumnEntries nonzeros(const DenseOperator& op) {
    ColumnEntries out;
    out.cols.resize(op.cols());
    for (Eigen::Index c = 0; c < op.cols(); ++c)
        for (Eigen::Index r = 0; r < op.rows(); ++r)
            if (op(r, c) != Complex{}) out.cols[c].emplace_back(static_cast<int>(r), op(r, c));
    return out;
}

// Index of |a⟩⟨b| inside the block of equal magnetization.
struct BalancedBlock {
    int n = 0;
    std::vector<int> rank;        // rank of a within its popcount class
    std::vector<int> offset;      // start of class w
    std::vector<int> class_size;
    std::vector<std::pair<int, int>> elements;

    explicit BalancedBlock(int sites) : n(sites) {
        const int dim = 1 << n;
        rank.resize(dim);
        class_size.assign(n + 1, 0);
        for (int a = 0; a < dim; ++a) rank[a] = class_size[std::popcount(static_cast<unsigned>(a))]++;
        offset.assign(n + 1, 0);
        int total = 0;
        for (int w = 0; w <= n; ++w) {
            offset[w] = total;
            total += class_size[w] * class_size[w];
        }
        elements.resize(total);
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b)
                if (std::popcount(static_cast<unsigned>(a)) == std::popcount(static_cast<unsigned>(b)))
                    elements[index(a, b)] = {a, b};
    }

    int size() const { return static_cast<int>(elements.size()); }
    bool balanced(int a, int b) const {
        return std::popcount(static_cast<unsigned>(a)) == std::popcount(static_cast<unsigned>(b));
    }
    int index(int a, int b) const {
        const int w = std::popcount(static_cast<unsigned>(a));
        return offset[w] + rank[a] * class_size[w] + rank[b];
    }
};

} // namespace

Liouvillian build_liouvillian(const ChainParams& params, bool include_omega) {
    params.validate();
    require_dense_sites(params.n);
    Liouvillian l;
    l.n = params.n;
    l.params = params;
    l.include_omega = include_omega;
    l.hamiltonian = params.j_coupling * hamiltonian_xxz(params);
    if (include_omega && params.omega != 0.0) l.hamiltonian += (params.omega / 2.0) * magnetization_z(params.n);
    l.jumps = lindblad_jump_ops(params);
    return l;
}

Eigen::MatrixXcd Liouvillian::matrix() const {
    require_liouvillian_sites(n);
    const Eigen::Index dim = hamiltonian.rows();
    const DenseOperator id = DenseOperator::Identity(dim, dim);
    const DenseOperator g = drift(*this);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim * dim, dim * dim);
    // (Yᵀ ⊗ X)_{(a,b),(c,e)} = Y(e,b) X(a,c) with vec index a + b·dim.
    // add_kron(Yᵀ, X, w) accumulates w (Yᵀ ⊗ X).
    auto add_kron = [&](const DenseOperator& yt, const DenseOperator& x, Complex scale) {
        for (Eigen::Index e = 0; e < dim; ++e)
            for (Eigen::Index b = 0; b < dim; ++b) {
                const Complex y = yt(b, e) * scale;
                if (y == Complex{}) continue;
                out.block(b * dim, e * dim, dim, dim) += y * x;
            }
    };
    add_kron(id, g, 1.0);
    add_kron(g.conjugate(), id, 1.0);
    for (const auto& j : jumps) add_kron(j.conjugate(), j, params.lambda);
    return out;
}

DenseOperator Liouvillian::apply(const DenseOperator& rho) const {
    const DenseOperator g = drift(*this);
    DenseOperator out = g * rho + rho * g.adjoint();
    for (const auto& j : jumps) out += params.lambda * (j * rho * j.adjoint());
    return out;
}

double fixed_point_residual(const Liouvillian& l, const DenseOperator& rho) { return hs_norm(l.apply(rho)); }

DenseOperator steady_state_nullspace(const Liouvillian& l) {
    require_liouvillian_sites(l.n);
    if (!(l.params.lambda > 0.0)) throw PreconditionError("a unique NESS needs lambda > 0");
    const int dim = 1 << l.n;
    const BalancedBlock block(l.n);
    const int size = block.size();
    const DenseOperator g = drift(l);
    const auto g_nz = nonzeros(g);
    std::vector<ColumnEntries> jump_nz;
    for (const auto& j : l.jumps) jump_nz.push_back(nonzeros(j));

    Eigen::MatrixXcd sys = Eigen::MatrixXcd::Zero(size, size);
    for (int col = 0; col < size; ++col) {
        const auto [c, e] = block.elements[col];
        for (const auto& [a, v] : g_nz.cols[c]) sys(block.index(a, e), col) += v;
        for (const auto& [b, v] : g_nz.cols[e]) sys(block.index(c, b), col) += std::conj(v);
        for (const auto& jn : jump_nz)
            for (const auto& [a, va] : jn.cols[c])
                for (const auto& [b, vb] : jn.cols[e])
                    if (block.balanced(a, b)) sys(block.index(a, b), col) += l.params.lambda * va * std::conj(vb);
    }
    // The diagonal rows sum to zero (trace preservation); trade one for Tr ρ = 1.
    const int trace_row = block.index(0, 0);
    sys.row(trace_row).setZero();
    for (int a = 0; a < dim; ++a) sys(trace_row, block.index(a, a)) = 1.0;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(size);
    rhs(trace_row) = 1.0;

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(sys);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-13))
        throw NumericalError("steady state is not unique (reciprocal condition " + std::to_string(rcond) + ")");
    const Eigen::VectorXcd x = lu.solve(rhs);

    DenseOperator rho = DenseOperator::Zero(dim, dim);
    for (int i = 0; i < size; ++i) rho(block.elements[i].first, block.elements[i].second) = x(i);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace();
    return rho;
}

PerturbativeNess ness_perturbative(const ChainParams& params) {
    params.validate();
    const int n = params.n;
    // The contracted MPO enters as Z†: that orientation pairs with the σ⁺ = |↑⟩⟨↓| drive at site 1.
    const DenseOperator z = contract_to_dense(build_aux_A(n, params.eta()), n).adjoint();
    const DenseOperator x = z - z.adjoint();
    const Eigen::Index dim = z.rows();
    const double r = params.lambda / params.j_coupling;
    const double mu = params.mu;
    DenseOperator rho = DenseOperator::Identity(dim, dim);
    rho += Complex{0.0, r / 2.0 * mu} * x;
    rho += (r * r / 8.0) * (mu * (z * z.adjoint() - z.adjoint() * z) - mu * mu * (x * x));
    rho /= static_cast<double>(dim);

    PerturbativeNess out;
    const Complex tr = rho.trace();
    out.trace_defect = tr.real() - 1.0;
    out.rho = rho / tr;
    out.validity_threshold = mu == 0.0 ? std::numeric_limits<double>::infinity() : validity_threshold(n, params.eta(), mu);
    out.within_validity = r < out.validity_threshold;
    return out;
}

DenseOperator ness_mu1(const ChainParams& params, double epsilon) {
    params.validate();
    if (params.mu != 1.0) throw PreconditionError("the non-perturbative NESS needs mu = 1");
    const Complex eta = params.eta();
    const DenseOperator s = contract_to_dense(build_aux_B(params.n, eta, solve_s(epsilon, eta)), params.n);
    DenseOperator rho = s * s.adjoint();
    rho /= rho.trace();
    return rho;
}

Mu1Tangent ness_mu1_tangent(const ChainParams& params, double epsilon) {
    params.validate();
    if (params.mu != 1.0) throw PreconditionError("the non-perturbative NESS needs mu = 1");
    const Complex eta = params.eta();
    const Complex s = solve_s(epsilon, eta);
    const DenseOperator op = contract_to_dense(build_aux_B(params.n, eta, s), params.n);
    const DenseOperator dop =
        solve_s_derivative(epsilon, eta) * contract_to_dense(build_aux_B_tangent(params.n, eta, s), params.n);
    const DenseOperator g = op * op.adjoint();
    const DenseOperator dg = dop * op.adjoint() + op * dop.adjoint();
    const double tr = g.trace().real();
    Mu1Tangent out;
    out.rho = g / tr;
    out.drho_depsilon = (dg - out.rho * dg.trace().real()) / tr;
    return out;
}

EpsilonCalibration calibrate_epsilon(const ChainParams& params) {
    params.validate();
    if (params.n > 5) throw PreconditionError("epsilon calibration is limited to n <= 5");
    if (!(params.lambda > 0.0)) throw PreconditionError("epsilon calibration needs lambda > 0");
    const Liouvillian l = build_liouvillian(params);
    auto residual = [&](double eps) { return fixed_point_residual(l, ness_mu1(params, eps)); };

    const double r = params.lambda / params.j_coupling;
    EpsilonCalibration cal;
    cal.epsilon = r;
    cal.residual = std::numeric_limits<double>::infinity();
    for (double seed : {r, r / 2.0, 2.0 * r}) {
        const double res = residual(seed);
        cal.seed_residuals.push_back(res);
        if (res < cal.residual) {
            cal.residual = res;
            cal.epsilon = seed;
        }
    }
    if (cal.residual > 1e-13) {
        const double center = std::log(cal.epsilon);
        const auto best = boost::math::tools::brent_find_minima(
            [&](double t) { return residual(std::exp(t)); }, center - std::log(4.0), center + std::log(4.0), 50);
        if (best.second < cal.residual) {
            cal.epsilon = std::exp(best.first);
            cal.residual = best.second;
        }
    }
    cal.ratio = cal.epsilon / r;
    if (!(cal.residual < 1e-8))
        throw NumericalError("epsilon calibration failed: best residual " + std::to_string(cal.residual) +
                             " at epsilon = " + std::to_string(cal.epsilon) + " (seed residuals " +
                             std::to_string(cal.seed_residuals[0]) + ", " + std::to_string(cal.seed_residuals[1]) +
                             ", " + std::to_string(cal.seed_residuals[2]) + ")");
    return cal;
}

} // namespace nessqfi
