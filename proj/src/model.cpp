#include "nessqfi/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "nessqfi/errors.hpp"

namespace nessqfi {

namespace {

// Bit of `site` (1-based, site 1 most significant) in a basis index; 0 = up.
inline int site_bit(std::size_t index, int n, int site) {
    return static_cast<int>((index >> (n - site)) & 1U);
}

} // namespace

Complex eta_from_delta(double delta) {
    if (!std::isfinite(delta)) throw PreconditionError("delta must be finite");
    if (delta > 1.0) return {0.0, std::acosh(delta)};
    if (delta < -1.0) return {std::numbers::pi, std::acosh(-delta)};
    return {std::acos(delta), 0.0};
}

Complex ChainParams::eta() const { return eta_from_delta(delta); }

void ChainParams::validate() const {
    if (n < 2) throw PreconditionError("chain length n must be >= 2, got " + std::to_string(n));
    if (!(j_coupling > 0.0)) throw PreconditionError("J must be > 0");
    if (!(lambda >= 0.0)) throw PreconditionError("lambda must be >= 0");
    if (!(mu >= -1.0 && mu <= 1.0)) throw PreconditionError("mu must lie in [-1, 1]");
    if (!std::isfinite(delta) || !std::isfinite(omega))
        throw PreconditionError("delta and omega must be finite");
}

PauliAxis parse_pauli_axis(std::string_view label) {
    if (label == "x") return PauliAxis::x;
    if (label == "y") return PauliAxis::y;
    if (label == "z") return PauliAxis::z;
    if (label == "+" || label == "plus") return PauliAxis::plus;
    if (label == "-" || label == "minus") return PauliAxis::minus;
    throw PreconditionError("unknown Pauli axis label '" + std::string(label) + "'");
}

Eigen::Matrix2cd pauli(PauliAxis axis) {
    const Complex i{0.0, 1.0};
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    switch (axis) {
    case PauliAxis::x: m << 0, 1, 1, 0; break;
    case PauliAxis::y: m << 0, -i, i, 0; break;
    case PauliAxis::z: m << 1, 0, 0, -1; break;
    case PauliAxis::plus: m(0, 1) = 1; break;
    case PauliAxis::minus: m(1, 0) = 1; break;
    }
    return m;
}

void require_dense_sites(int n, int cap) {
    if (n < 1) throw PreconditionError("site count must be >= 1");
    if (n > cap)
        throw PreconditionError("dense representation is capped at n <= " + std::to_string(cap) +
                                " (got n = " + std::to_string(n) + ")");
}

DenseOperator embed(int n, int site, const Eigen::Matrix2cd& op) {
    require_dense_sites(n);
    if (site < 1 || site > n)
        throw PreconditionError("site " + std::to_string(site) + " outside 1.." + std::to_string(n));
    const std::size_t dim = std::size_t{1} << n;
    const std::size_t mask = std::size_t{1} << (n - site);
    DenseOperator out = DenseOperator::Zero(dim, dim);
    for (std::size_t col = 0; col < dim; ++col) {
        const int b = site_bit(col, n, site);
        const std::size_t base = col & ~mask;
        for (int a = 0; a < 2; ++a) {
            const Complex v = op(a, b);
            if (v != Complex{}) out(base | (a ? mask : 0), col) = v;
        }
    }
    return out;
}

DenseOperator hamiltonian_xxz(const ChainParams& params) {
    params.validate();
    const int n = params.n;
    require_dense_sites(n);
    const std::size_t dim = std::size_t{1} << n;
    DenseOperator h = DenseOperator::Zero(dim, dim);
    for (std::size_t s = 0; s < dim; ++s) {
        for (int j = 1; j < n; ++j) {
            const int a = site_bit(s, n, j);
            const int b = site_bit(s, n, j + 1);
            h(s, s) += params.delta * (a == b ? 1.0 : -1.0);
            if (a != b) {
                // σ^xσ^x + σ^yσ^y = 2(σ⁺σ⁻ + σ⁻σ⁺) exchanges an antiparallel pair.
                const std::size_t flipped = s ^ (std::size_t{1} << (n - j)) ^ (std::size_t{1} << (n - j - 1));
                h(flipped, s) += 2.0;
            }
        }
    }
    return h;
}

DenseOperator magnetization_z(int n) {
    require_dense_sites(n);
    const std::size_t dim = std::size_t{1} << n;
    DenseOperator m = DenseOperator::Zero(dim, dim);
    for (std::size_t s = 0; s < dim; ++s) {
        double total = 0.0;
        for (int j = 1; j <= n; ++j) total += site_bit(s, n, j) == 0 ? 1.0 : -1.0;
        m(s, s) = total;
    }
    return m;
}

std::array<DenseOperator, 4> lindblad_jump_ops(const ChainParams& params) {
    params.validate();
    const double mu = params.mu;
    const int n = params.n;
    const auto sp = pauli(PauliAxis::plus);
    const auto sm = pauli(PauliAxis::minus);
    return {std::sqrt((1.0 + mu) / 2.0) * embed(n, 1, sp), std::sqrt((1.0 - mu) / 2.0) * embed(n, 1, sm),
            std::sqrt((1.0 - mu) / 2.0) * embed(n, n, sp), std::sqrt((1.0 + mu) / 2.0) * embed(n, n, sm)};
}

double hs_norm(const DenseOperator& op) { return op.norm(); }

DenseOperator partial_trace_tail(const DenseOperator& op, int n, int keep) {
    if (keep < 1 || keep > n) throw PreconditionError("partial trace must keep 1..n sites");
    const std::size_t dim = std::size_t{1} << n;
    if (op.rows() != static_cast<Eigen::Index>(dim) || op.cols() != op.rows())
        throw PreconditionError("operator dimension does not match 2^n");
    const std::size_t kept = std::size_t{1} << keep;
    const std::size_t traced = std::size_t{1} << (n - keep);
    DenseOperator out = DenseOperator::Zero(kept, kept);
    for (std::size_t a = 0; a < kept; ++a)
        for (std::size_t b = 0; b < kept; ++b) {
            Complex acc{};
            for (std::size_t t = 0; t < traced; ++t) acc += op(a * traced + t, b * traced + t);
            out(a, b) = acc;
        }
    return out;
}

} // namespace nessqfi
