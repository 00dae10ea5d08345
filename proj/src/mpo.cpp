#include "nessqfi/mpo.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "nessqfi/errors.hpp"

namespace nessqfi {

AuxMatrices build_aux_A(int n, Complex eta, int extra_levels) {
    if (n < 2) throw PreconditionError("MPO needs n >= 2");
    if (extra_levels < 0) throw PreconditionError("extra_levels must be >= 0");
    const int m = n / 2 + extra_levels;
    AuxMatrices a;
    a.family = AuxFamily::A;
    a.dim_aux = m + 2;
    a.a0 = Eigen::MatrixXcd::Zero(a.dim_aux, a.dim_aux);
    a.a_plus = a.a0;
    a.a_minus = a.a0;
    a.boundary_left = 0;
    a.boundary_right = 1;
    a.a0(0, 0) = 1.0;
    a.a0(1, 1) = 1.0;
    for (int k = 1; k <= m; ++k) a.a0(k + 1, k + 1) = std::cos(eta * static_cast<double>(k));
    a.a_plus(2, 1) = 1.0;   // |1⟩⟨R|
    a.a_minus(0, 2) = 1.0;  // |L⟩⟨1|
    // Terms that would leave the space (|m+1⟩) are clamped: unreachable in n steps.
    for (int k = 1; k < m; ++k) {
        a.a_plus(k + 2, k + 1) = -std::sin(eta * static_cast<double>(k));
        a.a_minus(k + 1, k + 2) = std::sin(eta * static_cast<double>(k + 1));
    }
    return a;
}

AuxMatrices build_aux_B(int n, Complex eta, Complex s, int extra_levels) {
    if (n < 2) throw PreconditionError("MPO needs n >= 2");
    if (std::abs(std::sin(eta)) < 1e-14) throw PreconditionError("B-family undefined at sin(eta) = 0");
    const int m = n / 2 + extra_levels;
    AuxMatrices b;
    b.family = AuxFamily::B;
    b.dim_aux = m + 1;
    b.a0 = Eigen::MatrixXcd::Zero(b.dim_aux, b.dim_aux);
    b.a_plus = b.a0;
    b.a_minus = b.a0;
    b.boundary_left = 0;
    b.boundary_right = 0;
    for (int k = 0; k <= m; ++k) b.a0(k, k) = std::sin(eta * (s - static_cast<double>(k)));
    for (int k = 0; k < m; ++k) {
        b.a_plus(k, k + 1) = std::sin(eta * (static_cast<double>(k) - 2.0 * s));
        b.a_minus(k + 1, k) = std::sin(eta * static_cast<double>(k + 1));
    }
    return b;
}

AuxMatrices build_aux_B_tangent(int n, Complex eta, Complex s) {
    const AuxMatrices b = build_aux_B(n, eta, s);
    const int m = b.dim_aux;
    AuxMatrices t;
    t.family = AuxFamily::B;
    t.dim_aux = 2 * m;
    t.a0 = Eigen::MatrixXcd::Zero(t.dim_aux, t.dim_aux);
    t.a_plus = t.a0;
    t.a_minus = t.a0;
    t.boundary_left = b.boundary_left;
    t.boundary_right = m + b.boundary_right;
    for (auto [dst, src] : {std::pair{&t.a0, &b.a0}, {&t.a_plus, &b.a_plus}, {&t.a_minus, &b.a_minus}}) {
        dst->topLeftCorner(m, m) = *src;
        dst->bottomRightCorner(m, m) = *src;
    }
    for (int k = 0; k < m; ++k) t.a0(k, m + k) = eta * std::cos(eta * (s - static_cast<double>(k)));
    for (int k = 0; k + 1 < m; ++k) t.a_plus(k, m + k + 1) = -2.0 * eta * std::cos(eta * (static_cast<double>(k) - 2.0 * s));
    return t;
}

Complex solve_s(double epsilon, Complex eta) {
    if (std::abs(eta) < 1e-14 || std::abs(std::sin(eta)) < 1e-14)
        throw PreconditionError("solve_s is undefined at the isotropic point");
    if (epsilon == 0.0) return std::numbers::pi / 2.0 / eta;
    const Complex w = epsilon / (Complex{0.0, 4.0} * std::sin(eta));
    return std::atan(1.0 / w) / eta;
}

Complex solve_s_derivative(double epsilon, Complex eta) {
    if (std::abs(eta) < 1e-14 || std::abs(std::sin(eta)) < 1e-14)
        throw PreconditionError("solve_s is undefined at the isotropic point");
    // s = atan(1/w)/η with w = ε/(4i sin η); d atan(1/w)/dw = −1/(1 + w²).
    const Complex c = Complex{0.0, 4.0} * std::sin(eta);
    const Complex w = epsilon / c;
    return -1.0 / ((1.0 + w * w) * c * eta);
}

DenseOperator contract_to_dense(const AuxMatrices& aux, int n) {
    require_dense_sites(n);
    const int da = aux.dim_aux;
    enum Step { identity, plus, minus };
    const std::array<const Eigen::MatrixXcd*, 3> mats{&aux.a0, &aux.a_plus, &aux.a_minus};
    // ops[a]: operator on sites j..n carried by auxiliary component a.
    std::vector<DenseOperator> ops(da, DenseOperator::Zero(1, 1));
    std::vector<bool> live(da, false);
    ops[aux.boundary_right](0, 0) = 1.0;
    live[aux.boundary_right] = true;
    for (int site = n; site >= 1; --site) {
        const Eigen::Index dim = ops[0].rows();
        std::vector<DenseOperator> next(da, DenseOperator::Zero(2 * dim, 2 * dim));
        std::vector<bool> next_live(da, false);
        for (int step : {identity, plus, minus}) {
            const Eigen::MatrixXcd& m = *mats[step];
            // σ^0 = 𝟙, σ⁺ = |↑⟩⟨↓| (block (0,1)), σ⁻ = |↓⟩⟨↑| (block (1,0)).
            const int r = step == minus ? 1 : 0;
            const int c = step == plus ? 1 : 0;
            for (int b = 0; b < da; ++b)
                for (int a = 0; a < da; ++a) {
                    const Complex w = m(b, a);
                    if (w == Complex{} || !live[a]) continue;
                    next_live[b] = true;
                    next[b].block(r * dim, c * dim, dim, dim) += w * ops[a];
                    if (step == identity) next[b].block(dim, dim, dim, dim) += w * ops[a];
                }
        }
        ops = std::move(next);
        live = std::move(next_live);
    }
    return ops[aux.boundary_left];
}

LogReal hs_norm_sq_via_transfer(int n, Complex eta, LogMode mode) {
    if (n < 2) throw PreconditionError("MPO needs n >= 2");
    LogReal b = bracket_LTnR(n, eta, full_truncation(n), mode);
    b.log_abs += n * std::log(2.0);
    return b;
}

double validity_threshold(int n, Complex eta, double mu) {
    if (mu == 0.0) throw PreconditionError("validity condition is vacuous at mu = 0");
    const LogReal b = bracket_LTnR(n, eta, full_truncation(n));
    return std::exp(0.5 * (std::log(2.0) - b.log_abs)) / std::fabs(mu);
}

} // namespace nessqfi
