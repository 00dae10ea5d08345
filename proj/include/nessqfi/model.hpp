#pragma once

#include <array>
#include <complex>
#include <string_view>

#include <Eigen/Dense>

namespace nessqfi {

using Complex = std::complex<double>;

/// Complex square matrix on the 2^n spin Hilbert space (or a superoperator).
using DenseOperator = Eigen::MatrixXcd;

/// Dense operators on more sites than this are rejected.
inline constexpr int kMaxDenseSites = 12;

/// Physical parameters of the boundary-driven XXZ chain.
struct ChainParams {
    int n = 2;
    double j_coupling = 1.0;
    double delta = 0.0;
    double lambda = 0.0;
    double mu = 0.0;
    double omega = 0.0;

    /// η with cos η = Δ (see eta_from_delta for the branch choice).
    Complex eta() const;

    /// Throws PreconditionError when an invariant is violated.
    void validate() const;
};

/// η = arccos Δ. Real on |Δ| ≤ 1; i·arccosh Δ for Δ > 1; π + i·arccosh(−Δ) for Δ < −1.
Complex eta_from_delta(double delta);

enum class PauliAxis { x, y, z, plus, minus };

/// Parses "x", "y", "z", "+", "-" (also "plus"/"minus").
PauliAxis parse_pauli_axis(std::string_view label);

/// Single-spin matrix in the basis where σ^z = diag(1, −1).
/// σ^± = (σ^x ± iσ^y)/2, so σ⁺ = |↑⟩⟨↓| with |↑⟩ = basis state 0.
Eigen::Matrix2cd pauli(PauliAxis axis);

/// identity ⊗ … ⊗ op ⊗ … ⊗ identity with op on `site` (1-based; site 1 is the
/// most significant tensor factor).
DenseOperator embed(int n, int site, const Eigen::Matrix2cd& op);

/// Σ_j (σ^x_j σ^x_{j+1} + σ^y_j σ^y_{j+1} + Δ σ^z_j σ^z_{j+1}), built directly in the σ^z basis.
DenseOperator hamiltonian_xxz(const ChainParams& params);

/// Σ_j σ^z_j.
DenseOperator magnetization_z(int n);

/// L_{1,2} = sqrt((1±μ)/2) σ_1^±, L_{3,4} = sqrt((1∓μ)/2) σ_n^±.
std::array<DenseOperator, 4> lindblad_jump_ops(const ChainParams& params);

/// sqrt(Tr(O O†)).
double hs_norm(const DenseOperator& op);

/// Reduced operator on the first `keep` sites of an n-site operator.
DenseOperator partial_trace_tail(const DenseOperator& op, int n, int keep);

/// Throws PreconditionError when 2^n dense storage would exceed the site cap.
void require_dense_sites(int n, int cap = kMaxDenseSites);

} // namespace nessqfi
