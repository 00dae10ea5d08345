#pragma once

#include <array>
#include <vector>

#include "nessqfi/model.hpp"

namespace nessqfi {

/// Liouvillians are materialized densely only up to this many sites (4^n rows).
inline constexpr int kMaxLiouvillianSites = 6;

/// Generator ρ ↦ −i[H, ρ] + λ Σ_k (L_k ρ L_k† − ½{L_k†L_k, ρ}), H = (Ω/2) M_z + J H_XXZ.
///
/// Holds the operators; the 4^n superoperator is formed on demand. Vectorization
/// is column stacking, so X ρ Y ↦ (Yᵀ ⊗ X) vec ρ.
struct Liouvillian {
    int n = 2;
    ChainParams params;
    bool include_omega = true;
    DenseOperator hamiltonian;
    std::array<DenseOperator, 4> jumps;

    /// Dense superoperator; n ≤ kMaxLiouvillianSites.
    Eigen::MatrixXcd matrix() const;

    /// L(ρ) without forming the superoperator.
    DenseOperator apply(const DenseOperator& rho) const;
};

Liouvillian build_liouvillian(const ChainParams& params, bool include_omega = true);

/// ‖L(ρ)‖_HS.
double fixed_point_residual(const Liouvillian& l, const DenseOperator& rho);

/// Unique unit-trace null vector, solved in the M_z-balanced block with a trace row.
DenseOperator steady_state_nullspace(const Liouvillian& l);

/// Leading-order perturbative state with the trace renormalized to one; `trace_defect` is Tr before that, minus 1.
struct PerturbativeNess {
    DenseOperator rho;
    double trace_defect = 0.0;
    double validity_threshold = 0.0;  ///< λ/J must stay below this
    bool within_validity = true;
};

PerturbativeNess ness_perturbative(const ChainParams& params);

/// SS†/Tr(SS†) with S from the B-family at s = solve_s(ε, η); requires μ = 1.
DenseOperator ness_mu1(const ChainParams& params, double epsilon);

/// ρ from ness_mu1 together with its exact ε-derivative.
struct Mu1Tangent {
    DenseOperator rho;
    DenseOperator drho_depsilon;
};

Mu1Tangent ness_mu1_tangent(const ChainParams& params, double epsilon);

struct EpsilonCalibration {
    double epsilon = 0.0;
    double residual = 0.0;              ///< ‖L(ρ)‖_HS at `epsilon`
    double ratio = 0.0;                 ///< ε J / λ
    std::vector<double> seed_residuals; ///< residuals at ε = λ/J, λ/(2J), 2λ/J
};

/// 1-D minimization of ‖L(ness_mu1(ε))‖_HS; throws NumericalError when the best residual ≥ 1e-8.
EpsilonCalibration calibrate_epsilon(const ChainParams& params);

/// Default ε J/λ established by calibration.
inline constexpr double kCalibratedEpsilonRatio = 1.0;

} // namespace nessqfi
