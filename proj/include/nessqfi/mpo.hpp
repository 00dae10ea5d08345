#pragma once

#include <Eigen/Dense>

#include "nessqfi/log_real.hpp"
#include "nessqfi/model.hpp"
#include "nessqfi/transfer.hpp"

namespace nessqfi {

enum class AuxFamily { A, B };

/// Tridiagonal MPO matrices on the auxiliary space.
///
/// A-family basis: L = 0, R = 1, level k = k + 1 (k = 1..⌊n/2⌋).
/// B-family basis: level k = k (k = 0..⌊n/2⌋), both boundaries |0⟩.
struct AuxMatrices {
    AuxFamily family = AuxFamily::A;
    int dim_aux = 0;
    Eigen::MatrixXcd a0, a_plus, a_minus;
    int boundary_left = 0;
    int boundary_right = 1;
};

/// A_0, A_± of the perturbative MPO Z. `extra_levels` widens the space past ⌊n/2⌋.
AuxMatrices build_aux_A(int n, Complex eta, int extra_levels = 0);

/// B_0, B_± of the μ = 1 MPO S.
AuxMatrices build_aux_B(int n, Complex eta, Complex s, int extra_levels = 0);

/// Block matrices [[B, ∂B/∂s], [0, B]]; contracting them from the second-block R to the
/// first-block L yields ∂S/∂s.
AuxMatrices build_aux_B_tangent(int n, Complex eta, Complex s);

/// s with cot(sη) = ε/(4i sin η), principal branch; s = π/(2η) at ε = 0.
Complex solve_s(double epsilon, Complex eta);

/// ds/dε along solve_s.
Complex solve_s_derivative(double epsilon, Complex eta);

/// Σ_{s ∈ {0,+,−}^n} ⟨left|A_{s_1}⋯A_{s_n}|right⟩ σ^{s_1} ⊗ ⋯ ⊗ σ^{s_n}.
DenseOperator contract_to_dense(const AuxMatrices& aux, int n);

/// ‖Z‖²_HS = 2^n ⟨L|T^n|R⟩ without forming Z.
LogReal hs_norm_sq_via_transfer(int n, Complex eta, LogMode mode = LogMode::automatic);

/// sqrt(2^{n+1})/(μ ‖Z‖_HS) = sqrt(2/⟨L|T^n|R⟩)/μ; λ/J must stay below it.
double validity_threshold(int n, Complex eta, double mu);

} // namespace nessqfi
