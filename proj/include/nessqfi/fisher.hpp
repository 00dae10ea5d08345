#pragma once

#include <functional>

#include "nessqfi/estimate.hpp"
#include "nessqfi/model.hpp"

namespace nessqfi {

/// Eigenvalue pairs with p_k + p_l below this fraction of max p are off-support.
inline constexpr double kSupportTolerance = 1e-12;

/// L with dρ = ½(Lρ + ρL), from (L)_{kl} = 2(dρ)_{kl}/(p_k + p_l) in the eigenbasis of ρ.
DenseOperator sld(const DenseOperator& rho, const DenseOperator& drho);

/// Tr(L² ρ) = 2 Σ |dρ_kl|²/(p_k + p_l) over supported pairs.
double qfi_dense(const DenseOperator& rho, const DenseOperator& drho);

/// ½ Tr(ρ{L_x, L_y}).
double fisher_cross(const DenseOperator& rho, const DenseOperator& drho_x, const DenseOperator& drho_y);

/// (Tr(ζ²ρ) − Tr(ζρ)²)/m.
double optimal_estimator_variance(const DenseOperator& rho, const DenseOperator& zeta, int m);

/// 1/(x sqrt(m F)).
double relative_error(double x_value, const FisherEstimate& fisher, int m = 1);

/// Classical Fisher information of the projective measurement onto the SLD eigenbasis.
double sld_measurement_fisher(const DenseOperator& rho, const DenseOperator& drho);

/// Bures fidelity (Tr sqrt(sqrt(ρ) σ sqrt(ρ)))².
double fidelity(const DenseOperator& rho, const DenseOperator& sigma);

enum class StateBuilder { oracle, perturbative, mu1 };

/// Central difference with one Richardson level; throws NumericalError when the
/// two step sizes disagree by more than `tolerance` (relative, HS norm).
DenseOperator richardson_derivative(const std::function<DenseOperator(double)>& f, double x, double h,
                                    double tolerance = 1e-6);

/// Step used for parametric derivatives: 1e-4·|x|, or 1e-4 at x = 0.
double derivative_step(double x);

/// The state ρ_∞ for `params` from one of the builders; mu1 uses ε = kCalibratedEpsilonRatio·λ/J.
DenseOperator build_state(const ChainParams& params, StateBuilder builder);

/// Exact QFI of ρ_∞ with respect to `parameter`.
FisherEstimate qfi_parametric(const ChainParams& params, Parameter parameter, StateBuilder builder);

double& parameter_ref(ChainParams& params, Parameter parameter);

} // namespace nessqfi
