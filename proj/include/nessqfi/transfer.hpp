#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/rational.hpp>

#include "nessqfi/estimate.hpp"
#include "nessqfi/log_real.hpp"
#include "nessqfi/model.hpp"

namespace nessqfi {

/// Whether banded products rescale their state each step to stay finite.
enum class LogMode { automatic, on, off };

/// Rational η/π = q/p with gcd(p, q) = 1.
struct RationalEta {
    int p = 2;
    int q = 1;
    double eta() const;
    double delta() const;
};

/// Tridiagonal real matrix on the bulk levels 1..d (0-based storage).
struct BandedBulk {
    Eigen::VectorXd diag;   ///< ⟨k|·|k⟩, k = 1..d
    Eigen::VectorXd lower;  ///< ⟨k+1|·|k⟩, k = 1..d−1
    Eigen::VectorXd upper;  ///< ⟨k|·|k+1⟩, k = 1..d−1
};

/// Transfer matrix T and vertex matrix D truncated to {L, R, 1..d}.
///
/// Dense index order is L = 0, R = 1, level k = k + 1. Besides the bulk band,
/// T has ⟨L|T|L⟩ = ⟨R|T|R⟩ = 1 and ⟨L|T|1⟩ = ⟨1|T|R⟩ = 1/2; D lives on the bulk
/// only. Entries are real for every Δ (sin² of an imaginary argument is −sinh²).
struct TransferSystem {
    int d = 1;
    Complex eta{};
    double delta = 0.0;
    BandedBulk t;
    BandedBulk vertex;

    Eigen::MatrixXd dense_t() const;
    Eigen::MatrixXd dense_vertex() const;
};

TransferSystem build_transfer(int d, Complex eta);

/// ⟨L|T^n|R⟩ with T truncated at level d; O(n·d).
LogReal bracket_LTnR(int n, Complex eta, int d, LogMode mode = LogMode::automatic);

/// Σ_{k=1}^n ⟨L|T^{k−1} D T^{n−k}|R⟩.
LogReal sum_defect(int n, Complex eta, int d, LogMode mode = LogMode::automatic);

/// d²/dη² ⟨L|T^n|R⟩, propagated exactly through the η-derivatives of the band.
LogReal bracket_second_derivative(int n, Complex eta, int d, LogMode mode = LogMode::automatic);

/// One record of a leading-order sweep at chain length m.
struct SweepPoint {
    LogReal bracket;        ///< ⟨L|T^m|R⟩
    LogReal defect_sum;     ///< Σ_k ⟨L|T^{k−1} D T^{m−k}|R⟩
    LogReal bracket_d2;     ///< d²/dη² ⟨L|T^m|R⟩
};

/// Records for every m = 1..n_max in a single O(n_max·d) pass.
std::vector<SweepPoint> leading_order_sweep(int n_max, Complex eta, int d, LogMode mode = LogMode::automatic);

/// Default truncation ⌊n/2⌋, the largest level reachable in n steps.
inline int full_truncation(int n) { return n / 2 > 0 ? n / 2 : 1; }

/// (d(λμ/J)/dx)² ⟨L|T^n|R⟩ / 2 for x ∈ {J, λ, μ}.
FisherEstimate f0_x(const ChainParams& params, Parameter parameter, LogMode mode = LogMode::automatic);

/// λ²μ²/(2J²(1−Δ²)) [Σ_k ⟨L|T^{k−1}DT^{n−k}|R⟩ + ¼ d²⟨L|T^n|R⟩/dη²], full truncation ⌊n/2⌋.
FisherEstimate f0_delta(const ChainParams& params, LogMode mode = LogMode::automatic);

/// Same bracket combination without the λμ/J prefactor: F_Δ^(0) J²/(λμ)².
LogReal f0_delta_unit(int n, double delta, LogMode mode = LogMode::automatic);

/// Small-η series of ⟨L|T^n|R⟩ through η⁶. Requires |η|·n < 0.2.
double isotropic_bracket_series(int n, double eta);

/// λ²μ²/(96J²) n(n−1)(n−2)(3n−7 − (η²/30)(n−3)(261n−799)). Requires |η|·n < 0.2.
double isotropic_f_delta(const ChainParams& params);

/// Jordan data of T^(d): T^(d) V = V T_J with T_J = [[1,1],[0,1]] ⊕ diag(τ).
struct JordanData {
    Eigen::VectorXd taus;        ///< sorted by decreasing |τ|
    Eigen::MatrixXd v;           ///< columns: |L⟩, |ψ⟩, |τ_1⟩, …, |τ_d⟩
    Eigen::MatrixXd v_inv;
    Eigen::VectorXd psi;         ///< (ψ_R, ψ_1, …, ψ_d)
    double chi = 0.0;            ///< 1/ψ_R
    double chi1 = 0.0;           ///< ⟨L|V^{-1}|R⟩

    Eigen::MatrixXd jordan_form() const;
};

JordanData jordan_decompose(const TransferSystem& ts);

/// Defective vector solving (T^(d) − 1)|ψ⟩ = |L⟩ with ψ_L = 0; returns (ψ_R, ψ_1..ψ_d).
Eigen::VectorXd defective_vector(const TransferSystem& ts);

/// Same vector from the continued-fraction form ψ_R = 4C_{d−1}(1−T_11), ψ_k = T_{k,k−1}ψ_{k−1}/(C_{d−k}(1−T_kk)).
Eigen::VectorXd defective_vector_continued_fraction(const TransferSystem& ts);

using Rational = boost::rational<long long>;

/// C_k = (k+2)/(2k+2).
Rational continued_fraction_C(int k);

/// C_k from C_0 = 1, C_k = 1 − 1/(4C_{k−1}).
Rational continued_fraction_C_recurrence(int k);

/// C_k as the k-th convergent of [1; −4, 1, −4, …] via f_k = a_k f_{k−1} + f_{k−2}, g likewise.
Rational continued_fraction_C_convergent(int k);

struct ChiCoefficients {
    double chi = 0.0;
    double chi1 = 0.0;
    int d = 0;
};

/// Default truncation for irrational η/π when no chain length is implied.
inline constexpr int kDefaultIrrationalTruncation = 400;

/// χ = d/(2(d+1)) · 1/(1−Δ²) and χ_1 = ⟨L|V^{-1}|R⟩; d = |p|−1 for rational η/π, else d_max.
ChiCoefficients chi_coefficient(double delta, std::optional<RationalEta> rational_eta,
                                int d_max = kDefaultIrrationalTruncation);

enum class XiMethod { slope, jordan };

struct XiResult {
    double xi = 0.0;          ///< F_Δ^(0) ≈ (λμ/J)² ξ n
    double xi1 = 0.0;         ///< linear coefficient of the defect sum
    double chi = 0.0;
    double chi_dd = 0.0;      ///< d²χ/dη² at fixed d
    int d = 0;
    int window_start = 0;     ///< slope window [N, 2N] (slope method)
    double fit_r2 = 1.0;
};

/// ξ for rational η = qπ/p: restricted space d = |p|−1 plus the single excursion to |p⟩.
/// `window_start` = 0 picks N = max(100, 20d).
XiResult xi_rational(RationalEta eta, XiMethod method = XiMethod::slope, int window_start = 0);

/// ξ(n) for an irrational pathway: least-squares slope over m ∈ [n, 2n] of the exact
/// (λμ/J)^{-2} F_Δ^(0)(m), full truncation.
XiResult xi_irrational(double delta, int n);

/// ξ(n) for every n in `ns` from a single exact sweep up to 2·max(ns).
std::vector<XiResult> xi_irrational_scan(double delta, const std::vector<int>& ns);

/// Dispatcher matching the rational/irrational dichotomy.
XiResult xi_coefficient(double delta, int n, std::optional<RationalEta> rational_eta,
                        XiMethod method = XiMethod::slope);

struct EasyAxisBound {
    LogReal single_path;      ///< ⟨L|A_−^{n/2} A_+^{n/2}|R⟩ contribution to ⟨L|T^n|R⟩
    LogReal factorial_bound;  ///< (η²)^{n−2}/2^n ((n/2)!(n/2−1)!)²
};

/// Lower bounds for even n, |Δ| > 1: factorial_bound ≤ single_path ≤ ⟨L|T^n|R⟩.
EasyAxisBound easy_axis_lower_bound(int n, double delta);

/// Sorted eigenvalues of 𝟙 − ½(shift + shiftᵀ) on d levels, from a numeric eigensolve.
std::vector<double> toeplitz_eigs_check(int d);

/// Analytic counterpart 1 − cos(jπ/(d+1)), j = 1..d.
std::vector<double> toeplitz_eigs_analytic(int d);

/// Least-squares line through (x_i, y_i).
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 1.0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

} // namespace nessqfi
