#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "nessqfi/errors.hpp"
#include "nessqfi/transfer.hpp"

namespace nessqfi {

namespace {

void require_series_regime(int n, double eta) {
    if (n < 2) throw PreconditionError("chain length n must be >= 2");
    if (std::fabs(eta) * n >= 0.2)
        throw PreconditionError("isotropic series needs |eta| n < 0.2 (got " + std::to_string(std::fabs(eta) * n) + ")");
}

} // namespace

double isotropic_bracket_series(int n, double eta) {
    require_series_regime(n, eta);
    const double nn = n;
    const double e2 = eta * eta;
    const double inner = e2 - e2 * e2 / 6.0 * (3.0 * nn - 7.0) + e2 * e2 * e2 / 180.0 * (989.0 + 3.0 * nn * (36.0 * nn - 217.0));
    return nn * (nn - 1.0) / 8.0 - nn * (nn - 1.0) * (nn - 2.0) / 24.0 * inner;
}

double isotropic_f_delta(const ChainParams& params) {
    params.validate();
    const Complex eta = params.eta();
    if (eta.imag() != 0.0) throw PreconditionError("isotropic series is defined for Delta <= 1 near 1");
    require_series_regime(params.n, eta.real());
    const double n = params.n;
    const double e2 = eta.real() * eta.real();
    const double g = params.lambda * params.mu / params.j_coupling;
    return g * g / 96.0 * n * (n - 1.0) * (n - 2.0) * (3.0 * n - 7.0 - e2 / 30.0 * (n - 3.0) * (261.0 * n - 799.0));
}

EasyAxisBound easy_axis_lower_bound(int n, double delta) {
    if (n < 2 || n % 2 != 0) throw PreconditionError("easy-axis bound needs even n >= 2");
    if (!(std::fabs(delta) > 1.0)) throw PreconditionError("easy-axis bound needs |delta| > 1");
    const double y = std::acosh(std::fabs(delta));
    const int half = n / 2;
    const double ln2 = std::log(2.0);
    // |sin(kη)| = sinh(ky) on both easy-axis branches; the product of sin² pairs is positive.
    double log_path = -n * ln2;
    for (int k = 1; k <= half - 1; ++k) log_path += 2.0 * (std::log(std::sinh(k * y)) + std::log(std::sinh((k + 1) * y)));
    const double log_bound =
        (n - 2) * std::log(y * y) - n * ln2 + 2.0 * (std::lgamma(half + 1.0) + std::lgamma(static_cast<double>(half)));
    EasyAxisBound out;
    out.single_path = {1, log_path};
    out.factorial_bound = {1, log_bound};
    return out;
}

std::vector<double> toeplitz_eigs_check(int d) {
    if (d < 1) throw PreconditionError("Toeplitz size must be >= 1");
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(d, d);
    for (int k = 0; k + 1 < d; ++k) {
        a(k, k + 1) = -0.5;
        a(k + 1, k) = -0.5;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + d);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> toeplitz_eigs_analytic(int d) {
    if (d < 1) throw PreconditionError("Toeplitz size must be >= 1");
    std::vector<double> out;
    out.reserve(d);
    for (int j = 1; j <= d; ++j) out.push_back(1.0 - std::cos(j * std::numbers::pi / (d + 1)));
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace nessqfi
