#include <cmath>
#include <string>

#include "nessqfi/errors.hpp"
#include "nessqfi/transfer.hpp"
#include "sweep_engine.hpp"

namespace nessqfi {

namespace {

void require_sweep_args(int n, int d) {
    if (n < 1) throw PreconditionError("power n must be >= 1, got " + std::to_string(n));
    if (d < 1) throw PreconditionError("truncation d must be >= 1, got " + std::to_string(d));
}

detail::BandSweep<double>::Options options(bool derivatives, bool defect, LogMode mode) {
    detail::BandSweep<double>::Options o;
    o.derivatives = derivatives;
    o.defect = defect;
    o.mode = mode;
    return o;
}

} // namespace

TransferSystem build_transfer(int d, Complex eta) {
    if (d < 1) throw PreconditionError("truncation d must be >= 1");
    const auto bands = detail::make_bands<Complex>(d, eta);
    TransferSystem ts;
    ts.d = d;
    ts.eta = eta;
    ts.delta = std::cos(eta).real();
    auto fill = [d](BandedBulk& out, const auto& band) {
        out.diag.resize(d);
        out.lower.resize(d - 1);
        out.upper.resize(d - 1);
        for (int i = 0; i < d; ++i) out.diag[i] = detail::real_part(band.diag[i]);
        for (int i = 0; i + 1 < d; ++i) {
            out.lower[i] = detail::real_part(band.lower[i]);
            out.upper[i] = detail::real_part(band.upper[i]);
        }
    };
    fill(ts.t, bands.t);
    fill(ts.vertex, bands.vertex);
    return ts;
}

namespace {

Eigen::MatrixXd dense_bulk(const BandedBulk& b, int d) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d + 2, d + 2);
    for (int k = 1; k <= d; ++k) {
        m(k + 1, k + 1) = b.diag[k - 1];
        if (k < d) {
            m(k + 2, k + 1) = b.lower[k - 1];
            m(k + 1, k + 2) = b.upper[k - 1];
        }
    }
    return m;
}

} // namespace

Eigen::MatrixXd TransferSystem::dense_t() const {
    Eigen::MatrixXd m = dense_bulk(t, d);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    m(0, 2) = 0.5;
    m(2, 1) = 0.5;
    return m;
}

Eigen::MatrixXd TransferSystem::dense_vertex() const { return dense_bulk(vertex, d); }

std::vector<SweepPoint> leading_order_sweep(int n_max, Complex eta, int d, LogMode mode) {
    require_sweep_args(n_max, d);
    std::vector<SweepPoint> out;
    out.reserve(n_max);
    detail::run_sweep(n_max, eta, d, options(true, true, mode), [&](int, const auto& s) {
        out.push_back({LogReal::from_scaled(s.bracket_scaled(), s.log_scale()),
                       LogReal::from_scaled(s.defect_scaled(), s.log_scale()),
                       LogReal::from_scaled(s.d2_scaled(), s.log_scale())});
    });
    return out;
}

LogReal bracket_LTnR(int n, Complex eta, int d, LogMode mode) {
    require_sweep_args(n, d);
    LogReal r;
    detail::run_sweep(n, eta, d, options(false, false, mode), [&](int m, const auto& s) {
        if (m == n) r = LogReal::from_scaled(s.bracket_scaled(), s.log_scale());
    });
    return r;
}

LogReal sum_defect(int n, Complex eta, int d, LogMode mode) {
    require_sweep_args(n, d);
    LogReal r;
    detail::run_sweep(n, eta, d, options(false, true, mode), [&](int m, const auto& s) {
        if (m == n) r = LogReal::from_scaled(s.defect_scaled(), s.log_scale());
    });
    return r;
}

LogReal bracket_second_derivative(int n, Complex eta, int d, LogMode mode) {
    require_sweep_args(n, d);
    LogReal r;
    detail::run_sweep(n, eta, d, options(true, false, mode), [&](int m, const auto& s) {
        if (m == n) r = LogReal::from_scaled(s.d2_scaled(), s.log_scale());
    });
    return r;
}

FisherEstimate f0_x(const ChainParams& params, Parameter parameter, LogMode mode) {
    params.validate();
    const double j = params.j_coupling;
    double prefactor = 0.0;
    switch (parameter) {
    case Parameter::lambda: prefactor = params.mu / j; break;
    case Parameter::mu: prefactor = params.lambda / j; break;
    case Parameter::J: prefactor = -params.lambda * params.mu / (j * j); break;
    case Parameter::delta: throw PreconditionError("f0_x does not handle delta; use f0_delta");
    }
    const LogReal bracket = bracket_LTnR(params.n, params.eta(), full_truncation(params.n), mode);
    FisherEstimate est;
    est.value = bracket * (prefactor * prefactor / 2.0);
    est.method = FisherMethod::leading_order;
    est.parameter = parameter;
    est.params = params;
    return est;
}

LogReal f0_delta_unit(int n, double delta, LogMode mode) {
    if (n < 2) throw PreconditionError("chain length n must be >= 2");
    const double gap = 1.0 - delta * delta;
    if (gap == 0.0 || std::fabs(delta) == 1.0)
        throw PreconditionError("f0_delta is singular at |delta| = 1; use isotropic_f_delta");
    LogReal r;
    detail::run_sweep(n, eta_from_delta(delta), full_truncation(n), options(true, true, mode),
                      [&](int m, const auto& s) {
                          if (m == n)
                              r = LogReal::from_scaled(s.defect_scaled() + 0.25 * s.d2_scaled(), s.log_scale());
                      });
    return r * (1.0 / (2.0 * gap));
}

FisherEstimate f0_delta(const ChainParams& params, LogMode mode) {
    params.validate();
    const double g = params.lambda * params.mu / params.j_coupling;
    FisherEstimate est;
    est.value = f0_delta_unit(params.n, params.delta, mode) * (g * g);
    est.method = FisherMethod::leading_order;
    est.parameter = Parameter::delta;
    est.params = params;
    return est;
}

} // namespace nessqfi
