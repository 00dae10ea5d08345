#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "nessqfi/errors.hpp"
#include "nessqfi/transfer.hpp"
#include "sweep_engine.hpp"

namespace nessqfi {

namespace {

constexpr int kL = 0;
constexpr int kR = 1;

void require_defect_free(const TransferSystem& ts) {
    for (int k = 1; k <= ts.d; ++k) {
        if (std::fabs(1.0 - ts.t.diag[k - 1]) < 1e-14)
            throw NumericalError("1 - T_kk vanishes at level " + std::to_string(k) +
                                 "; the truncation reaches a degenerate level (use d = |p|-1)");
    }
}

} // namespace

Eigen::VectorXd defective_vector(const TransferSystem& ts) {
    require_defect_free(ts);
    const int d = ts.d;
    Eigen::VectorXd psi(d + 1);
    psi(0) = 2.0 * (d + 1) / d * (1.0 - ts.delta * ts.delta);
    psi(1) = 2.0;
    for (int k = 2; k <= d; ++k) {
        const double ratio = static_cast<double>(d - k + 1) / (d - k + 2);
        // T_{k,k−1} / (1 − T_kk) = sin²((k−1)η)/(2 sin²(kη))
        psi(k) = 2.0 * ratio * ts.t.lower[k - 2] / (1.0 - ts.t.diag[k - 1]) * psi(k - 1);
    }
    return psi;
}

Eigen::VectorXd defective_vector_continued_fraction(const TransferSystem& ts) {
    require_defect_free(ts);
    const int d = ts.d;
    auto c = [](int k) { return boost::rational_cast<double>(continued_fraction_C_recurrence(k)); };
    Eigen::VectorXd psi(d + 1);
    psi(0) = 4.0 * c(d - 1) * (1.0 - ts.t.diag[0]);
    psi(1) = 2.0;
    for (int k = 2; k <= d; ++k) psi(k) = ts.t.lower[k - 2] * psi(k - 1) / (c(d - k) * (1.0 - ts.t.diag[k - 1]));
    return psi;
}

Rational continued_fraction_C(int k) {
    if (k < 0) throw PreconditionError("continued fraction index must be >= 0");
    return Rational(k + 2, 2LL * k + 2);
}

Rational continued_fraction_C_recurrence(int k) {
    if (k < 0) throw PreconditionError("continued fraction index must be >= 0");
    Rational c(1);
    for (int i = 1; i <= k; ++i) c = Rational(1) - Rational(1) / (Rational(4) * c);
    return c;
}

Rational continued_fraction_C_convergent(int k) {
    if (k < 0) throw PreconditionError("continued fraction index must be >= 0");
    // a_0 = 1, then −4, 1, −4, …; the k-th convergent is C_k.
    long long f_prev = 1, f = 1;  // f_{−1}, f_0
    long long g_prev = 0, g = 1;
    for (int i = 1; i <= k; ++i) {
        const long long a = (i % 2 == 1) ? -4 : 1;
        const long long fn = a * f + f_prev;
        const long long gn = a * g + g_prev;
        f_prev = f;
        f = fn;
        g_prev = g;
        g = gn;
    }
    return Rational(f, g);
}

JordanData jordan_decompose(const TransferSystem& ts) {
    const int d = ts.d;
    if (std::fabs(std::fabs(ts.delta) - 1.0) < 1e-14) throw PreconditionError("jordan_decompose requires |delta| != 1");
    require_defect_free(ts);

    // Symmetrize the bulk band: S T' S⁻¹ with (s_{k+1}/s_k)² = upper/lower.
    Eigen::VectorXd s = Eigen::VectorXd::Ones(d);
    Eigen::MatrixXd sym = Eigen::MatrixXd::Zero(d, d);
    for (int k = 0; k < d; ++k) sym(k, k) = ts.t.diag[k];
    for (int k = 0; k + 1 < d; ++k) {
        const double l = ts.t.lower[k];
        const double u = ts.t.upper[k];
        if (!(l * u > 1e-28))
            throw NumericalError("bulk band is reducible at level " + std::to_string(k + 1) +
                                 " (tau = 1 reachable; use d = |p|-1)");
        s(k + 1) = s(k) * std::sqrt(u / l);
        const double off = (l > 0 ? 1.0 : -1.0) * std::sqrt(l * u);
        sym(k + 1, k) = off;
        sym(k, k + 1) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) throw NumericalError("bulk eigensolve failed");

    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::fabs(es.eigenvalues()(a)) > std::fabs(es.eigenvalues()(b));
    });

    JordanData jd;
    jd.taus.resize(d);
    jd.v = Eigen::MatrixXd::Zero(d + 2, d + 2);
    jd.psi = defective_vector(ts);
    jd.v(kL, 0) = 1.0;
    jd.v(kR, 1) = jd.psi(0);
    for (int k = 1; k <= d; ++k) jd.v(k + 1, 1) = jd.psi(k);
    for (int j = 0; j < d; ++j) {
        const double tau = es.eigenvalues()(order[j]);
        if (std::fabs(tau - 1.0) < 1e-12) throw NumericalError("bulk eigenvalue tau = 1 makes T^(d) non-diagonalizable");
        jd.taus(j) = tau;
        Eigen::VectorXd bulk = es.eigenvectors().col(order[j]).cwiseQuotient(s);
        jd.v(kL, j + 2) = bulk(0) / (2.0 * tau - 2.0);
        jd.v.block(2, j + 2, d, 1) = bulk;
    }
    jd.v_inv = jd.v.fullPivLu().inverse();
    jd.chi = 1.0 / jd.psi(0);
    jd.chi1 = jd.v_inv(0, kR);
    return jd;
}

Eigen::MatrixXd JordanData::jordan_form() const {
    const int d = static_cast<int>(taus.size());
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(d + 2, d + 2);
    j(0, 0) = 1.0;
    j(0, 1) = 1.0;
    j(1, 1) = 1.0;
    for (int k = 0; k < d; ++k) j(k + 2, k + 2) = taus(k);
    return j;
}

double RationalEta::eta() const { return std::numbers::pi * q / p; }
double RationalEta::delta() const { return std::cos(eta()); }

namespace {

void validate_rational(const RationalEta& r) {
    if (r.p < 2) throw PreconditionError("rational eta requires |p| >= 2");
    if (r.q < 1 || r.q >= r.p) throw PreconditionError("rational eta requires 0 < q < p");
    if (std::gcd(r.p, r.q) != 1) throw PreconditionError("rational eta requires gcd(p, q) = 1");
}

// Row L of V⁻¹ restricted to the bulk, from (1 − T')ᵀ x = ½ e_1 (Thomas algorithm).
Eigen::VectorXd left_row_bulk(const TransferSystem& ts) {
    const int d = ts.d;
    // Transposed band: sub-diagonal (row k+1, col k) is −upper[k], super is −lower[k].
    Eigen::VectorXd diag(d), sub(d), sup(d), rhs = Eigen::VectorXd::Zero(d);
    for (int k = 0; k < d; ++k) diag(k) = 1.0 - ts.t.diag[k];
    for (int k = 0; k + 1 < d; ++k) {
        sub(k + 1) = -ts.t.upper[k];
        sup(k) = -ts.t.lower[k];
    }
    rhs(0) = 0.5;
    for (int k = 1; k < d; ++k) {
        const double w = sub(k) / diag(k - 1);
        diag(k) -= w * sup(k - 1);
        rhs(k) -= w * rhs(k - 1);
    }
    Eigen::VectorXd x(d);
    x(d - 1) = rhs(d - 1) / diag(d - 1);
    for (int k = d - 2; k >= 0; --k) x(k) = (rhs(k) - sup(k) * x(k + 1)) / diag(k);
    return x;
}

struct JordanCoefficients {
    double chi = 0.0;
    double chi1 = 0.0;
    double xi1 = 0.0;
};

// O(d) route to χ, χ_1 and the defect-sum slope; `excursion` adds x_d E ψ_d.
JordanCoefficients jordan_coefficients(const TransferSystem& ts, double excursion) {
    const int d = ts.d;
    const Eigen::VectorXd psi = defective_vector(ts);
    const Eigen::VectorXd x = left_row_bulk(ts);
    const double psi_r = psi(0);
    const Eigen::VectorXd psi_bulk = psi.tail(d);
    if (std::fabs(x(0) * psi_r / 2.0 - 1.0) > 1e-8)
        throw NumericalError("left Jordan row inconsistent with the defective vector");
    JordanCoefficients c;
    c.chi = 1.0 / psi_r;
    c.chi1 = -x.dot(psi_bulk) / psi_r;
    Eigen::VectorXd dpsi(d);
    for (int k = 0; k < d; ++k) {
        double acc = ts.vertex.diag[k] * psi_bulk(k);
        if (k > 0) acc += ts.vertex.lower[k - 1] * psi_bulk(k - 1);
        if (k + 1 < d) acc += ts.vertex.upper[k] * psi_bulk(k + 1);
        dpsi(k) = acc;
    }
    c.xi1 = (x.dot(dpsi) + x(d - 1) * excursion * psi_bulk(d - 1)) / psi_r;
    return c;
}

// Two-step excursion d → d+1 → d: up with T, back down with D.
double excursion_weight(int d, double eta) {
    const double s = std::sin(d * eta);
    return (d + 1.0) * (d + 1.0) / 4.0 * (s * s / 2.0);
}

double chi_second_derivative(int d, double delta) {
    const double gap = 1.0 - delta * delta;
    return static_cast<double>(d) / (d + 1) * (1.0 + 2.0 * delta * delta) / (gap * gap);
}

} // namespace

ChiCoefficients chi_coefficient(double delta, std::optional<RationalEta> rational_eta, int d_max) {
    if (!(std::fabs(delta) < 1.0)) throw PreconditionError("chi coefficient requires |delta| < 1");
    int d = d_max;
    if (rational_eta) {
        validate_rational(*rational_eta);
        if (std::fabs(rational_eta->delta() - delta) > 1e-12)
            throw PreconditionError("delta inconsistent with cos(q pi / p)");
        d = rational_eta->p - 1;
    }
    if (d < 1) throw PreconditionError("truncation d must be >= 1");
    const double eta = rational_eta ? rational_eta->eta() : std::acos(delta);
    const auto ts = build_transfer(d, eta);
    const auto c = jordan_coefficients(ts, 0.0);
    ChiCoefficients out;
    out.chi = static_cast<double>(d) / (2.0 * (d + 1)) / (1.0 - delta * delta);
    out.chi1 = c.chi1;
    out.d = d;
    return out;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw PreconditionError("fit_line needs >= 2 paired points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw PreconditionError("fit_line needs distinct abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

XiResult xi_rational(RationalEta r, XiMethod method, int window_start) {
    validate_rational(r);
    const int d = r.p - 1;
    const double eta = r.eta();
    const double delta = r.delta();
    const double gap = 1.0 - delta * delta;
    const double e = excursion_weight(d, eta);
    XiResult out;
    out.d = d;
    out.chi = static_cast<double>(d) / (2.0 * (d + 1)) / gap;
    out.chi_dd = chi_second_derivative(d, delta);

    if (method == XiMethod::jordan) {
        const auto c = jordan_coefficients(build_transfer(d, eta), e);
        out.xi1 = c.xi1;
        out.xi = (out.xi1 + 0.25 * out.chi_dd) / (2.0 * gap);
        return out;
    }

    const int n0 = window_start > 0 ? window_start : std::max(100, 20 * d);
    out.window_start = n0;
    std::vector<double> ms, defect, d2;
    detail::BandSweep<double>::Options opt;
    opt.excursion = e;
    opt.mode = LogMode::off;
    detail::run_sweep(2 * n0, eta, d, opt, [&](int m, const auto& s) {
        if (m < n0) return;
        ms.push_back(m);
        defect.push_back(s.defect_scaled());
        d2.push_back(s.d2_scaled());
    });
    const auto f_defect = fit_line(ms, defect);
    const auto f_d2 = fit_line(ms, d2);
    std::vector<double> g(ms.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = (defect[i] + 0.25 * d2[i]) / (2.0 * gap);
    const auto f_g = fit_line(ms, g);
    out.xi1 = f_defect.slope;
    out.chi_dd = f_d2.slope;
    out.xi = f_g.slope;
    out.fit_r2 = f_g.r2;
    return out;
}

std::vector<XiResult> xi_irrational_scan(double delta, const std::vector<int>& ns) {
    if (!(std::fabs(delta) < 1.0)) throw PreconditionError("xi requires |delta| < 1");
    if (ns.empty()) return {};
    const int n_max = *std::max_element(ns.begin(), ns.end());
    if (*std::min_element(ns.begin(), ns.end()) < 2) throw PreconditionError("xi scan needs n >= 2");
    const int m_max = 2 * n_max;
    const double gap = 1.0 - delta * delta;
    std::vector<double> bracket(m_max + 1), defect(m_max + 1), d2(m_max + 1);
    detail::BandSweep<double>::Options opt;
    opt.mode = LogMode::off;
    detail::run_sweep(m_max, eta_from_delta(delta), full_truncation(m_max), opt, [&](int m, const auto& s) {
        bracket[m] = s.bracket_scaled();
        defect[m] = s.defect_scaled();
        d2[m] = s.d2_scaled();
    });
    std::vector<XiResult> out;
    out.reserve(ns.size());
    for (int n : ns) {
        std::vector<double> ms, gb, gd, g2, g;
        for (int m = n; m <= 2 * n; ++m) {
            ms.push_back(m);
            gb.push_back(bracket[m]);
            gd.push_back(defect[m]);
            g2.push_back(d2[m]);
            g.push_back((defect[m] + 0.25 * d2[m]) / (2.0 * gap));
        }
        XiResult r;
        const auto fg = fit_line(ms, g);
        r.xi = fg.slope;
        r.fit_r2 = fg.r2;
        r.xi1 = fit_line(ms, gd).slope;
        r.chi = fit_line(ms, gb).slope;
        r.chi_dd = fit_line(ms, g2).slope;
        r.d = full_truncation(2 * n);
        r.window_start = n;
        out.push_back(r);
    }
    return out;
}

XiResult xi_irrational(double delta, int n) { return xi_irrational_scan(delta, {n}).front(); }

XiResult xi_coefficient(double delta, int n, std::optional<RationalEta> rational_eta, XiMethod method) {
    if (!(std::fabs(delta) < 1.0)) throw PreconditionError("xi requires |delta| < 1");
    if (rational_eta) {
        validate_rational(*rational_eta);
        if (std::fabs(rational_eta->delta() - delta) > 1e-12)
            throw PreconditionError("delta inconsistent with cos(q pi / p)");
        return xi_rational(*rational_eta, method, method == XiMethod::slope ? n : 0);
    }
    return xi_irrational(delta, n);
}

} // namespace nessqfi
