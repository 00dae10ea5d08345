#pragma once

// Banded forward propagation of T^m|R⟩ together with its η-derivatives and the
// defect accumulator u_m = Σ_j T^{m−1−j} D T^j |R⟩. Shared by the transfer sources.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "nessqfi/transfer.hpp"

namespace nessqfi::detail {

inline double real_part(double x) { return x; }
inline double real_part(const Complex& x) { return x.real(); }
inline double magnitude(double x) { return std::fabs(x); }
inline double magnitude(const Complex& x) { return std::max(std::fabs(x.real()), std::fabs(x.imag())); }

template <class S> S from_complex(const Complex& z);
template <> inline double from_complex<double>(const Complex& z) { return z.real(); }
template <> inline Complex from_complex<Complex>(const Complex& z) { return z; }

template <class S>
struct Band {
    std::vector<S> diag, lower, upper;  // lower[k−1] = ⟨k+1|·|k⟩, upper[k−1] = ⟨k|·|k+1⟩
};

/// T' and its first two η-derivatives, plus the vertex matrix D, on levels 1..d.
template <class S>
struct BandSet {
    Band<S> t, t1, t2;
    Band<double> vertex;
};

template <class S>
BandSet<S> make_bands(int d, Complex eta) {
    BandSet<S> b;
    auto resize = [d](auto& band) {
        band.diag.assign(d, {});
        band.lower.assign(d > 1 ? d - 1 : 0, {});
        band.upper.assign(d > 1 ? d - 1 : 0, {});
    };
    resize(b.t);
    resize(b.t1);
    resize(b.t2);
    resize(b.vertex);
    for (int k = 1; k <= d; ++k) {
        const double kk = k;
        const Complex c = std::cos(eta * kk);
        b.t.diag[k - 1] = from_complex<S>(c * c);
        b.t1.diag[k - 1] = from_complex<S>(-kk * std::sin(2.0 * eta * kk));
        b.t2.diag[k - 1] = from_complex<S>(-2.0 * kk * kk * std::cos(2.0 * eta * kk));
        b.vertex.diag[k - 1] = kk * kk / 2.0;
        if (k < d) {
            const double k1 = k + 1;
            const Complex sl = std::sin(eta * kk);
            const Complex su = std::sin(eta * k1);
            b.t.lower[k - 1] = from_complex<S>(sl * sl / 2.0);
            b.t1.lower[k - 1] = from_complex<S>(kk / 2.0 * std::sin(2.0 * eta * kk));
            b.t2.lower[k - 1] = from_complex<S>(kk * kk * std::cos(2.0 * eta * kk));
            b.t.upper[k - 1] = from_complex<S>(su * su / 2.0);
            b.t1.upper[k - 1] = from_complex<S>(k1 / 2.0 * std::sin(2.0 * eta * k1));
            b.t2.upper[k - 1] = from_complex<S>(k1 * k1 * std::cos(2.0 * eta * k1));
            b.vertex.lower[k - 1] = kk * kk / 4.0;
            b.vertex.upper[k - 1] = k1 * k1 / 4.0;
        }
    }
    return b;
}

/// State vectors use index 0 = L, 1 = R, k + 1 = level k.
template <class S>
class BandSweep {
public:
    struct Options {
        bool derivatives = true;
        bool defect = true;
        double excursion = 0.0;  // two-step D-insertion on level d (restricted rational space)
        LogMode mode = LogMode::automatic;
        int horizon = 0;  // last step read out; 0 keeps every level
    };

    BandSweep(int d, Complex eta, Options opt)
        : d_(d), opt_(opt), bands_(make_bands<S>(d, eta)), v_(d + 2, S{}), v1_(d + 2, S{}), v2_(d + 2, S{}),
          u_(d + 2, S{}), scratch_(d + 2, S{}) {
        v_[1] = S{1};
    }

    void step() {
        const int reach = std::min(d_, m_ + 1);  // highest level reachable after this step
        if (opt_.defect) {
            apply_t(u_, scratch_, reach);
            add_bulk(bands_.vertex, v_, scratch_, reach);
            if (opt_.excursion != 0.0) scratch_[d_ + 1] += opt_.excursion * prev_vd_;
            std::swap(u_, scratch_);
        }
        if (opt_.derivatives) {
            apply_t(v2_, scratch_, reach);
            add_bulk(bands_.t1, v1_, scratch_, reach, S{2});
            add_bulk(bands_.t2, v_, scratch_, reach);
            std::swap(v2_, scratch_);
            apply_t(v1_, scratch_, reach);
            add_bulk(bands_.t1, v_, scratch_, reach);
            std::swap(v1_, scratch_);
        }
        prev_vd_ = v_[d_ + 1];
        apply_t(v_, scratch_, reach);
        std::swap(v_, scratch_);
        ++m_;
        prune();
        rescale(reach);
    }

    int steps() const { return m_; }
    double log_scale() const { return log_scale_; }
    double bracket_scaled() const { return real_part(v_[0]); }
    double defect_scaled() const { return real_part(u_[0]); }
    double d2_scaled() const { return real_part(v2_[0]); }

private:
    // y = T x on levels up to `reach`.
    void apply_t(const std::vector<S>& x, std::vector<S>& y, int reach) const {
        y[0] = x[0] + S{0.5} * x[2];
        y[1] = x[1];
        const auto& t = bands_.t;
        for (int k = 1; k <= reach; ++k) {
            S acc = t.diag[k - 1] * x[k + 1];
            if (k > 1) acc += t.lower[k - 2] * x[k];
            if (k < d_) acc += t.upper[k - 1] * x[k + 2];
            y[k + 1] = acc;
        }
        y[2] += S{0.5} * x[1];
    }

    template <class B>
    void add_bulk(const Band<B>& band, const std::vector<S>& x, std::vector<S>& y, int reach, S factor = S{1}) const {
        for (int k = 1; k <= reach; ++k) {
            S acc = band.diag[k - 1] * x[k + 1];
            if (k > 1) acc += band.lower[k - 2] * x[k];
            if (k < d_) acc += band.upper[k - 1] * x[k + 2];
            y[k + 1] += factor * acc;
        }
    }

    // Level k needs k steps to reach L. Past the horizon it only inflates the rescale peak
    // and can push the L component below the representable range.
    void prune() {
        if (opt_.horizon <= 0) return;
        for (int k = std::max(1, opt_.horizon - m_ + 1); k <= d_; ++k) {
            v_[k + 1] = S{};
            v1_[k + 1] = S{};
            v2_[k + 1] = S{};
            u_[k + 1] = S{};
        }
    }

    void rescale(int reach) {
        if (opt_.mode == LogMode::off) return;
        double peak = 0.0;
        auto scan = [&](const std::vector<S>& x) {
            for (int i = 0; i <= reach + 1; ++i) peak = std::max(peak, magnitude(x[i]));
        };
        scan(v_);
        if (opt_.derivatives) {
            scan(v1_);
            scan(v2_);
        }
        if (opt_.defect) scan(u_);
        if (peak == 0.0 || !std::isfinite(peak)) return;
        int e = 0;
        std::frexp(peak, &e);
        if (opt_.mode == LogMode::automatic && std::abs(e) < 256) return;
        if (e == 0) return;
        auto shift = [&](std::vector<S>& x) {
            for (int i = 0; i <= reach + 1; ++i) x[i] = scale2(x[i], -e);
        };
        shift(v_);
        shift(v1_);
        shift(v2_);
        shift(u_);
        prev_vd_ = scale2(prev_vd_, -e);
        log_scale_ += e * std::log(2.0);
    }

    static double scale2(double x, int e) { return std::ldexp(x, e); }
    static Complex scale2(const Complex& x, int e) { return {std::ldexp(x.real(), e), std::ldexp(x.imag(), e)}; }

    int d_;
    Options opt_;
    BandSet<S> bands_;
    std::vector<S> v_, v1_, v2_, u_, scratch_;
    S prev_vd_{};
    int m_ = 0;
    double log_scale_ = 0.0;
};

/// True when every band entry and derivative is real (η real).
inline bool eta_is_real(Complex eta) { return eta.imag() == 0.0; }

/// Runs a sweep of n steps and calls `visit(m, sweep)` after each step.
template <class Visit>
void run_sweep(int n, Complex eta, int d, typename BandSweep<double>::Options opt, Visit&& visit) {
    opt.horizon = n;
    if (eta_is_real(eta)) {
        BandSweep<double> s(d, eta, opt);
        for (int m = 1; m <= n; ++m) {
            s.step();
            visit(m, s);
        }
    } else {
        typename BandSweep<Complex>::Options copt{opt.derivatives, opt.defect, opt.excursion, opt.mode,
                                                         opt.horizon};
        BandSweep<Complex> s(d, eta, copt);
        for (int m = 1; m <= n; ++m) {
            s.step();
            visit(m, s);
        }
    }
}

} // namespace nessqfi::detail
