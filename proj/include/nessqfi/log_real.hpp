#pragma once

#include <cmath>
#include <limits>

namespace nessqfi {

/// Signed real number stored as (sign, natural log of magnitude).
///
/// Used for transfer-matrix brackets and Fisher values that overflow a double
/// in the easy-axis phase. Zero is represented by sign == 0.
struct LogReal {
    int sign = 0;
    double log_abs = -std::numeric_limits<double>::infinity();

    static LogReal from_double(double x) {
        if (x == 0.0 || std::isnan(x)) return {};
        return {x > 0 ? 1 : -1, std::log(std::fabs(x))};
    }

    /// Value x · e^{log_scale}, as produced by rescaled vector propagation.
    static LogReal from_scaled(double x, double log_scale) {
        LogReal r = from_double(x);
        if (r.sign != 0) r.log_abs += log_scale;
        return r;
    }

    bool is_zero() const { return sign == 0; }

    /// Linear value; ±inf when the magnitude exceeds the double range.
    double to_double() const {
        if (sign == 0) return 0.0;
        return sign * std::exp(log_abs);
    }

    /// True when to_double() is finite and not flushed to zero.
    bool representable() const {
        if (sign == 0) return true;
        return log_abs < std::log(std::numeric_limits<double>::max()) &&
               log_abs > std::log(std::numeric_limits<double>::min());
    }

    double log10_abs() const { return log_abs / std::log(10.0); }

    LogReal& operator*=(const LogReal& o) {
        sign *= o.sign;
        log_abs = sign == 0 ? -std::numeric_limits<double>::infinity() : log_abs + o.log_abs;
        return *this;
    }
    LogReal& operator*=(double x) { return *this *= from_double(x); }
    LogReal& operator/=(const LogReal& o) {
        sign *= o.sign;
        log_abs -= o.log_abs;
        return *this;
    }
};

inline LogReal operator*(LogReal a, const LogReal& b) { return a *= b; }
inline LogReal operator*(LogReal a, double b) { return a *= b; }
inline LogReal operator/(LogReal a, const LogReal& b) { return a /= b; }

/// Sum of two signed log-domain values (log-sum-exp with sign handling).
inline LogReal operator+(const LogReal& a, const LogReal& b) {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    const LogReal& hi = a.log_abs >= b.log_abs ? a : b;
    const LogReal& lo = a.log_abs >= b.log_abs ? b : a;
    const double ratio = std::exp(lo.log_abs - hi.log_abs);
    const double m = hi.sign == lo.sign ? 1.0 + ratio : 1.0 - ratio;
    if (m == 0.0) return {};
    return {hi.sign, hi.log_abs + std::log(m)};
}

inline double relative_difference(const LogReal& a, const LogReal& b) {
    if (a.sign == 0 && b.sign == 0) return 0.0;
    if (a.sign != b.sign) return std::numeric_limits<double>::infinity();
    return std::fabs(std::expm1(a.log_abs - b.log_abs));
}

} // namespace nessqfi
