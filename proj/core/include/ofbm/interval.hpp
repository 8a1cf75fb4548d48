#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "ofbm/eta.hpp"
#include "ofbm/theta.hpp"

namespace ofbm {

/// Raised by interval division or logarithm when the argument contains zero.
class IntervalDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Closed interval [lo, hi] with outward-rounded arithmetic.
///
/// Add, sub, mul, div and sqrt compute the rounding error exactly
/// (two-sum / fma) and move an endpoint by one ulp only when the float result
/// is on the wrong side of the true value. Library functions (exp2, log2, pow,
/// sin, tgamma) are widened by a few ulps in both directions.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    constexpr Interval() = default;
    constexpr Interval(double v) : lo(v), hi(v) {}  // NOLINT: implicit from scalars is intended
    constexpr Interval(double l, double h) : lo(l), hi(h) {}

    double width() const { return hi - lo; }
    double mid() const { return lo + 0.5 * (hi - lo); }
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    bool degenerate() const { return lo == hi; }
    bool straddles_zero() const { return lo < 0.0 && hi > 0.0; }
    bool valid() const { return lo <= hi; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

Interval hull(const Interval& a, const Interval& b);

/// Directed-rounded scalar primitives.
namespace rnd {

namespace detail {
inline constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this magnitude product residuals may be inexact because of underflow;
// above the other one the splitting below may overflow.
inline constexpr double kTiny = 0x1p-960;
inline constexpr double kHuge = 0x1p+995;

inline double next_up(double x) {
    if (!(x < kInf)) return x;  // +inf and NaN
    if (x == 0.0) return std::numeric_limits<double>::denorm_min();
    auto bits = std::bit_cast<std::uint64_t>(x);
    bits = x > 0.0 ? bits + 1 : bits - 1;
    return std::bit_cast<double>(bits);
}

inline double next_down(double x) { return -next_up(-x); }

inline double two_sum_err(double a, double b, double s) {
    const double bb = s - a;
    return (a - (s - bb)) + (b - bb);
}

// Exact a*b - p for p = fl(a*b), barring underflow and overflow.
inline double two_prod_err(double a, double b, double p) {
#if defined(__FMA__) || defined(FP_FAST_FMA)
    return std::fma(a, b, -p);
#else
    constexpr double split = 134217729.0;  // 2^27 + 1
    const double ca = split * a, cb = split * b;
    const double ah = ca - (ca - a), al = a - ah;
    const double bh = cb - (cb - b), bl = b - bh;
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl;
#endif
}

inline bool product_exact_checkable(double a, double b, double p) {
    const double fp = std::fabs(p);
    return fp >= kTiny && std::fabs(a) < kHuge && std::fabs(b) < kHuge;
}
}  // namespace detail

inline double add_dn(double a, double b) {
    const double s = a + b;
    if (!std::isfinite(s)) return s;
    return detail::two_sum_err(a, b, s) < 0.0 ? detail::next_down(s) : s;
}

inline double add_up(double a, double b) {
    const double s = a + b;
    if (!std::isfinite(s)) return s;
    return detail::two_sum_err(a, b, s) > 0.0 ? detail::next_up(s) : s;
}

inline double mul_dn(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    const double p = a * b;
    if (!std::isfinite(p)) return p;
    if (!detail::product_exact_checkable(a, b, p)) return detail::next_down(p);
    return detail::two_prod_err(a, b, p) < 0.0 ? detail::next_down(p) : p;
}

inline double mul_up(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    const double p = a * b;
    if (!std::isfinite(p)) return p;
    if (!detail::product_exact_checkable(a, b, p)) return detail::next_up(p);
    return detail::two_prod_err(a, b, p) > 0.0 ? detail::next_up(p) : p;
}

double div_dn(double a, double b);
double div_up(double a, double b);
double sqrt_dn(double a);
double sqrt_up(double a);
/// Moves x down (up) by `ulps` representable numbers.
inline double down(double x, int ulps = 1) {
    for (int i = 0; i < ulps; ++i) x = detail::next_down(x);
    return x;
}
inline double up(double x, int ulps = 1) {
    for (int i = 0; i < ulps; ++i) x = detail::next_up(x);
    return x;
}
}  // namespace rnd

inline Interval operator+(const Interval& a, const Interval& b) {
    return {rnd::add_dn(a.lo, b.lo), rnd::add_up(a.hi, b.hi)};
}

inline Interval operator-(const Interval& a, const Interval& b) {
    return {rnd::add_dn(a.lo, -b.hi), rnd::add_up(a.hi, -b.lo)};
}

inline Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }

inline Interval operator*(const Interval& a, const Interval& b) {
    if (a.lo >= 0.0) {
        if (b.lo >= 0.0) return {rnd::mul_dn(a.lo, b.lo), rnd::mul_up(a.hi, b.hi)};
        if (b.hi <= 0.0) return {rnd::mul_dn(a.hi, b.lo), rnd::mul_up(a.lo, b.hi)};
        return {rnd::mul_dn(a.hi, b.lo), rnd::mul_up(a.hi, b.hi)};
    }
    if (a.hi <= 0.0) {
        if (b.lo >= 0.0) return {rnd::mul_dn(a.lo, b.hi), rnd::mul_up(a.hi, b.lo)};
        if (b.hi <= 0.0) return {rnd::mul_dn(a.hi, b.hi), rnd::mul_up(a.lo, b.lo)};
        return {rnd::mul_dn(a.lo, b.hi), rnd::mul_up(a.lo, b.lo)};
    }
    if (b.lo >= 0.0) return {rnd::mul_dn(a.lo, b.hi), rnd::mul_up(a.hi, b.hi)};
    if (b.hi <= 0.0) return {rnd::mul_dn(a.hi, b.lo), rnd::mul_up(a.lo, b.lo)};
    return {std::min(rnd::mul_dn(a.lo, b.hi), rnd::mul_dn(a.hi, b.lo)),
            std::max(rnd::mul_up(a.lo, b.lo), rnd::mul_up(a.hi, b.hi))};
}

/// Throws IntervalDomainError when b contains 0.
Interval operator/(const Interval& a, const Interval& b);

Interval sqr(const Interval& a);
/// Throws IntervalDomainError for a.hi < 0; negative parts are clipped.
Interval sqrt(const Interval& a);
Interval abs(const Interval& a);
Interval pow(const Interval& a, int k);
Interval exp2(const Interval& a);
/// Throws IntervalDomainError when a.lo <= 0.
Interval log2(const Interval& a);
/// log2 of max(a, floor) for a >= 0 and floor > 0; always defined.
Interval log2_floored(const Interval& a, double floor);
Interval max(const Interval& a, double b);
/// sin(pi x) for x within [0, 1].
Interval sin_pi_unit(const Interval& x);
/// Gamma function for arguments within [1, 3].
Interval tgamma_1_3(const Interval& x);

/// Image of a function that is nondecreasing (nonincreasing) over the interval.
template <class F>
Interval increasing(const Interval& x, F f, int ulps = 2) {
    return {rnd::down(f(x.lo), ulps), rnd::up(f(x.hi), ulps)};
}
template <class F>
Interval decreasing(const Interval& x, F f, int ulps = 2) {
    return {rnd::down(f(x.hi), ulps), rnd::up(f(x.lo), ulps)};
}

std::string to_string(const Interval& x);

/// One interval per model parameter.
struct ParamBox {
    std::array<Interval, kNumParams> axes{};

    Interval& operator[](Param p) { return axes[index(p)]; }
    const Interval& operator[](Param p) const { return axes[index(p)]; }
    Interval& operator[](std::size_t i) { return axes[i]; }
    const Interval& operator[](std::size_t i) const { return axes[i]; }

    static ParamBox point(const Theta& t);
    Theta center() const;
    bool contains(const Theta& t) const;
    bool degenerate() const;

    friend bool operator==(const ParamBox&, const ParamBox&) = default;
};

/// Enclosure of eta over h (h within [0, 1]) for one tabulated constant.
///
/// For a unimodal table the three-case monotone scheme is used with the
/// table's own peak location and value; otherwise the tabulated nodes inside
/// the interval are scanned. Both are exact for the linear interpolant.
Interval eta_interval(const Interval& h, const EtaTable& table);
Interval eta_interval(const Interval& h, const EtaSet& eta, int octave);

}  // namespace ofbm
