#include "ofbm/interval.hpp"

#include <algorithm>
#include <sstream>

namespace ofbm {

namespace rnd {

using detail::kTiny;

namespace {
// Sign of (a/b - fl(a/b)).
int div_err_sign(double a, double b, double q) {
    // a - q b = (a - p) - err with p = fl(q b); a - p is exact (Sterbenz).
    const double p = q * b;
    const double r = (a - p) - detail::two_prod_err(q, b, p);
    if (r == 0.0) return 0;
    return (r > 0.0) == (b > 0.0) ? 1 : -1;
}
}  // namespace

double div_dn(double a, double b) {
    if (a == 0.0) return 0.0;
    const double q = a / b;
    if (!std::isfinite(q) || !std::isfinite(b)) return q;
    if (std::fabs(q) < kTiny || std::fabs(a) < kTiny || !detail::product_exact_checkable(q, b, a)) return down(q);
    return div_err_sign(a, b, q) < 0 ? down(q) : q;
}

double div_up(double a, double b) {
    if (a == 0.0) return 0.0;
    const double q = a / b;
    if (!std::isfinite(q) || !std::isfinite(b)) return q;
    if (std::fabs(q) < kTiny || std::fabs(a) < kTiny || !detail::product_exact_checkable(q, b, a)) return up(q);
    return div_err_sign(a, b, q) > 0 ? up(q) : q;
}

double sqrt_dn(double a) {
    if (a <= 0.0) return 0.0;
    const double r = std::sqrt(a);
    if (!std::isfinite(r)) return r;
    if (a < kTiny) return down(r);
    const double p = r * r;
    return (a - p) - detail::two_prod_err(r, r, p) < 0.0 ? down(r) : r;
}

double sqrt_up(double a) {
    if (a <= 0.0) return 0.0;
    const double r = std::sqrt(a);
    if (!std::isfinite(r)) return r;
    if (a < kTiny) return up(r);
    const double p = r * r;
    return (a - p) - detail::two_prod_err(r, r, p) > 0.0 ? up(r) : r;
}

}  // namespace rnd

Interval hull(const Interval& a, const Interval& b) {
    return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

Interval operator/(const Interval& a, const Interval& b) {
    if (b.lo <= 0.0 && b.hi >= 0.0) throw IntervalDomainError("interval division by an interval containing 0");
    const double lo = std::min({rnd::div_dn(a.lo, b.lo), rnd::div_dn(a.lo, b.hi),
                                rnd::div_dn(a.hi, b.lo), rnd::div_dn(a.hi, b.hi)});
    const double hi = std::max({rnd::div_up(a.lo, b.lo), rnd::div_up(a.lo, b.hi),
                                rnd::div_up(a.hi, b.lo), rnd::div_up(a.hi, b.hi)});
    return {lo, hi};
}

Interval sqr(const Interval& a) {
    if (a.lo >= 0.0) return {rnd::mul_dn(a.lo, a.lo), rnd::mul_up(a.hi, a.hi)};
    if (a.hi <= 0.0) return {rnd::mul_dn(a.hi, a.hi), rnd::mul_up(a.lo, a.lo)};
    return {0.0, std::max(rnd::mul_up(a.lo, a.lo), rnd::mul_up(a.hi, a.hi))};
}

Interval sqrt(const Interval& a) {
    if (a.hi < 0.0) throw IntervalDomainError("sqrt of a negative interval");
    return {rnd::sqrt_dn(std::max(a.lo, 0.0)), rnd::sqrt_up(a.hi)};
}

Interval abs(const Interval& a) {
    if (a.lo >= 0.0) return a;
    if (a.hi <= 0.0) return -a;
    return {0.0, std::max(-a.lo, a.hi)};
}

Interval pow(const Interval& a, int k) {
    if (k == 0) return {1.0, 1.0};
    if (k < 0) return Interval(1.0) / pow(a, -k);
    if (k == 1) return a;
    if (k == 2) return sqr(a);
    auto f = [k](double x) { return std::pow(x, k); };
    if (k % 2 == 1) return increasing(a, f, 4);
    const Interval m = abs(a);
    Interval r = increasing(m, f, 4);
    r.lo = std::max(r.lo, 0.0);
    return r;
}

Interval exp2(const Interval& a) {
    Interval r = increasing(a, [](double x) { return std::exp2(x); });
    r.lo = std::max(r.lo, 0.0);
    return r;
}

Interval log2(const Interval& a) {
    if (a.lo <= 0.0) throw IntervalDomainError("log2 of an interval reaching 0");
    return increasing(a, [](double x) { return std::log2(x); });
}

Interval log2_floored(const Interval& a, double floor) {
    return log2(Interval(std::max(a.lo, floor), std::max(a.hi, floor)));
}

Interval max(const Interval& a, double b) {
    return {std::max(a.lo, b), std::max(a.hi, b)};
}

namespace {
double sin_pi_point(double x) {
    const double r = std::min(x, 1.0 - x);
    return std::sin(M_PI * r);
}

Interval widen_rel(double lo, double hi, int ulps) {
    // The argument pi*x carries ~1 ulp of error before sin/tgamma add theirs.
    return {rnd::down(lo, ulps), rnd::up(hi, ulps)};
}
}  // namespace

Interval sin_pi_unit(const Interval& x) {
    const double lo = std::clamp(x.lo, 0.0, 1.0);
    const double hi = std::clamp(x.hi, 0.0, 1.0);
    double a = 0.0, b = 0.0;
    if (hi <= 0.5) {
        a = sin_pi_point(lo);
        b = sin_pi_point(hi);
    } else if (lo >= 0.5) {
        a = sin_pi_point(hi);
        b = sin_pi_point(lo);
    } else {
        a = std::min(sin_pi_point(lo), sin_pi_point(hi));
        b = 1.0;
    }
    Interval r = widen_rel(a, b, 4);
    r.lo = std::max(r.lo, 0.0);
    r.hi = std::min(r.hi, 1.0);
    return r;
}

Interval tgamma_1_3(const Interval& x) {
    constexpr double kArgMin = 1.4616321449683623;
    constexpr double kMin = 0.8856031944108887;
    const double lo = std::clamp(x.lo, 1.0, 3.0);
    const double hi = std::clamp(x.hi, 1.0, 3.0);
    if (hi <= kArgMin) return widen_rel(std::tgamma(hi), std::tgamma(lo), 8);
    if (lo >= kArgMin) return widen_rel(std::tgamma(lo), std::tgamma(hi), 8);
    return widen_rel(kMin, std::max(std::tgamma(lo), std::tgamma(hi)), 8);
}

std::string to_string(const Interval& x) {
    std::ostringstream os;
    os.precision(17);
    os << '[' << x.lo << ", " << x.hi << ']';
    return os.str();
}

ParamBox ParamBox::point(const Theta& t) {
    ParamBox b;
    const auto v = t.to_array();
    for (std::size_t i = 0; i < kNumParams; ++i) b.axes[i] = Interval(v[i]);
    return b;
}

Theta ParamBox::center() const {
    std::array<double, kNumParams> v{};
    for (std::size_t i = 0; i < kNumParams; ++i) v[i] = axes[i].mid();
    return Theta::from_array(v);
}

bool ParamBox::contains(const Theta& t) const {
    const auto v = t.to_array();
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (!axes[i].contains(v[i])) return false;
    }
    return true;
}

bool ParamBox::degenerate() const {
    return std::all_of(axes.begin(), axes.end(), [](const Interval& x) { return x.degenerate(); });
}

Interval eta_interval(const Interval& h, const EtaTable& table) {
    const double lo = std::clamp(h.lo, 0.0, 1.0);
    const double hi = std::clamp(h.hi, 0.0, 1.0);
    const double elo = table(lo), ehi = table(hi);
    double a = 0.0, b = 0.0;
    if (table.unimodal()) {
        const double peak = table.peak_h();
        if (hi <= peak) {
            a = elo;
            b = ehi;
        } else if (lo >= peak) {
            a = ehi;
            b = elo;
        } else {
            a = std::min(elo, ehi);
            b = table.peak_value();
        }
    } else {
        const auto [nlo, nhi] = table.node_range(lo, hi);
        a = std::min({elo, ehi, nlo});
        b = std::max({elo, ehi, nhi});
    }
    // Interpolation rounds at most a few ulps away from the exact interpolant.
    return {std::max(rnd::down(a, 4), 0.0), rnd::up(b, 4)};
}

Interval eta_interval(const Interval& h, const EtaSet& eta, int octave) {
    return eta_interval(h, eta.table(octave));
}

}  // namespace ofbm
