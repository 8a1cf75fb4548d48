#include "ofbm/bound.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace ofbm {

namespace {

constexpr double kLn2 = 0.693147180559945309417;
const Interval kLn2I{rnd::down(kLn2), rnd::up(kLn2)};

// A mixing coefficient over the (beta, gamma) box with its two partials.
struct Coef {
    Interval v, db, dg;
};

// E_k = alpha_k a + mu_k c + nu_k b for k = 11, 12, 22.
struct Mixing {
    std::array<Coef, 3> alpha, mu, nu;
};

// cos over an angle interval inside [-pi/2, pi/2].
Interval cos_half_range(const Interval& s) {
    double lo = 0.0, hi = 0.0;
    if (s.lo >= 0.0) {
        lo = std::cos(s.hi);
        hi = std::cos(s.lo);
    } else if (s.hi <= 0.0) {
        lo = std::cos(s.lo);
        hi = std::cos(s.hi);
    } else {
        lo = std::min(std::cos(s.lo), std::cos(s.hi));
        hi = 1.0;
    }
    // Near +-pi/2 the algebraic form of the coefficient and cos(atan + atan)
    // agree only to a few 1e-16.
    constexpr double kSlack = 4e-16;
    return {std::max(0.0, lo - kSlack), hi + kSlack};
}

Mixing mixing(const Interval& beta, const Interval& gamma) {
    const Interval one(1.0), two(2.0);
    const Interval ig = one / (one + sqr(gamma));
    const Interval ib = one / (one + sqr(beta));
    auto square_ratio = [](double x) { return x * x / (1.0 + x * x); };
    const Interval sg = increasing(abs(gamma), square_ratio, 4);
    const Interval sb = increasing(abs(beta), square_ratio, 4);
    auto ratio = [](double x) { return x / (1.0 + x * x); };
    const Interval tg = increasing(gamma, ratio, 4);
    const Interval tb = increasing(beta, ratio, 4);
    auto normalized = [](double x) { return x / std::sqrt(1.0 + x * x); };
    const Interval pb = increasing(beta, normalized, 4);
    const Interval pg = increasing(gamma, normalized, 4);
    const Interval qb = sqrt(ib);
    const Interval qg = sqrt(ig);
    auto atan_ = [](double x) { return std::atan(x); };
    const Interval angle = increasing(beta, atan_, 4) + increasing(gamma, atan_, 4);
    const Interval m12 = cos_half_range(angle);
    Interval sin_angle = increasing(angle, [](double x) { return std::sin(x); }, 4);
    sin_angle = {sin_angle.lo - 4e-16, sin_angle.hi + 4e-16};

    const Interval ig2 = sqr(ig), ib2 = sqr(ib);
    const Interval d_ig = -two * gamma * ig2;
    const Interval d_ib = -two * beta * ib2;
    const Interval d_sg = two * gamma * ig2;
    const Interval d_sb = two * beta * ib2;
    const Interval d_tg = (one - sqr(gamma)) * ig2;
    const Interval d_tb = (one - sqr(beta)) * ib2;
    const Interval d_pb = ib * qb;
    const Interval d_pg = ig * qg;
    const Interval d_qb = -(beta * ib * qb);
    const Interval d_qg = -(gamma * ig * qg);
    const Interval zero(0.0);

    Mixing m;
    m.alpha[0] = {ig, zero, d_ig};
    m.mu[0] = {two * pb * qg, two * d_pb * qg, two * pb * d_qg};
    m.nu[0] = {sb, d_sb, zero};

    m.alpha[1] = {-tg, zero, -d_tg};
    m.mu[1] = {m12, -(sin_angle * ib), -(sin_angle * ig)};
    m.nu[1] = {tb, d_tb, zero};

    m.alpha[2] = {sg, zero, d_sg};
    m.mu[2] = {-(two * pg * qb), -(two * pg * d_qb), -(two * d_pg * qb)};
    m.nu[2] = {ib, d_ib, zero};
    return m;
}

struct BoxData {
    Interval h1, h2, hm, rho, s1, s2;
    Interval s1sq, s2sq, rs, s12, rho_s1, rho_s2;
    Interval e1, e2, em;  // 2h1+1, 2h2+1, h1+h2+1
    Interval dh;  // h1 - h2
    Mixing mix;
};

BoxData box_data(const ParamBox& box) {
    BoxData f;
    const Interval one(1.0), two(2.0);
    f.h1 = box[Param::h1];
    f.h2 = box[Param::h2];
    f.rho = box[Param::rho];
    f.s1 = box[Param::sigma1];
    f.s2 = box[Param::sigma2];
    f.s1sq = sqr(f.s1);
    f.s2sq = sqr(f.s2);
    f.s12 = f.s1 * f.s2;
    f.rs = f.rho * f.s12;
    f.rho_s1 = f.rho * f.s1;
    f.rho_s2 = f.rho * f.s2;
    const Interval hsum = f.h1 + f.h2;
    f.hm = hsum * Interval(0.5);
    f.e1 = two * f.h1 + one;
    f.e2 = two * f.h2 + one;
    f.em = hsum + one;
    f.dh = f.h1 - f.h2;
    f.mix = mixing(box[Param::beta], box[Param::gamma]);
    return f;
}

// Octave-level building blocks a, b, c and the eta values behind them.
struct OctaveParts {
    Interval eta1, eta2, etam;
    Interval p1, p2, pm;  // 2^{j e1}, 2^{j e2}, 2^{j em}
    Interval a, b, c;
};

OctaveParts octave_parts(const BoxData& f, const Interval& j, const EtaTable& table) {
    OctaveParts o;
    o.eta1 = eta_interval(f.h1, table);
    o.eta2 = eta_interval(f.h2, table);
    o.etam = eta_interval(f.hm, table);
    o.p1 = exp2(j * f.e1);
    o.p2 = exp2(j * f.e2);
    o.pm = exp2(j * f.em);
    o.a = f.s1sq * o.eta1 * o.p1;
    o.b = f.s2sq * o.eta2 * o.p2;
    o.c = f.rs * o.etam * o.pm;
    return o;
}

// Direct enclosure of the three entries, with the positive-semidefinite
// floor on the diagonal.
std::array<Interval, 3> direct_enclosure(const BoxData& f, const OctaveParts& o) {
    const Mixing& m = f.mix;
    std::array<Interval, 3> e;
    for (std::size_t k = 0; k < 3; ++k) e[k] = m.alpha[k].v * o.a + m.mu[k].v * o.c + m.nu[k].v * o.b;
    // The diagonal entries are quadratic forms x^2 a + 2xy c + y^2 b with
    // c = r sqrt(ab), so they are at least (1 - r)(x^2 a + y^2 b).
    if (o.eta1.lo > 0.0 && o.eta2.lo > 0.0) {
        const Interval r = f.rho * o.etam / sqrt(o.eta1 * o.eta2);
        const double keep = rnd::add_dn(1.0, -r.hi);
        if (keep > 0.0) {
            const Interval k(keep);
            e[0].lo = std::max(e[0].lo, (k * (m.alpha[0].v * o.a + m.nu[0].v * o.b)).lo);
            e[2].lo = std::max(e[2].lo, (k * (m.alpha[2].v * o.a + m.nu[2].v * o.b)).lo);
        }
    }
    return e;
}

Interval eta_slope(const Interval& h, const EtaTable& table) {
    const auto [lo, hi] = table.slope_range(std::clamp(h.lo, 0.0, 1.0), std::clamp(h.hi, 0.0, 1.0));
    return {rnd::down(lo, 4), rnd::up(hi, 4)};
}

using Gradient = std::array<std::array<Interval, kNumParams>, 3>;

// Partial derivatives of the three entries over the box, axis order of Theta.
Gradient gradient(const BoxData& f, const OctaveParts& o, const Interval& j, const EtaTable& table,
                  const std::array<bool, kNumParams>& free) {
    const Interval two(2.0), half(0.5);
    const Interval jl = j * kLn2I;
    const bool dh1 = free[index(Param::h1)], dh2 = free[index(Param::h2)];
    Interval a_h, b_h, c_h;
    if (dh1) a_h = f.s1sq * (eta_slope(f.h1, table) + two * jl * o.eta1) * o.p1;
    if (dh2) b_h = f.s2sq * (eta_slope(f.h2, table) + two * jl * o.eta2) * o.p2;
    if (dh1 || dh2) c_h = f.rs * (half * eta_slope(f.hm, table) + jl * o.etam) * o.pm;
    const Interval cq = o.etam * o.pm;
    const Interval a_s1 = two * f.s1 * o.eta1 * o.p1;
    const Interval b_s2 = two * f.s2 * o.eta2 * o.p2;

    Gradient g{};
    const Mixing& m = f.mix;
    for (std::size_t k = 0; k < 3; ++k) {
        const Interval& al = m.alpha[k].v;
        const Interval& mu = m.mu[k].v;
        const Interval& nu = m.nu[k].v;
        auto& gk = g[k];
        if (dh1) gk[index(Param::h1)] = al * a_h + mu * c_h;
        if (dh2) gk[index(Param::h2)] = nu * b_h + mu * c_h;
        if (free[index(Param::rho)]) gk[index(Param::rho)] = mu * f.s12 * cq;
        if (free[index(Param::sigma1)]) gk[index(Param::sigma1)] = al * a_s1 + mu * f.rho_s2 * cq;
        if (free[index(Param::sigma2)]) gk[index(Param::sigma2)] = nu * b_s2 + mu * f.rho_s1 * cq;
        if (free[index(Param::beta)]) {
            gk[index(Param::beta)] = m.alpha[k].db * o.a + m.mu[k].db * o.c + m.nu[k].db * o.b;
        }
        if (free[index(Param::gamma)]) {
            gk[index(Param::gamma)] = m.alpha[k].dg * o.a + m.mu[k].dg * o.c + m.nu[k].dg * o.b;
        }
    }
    return g;
}

using LogGradient = std::array<Interval, kNumParams>;

// An entry scaled by the larger of a and b (the pivot P):
// E / P = alpha A + mu C + nu B with A = a/P, B = b/P, C = rho Cr.
// The 2^{j e} factors only enter through h1 - h2, which keeps the enclosure
// close to the true range at coarse octaves.
struct RatioForm {
    bool ok = false;
    bool pivot_b = false;
    Interval A, B, Cr, C, q;
};

RatioForm ratio_form(const BoxData& f, const OctaveParts& o, const Interval& j, std::size_t k) {
    const Mixing& m = f.mix;
    const Interval one(1.0), two(2.0);
    RatioForm r;
    const bool can_b = f.s2.lo > 0.0 && o.eta2.lo > 0.0;
    const bool can_a = f.s1.lo > 0.0 && o.eta1.lo > 0.0;
    if (!can_a && !can_b) return r;
    const bool prefer_b = std::fabs(m.nu[k].v.mid() * o.b.mid()) >= std::fabs(m.alpha[k].v.mid() * o.a.mid());
    r.pivot_b = can_b && (prefer_b || !can_a);
    if (r.pivot_b) {
        const Interval ratio = f.s1 / f.s2;
        r.A = sqr(ratio) * (o.eta1 / o.eta2) * exp2(two * j * f.dh);
        r.B = one;
        r.Cr = ratio * (o.etam / o.eta2) * exp2(j * f.dh);
    } else {
        const Interval ratio = f.s2 / f.s1;
        r.A = one;
        r.B = sqr(ratio) * (o.eta2 / o.eta1) * exp2(-(two * j * f.dh));
        r.Cr = ratio * (o.etam / o.eta1) * exp2(-(j * f.dh));
    }
    r.C = f.rho * r.Cr;
    r.q = m.alpha[k].v * r.A + m.mu[k].v * r.C + m.nu[k].v * r.B;
    r.ok = true;
    return r;
}

bool nonzero(const Interval& x) { return x.lo > 0.0 || x.hi < 0.0; }

// Partials of log2|E_k| over the box from its ratio form. Returns false when
// the scaled entry may vanish.
bool log_gradient(const BoxData& f, const OctaveParts& o, const Interval& j, const EtaTable& table,
                  const std::array<bool, kNumParams>& free, std::size_t k, const RatioForm& rf,
                  LogGradient& out) {
    const Mixing& m = f.mix;
    const Interval two(2.0), half(0.5);
    if (!rf.ok || !nonzero(rf.q)) return false;
    if (!(o.eta1.lo > 0.0 && o.eta2.lo > 0.0 && f.s1.lo > 0.0 && f.s2.lo > 0.0)) return false;
    const Interval &A = rf.A, &B = rf.B, &C = rf.C, &Cr = rf.Cr, &q = rf.q;
    const Interval& al = m.alpha[k].v;
    const Interval& mu = m.mu[k].v;
    const Interval& nu = m.nu[k].v;
    const Interval inv = Interval(1.0) / (q * kLn2I);
    const Interval jl = j * kLn2I;
    const bool dh1 = free[index(Param::h1)], dh2 = free[index(Param::h2)];
    Interval dc(0.0);
    if (dh1 || dh2) {
        if (!(o.etam.lo > 0.0)) return false;
        dc = half * eta_slope(f.hm, table) / o.etam + jl;
    }
    if (dh1) {
        const Interval da = eta_slope(f.h1, table) / o.eta1 + two * jl;
        out[index(Param::h1)] = (al * A * da + mu * C * dc) * inv;
    }
    if (dh2) {
        const Interval db = eta_slope(f.h2, table) / o.eta2 + two * jl;
        out[index(Param::h2)] = (nu * B * db + mu * C * dc) * inv;
    }
    if (free[index(Param::rho)]) out[index(Param::rho)] = mu * Cr * inv;
    if (free[index(Param::sigma1)]) out[index(Param::sigma1)] = (two * al * A + mu * C) * inv / f.s1;
    if (free[index(Param::sigma2)]) out[index(Param::sigma2)] = (two * nu * B + mu * C) * inv / f.s2;
    if (free[index(Param::beta)]) {
        out[index(Param::beta)] = (m.alpha[k].db * A + m.mu[k].db * C + m.nu[k].db * B) * inv;
    }
    if (free[index(Param::gamma)]) {
        out[index(Param::gamma)] = (m.alpha[k].dg * A + m.mu[k].dg * C + m.nu[k].dg * B) * inv;
    }
    return true;
}

Interval intersect(const Interval& x, const Interval& y) {
    const Interval r{std::max(x.lo, y.lo), std::min(x.hi, y.hi)};
    return r.valid() ? r : x;
}

// Linear model of one residual r = target - log2|E| around the box center:
// r(theta) lies within center + slope . (theta - c) +- remainder.
struct Linearization {
    bool valid = false;
    Interval center;  // r at the box center
    std::array<double, kNumParams> slope{};
    double remainder = 0.0;
};

// Residual split as target - log2|E| = z - (s + j t) with s = 2 log2 sigma_P and
// t = 2 h_P + 1 for the pivot component P; z encloses the remainder.
struct ShiftTerm {
    bool valid = false;
    bool pivot_b = false;
    Interval z;
};

// Lower bound of sum_k dist(s + j_k t, Z_k)^2 over s in S, t in T, one
// (s, t) pair per pivot component. The primal is solved approximately; the
// bound itself is the Lagrangian dual at the primal multipliers, so it is
// valid for any solver quality.
class ShiftSlope {
public:
    struct Term {
        double j;
        double lo, hi;
    };

    void set_ranges(std::size_t g, const Interval& s, const Interval& t) {
        s_[g] = s;
        t_[g] = t;
        ready_[g] = true;
    }
    bool ready(std::size_t g) const { return ready_[g]; }
    void add(std::size_t g, double j, const Interval& z) { terms_[g].push_back({j, z.lo, z.hi}); }

    double lower_bound() const {
        double total = 0.0;
        for (std::size_t g = 0; g < 2; ++g) {
            if (ready_[g] && !terms_[g].empty()) total = rnd::add_dn(total, group_bound(g));
        }
        return total;
    }

private:
    static double excess(double t, const Term& k) {
        if (t > k.hi) return t - k.hi;
        if (t < k.lo) return t - k.lo;
        return 0.0;
    }

    double value(std::size_t g, double s, double t) const {
        double f = 0.0;
        for (const Term& k : terms_[g]) {
            const double e = excess(s + k.j * t, k);
            f += e * e;
        }
        return f;
    }

    double group_bound(std::size_t g) const {
        const auto& ts = terms_[g];
        const Interval& S = s_[g];
        const Interval& T = t_[g];
        double t = T.mid();
        double s = 0.0;
        {
            double sum = 0.0;
            for (const Term& k : ts) sum += 0.5 * (k.lo + k.hi) - k.j * t;
            s = std::clamp(sum / static_cast<double>(ts.size()), S.lo, S.hi);
        }
        double f = value(g, s, t);
        for (int iter = 0; iter < 40; ++iter) {
            double gs = 0.0, gt = 0.0, hss = 0.0, hst = 0.0, htt = 0.0;
            for (const Term& k : ts) {
                const double e = excess(s + k.j * t, k);
                if (e == 0.0) continue;
                gs += 2.0 * e;
                gt += 2.0 * e * k.j;
                hss += 2.0;
                hst += 2.0 * k.j;
                htt += 2.0 * k.j * k.j;
            }
            const bool pin_s = (s <= S.lo && gs > 0.0) || (s >= S.hi && gs < 0.0);
            const bool pin_t = (t <= T.lo && gt > 0.0) || (t >= T.hi && gt < 0.0);
            double ds = 0.0, dt = 0.0;
            if (!pin_s && !pin_t) {
                const double det = hss * htt - hst * hst;
                if (det > 1e-12 * (hss * htt + 1e-300)) {
                    ds = -(htt * gs - hst * gt) / det;
                    dt = -(hss * gt - hst * gs) / det;
                } else if (hss > 0.0) {
                    ds = -gs / hss;
                }
            } else if (!pin_s && hss > 0.0) {
                ds = -gs / hss;
            } else if (!pin_t && htt > 0.0) {
                dt = -gt / htt;
            }
            if (ds == 0.0 && dt == 0.0) break;
            bool moved = false;
            for (double a = 1.0; a > 1e-6; a *= 0.5) {
                const double sn = std::clamp(s + a * ds, S.lo, S.hi);
                const double tn = std::clamp(t + a * dt, T.lo, T.hi);
                const double fn = value(g, sn, tn);
                if (fn < f) {
                    moved = f - fn > 1e-15 * (1.0 + f);
                    s = sn;
                    t = tn;
                    f = fn;
                    break;
                }
            }
            if (!moved) break;
        }
        // Dual: sum_k lambda_k (s + j_k t) - phi*(lambda_k), phi*(l) = l^2/4 + max(l lo, l hi).
        Interval sum_l(0.0), sum_lj(0.0);
        double conj = 0.0;
        for (const Term& k : ts) {
            const double lam = 2.0 * excess(s + k.j * t, k);
            if (lam == 0.0) continue;
            const Interval l(lam);
            sum_l = sum_l + l;
            sum_lj = sum_lj + l * Interval(k.j);
            const Interval c = sqr(l) * Interval(0.25) + l * Interval(lam > 0.0 ? k.hi : k.lo);
            conj = rnd::add_up(conj, c.hi);
        }
        const double linear = rnd::add_dn((sum_l * S).lo, (sum_lj * T).lo);
        return std::max(rnd::add_dn(linear, -conj), 0.0);
    }

    std::array<std::vector<Term>, 2> terms_;
    std::array<Interval, 2> s_, t_;
    std::array<bool, 2> ready_{};
};

// Evaluates enclosures of log2|E_k| octave by octave for one box.
//
// The direct interval evaluation is intersected with two mean-value forms
// (on E and on log2|E|) built around the box center.
class Evaluator {
public:
    Evaluator(const ParamBox& b, const Objective& obj) : objective_(obj), box_(box_data(b)) {
        const Theta c = b.center();
        const auto cv = c.to_array();
        for (std::size_t i = 0; i < kNumParams; ++i) {
            free_[i] = b[i].width() > 0.0;
            offset_[i] = b[i] - Interval(cv[i]);
            mean_value_ = mean_value_ || free_[i];
        }
        if (mean_value_) center_ = box_data(ParamBox::point(c));
    }

    bool mean_value() const { return mean_value_; }
    const std::array<bool, kNumParams>& free() const { return free_; }
    const std::array<Interval, kNumParams>& offset() const { return offset_; }

    void octave(int octave, const std::array<double, 3>& target, std::array<Interval, 3>& log_e,
                std::array<Interval, 3>& e, std::array<Linearization, 3>* lin,
                std::array<ShiftTerm, 3>* shift) const {
        const EtaTable& table = objective_.eta().table(octave);
        const double floor = objective_.options().floor;
        const Interval j(static_cast<double>(octave));
        const OctaveParts parts = octave_parts(box_, j, table);
        e = direct_enclosure(box_, parts);
        if (lin) *lin = {};
        if (shift) *shift = {};
        std::array<RatioForm, 3> rf;
        for (std::size_t k = 0; k < 3; ++k) {
            log_e[k] = log2_floored(abs(e[k]), floor);
            rf[k] = ratio_form(box_, parts, j, k);
            if (!rf[k].ok || !nonzero(rf[k].q)) continue;
            // log2|E| = 2 log2 sigma_P + j e_P + log2 eta_P + log2|q|.
            const Interval rest = log2(rf[k].pivot_b ? parts.eta2 : parts.eta1) + log2(abs(rf[k].q));
            const Interval scale = rf[k].pivot_b ? log2(sqr(box_.s2)) + j * box_.e2 : log2(sqr(box_.s1)) + j * box_.e1;
            log_e[k] = intersect(log_e[k], scale + rest);
            if (shift) (*shift)[k] = {true, rf[k].pivot_b, Interval(target[k]) - rest};
        }
        if (!mean_value_) return;

        const OctaveParts cparts = octave_parts(center_, j, table);
        const auto ec = direct_enclosure(center_, cparts);
        std::optional<Gradient> g, gc;  // plain partials of E, only when the ratio form fails
        for (std::size_t k = 0; k < 3; ++k) {
            const Interval magc = abs(ec[k]);
            if (!(magc.lo > floor)) continue;
            LogGradient dlog_box{};
            if (!log_gradient(box_, parts, j, table, free_, k, rf[k], dlog_box)) {
                if (!(abs(e[k]).lo > floor)) continue;
                if (!g) g = gradient(box_, parts, j, table, free_);
                // d log2|E| = dE / (E ln 2), valid while E keeps its sign.
                const Interval inv = Interval(1.0) / (e[k] * kLn2I);
                for (std::size_t i = 0; i < kNumParams; ++i) {
                    if (free_[i]) dlog_box[i] = (*g)[k][i] * inv;
                }
            }
            const Interval log_c = log2(magc);
            Interval dlog(0.0);
            for (std::size_t i = 0; i < kNumParams; ++i) {
                if (free_[i]) dlog = dlog + dlog_box[i] * offset_[i];
            }
            log_e[k] = intersect(log_e[k], log_c + dlog);
            if (!lin) continue;

            // Slopes at the center; any value is valid, the remainder absorbs the error.
            LogGradient dlog_c{};
            if (!log_gradient(center_, cparts, j, table, free_, k, ratio_form(center_, cparts, j, k), dlog_c)) {
                if (!gc) gc = gradient(center_, cparts, j, table, free_);
                const Interval inv = Interval(1.0) / (ec[k] * kLn2I);
                for (std::size_t i = 0; i < kNumParams; ++i) {
                    if (free_[i]) dlog_c[i] = (*gc)[k][i] * inv;
                }
            }
            // r = target - log2|E|: slopes flip sign.
            Linearization& l = (*lin)[k];
            l.valid = true;
            l.center = Interval(target[k]) - log_c;
            double rem = 0.0;
            for (std::size_t i = 0; i < kNumParams; ++i) {
                if (!free_[i]) continue;
                l.slope[i] = -dlog_c[i].mid();
                const Interval spread = -dlog_box[i] - Interval(l.slope[i]);
                const double mag_spread = std::max(std::fabs(spread.lo), std::fabs(spread.hi));
                const double mag_off = std::max(std::fabs(offset_[i].lo), std::fabs(offset_[i].hi));
                rem = rnd::add_up(rem, rnd::mul_up(mag_spread, mag_off));
            }
            l.remainder = rem;
        }
    }

private:
    const Objective& objective_;
    BoxData box_;
    BoxData center_{};
    std::array<bool, kNumParams> free_{};
    std::array<Interval, kNumParams> offset_{};
    bool mean_value_ = false;
};

// Certified lower bound of min over the box of sum_k (|l_k(x)| - e_k)_+^2,
// l_k(x) = r_k + g_k . x, for x within the offsets. The convex problem is
// solved approximately; the first-order certificate at the final point keeps
// the result sound whatever the solver quality.
class JointBound {
public:
    JointBound(const std::array<bool, kNumParams>& free, const std::array<Interval, kNumParams>& offset) {
        for (std::size_t i = 0; i < kNumParams; ++i) {
            if (!free[i]) continue;
            axes_.push_back(i);
            lo_.push_back(offset[i].lo);
            hi_.push_back(offset[i].hi);
        }
    }

    void add(double r, const std::array<double, kNumParams>& slope, double remainder) {
        r_.push_back(r);
        for (std::size_t i : axes_) g_.push_back(slope[i]);
        e_.push_back(remainder);
    }

    // Residual-center enclosures are folded in by the caller through e_k.
    double lower_bound() const {
        const std::size_t m = r_.size(), n = axes_.size();
        if (m == 0 || n == 0) return 0.0;
        std::vector<double> x(n, 0.0);
        minimize(x);
        return certificate(x);
    }

private:
    double value(const std::vector<double>& x, std::vector<double>& t) const {
        const std::size_t m = r_.size(), n = axes_.size();
        double f = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            double v = r_[k];
            for (std::size_t i = 0; i < n; ++i) v += g_[k * n + i] * x[i];
            t[k] = v;
            const double excess = std::fabs(v) - e_[k];
            if (excess > 0.0) f += excess * excess;
        }
        return f;
    }

    void minimize(std::vector<double>& x) const {
        const std::size_t m = r_.size(), n = axes_.size();
        std::vector<double> t(m), trial_t(m), grad(n), step(n), trial(n);
        std::vector<double> h(n * n);
        double f = value(x, t);
        for (int iter = 0; iter < 30; ++iter) {
            std::fill(grad.begin(), grad.end(), 0.0);
            std::fill(h.begin(), h.end(), 0.0);
            for (std::size_t k = 0; k < m; ++k) {
                const double excess = std::fabs(t[k]) - e_[k];
                if (excess <= 0.0) continue;
                const double d = 2.0 * std::copysign(excess, t[k]);
                const double* gk = &g_[k * n];
                for (std::size_t i = 0; i < n; ++i) {
                    grad[i] += d * gk[i];
                    for (std::size_t l = 0; l <= i; ++l) h[i * n + l] += 2.0 * gk[i] * gk[l];
                }
            }
            // Newton direction on the axes not pinned by the box.
            std::vector<std::size_t> freeset;
            for (std::size_t i = 0; i < n; ++i) {
                const bool at_lo = x[i] <= lo_[i] && grad[i] > 0.0;
                const bool at_hi = x[i] >= hi_[i] && grad[i] < 0.0;
                if (!at_lo && !at_hi) freeset.push_back(i);
            }
            if (freeset.empty()) break;
            if (!newton_step(h, grad, freeset, step)) break;
            double alpha = 1.0;
            bool improved = false;
            for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
                for (std::size_t i = 0; i < n; ++i) trial[i] = std::clamp(x[i] + alpha * step[i], lo_[i], hi_[i]);
                const double ft = value(trial, trial_t);
                if (ft < f) {
                    improved = f - ft > 1e-15 * (1.0 + f);
                    x.swap(trial);
                    t.swap(trial_t);
                    f = ft;
                    break;
                }
            }
            if (!improved) break;
        }
    }

    // Solves H_ff p_f = -g_f by Cholesky with a small ridge; p is 0 elsewhere.
    bool newton_step(const std::vector<double>& h, const std::vector<double>& grad,
                     const std::vector<std::size_t>& fs, std::vector<double>& step) const {
        const std::size_t n = axes_.size(), q = fs.size();
        std::vector<double> a(q * q), b(q);
        double trace = 0.0;
        for (std::size_t u = 0; u < q; ++u) trace += h[fs[u] * n + fs[u]];
        const double ridge = 1e-12 * trace + 1e-300;
        for (std::size_t u = 0; u < q; ++u) {
            for (std::size_t v = 0; v <= u; ++v) {
                a[u * q + v] = h[fs[u] * n + fs[v]] + (u == v ? ridge : 0.0);
            }
            b[u] = -grad[fs[u]];
        }
        for (std::size_t u = 0; u < q; ++u) {
            for (std::size_t v = 0; v <= u; ++v) {
                double sum = a[u * q + v];
                for (std::size_t w = 0; w < v; ++w) sum -= a[u * q + w] * a[v * q + w];
                if (u == v) {
                    if (!(sum > 0.0)) return false;
                    a[u * q + u] = std::sqrt(sum);
                } else {
                    a[u * q + v] = sum / a[v * q + v];
                }
            }
        }
        for (std::size_t u = 0; u < q; ++u) {
            double sum = b[u];
            for (std::size_t w = 0; w < u; ++w) sum -= a[u * q + w] * b[w];
            b[u] = sum / a[u * q + u];
        }
        for (std::size_t u = q; u-- > 0;) {
            double sum = b[u];
            for (std::size_t w = u + 1; w < q; ++w) sum -= a[w * q + u] * b[w];
            b[u] = sum / a[u * q + u];
        }
        std::fill(step.begin(), step.end(), 0.0);
        for (std::size_t u = 0; u < q; ++u) step[fs[u]] = b[u];
        return true;
    }

    // F(x) + min over the box of grad F(x) . (y - x), in interval arithmetic.
    double certificate(const std::vector<double>& x) const {
        const std::size_t m = r_.size(), n = axes_.size();
        std::vector<Interval> grad(n, Interval(0.0));
        double f = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            Interval t(r_[k]);
            for (std::size_t i = 0; i < n; ++i) t = t + Interval(g_[k * n + i]) * Interval(x[i]);
            const Interval excess = abs(t) - Interval(e_[k]);
            const Interval pos{std::max(excess.lo, 0.0), std::max(excess.hi, 0.0)};
            f = rnd::add_dn(f, sqr(pos).lo);
            // Derivative 2 sign(t) (|t| - e)_+.
            Interval d(0.0);
            if (t.lo > 0.0) {
                d = Interval(2.0) * pos;
            } else if (t.hi < 0.0) {
                d = -(Interval(2.0) * pos);
            } else {
                const double w = 2.0 * pos.hi;
                d = Interval(-w, w);
            }
            if (d.lo == 0.0 && d.hi == 0.0) continue;
            for (std::size_t i = 0; i < n; ++i) grad[i] = grad[i] + d * Interval(g_[k * n + i]);
        }
        double linear = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Interval move = Interval(lo_[i], hi_[i]) - Interval(x[i]);
            linear = rnd::add_dn(linear, (grad[i] * move).lo);
        }
        return std::max(rnd::add_dn(f, linear), 0.0);
    }

    std::vector<std::size_t> axes_;
    std::vector<double> lo_, hi_;
    std::vector<double> r_, g_, e_;
};

bool contains_zero(const Interval& e) { return e.lo <= 0.0 && e.hi >= 0.0; }

// Lower bound of (target - log2|E|)^2 and the residual enclosure.
double term_lower(double target, const Interval& log_e, Interval* residual) {
    const Interval r = Interval(target) - log_e;
    if (residual) *residual = r;
    return sqr(r).lo;
}

// Absorbs rounding in the pointwise objective the bound is compared against.
constexpr double kSafety = 1.0 - 1e-12;

}  // namespace

BoundResult refine_bound(const ParamBox& child, const Objective& objective, double parent_lower) {
    BoundResult r = bound_cn(child, objective);
    r.lower = std::max(r.lower, parent_lower);
    return r;
}

BoundResult bound_cn(const ParamBox& box, const Objective& objective) {
    const Evaluator ev(box, objective);
    JointBound joint(ev.free(), ev.offset());
    ShiftSlope shift_slope;
    // Group 0 pivots on a (sigma1, h1), group 1 on b (sigma2, h2).
    const Interval two(2.0), one(1.0);
    if (box[Param::sigma1].lo > 0.0) {
        shift_slope.set_ranges(0, log2(sqr(box[Param::sigma1])), two * box[Param::h1] + one);
    }
    if (box[Param::sigma2].lo > 0.0) {
        shift_slope.set_ranges(1, log2(sqr(box[Param::sigma2])), two * box[Param::h2] + one);
    }
    BoundResult out;
    double separate = 0.0;  // every term minimised on its own
    double rest = 0.0;      // terms left out of the joint problem
    std::array<Interval, 3> log_e, e;
    std::array<Linearization, 3> lin;
    std::array<ShiftTerm, 3> shift;
    const bool linearize = ev.mean_value();
    for (const auto& t : objective.targets()) {
        ev.octave(t.j, t.log2_s, log_e, e, linearize ? &lin : nullptr, &shift);
        for (std::size_t k = 0; k < 3; ++k) {
            if (k == 1 && !t.use12) continue;
            const double lower = term_lower(t.log2_s[k], log_e[k], nullptr);
            separate = rnd::add_dn(separate, lower);
            if (contains_zero(e[k])) out.weak = true;
            if (shift[k].valid) {
                const std::size_t g = shift[k].pivot_b ? 1 : 0;
                if (shift_slope.ready(g)) shift_slope.add(g, static_cast<double>(t.j), shift[k].z);
            }
            if (linearize && lin[k].valid) {
                const Linearization& l = lin[k];
                const double r0 = l.center.mid();
                const double slack = rnd::add_up(l.remainder, std::max(l.center.hi - r0, r0 - l.center.lo));
                joint.add(r0, l.slope, rnd::up(slack, 2));
            } else {
                rest = rnd::add_dn(rest, lower);
            }
        }
    }
    double lower = std::max(separate, shift_slope.lower_bound());
    if (linearize) lower = std::max(lower, rnd::add_dn(rest, joint.lower_bound()));
    out.lower = lower * kSafety;
    return out;
}

std::vector<BoundTerm> bound_terms(const ParamBox& box, const Objective& objective) {
    const Evaluator ev(box, objective);
    std::vector<BoundTerm> out;
    std::array<Interval, 3> log_e, e;
    for (const auto& t : objective.targets()) {
        ev.octave(t.j, t.log2_s, log_e, e, nullptr, nullptr);
        for (std::size_t k = 0; k < 3; ++k) {
            BoundTerm term;
            term.j = t.j;
            term.entry = static_cast<int>(k);
            term.model = e[k];
            term.weak = contains_zero(e[k]);
            term.dropped = (k == 1 && !t.use12);
            const double lower = term_lower(t.log2_s[k], log_e[k], &term.residual);
            term.lower = term.dropped ? 0.0 : lower * kSafety;
            out.push_back(term);
        }
    }
    return out;
}

}  // namespace ofbm
