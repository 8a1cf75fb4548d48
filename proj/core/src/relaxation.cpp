#include "ofbm/relaxation.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

#include "ofbm/model.hpp"

namespace ofbm {

Interval feasible_rho_enclosure(const Interval& h1, const Interval& h2) {
    const Interval one(1.0), two(2.0);
    const Interval num = tgamma_1_3(two * h1 + one) * tgamma_1_3(two * h2 + one) *
                         sin_pi_unit(h1) * sin_pi_unit(h2);
    const Interval hsum = h1 + h2;
    const Interval den = sqr(tgamma_1_3(hsum + one)) * sqr(sin_pi_unit(hsum * Interval(0.5)));
    const double lo = den.hi > 0.0 ? rnd::sqrt_dn(rnd::div_dn(std::max(num.lo, 0.0), den.hi)) : 0.0;
    const double hi = den.lo > 0.0 ? rnd::sqrt_up(rnd::div_up(num.hi, den.lo))
                                   : std::numeric_limits<double>::infinity();
    return {lo, hi};
}

double min_feasible_rho(const Interval& h1, const Interval& h2, double tol) {
    struct Rect {
        Interval a, b;
        double lower;
        bool operator<(const Rect& o) const { return lower > o.lower; }  // min-heap
    };
    auto point = [](const Interval& a, const Interval& b) {
        return max_feasible_rho(a.mid(), b.mid());
    };
    double upper = std::min({max_feasible_rho(h1.lo, h2.lo), max_feasible_rho(h1.lo, h2.hi),
                             max_feasible_rho(h1.hi, h2.lo), max_feasible_rho(h1.hi, h2.hi),
                             point(h1, h2)});
    std::priority_queue<Rect> heap;
    heap.push({h1, h2, feasible_rho_enclosure(h1, h2).lo});
    constexpr int kMaxSteps = 200000;
    constexpr double kMinWidth = 1e-9;
    for (int step = 0; step < kMaxSteps && !heap.empty(); ++step) {
        const Rect r = heap.top();
        if (upper - r.lower <= tol || upper <= 0.0) return std::max(r.lower, 0.0);
        if (r.a.width() < kMinWidth && r.b.width() < kMinWidth) return std::max(r.lower, 0.0);
        heap.pop();
        std::array<Rect, 2> kids;
        if (r.a.width() >= r.b.width()) {
            const double m = r.a.mid();
            kids = {Rect{{r.a.lo, m}, r.b, 0.0}, Rect{{m, r.a.hi}, r.b, 0.0}};
        } else {
            const double m = r.b.mid();
            kids = {Rect{r.a, {r.b.lo, m}, 0.0}, Rect{r.a, {m, r.b.hi}, 0.0}};
        }
        for (auto& k : kids) {
            k.lower = std::max(feasible_rho_enclosure(k.a, k.b).lo, r.lower);
            upper = std::min(upper, point(k.a, k.b));
            heap.push(k);
        }
    }
    return heap.empty() ? 0.0 : std::max(heap.top().lower, 0.0);
}

Relaxation build_relaxation(int grid, double sigma_max) {
    if (grid < 2) throw std::invalid_argument("relaxation grid must be >= 2");
    if (!(sigma_max > 0.0)) throw std::invalid_argument("sigma_max must be positive");
    Relaxation r;
    r.grid = grid;
    r.sigma_max = sigma_max;
    const double g = static_cast<double>(grid);
    // Keeps g strictly positive at rho = rho_i despite rounding in g itself.
    constexpr double kShrink = 1.0 - 1e-12;
    for (int i = 0; i < grid; ++i) {
        for (int k = i; k < grid; ++k) {
            const Interval h1(i / g, (i + 1) / g);
            const Interval h2(k / g, (k + 1) / g);
            const double rho = std::min(min_feasible_rho(h1, h2), 1.0) * kShrink;
            ParamBox box;
            box[Param::h1] = h1;
            box[Param::h2] = h2;
            box[Param::rho] = Interval(0.0, rho);
            box[Param::sigma1] = Interval(0.0, sigma_max);
            box[Param::sigma2] = Interval(0.0, sigma_max);
            box[Param::beta] = Interval(-1.0, 1.0);
            box[Param::gamma] = Interval(-1.0, 1.0);
            r.cells.push_back(box);
        }
    }
    return r;
}

bool relaxation_contains(const Relaxation& r, const Theta& t) {
    return std::any_of(r.cells.begin(), r.cells.end(), [&](const ParamBox& b) { return b.contains(t); });
}

}  // namespace ofbm
