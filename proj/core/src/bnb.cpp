#include "ofbm/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>

#include "ofbm/parallel.hpp"

namespace ofbm {

std::string_view to_string(RegionStatus s) {
    switch (s) {
        case RegionStatus::active: return "active";
        case RegionStatus::pruned_bound: return "pruned-bound";
        case RegionStatus::pruned_infeasible: return "pruned-infeasible";
        case RegionStatus::pruned_size: return "pruned-size";
        case RegionStatus::candidate: return "candidate";
    }
    return "unknown";
}

void BnbConfig::validate() const {
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (!(delta[i] > 0.0)) throw std::invalid_argument("delta must be positive on every axis");
    }
    if (delta_relax < 2) throw std::invalid_argument("relaxation grid must be >= 2");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    if (batch < 1) throw std::invalid_argument("batch must be >= 1");
    if (sigma_max < 0.0) throw std::invalid_argument("sigma_max must be >= 0");
}

Theta region_center(const ParamBox& box) { return project_ordering(box.center()); }

namespace {

std::array<double, kNumParams> axis_ranges(double sigma_max) {
    return {1.0, 1.0, 1.0, sigma_max, sigma_max, 2.0, 2.0};
}

}  // namespace

double grid_count(const BnbConfig& config, double sigma_max) {
    const auto range = axis_ranges(sigma_max);
    double count = 1.0;
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (!config.frozen[i]) count *= range[i] / config.delta[i];
    }
    return count;
}

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t kPolishStarts = 8;

struct Entry {
    Region region;
    double nvol = 0.0;  // volume in units of prod(delta) over free axes
};

// Heap order: lowest lower bound first, then larger normalized volume, then
// lexicographic box order.
struct Worse {
    bool operator()(const Entry& a, const Entry& b) const {
        if (a.region.lower != b.region.lower) return a.region.lower > b.region.lower;
        if (a.nvol != b.nvol) return a.nvol < b.nvol;
        for (std::size_t i = 0; i < kNumParams; ++i) {
            const Interval& x = a.region.box[i];
            const Interval& y = b.region.box[i];
            if (x.lo != y.lo) return x.lo > y.lo;
            if (x.hi != y.hi) return x.hi > y.hi;
        }
        return a.region.id > b.region.id;
    }
};

class Solver {
public:
    Solver(const Objective& objective, const BnbConfig& config)
        : objective_(objective), config_(config) {
        for (std::size_t i = 0; i < kNumParams; ++i) free_[i] = !config.frozen[i].has_value();
    }

    BnbResult run(const std::vector<ParamBox>& cells, double sigma_max);

private:
    double normalized_volume(const ParamBox& b) const {
        double v = 1.0;
        for (std::size_t i = 0; i < kNumParams; ++i) {
            if (free_[i]) v *= b[i].width() / config_.delta[i];
        }
        return v;
    }

    double volume(const ParamBox& b) const {
        double v = 1.0;
        for (std::size_t i = 0; i < kNumParams; ++i) {
            if (free_[i]) v *= b[i].width();
        }
        return v;
    }

    bool small_enough(const ParamBox& b) const {
        for (std::size_t i = 0; i < kNumParams; ++i) {
            if (free_[i] && b[i].width() > config_.delta[i]) return false;
        }
        return true;
    }

    std::size_t longest_axis(const ParamBox& b) const {
        std::size_t best = 0;
        double len = -1.0;
        for (std::size_t i = 0; i < kNumParams; ++i) {
            if (!free_[i]) continue;
            const double l = b[i].width() / config_.delta[i];
            if (l > len) {
                len = l;
                best = i;
            }
        }
        return best;
    }

    // Entirely on the h1 > h2 side (up to a null set).
    static bool infeasible(const ParamBox& b) {
        const Interval& h1 = b[Param::h1];
        const Interval& h2 = b[Param::h2];
        if (h1.lo > h2.hi) return true;
        return h1.lo == h2.hi && (h1.width() > 0.0 || h2.width() > 0.0);
    }

    void evaluate(Region& r, double parent_lower = -std::numeric_limits<double>::infinity()) const {
        const BoundResult lb = refine_bound(r.box, objective_, parent_lower);
        r.lower = lb.lower;
        r.weak = lb.weak;
        r.upper = objective_(region_center(r.box));
        if (!std::isfinite(r.upper)) r.upper = std::numeric_limits<double>::infinity();
    }

    void offer_incumbent(const Region& r) {
        if (r.upper < incumbent_) {
            incumbent_ = r.upper;
            incumbent_theta_ = region_center(r.box);
            incumbent_polished_ = false;
        }
        if (started_ && r.upper < best_center_) polish_from(region_center(r.box), r.upper);
        best_center_ = std::min(best_center_, r.upper);
    }

    bool inside_relaxation(const Theta& t) const {
        if (t.h1 > t.h2) return false;
        const auto v = t.to_array();
        for (const ParamBox& c : cells_) {
            bool in = true;
            for (std::size_t i = 0; i < kNumParams && in; ++i) in = c[i].contains(v[i]);
            if (in) return true;
        }
        return false;
    }

    // Levenberg-Marquardt on the free axes, confined to the relaxation.
    void polish_from(const Theta& start, double value) {
        if (!config_.polish || stats_.polish_runs >= config_.polish_budget) return;
        ++stats_.polish_runs;
        std::vector<std::size_t> axes;
        for (std::size_t i = 0; i < kNumParams; ++i) {
            if (free_[i]) axes.push_back(i);
        }
        const std::size_t n = axes.size();
        auto x = start.to_array();
        double f = value;
        std::vector<double> r = objective_.residuals(Theta::from_array(x));
        const std::size_t m = r.size();
        std::vector<double> jac(m * n), jtj(n * n), jtr(n), step(n);
        double lambda = 1e-3;
        for (int iter = 0; iter < 60; ++iter) {
            for (std::size_t a = 0; a < n; ++a) {
                auto xp = x;
                const std::size_t i = axes[a];
                double h = 1e-7 * std::max(1.0, std::fabs(x[i]));
                if (xp[i] + h > upper_[i]) h = -h;
                xp[i] += h;
                const auto rp = objective_.residuals(Theta::from_array(xp));
                for (std::size_t k = 0; k < m; ++k) jac[k * n + a] = (rp[k] - r[k]) / h;
            }
            ++stats_.objective_evaluations;
            std::fill(jtj.begin(), jtj.end(), 0.0);
            std::fill(jtr.begin(), jtr.end(), 0.0);
            for (std::size_t k = 0; k < m; ++k) {
                for (std::size_t a = 0; a < n; ++a) {
                    jtr[a] += jac[k * n + a] * r[k];
                    for (std::size_t b = 0; b <= a; ++b) jtj[a * n + b] += jac[k * n + a] * jac[k * n + b];
                }
            }
            bool accepted = false;
            for (int tries = 0; tries < 12 && !accepted; ++tries) {
                if (!damped_solve(jtj, jtr, lambda, step)) {
                    lambda *= 10.0;
                    continue;
                }
                auto xt = x;
                for (std::size_t a = 0; a < n; ++a) {
                    const std::size_t i = axes[a];
                    xt[i] = std::clamp(x[i] + step[a], lower_[i], upper_[i]);
                }
                const Theta tt = Theta::from_array(xt);
                const double ft = inside_relaxation(tt) ? objective_(tt) : std::numeric_limits<double>::infinity();
                if (ft < f) {
                    const double gain = f - ft;
                    x = xt;
                    f = ft;
                    r = objective_.residuals(tt);
                    lambda = std::max(lambda / 3.0, 1e-12);
                    accepted = gain > 1e-14 * (1.0 + f);
                    if (!accepted) iter = 60;
                } else {
                    lambda *= 4.0;
                }
            }
            if (!accepted) break;
        }
        if (f < incumbent_) {
            ++stats_.polish_improvements;
            incumbent_ = f;
            incumbent_theta_ = Theta::from_array(x);
            incumbent_polished_ = true;
        }
    }

    static bool damped_solve(const std::vector<double>& jtj, const std::vector<double>& jtr, double lambda,
                             std::vector<double>& step) {
        const std::size_t n = jtr.size();
        std::vector<double> a(n * n);
        for (std::size_t u = 0; u < n; ++u) {
            for (std::size_t v = 0; v <= u; ++v) a[u * n + v] = jtj[u * n + v];
            a[u * n + u] += lambda * (jtj[u * n + u] + 1e-12);
        }
        for (std::size_t u = 0; u < n; ++u) {
            for (std::size_t v = 0; v <= u; ++v) {
                double sum = a[u * n + v];
                for (std::size_t w = 0; w < v; ++w) sum -= a[u * n + w] * a[v * n + w];
                if (u == v) {
                    if (!(sum > 0.0)) return false;
                    a[u * n + u] = std::sqrt(sum);
                } else {
                    a[u * n + v] = sum / a[v * n + v];
                }
            }
        }
        for (std::size_t u = 0; u < n; ++u) {
            double sum = -jtr[u];
            for (std::size_t w = 0; w < u; ++w) sum -= a[u * n + w] * step[w];
            step[u] = sum / a[u * n + u];
        }
        for (std::size_t u = n; u-- > 0;) {
            double sum = step[u];
            for (std::size_t w = u + 1; w < n; ++w) sum -= a[w * n + u] * step[w];
            step[u] = sum / a[u * n + u];
        }
        return true;
    }

    void trace(std::string_view event, const Region& r, std::uint64_t parent) {
        if (!config_.trace) return;
        std::ostream& os = *config_.trace;
        os << stats_.iterations << ',' << event << ',' << r.id << ',' << parent << ',' << r.lower << ','
           << r.upper << ',' << incumbent_;
        for (std::size_t i = 0; i < kNumParams; ++i) os << ',' << r.box[i].lo << ',' << r.box[i].hi;
        os << '\n';
    }

    void write_trace_header() {
        if (!config_.trace) return;
        std::ostream& os = *config_.trace;
        os.precision(17);
        os << "iteration,event,id,parent,lower,upper,incumbent";
        for (std::size_t i = 0; i < kNumParams; ++i) {
            os << ',' << param_name(i) << "_lo," << param_name(i) << "_hi";
        }
        os << '\n';
    }

    void prune(Region& r, RegionStatus status, std::uint64_t parent) {
        r.status = status;
        if (config_.track_measure) stats_.measure.pruned += volume(r.box);
        switch (status) {
            case RegionStatus::pruned_bound: ++stats_.pruned_bound; trace("prune_bound", r, parent); break;
            case RegionStatus::pruned_infeasible: ++stats_.pruned_infeasible; trace("prune_infeasible", r, parent); break;
            default: break;
        }
    }

    // Sorts an evaluated region into pruned, candidate or active.
    void place(Region r, std::uint64_t parent) {
        if (r.lower > incumbent_) {
            prune(r, RegionStatus::pruned_bound, parent);
        } else if (small_enough(r.box)) {
            r.status = RegionStatus::candidate;
            ++stats_.pruned_size;
            if (config_.track_measure) stats_.measure.candidate += volume(r.box);
            trace("prune_size", r, parent);
            candidates_.push_back(std::move(r));
        } else {
            if (config_.track_measure) stats_.measure.active += volume(r.box);
            trace("child", r, parent);
            const double nv = normalized_volume(r.box);
            heap_.push(Entry{std::move(r), nv});
            stats_.max_active = std::max(stats_.max_active, heap_.size());
        }
    }

    bool out_of_budget() const {
        if (stats_.iterations >= config_.max_iters) return true;
        if (config_.max_seconds > 0.0) {
            const double elapsed = std::chrono::duration<double>(Clock::now() - start_).count();
            if (elapsed > config_.max_seconds) return true;
        }
        return false;
    }

    const Objective& objective_;
    const BnbConfig& config_;
    std::array<bool, kNumParams> free_{};
    std::priority_queue<Entry, std::vector<Entry>, Worse> heap_;
    std::vector<Region> candidates_;
    double incumbent_ = std::numeric_limits<double>::infinity();
    Theta incumbent_theta_;
    bool incumbent_polished_ = false;
    double best_center_ = std::numeric_limits<double>::infinity();  // best value at a region center
    std::vector<ParamBox> cells_;
    bool started_ = false;  // initial centers all offered
    std::array<double, kNumParams> lower_{}, upper_{};
    std::uint64_t next_id_ = 0;
    BnbStats stats_;
    Clock::time_point start_;
};

BnbResult Solver::run(const std::vector<ParamBox>& cells, double sigma_max) {
    start_ = Clock::now();
    stats_.grid_count = grid_count(config_, sigma_max);
    write_trace_header();

    // Initial partition: the cells, with frozen axes collapsed.
    std::vector<Region> initial;
    for (const ParamBox& cell : cells) {
        ParamBox box = cell;
        bool keep = true;
        for (std::size_t i = 0; i < kNumParams && keep; ++i) {
            if (!config_.frozen[i]) continue;
            const double v = *config_.frozen[i];
            if (!cell[i].contains(v)) keep = false;
            box[i] = Interval(v);
        }
        if (!keep) continue;
        Region r;
        r.box = box;
        r.id = next_id_++;
        initial.push_back(r);
    }
    if (initial.empty()) throw std::invalid_argument("frozen values leave no cell of the relaxation");
    stats_.initial_regions = initial.size();
    lower_.fill(std::numeric_limits<double>::infinity());
    upper_.fill(-std::numeric_limits<double>::infinity());
    for (const Region& r : initial) {
        cells_.push_back(r.box);
        for (std::size_t i = 0; i < kNumParams; ++i) {
            lower_[i] = std::min(lower_[i], r.box[i].lo);
            upper_[i] = std::max(upper_[i], r.box[i].hi);
        }
    }

    parallel_for(initial.size(), config_.threads, [&](std::size_t i) {
        if (!infeasible(initial[i].box)) evaluate(initial[i]);
    });
    for (const Region& r : initial) {
        if (config_.track_measure) stats_.measure.initial += volume(r.box);
        if (infeasible(r.box)) continue;
        stats_.bound_evaluations++;
        stats_.objective_evaluations++;
        if (r.weak) stats_.weak_bounds++;
        offer_incumbent(r);
    }
    started_ = true;
    {
        // Several starts: the best initial centers.
        std::vector<const Region*> order;
        for (const Region& r : initial) {
            if (!infeasible(r.box) && std::isfinite(r.upper)) order.push_back(&r);
        }
        const std::size_t starts = std::min<std::size_t>(order.size(), kPolishStarts);
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(starts), order.end(),
                          [](const Region* a, const Region* b) { return a->upper < b->upper || (a->upper == b->upper && a->id < b->id); });
        for (std::size_t i = 0; i < starts; ++i) polish_from(region_center(order[i]->box), order[i]->upper);
    }
    for (Region& r : initial) {
        trace("init", r, r.id);
        if (infeasible(r.box)) {
            prune(r, RegionStatus::pruned_infeasible, r.id);
        } else {
            place(std::move(r), r.id);
        }
    }

    const std::size_t batch = config_.threads > 1 ? config_.batch : 1;
    std::vector<Region> parents;
    std::vector<Region> kids;
    while (!heap_.empty()) {
        if (out_of_budget()) {
            stats_.incomplete = true;
            break;
        }
        if (heap_.top().region.lower > incumbent_) {
            // Everything left is worse than the incumbent.
            while (!heap_.empty()) {
                Region r = heap_.top().region;
                heap_.pop();
                if (config_.track_measure) stats_.measure.active -= volume(r.box);
                prune(r, RegionStatus::pruned_bound, r.id);
            }
            break;
        }

        parents.clear();
        while (!heap_.empty() && parents.size() < batch && heap_.top().region.lower <= incumbent_) {
            parents.push_back(heap_.top().region);
            heap_.pop();
            if (config_.track_measure) stats_.measure.active -= volume(parents.back().box);
            ++stats_.iterations;
            trace("select", parents.back(), parents.back().id);
        }

        kids.clear();
        for (const Region& p : parents) {
            const std::size_t axis = longest_axis(p.box);
            const Interval& edge = p.box[axis];
            const double mid = edge.mid();
            Region a = p, b = p;
            a.box[axis] = Interval(edge.lo, mid);
            b.box[axis] = Interval(mid, edge.hi);
            a.id = next_id_++;
            b.id = next_id_++;
            a.status = b.status = RegionStatus::active;
            kids.push_back(std::move(a));
            kids.push_back(std::move(b));
        }

        parallel_for(kids.size(), config_.threads, [&](std::size_t i) {
            if (!infeasible(kids[i].box)) evaluate(kids[i], parents[i / 2].lower);
        });
        for (const Region& k : kids) {
            if (infeasible(k.box)) continue;
            stats_.bound_evaluations++;
            stats_.objective_evaluations++;
            if (k.weak) stats_.weak_bounds++;
            offer_incumbent(k);
        }
        for (std::size_t i = 0; i < kids.size(); ++i) {
            const std::uint64_t parent = parents[i / 2].id;
            if (infeasible(kids[i].box)) {
                prune(kids[i], RegionStatus::pruned_infeasible, parent);
            } else {
                place(std::move(kids[i]), parent);
            }
        }
        if (config_.track_measure) stats_.incumbent_history.push_back(incumbent_);
    }

    // Candidates are re-pruned against the final incumbent.
    std::vector<Region> kept;
    for (Region& c : candidates_) {
        if (c.lower > incumbent_) {
            if (config_.track_measure) stats_.measure.candidate -= volume(c.box);
            prune(c, RegionStatus::pruned_bound, c.id);
        } else {
            kept.push_back(std::move(c));
        }
    }

    BnbResult result;
    double certified = std::numeric_limits<double>::infinity();
    for (const Region& c : kept) certified = std::min(certified, c.lower);
    if (stats_.incomplete) {
        // Whatever is still active may hold the minimum too.
        auto rest = heap_;
        while (!rest.empty()) {
            certified = std::min(certified, rest.top().region.lower);
            rest.pop();
        }
    }
    result.lower_bound = std::isfinite(certified) ? std::min(certified, incumbent_) : incumbent_;
    result.incumbent = incumbent_;

    const auto best = std::min_element(kept.begin(), kept.end(), [](const Region& x, const Region& y) {
        if (x.upper != y.upper) return x.upper < y.upper;
        return x.id < y.id;
    });
    // A polished incumbent below every center value stands for its own region.
    const auto v = incumbent_theta_.to_array();
    const bool held = std::any_of(kept.begin(), kept.end(), [&](const Region& c) {
        for (std::size_t i = 0; i < kNumParams; ++i) {
            if (!c.box[i].contains(v[i])) return false;
        }
        return true;
    });
    const bool use_incumbent = best == kept.end() || (incumbent_ < best->upper &&
                                                      ((incumbent_polished_ && held) || stats_.incomplete));
    if (use_incumbent) {
        result.theta_hat = incumbent_theta_;
        result.objective = incumbent_;
    } else {
        result.theta_hat = region_center(best->box);
        result.objective = best->upper;
    }
    result.candidates = std::move(kept);
    stats_.wall_time = std::chrono::duration<double>(Clock::now() - start_).count();
    result.stats = std::move(stats_);
    return result;
}

}  // namespace

BnbResult solve_cells(const Objective& objective, const std::vector<ParamBox>& cells,
                      const BnbConfig& config) {
    config.validate();
    const double sigma_max = config.sigma_max > 0.0 ? config.sigma_max : objective.spectrum().sigma_max();
    Solver solver(objective, config);
    return solver.run(cells, sigma_max);
}

BnbResult solve(const Objective& objective, const BnbConfig& config) {
    config.validate();
    const double sigma_max = config.sigma_max > 0.0 ? config.sigma_max : objective.spectrum().sigma_max();
    if (!(sigma_max > 0.0)) throw std::invalid_argument("sigma_max unavailable: spectrum carries no increment variances");
    const Relaxation relax = build_relaxation(config.delta_relax, sigma_max);
    Solver solver(objective, config);
    return solver.run(relax.cells, sigma_max);
}

}  // namespace ofbm
