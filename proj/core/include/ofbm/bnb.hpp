#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ofbm/bound.hpp"
#include "ofbm/objective.hpp"
#include "ofbm/relaxation.hpp"

namespace ofbm {

struct BnbConfig {
    /// Target precision per axis, in parameter units.
    std::array<double, kNumParams> delta{0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02};
    int delta_relax = 50;            ///< relaxation grid count
    std::size_t max_iters = 2'000'000;
    double max_seconds = 0.0;        ///< wall-clock cap; 0 disables
    int threads = 1;
    std::size_t batch = 32;          ///< regions selected per step when threads > 1
    /// Axes fixed at a value; the search collapses them to points.
    std::array<std::optional<double>, kNumParams> frozen{};
    double sigma_max = 0.0;          ///< 0: taken from the spectrum
    std::ostream* trace = nullptr;   ///< region trace as CSV when set
    bool track_measure = false;      ///< keep the partition-volume ledger
    /// Lower the incumbent with a local least-squares descent from each new
    /// best center. Polished points stay inside the relaxation, so they are
    /// valid upper bounds; region uppers are still taken at centers.
    bool polish = true;
    std::size_t polish_budget = 64;  ///< polish runs per solve

    void set_delta(double d) { delta.fill(d); }
    void freeze(Param p, double v) { frozen[index(p)] = v; }
    /// Throws std::invalid_argument on a bad config.
    void validate() const;
};

enum class RegionStatus { active, pruned_bound, pruned_infeasible, pruned_size, candidate };

std::string_view to_string(RegionStatus s);

struct Region {
    ParamBox box;
    double lower = 0.0;
    double upper = 0.0;  ///< objective at the projected box center
    bool weak = false;
    RegionStatus status = RegionStatus::active;
    std::uint64_t id = 0;
};

/// Volumes (product of free-axis widths) by region fate.
struct MeasureLedger {
    double initial = 0.0;
    double active = 0.0;
    double pruned = 0.0;
    double candidate = 0.0;

    double accounted() const { return active + pruned + candidate; }
};

struct BnbStats {
    std::size_t iterations = 0;       ///< selections (each cut into two children)
    std::size_t bound_evaluations = 0;
    std::size_t objective_evaluations = 0;
    std::size_t initial_regions = 0;
    std::size_t pruned_bound = 0;
    std::size_t pruned_infeasible = 0;
    std::size_t pruned_size = 0;
    std::size_t weak_bounds = 0;
    std::size_t polish_runs = 0;
    std::size_t polish_improvements = 0;
    std::size_t max_active = 0;
    double grid_count = 0.0;          ///< exhaustive grid size at the same precision
    double wall_time = 0.0;           ///< seconds
    bool incomplete = false;
    MeasureLedger measure;
    /// Incumbent after each iteration; filled only with track_measure.
    std::vector<double> incumbent_history;
};

struct BnbResult {
    Theta theta_hat;
    double objective = 0.0;       ///< objective at theta_hat
    double incumbent = 0.0;       ///< smallest upper bound seen
    double lower_bound = 0.0;     ///< certified lower bound of the global minimum
    std::vector<Region> candidates;
    BnbStats stats;
};

/// Projected center of a box: midpoints with h1 <= h2 restored.
Theta region_center(const ParamBox& box);

/// Exhaustive grid size prod(range / delta) over the free axes.
double grid_count(const BnbConfig& config, double sigma_max);

/// Best-first branch and bound over the inner relaxation.
BnbResult solve(const Objective& objective, const BnbConfig& config);

/// Same search started from explicit cells instead of a fresh relaxation.
BnbResult solve_cells(const Objective& objective, const std::vector<ParamBox>& cells,
                      const BnbConfig& config);

}  // namespace ofbm
