#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ofbm/estimators.hpp"
#include "ofbm/normality.hpp"

namespace ofbm {

/// The nine settings of the simulation study: rho in {0.1, 0.45, 0.8} crossed
/// with no, orthogonal (beta = gamma = 0.5) and anti-orthogonal
/// (beta = -gamma = 0.5) mixing, h = (0.4, 0.8), sigma = (1, 1).
std::vector<Theta> study_theta_grid();

struct ExperimentPlan {
    std::vector<Theta> theta_grid = study_theta_grid();
    std::vector<std::size_t> n_list{std::size_t{1} << 14};
    std::size_t replications = 50;
    std::vector<Method> methods{Method::m_bb, Method::univariate, Method::eigenvalue};
    std::uint64_t seed_base = 1;
    int threads = 1;
    AnalysisConfig analysis;
    EtaModel eta_model = EtaModel::sampled;
    RegressionOptions regression;
    BnbConfig bnb = desk_bnb();
    /// Axes held at their true value in every run (restricted problems).
    std::array<bool, kNumParams> freeze_true{};

    /// delta 0.02 and a 20-cell relaxation grid.
    static BnbConfig desk_bnb();
    /// Throws std::invalid_argument when the plan cannot run.
    void validate() const;
};

/// Reads `key = value` lines; '#' starts a comment. Unknown keys throw.
///
/// Keys: thetas (`study` or `h1,h2,rho,s1,s2,b,g; ...`), n (list), replications,
/// methods (m,uni,eig), seed_base, threads, n_psi, j1, j2, boundary, eta_model,
/// weighted, delta (one value or seven), delta_relax, max_iters, max_seconds,
/// polish, freeze (axis names held at truth).
ExperimentPlan parse_plan(std::istream& in, ExperimentPlan base = {});
/// Applies one `key=value` setting.
void apply_setting(ExperimentPlan& plan, const std::string& key, const std::string& value);
/// Resolved plan in the same key-value syntax.
std::string format_plan(const ExperimentPlan& plan);

struct RunRecord {
    std::size_t theta_index = 0;
    Theta theta_true;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    Method method = Method::m_bb;
    bool ok = false;
    std::string error;
    EstimationResult result;
};

struct CoordinateSummary {
    std::size_t theta_index = 0;
    std::size_t n = 0;
    Method method = Method::m_bb;
    std::size_t axis = 0;
    std::size_t count = 0;
    Quartiles q;
    double mean = 0.0;
    double sd = 0.0;
    double bias = 0.0;
    std::optional<double> kl;  ///< with at least 100 samples
};

struct CostSummary {
    std::size_t theta_index = 0;
    std::size_t n = 0;
    Method method = Method::m_bb;
    std::size_t runs = 0;
    std::size_t failures = 0;
    std::size_t incomplete = 0;
    double mean_iterations = 0.0;
    double mean_wall_time = 0.0;
    /// Mean of iterations / grid count, in percent.
    double mean_iteration_percent = 0.0;
};

struct McSummary {
    std::vector<CoordinateSummary> coordinates;
    std::vector<CostSummary> costs;
    std::size_t failures = 0;
};

/// Aggregates per-run records; depends only on the records.
McSummary summarize(const std::vector<RunRecord>& runs);

struct McOutput {
    std::vector<RunRecord> runs;  ///< sorted by (theta, n, seed, method)
    McSummary summary;
};

/// Synthesize, analyze and estimate every (theta, n, replication) cell.
/// Replication r uses seed seed_base + r; a failed run is recorded and the
/// cell continues.
McOutput run_mc(const ExperimentPlan& plan);

/// The estimate of one method on one path, with the plan's settings.
RunRecord run_one(const ExperimentPlan& plan, const Path& path, std::size_t theta_index, Method method);

}  // namespace ofbm
