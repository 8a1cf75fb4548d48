#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "ofbm/experiment.hpp"
#include "ofbm/io.hpp"
#include "ofbm/model.hpp"
#include "support.hpp"

using namespace ofbm;

namespace {

ExperimentPlan tiny_plan() {
    std::istringstream in(
        "# small plan\n"
        "thetas = 0.4,0.8,0.1,1,1,0.5,0.5\n"
        "n = 1024\n"
        "replications = 3\n"
        "methods = m, uni, eig\n"
        "delta = 0.05\n"
        "freeze = rho, sigma1, sigma2, beta, gamma\n");
    return parse_plan(in);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("study grid") {
    const auto grid = study_theta_grid();
    CHECK(grid.size() == 9);
    for (const Theta& t : grid) {
        CHECK(is_feasible(t));
        CHECK(t.h1 == 0.4);
        CHECK(t.h2 == 0.8);
    }
}

TEST_CASE("plans round-trip through their text form") {
    const ExperimentPlan p = tiny_plan();
    CHECK(p.theta_grid.size() == 1);
    CHECK(p.replications == 3);
    CHECK(p.bnb.delta[3] == 0.05);
    CHECK(p.freeze_true[index(Param::rho)]);
    CHECK_FALSE(p.freeze_true[index(Param::h1)]);
    std::istringstream again(format_plan(p));
    CHECK(format_plan(parse_plan(again)) == format_plan(p));

    ExperimentPlan q;
    CHECK_THROWS_AS(apply_setting(q, "bogus", "1"), std::invalid_argument);
    apply_setting(q, "n", "1000");
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
    q = ExperimentPlan{};
    apply_setting(q, "replications", "0");
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}

TEST_CASE("Monte Carlo runs are reproducible") {
    ExperimentPlan p = tiny_plan();
    const McOutput a = run_mc(p);
    p.threads = 2;
    const McOutput b = run_mc(p);
    CHECK(a.runs.size() == 9);
    CHECK(a.summary.failures == 0);
    std::ostringstream ra, rb, sa, sb;
    write_runs_csv(a.runs, ra);
    write_runs_csv(b.runs, rb);
    write_summary_csv(a.summary, sa);
    write_summary_csv(summarize(a.runs), sb);
    // wall time differs between runs; compare everything else
    auto strip = [](std::vector<RunRecord> runs) {
        for (auto& r : runs) r.result.wall_time = 0.0;
        std::ostringstream o;
        write_runs_csv(runs, o);
        return o.str();
    };
    CHECK(strip(a.runs) == strip(b.runs));
    CHECK(sa.str() == sb.str());
    for (std::size_t i = 1; i < a.runs.size(); ++i) {
        const auto& x = a.runs[i - 1];
        const auto& y = a.runs[i];
        CHECK((x.seed < y.seed || (x.seed == y.seed && x.method < y.method)));
    }
    for (const RunRecord& r : a.runs) {
        if (r.method != Method::m_bb) continue;
        CHECK(r.result.theta_hat.rho == 0.1);
        CHECK(r.result.theta_hat.beta == 0.5);
    }
}

TEST_CASE("failures are recorded and the cell continues") {
    ExperimentPlan p = tiny_plan();
    apply_setting(p, "methods", "eig, uni");
    apply_setting(p, "j2", "2");
    const McOutput out = run_mc(p);
    CHECK(out.runs.size() == 6);
    CHECK(out.summary.failures == 6);
    for (const RunRecord& r : out.runs) {
        CHECK_FALSE(r.ok);
        CHECK_FALSE(r.error.empty());
    }
}

}
