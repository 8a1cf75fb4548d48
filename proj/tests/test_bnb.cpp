#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "ofbm/bnb.hpp"
#include "ofbm/model.hpp"
#include "ofbm/relaxation.hpp"
#include "support.hpp"

using namespace ofbm;

namespace {

BnbConfig restricted(const Theta& t, std::initializer_list<Param> free_axes, double delta) {
    BnbConfig c;
    c.set_delta(delta);
    c.delta_relax = 20;
    const auto v = t.to_array();
    for (std::size_t i = 0; i < kNumParams; ++i) c.frozen[i] = v[i];
    for (Param p : free_axes) c.frozen[index(p)].reset();
    return c;
}

}  // namespace

TEST_SUITE("bnb") {

TEST_CASE("relaxation: corner square of the coarsest grid") {
    const Relaxation r = build_relaxation(2, 1.0);
    CHECK(r.cells.size() == 3);
    bool seen = false;
    for (const ParamBox& c : r.cells) {
        if (c[Param::h1].lo == 0.0 && c[Param::h1].hi == 0.5 && c[Param::h2].lo == 0.5 && c[Param::h2].hi == 1.0) {
            seen = true;
            // minimum over a 100x grid of the square's interior nodes
            CHECK(c[Param::rho].lo == 0.0);
            CHECK(c[Param::rho].hi >= 0.0);
            CHECK(c[Param::rho].hi <= 0.0220486433835452);
        }
        CHECK(c[Param::sigma1].lo == 0.0);
        CHECK(c[Param::sigma1].hi == 1.0);
        CHECK(c[Param::beta].lo == -1.0);
        CHECK(c[Param::gamma].hi == 1.0);
    }
    CHECK(seen);
}

TEST_CASE("relaxation: interior square is tight") {
    const Relaxation r = build_relaxation(4, 1.0);
    for (const ParamBox& c : r.cells) {
        if (c[Param::h1].lo == 0.25 && c[Param::h2].lo == 0.5) {
            // mpmath on a 100x grid: 0.76749503095986637
            CHECK(c[Param::rho].hi <= 0.76749503095986637);
            CHECK(c[Param::rho].hi >= 0.76749503095986637 - 1e-4);
        }
    }
}

TEST_CASE("relaxation: inner approximation and coverage") {
    for (int grid : {5, 10, 20}) {
        const Relaxation r = build_relaxation(grid, 2.0);
        CHECK(r.cells.size() == static_cast<std::size_t>(grid * (grid + 1) / 2));
        std::mt19937_64 rng(static_cast<std::uint64_t>(grid));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        int bad = 0;
        for (const ParamBox& c : r.cells) {
            for (int k = 0; k < 2000; ++k) {
                const double h1 = c[Param::h1].lo + u(rng) * c[Param::h1].width();
                const double h2 = c[Param::h2].lo + u(rng) * c[Param::h2].width();
                const double rho = u(rng) * c[Param::rho].hi;
                if (h1 <= 0.0 || h2 >= 1.0 || h1 > h2) continue;
                if (!(g_condition(h1, h2, rho) > 0.0)) ++bad;
            }
        }
        CHECK(bad == 0);
        for (std::size_t a = 0; a < r.cells.size(); ++a) {
            for (std::size_t b = a + 1; b < r.cells.size(); ++b) {
                const auto& x = r.cells[a];
                const auto& y = r.cells[b];
                const bool overlap = x[Param::h1].lo < y[Param::h1].hi && y[Param::h1].lo < x[Param::h1].hi &&
                                     x[Param::h2].lo < y[Param::h2].hi && y[Param::h2].lo < x[Param::h2].hi;
                CHECK_FALSE(overlap);
            }
        }
    }
    for (int grid : {10, 20, 50}) {
        CHECK(relaxation_contains(build_relaxation(grid, 2.0), Theta{0.4, 0.8, 0.1, 1, 1, 0.5, 0.5}));
    }
    CHECK_THROWS_AS(build_relaxation(1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_relaxation(10, 0.0), std::invalid_argument);
}

TEST_CASE("noiseless restricted problems recover the truth") {
    const Theta t{0.4, 0.8, 0.1, 1, 1, 0.5, 0.5};
    const Objective c(test::noiseless_spectrum(t, 1 << 14), shared_eta_set());
    const BnbResult r = solve(c, restricted(t, {Param::h1, Param::h2, Param::rho}, 0.01));
    CHECK_FALSE(r.stats.incomplete);
    CHECK(std::abs(r.theta_hat.h1 - t.h1) <= 0.01);
    CHECK(std::abs(r.theta_hat.h2 - t.h2) <= 0.01);
    CHECK(std::abs(r.theta_hat.rho - t.rho) <= 0.01);
    CHECK(r.lower_bound <= r.objective);

    const BnbResult m = solve(c, restricted(t, {Param::sigma1, Param::sigma2, Param::beta, Param::gamma}, 0.02));
    CHECK(std::abs(m.theta_hat.sigma1 - 1.0) <= 0.02);
    CHECK(std::abs(m.theta_hat.sigma2 - 1.0) <= 0.02);
    CHECK(std::abs(m.theta_hat.beta - 0.5) <= 0.02);
    CHECK(std::abs(m.theta_hat.gamma - 0.5) <= 0.02);
}

TEST_CASE("two-parameter problem matches exhaustive search over the same cells") {
    const Theta t{0.4, 0.8, 0.8, 1, 1, 0.5, 0.5};
    const SampleSpectrum s = test::synthesized_spectrum(t, 1 << 12, 77);
    const Objective c(s, shared_eta_set());
    BnbConfig cfg = restricted(t, {Param::h1, Param::h2}, 0.02);
    cfg.polish = false;
    const BnbResult r = solve(c, cfg);

    // Each relaxation square splits into 4x4 leaves of side 1/80 <= 0.02.
    const Relaxation relax = build_relaxation(cfg.delta_relax, s.sigma_max());
    double best = INFINITY;
    Theta arg;
    for (const ParamBox& cell : relax.cells) {
        if (!cell[Param::rho].contains(t.rho)) continue;
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                ParamBox leaf = ParamBox::point(t);
                const double w = cell[Param::h1].width() / 4;
                leaf[Param::h1] = Interval(cell[Param::h1].lo + a * w, cell[Param::h1].lo + (a + 1) * w);
                leaf[Param::h2] = Interval(cell[Param::h2].lo + b * w, cell[Param::h2].lo + (b + 1) * w);
                if (leaf[Param::h1].lo >= leaf[Param::h2].hi) continue;
                const Theta center = region_center(leaf);
                const double v = c(center);
                if (v < best) {
                    best = v;
                    arg = center;
                }
            }
        }
    }
    CHECK(r.objective == doctest::Approx(best).epsilon(1e-9));
    CHECK(r.theta_hat.h1 == doctest::Approx(arg.h1).epsilon(1e-12));
    CHECK(r.theta_hat.h2 == doctest::Approx(arg.h2).epsilon(1e-12));
}

TEST_CASE("solver invariants") {
    const Theta t{0.3, 0.75, 0.4, 1.1, 0.9, 0.3, -0.2};
    const SampleSpectrum s = test::synthesized_spectrum(t, 1 << 12, 12);
    const Objective c(s, shared_eta_set());
    BnbConfig cfg = restricted(t, {Param::h1, Param::h2, Param::rho}, 0.02);
    cfg.track_measure = true;
    const BnbResult r = solve(c, cfg);
    CHECK_FALSE(r.stats.incomplete);

    // Partition integrity.
    CHECK(r.stats.measure.accounted() == doctest::Approx(r.stats.measure.initial).epsilon(1e-9));
    CHECK(r.stats.measure.active == doctest::Approx(0.0).epsilon(1e-12));
    // Monotone incumbent.
    const auto& h = r.stats.incumbent_history;
    for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i] <= h[i - 1]);
    // Candidates: small, with ordered bounds.
    for (const Region& g : r.candidates) {
        CHECK(g.lower <= g.upper);
        CHECK(g.status == RegionStatus::candidate);
        for (std::size_t i = 0; i < kNumParams; ++i) CHECK(g.box[i].width() <= cfg.delta[i]);
    }
    // Certificate: no feasible point is below the certified bound.
    CHECK(r.lower_bound <= r.objective);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Relaxation relax = build_relaxation(cfg.delta_relax, s.sigma_max());
    for (int k = 0; k < 3000; ++k) {
        Theta p = t;
        p.h1 = u(rng);
        p.h2 = u(rng);
        if (p.h1 > p.h2 || p.h1 <= 0.0 || p.h2 >= 1.0 || !relaxation_contains(relax, p)) continue;
        CHECK(c(p) >= r.lower_bound);
    }
    // Determinism.
    cfg.track_measure = false;
    const BnbResult again = solve(c, cfg);
    const BnbResult once = solve(c, cfg);
    CHECK(again.theta_hat == once.theta_hat);
    CHECK(again.stats.iterations == once.stats.iterations);
    CHECK(again.candidates.size() == once.candidates.size());
    // Workers reach the same certified minimum.
    cfg.threads = 3;
    cfg.batch = 4;
    const BnbResult par = solve(c, cfg);
    CHECK(par.objective == doctest::Approx(once.objective).epsilon(1e-9));
}

TEST_CASE("iteration cap returns a flagged best-so-far estimate") {
    const Theta t{0.4, 0.8, 0.1, 1, 1, 0.5, 0.5};
    const Objective c(test::synthesized_spectrum(t, 1 << 12, 3), shared_eta_set());
    BnbConfig cfg;
    cfg.delta_relax = 10;
    cfg.max_iters = 50;
    const BnbResult r = solve(c, cfg);
    CHECK(r.stats.incomplete);
    CHECK(r.stats.iterations == 50);
    CHECK(std::isfinite(r.objective));
    CHECK(r.objective == doctest::Approx(c(r.theta_hat)).epsilon(1e-12));
    CHECK(is_feasible(r.theta_hat));
}

TEST_CASE("trace and grid count") {
    const Theta t{0.4, 0.8, 0.1, 1, 1, 0.5, 0.5};
    const Objective c(test::noiseless_spectrum(t, 1 << 12), shared_eta_set());
    std::ostringstream trace;
    BnbConfig cfg = restricted(t, {Param::h1, Param::h2}, 0.02);
    cfg.trace = &trace;
    const BnbResult r = solve(c, cfg);
    CHECK(r.stats.grid_count == doctest::Approx(2500.0));
    CHECK(trace.str().rfind("iteration,event,id,parent,lower,upper,incumbent", 0) == 0);
    CHECK(trace.str().find("prune_size") != std::string::npos);

    BnbConfig all;
    all.set_delta(0.02);
    CHECK(grid_count(all, 2.0) == doctest::Approx(50.0 * 50 * 50 * 100 * 100 * 100 * 100));
}

TEST_CASE("config validation") {
    BnbConfig c;
    c.delta[2] = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = BnbConfig{};
    c.delta_relax = 1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = BnbConfig{};
    c.freeze(Param::rho, 0.99);
    c.freeze(Param::h1, 0.1);
    c.freeze(Param::h2, 0.9);
    const Objective o(test::noiseless_spectrum(Theta{0.4, 0.8, 0.1, 1, 1, 0, 0}, 1 << 12), shared_eta_set());
    CHECK_THROWS_AS(solve(o, c), std::invalid_argument);
}

}
