#include <cmath>
#include <random>

#include "doctest.h"
#include "ofbm/eta.hpp"
#include "ofbm/model.hpp"
#include "support.hpp"

using namespace ofbm;

TEST_SUITE("core-model") {

TEST_CASE("g condition against high-precision values") {
    // mpmath, 40 digits
    CHECK(g_condition(0.4, 0.8, 0.0) == doctest::Approx(0.7443474025139523624).epsilon(1e-12));
    CHECK(g_condition(0.4, 0.8, 0.8) == doctest::Approx(0.041598582918540136632).epsilon(1e-11));
    CHECK(g_condition(0.4, 0.8, 0.0) > 0.0);
    for (double h : {0.1, 0.35, 0.5, 0.77, 0.95}) CHECK(std::abs(g_condition(h, h, 1.0)) < 1e-12);
    CHECK_THROWS_AS(g_condition(0.0, 0.5, 0.1), std::domain_error);
    CHECK_THROWS_AS(g_condition(0.3, 1.2, 0.1), std::domain_error);
}

TEST_CASE("maximal feasible correlation") {
    CHECK(max_feasible_rho(0.4, 0.8) == doctest::Approx(0.82333724748995909093).epsilon(1e-12));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.02, 0.98);
    for (int i = 0; i < 500; ++i) {
        const double h1 = u(rng), h2 = u(rng);
        const double r = max_feasible_rho(h1, h2);
        CHECK(std::abs(g_condition(h1, h2, r)) < 1e-10);
        double prev = g_condition(h1, h2, 0.0);
        for (int k = 1; k <= 10; ++k) {
            const double g = g_condition(h1, h2, 0.1 * k);
            CHECK(g < prev);
            prev = g;
        }
        CHECK(g_condition(h1, h2, 0.999 * r) > 0.0);
    }
}

TEST_CASE("feasibility checks") {
    CHECK(is_feasible(Theta{0.4, 0.8, 0.1, 1, 1, 0.5, 0.5}));
    CHECK_FALSE(is_feasible(Theta{0.8, 0.4, 0.1, 1, 1, 0.5, 0.5}));
    CHECK_FALSE(is_feasible(Theta{0.4, 0.8, -0.1, 1, 1, 0.5, 0.5}));
    CHECK_FALSE(is_feasible(Theta{0.4, 0.8, 0.9, 1, 1, 0.5, 0.5}));
    CHECK_FALSE(is_feasible(Theta{0.4, 0.8, 0.1, 0, 1, 0.5, 0.5}));
    CHECK_FALSE(is_feasible(Theta{0.4, 0.8, 0.1, 1, 1, 1.5, 0.5}));
    CHECK_THROWS_AS(require_feasible(Theta{0.4, 0.8, 0.9, 1, 1, 0, 0}), std::domain_error);
}

TEST_CASE("mixing matrix") {
    const auto id = build_mixing(0.0, 0.0);
    CHECK(id.w.a11 == 1.0);
    CHECK(id.w.a12 == 0.0);
    CHECK(id.w.a21 == 0.0);
    CHECK(id.w.a22 == 1.0);
    CHECK_FALSE(id.singular);

    const auto m = build_mixing(0.5, 0.5);
    CHECK(m.w.a11 == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-15));
    CHECK(m.w.a12 == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-15));
    CHECK(m.w.a21 == doctest::Approx(-1.0 / std::sqrt(5.0)).epsilon(1e-15));
    CHECK(m.w.a22 == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-15));
    CHECK(std::round(m.w.a11 * 1e4) / 1e4 == 0.8944);

    const auto s = build_mixing(1.0, -1.0);
    CHECK(s.singular);
    CHECK(s.w.a11 == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(s.w.a12 == doctest::Approx(s.w.a11));
    CHECK(s.w.a21 == doctest::Approx(s.w.a22));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const auto w = build_mixing(u(rng), u(rng)).w;
        CHECK(std::hypot(w.a11, w.a21) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::hypot(w.a12, w.a22) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(w.a11 > 0.0);
        CHECK(w.a22 > 0.0);
    }
}

TEST_CASE("increment covariance") {
    const Sym2 unit = increment_covariance(Theta{0.3, 0.7, 0.0, 1, 1, 0, 0}, 0);
    CHECK(unit.s11 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(unit.s22 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(unit.s12) < 1e-15);

    const Sym2 c = increment_covariance(Theta{0.4, 0.8, 0.3, 1.3, 0.7, 0, 0}, 0);
    CHECK(c.s12 == doctest::Approx(1.3 * 0.7 * 0.3).epsilon(1e-13));

    // Four-term kernel expansion, mpmath 30 digits
    const Theta t{0.4, 0.8, 0.3, 1.3, 0.7, 0.2, -0.4};
    const Sym2 l0 = increment_covariance(t, 0);
    CHECK(l0.s11 == doctest::Approx(1.5751634416298316).epsilon(1e-13));
    CHECK(l0.s12 == doctest::Approx(0.94542537728118203).epsilon(1e-13));
    CHECK(l0.s22 == doctest::Approx(0.90309876654878795).epsilon(1e-13));
    const Sym2 l5 = increment_covariance(t, 5);
    CHECK(l5.s11 == doctest::Approx(-0.0089771015681057331).epsilon(1e-11));
    CHECK(l5.s12 == doctest::Approx(0.025918453486412645).epsilon(1e-12));
    CHECK(l5.s22 == doctest::Approx(0.12291308656389952).epsilon(1e-12));
}

TEST_CASE("model spectrum without mixing or correlation is diagonal") {
    const auto eta = shared_eta_set(2, EtaModel::continuous);
    const Theta t{0.3, 0.7, 0.0, 1.5, 0.6, 0.0, 0.0};
    for (int j = 1; j <= 10; ++j) {
        const Sym2 e = model_spectrum_at(t, j, *eta);
        CHECK(e.s12 == 0.0);
        CHECK(e.s11 == doctest::Approx(1.5 * 1.5 * (*eta)(0.3, j) * std::exp2(j * 1.6)).epsilon(1e-13));
        CHECK(e.s22 == doctest::Approx(0.6 * 0.6 * (*eta)(0.7, j) * std::exp2(j * 2.4)).epsilon(1e-13));
    }
}

TEST_CASE("pure power law: log2 E11 affine in j") {
    const auto eta = shared_eta_set(2, EtaModel::continuous);
    const Theta t{0.35, 0.6, 0.0, 1.0, 1.0, 0.0, 0.0};
    const auto m = model_spectrum(t, 1, 12, *eta);
    for (int j = 2; j <= 12; ++j) {
        CHECK(std::log2(m.at(j).s11) - std::log2(m.at(j - 1).s11) == doctest::Approx(1.7).epsilon(1e-12));
    }
}

TEST_CASE("model spectrum symmetry, positivity and sign-flip invariance") {
    const auto eta = shared_eta_set();
    std::mt19937_64 rng(5);
    for (int i = 0; i < 300; ++i) {
        const Theta t = test::random_feasible_theta(rng);
        const Theta f = sign_flipped(t);
        for (int j = 1; j <= 11; ++j) {
            const Sym2 a = model_spectrum_at(t, j, *eta);
            const Sym2 b = model_spectrum_at(f, j, *eta);
            CHECK(a.s11 > 0.0);
            CHECK(a.s22 > 0.0);
            CHECK(b.s11 == doctest::Approx(a.s11).epsilon(1e-13));
            CHECK(b.s22 == doctest::Approx(a.s22).epsilon(1e-13));
            CHECK(std::abs(b.s12) == doctest::Approx(std::abs(a.s12)).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(model_spectrum(Theta{0.4, 0.8, 0.95, 1, 1, 0, 0}, 1, 5, *eta), std::domain_error);
    CHECK_THROWS_AS(model_spectrum(Theta{0.4, 0.8, 0.1, 1, 1, 0, 0}, 5, 1, *eta), std::invalid_argument);
}

TEST_CASE("continuous eta: cap, breakpoint, frozen value") {
    const auto eta = shared_eta_set(2, EtaModel::continuous);
    const EtaTable& t = eta->table(1);
    double mx = 0.0;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
        CHECK(t.values()[i] > 0.0);
        mx = std::max(mx, t.values()[i]);
        const double h = t.node(i);
        if (h < 0.29) CHECK(t.values()[i] > t.values()[i - 1]);
        if (h > 0.31) CHECK(t.values()[i] < t.values()[i - 1]);
    }
    CHECK(mx <= 0.071);
    CHECK(t.unimodal());
    CHECK(t.peak_h() == doctest::Approx(0.3).epsilon(0.05));
    // numpy cascade at depth 12, trapezoid
    CHECK((*eta)(0.5, 1) == doctest::Approx(0.059166671633727824).epsilon(1e-5));
    CHECK((*eta)(0.8, 1) == doctest::Approx(0.025253340112574067).epsilon(1e-5));
    // no jumps; the steepest rise is out of eta(0) = 0
    for (std::size_t i = 1; i < t.size(); ++i) {
        CHECK(std::abs(t.values()[i] - t.values()[i - 1]) < 2.0 * t.step());
    }
}

TEST_CASE("sampled eta at the first octave") {
    const auto eta = shared_eta_set(2, EtaModel::sampled);
    // -1/2 2^{-(2h+1)} sum g g |n-m|^{2h}, numpy
    CHECK((*eta)(0.5, 1) == doctest::Approx(0.09375).epsilon(1e-12));
    CHECK((*eta)(0.4, 1) == doctest::Approx(0.118311897820752).epsilon(1e-5));
    CHECK((*eta)(0.8, 1) == doctest::Approx(0.03299237650938515).epsilon(1e-5));
    // Converges to the continuous constant at coarse octaves.
    const auto cont = shared_eta_set(2, EtaModel::continuous);
    CHECK((*eta)(0.5, 12) == doctest::Approx((*cont)(0.5, 1)).epsilon(1e-5));
}

}
