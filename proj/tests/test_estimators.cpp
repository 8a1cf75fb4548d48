#include <cmath>
#include <random>

#include "doctest.h"
#include "ofbm/estimators.hpp"
#include "ofbm/model.hpp"
#include "support.hpp"

using namespace ofbm;

namespace {

/// Power-law spectrum 2^(a j), 2^(b j) with cross entry `c` times the geometric mean.
SampleSpectrum power_spectrum(double a, double b, double c, int j2 = 10) {
    SampleSpectrum s;
    s.n = 1 << 14;
    for (int j = 1; j <= j2; ++j) {
        SpectrumOctave o;
        o.j = j;
        o.count = s.n >> j;
        o.s.s11 = std::exp2(a * j);
        o.s.s22 = std::exp2(b * j);
        o.s.s12 = c * std::sqrt(o.s.s11 * o.s.s22);
        s.octaves.push_back(o);
    }
    s.increment_var1 = s.increment_var2 = 1.0;
    return s;
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("objective vanishes at the generating parameters of a model spectrum") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 20; ++i) {
        const Theta t = test::random_feasible_theta(rng);
        const Objective c(test::noiseless_spectrum(t, 1 << 14), shared_eta_set());
        CHECK(c(t) < 1e-20);
        Theta off = t;
        off.h2 = std::min(0.99, t.h2 + 0.05);
        CHECK(c(off) > 1e-4);
    }
}

TEST_CASE("objective is invariant under the sign flip") {
    std::mt19937_64 rng(32);
    const Objective c(test::synthesized_spectrum(Theta{0.4, 0.8, 0.3, 1, 1, 0.5, 0.5}, 1 << 12, 4), shared_eta_set());
    for (int i = 0; i < 1000; ++i) {
        const Theta t = test::random_feasible_theta(rng);
        const double a = c(t), b = c(sign_flipped(t));
        CHECK(std::abs(a - b) <= 1e-12 * std::max(a, 1e-300));
    }
}

TEST_CASE("objective at the truth shrinks with N") {
    const Theta t{0.4, 0.8, 0.1, 1, 1, 0.5, 0.5};
    auto average = [&](std::size_t n) {
        const Synthesizer s(t, n);
        double acc = 0.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            acc += Objective(analyze(s.sample(seed), AnalysisConfig{}), shared_eta_set())(t);
        }
        return acc / 10;
    };
    CHECK(average(1 << 16) < average(1 << 12));
}

TEST_CASE("cross terms with a vanishing S12 are dropped") {
    const SampleSpectrum s = power_spectrum(2.0, 2.4, 0.0, 6);
    const Objective c(s, shared_eta_set());
    CHECK(c.dropped() == 6);
    const Theta t{0.4, 0.7, 0.1, 1, 1, 0.2, 0.1};
    for (const auto& term : c.terms(t)) CHECK(term[1] == 0.0);
    CHECK(c.residuals(t).size() == 12);
    CHECK(objective_cn(t, s, *shared_eta_set()) == doctest::Approx(c(t)));
}

TEST_CASE("univariate regression on exact power laws") {
    const SampleSpectrum s = power_spectrum(2.2, 2.6, 0.3);
    for (bool weighted : {false, true}) {
        const EstimationResult r = estimate_univariate(s, {weighted});
        CHECK(r.method == Method::univariate);
        CHECK(r.theta_hat.h1 == doctest::Approx(0.6).epsilon(1e-12));
        CHECK(r.theta_hat.h2 == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(r.estimated[0]);
        CHECK(r.estimated[1]);
        CHECK_FALSE(r.estimated[2]);
    }
    CHECK_THROWS_AS(estimate_univariate(power_spectrum(2, 2, 0, 2)), std::invalid_argument);
    CHECK_THROWS_AS(estimate_univariate(SampleSpectrum{}), std::invalid_argument);
}

TEST_CASE("mixing biases the univariate fine-scale exponent upward") {
    const Theta unmixed{0.4, 0.8, 0.1, 1, 1, 0, 0};
    Theta mixed = unmixed;
    mixed.beta = mixed.gamma = 0.5;
    // continuous eta: exact power laws without mixing
    const auto spectrum = [](const Theta& t) { return test::noiseless_spectrum(t, 1 << 14, EtaModel::continuous); };
    const double clean = estimate_univariate(spectrum(unmixed)).theta_hat.h1;
    const double biased = estimate_univariate(spectrum(mixed)).theta_hat.h1;
    CHECK(std::abs(clean - 0.4) < 1e-6);
    CHECK(biased - 0.4 > 0.05);
}

TEST_CASE("eigenvalue regression on a diagonal spectrum") {
    const SampleSpectrum s = power_spectrum(2.2, 2.6, 0.0);
    const EstimationResult r = estimate_eigen(s);
    CHECK(r.theta_hat.h1 == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(r.theta_hat.h2 == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(r.theta_hat.beta == doctest::Approx(0.0));
    CHECK(r.estimated[index(Param::beta)]);
    CHECK(r.note.find("octave 10") != std::string::npos);
    CHECK_THROWS_AS(estimate_eigen(power_spectrum(2, 2, 0, 2)), std::invalid_argument);
}

TEST_CASE("M-estimator on a restricted noiseless problem") {
    const Theta t{0.35, 0.75, 0.2, 1, 1, 0.3, 0.1};
    BnbConfig c;
    c.set_delta(0.01);
    c.delta_relax = 20;
    const auto v = t.to_array();
    for (std::size_t i = 2; i < kNumParams; ++i) c.frozen[i] = v[i];
    const EstimationResult r = estimate_m(test::noiseless_spectrum(t, 1 << 14), c);
    CHECK(r.method == Method::m_bb);
    CHECK_FALSE(r.incomplete);
    CHECK(r.estimated[0]);
    CHECK(r.estimated[1]);
    CHECK_FALSE(r.estimated[2]);
    CHECK(std::abs(r.theta_hat.h1 - t.h1) <= 0.01);
    CHECK(std::abs(r.theta_hat.h2 - t.h2) <= 0.01);
    CHECK(r.lower_bound <= r.objective_value);
    CHECK(r.grid_count == doctest::Approx(10000.0));
}

TEST_CASE("line fit and method names") {
    const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9}, w{1, 1, 1, 10};
    const LineFit f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(fit_line(x, y, w).slope == doctest::Approx(2.0));
    CHECK_THROWS_AS(fit_line(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
    CHECK_THROWS_AS(fit_line(std::vector<double>{1, 1}, std::vector<double>{1, 2}), std::invalid_argument);
    CHECK(parse_method("m") == Method::m_bb);
    CHECK(parse_method("uni") == Method::univariate);
    CHECK(parse_method("eigenvalue") == Method::eigenvalue);
    CHECK(parse_method(to_string(Method::m_bb)) == Method::m_bb);
    CHECK_THROWS_AS(parse_method("nope"), std::invalid_argument);
    CHECK(short_name(Method::eigenvalue) == "eig");
}

}
