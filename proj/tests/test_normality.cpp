#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ofbm/normality.hpp"

using namespace ofbm;

TEST_SUITE("estimators") {

TEST_CASE("quantiles follow linear interpolation") {
    const std::vector<double> x{4, 1, 3, 2};
    CHECK(quantile(x, 0.25) == doctest::Approx(1.75));
    CHECK(quantile(x, 0.5) == doctest::Approx(2.5));
    CHECK(quantile(x, 1.0) == 4.0);
    const Quartiles q = quartiles(x);
    CHECK(q.q25 <= q.q50);
    CHECK(q.q50 <= q.q75);
    CHECK(mean(x) == doctest::Approx(2.5));
    CHECK(stddev(x) == doctest::Approx(std::sqrt(5.0 / 3.0)));
}

TEST_CASE("Gaussian samples are close to their fit") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z(0.3, 2.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> g(1000), e(1000);
    for (auto& x : g) x = z(rng);
    for (auto& x : e) x = -std::log(u(rng));
    const NormalityResult a = normality_check(g);
    CHECK(a.kl < 0.05);
    CHECK(a.n == 1000);
    CHECK(a.mean == doctest::Approx(0.3).epsilon(0.5));
    CHECK(normality_check(e).kl > a.kl);
    CHECK(freedman_diaconis_width(g) > 0.0);
}

TEST_CASE("normality errors") {
    CHECK_THROWS_AS(normality_check(std::vector<double>(50, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(normality_check(std::vector<double>(200, 1.0)), std::domain_error);
}

}
