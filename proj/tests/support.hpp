#pragma once

#include <random>

#include "ofbm/model.hpp"
#include "ofbm/objective.hpp"
#include "ofbm/synthesis.hpp"
#include "ofbm/wavelet.hpp"

namespace test {

/// Uniform over a comfortably feasible region: h1 < h2 with a gap, rho
/// below 90% of its maximum, sigma in [0.5, 2], mixing in [-0.9, 0.9].
template <class Rng>
ofbm::Theta random_feasible_theta(Rng& rng, double min_gap = 0.05) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ofbm::Theta t;
    do {
        t.h1 = 0.05 + 0.85 * u(rng);
        t.h2 = 0.05 + 0.9 * u(rng);
    } while (t.h2 - t.h1 < min_gap);
    t.rho = 0.9 * ofbm::max_feasible_rho(t.h1, t.h2) * u(rng);
    t.sigma1 = 0.5 + 1.5 * u(rng);
    t.sigma2 = 0.5 + 1.5 * u(rng);
    t.beta = -0.9 + 1.8 * u(rng);
    t.gamma = -0.9 + 1.8 * u(rng);
    return t;
}

/// Model spectrum at octaves 1..default_j2(n) laid out as sample data.
inline ofbm::SampleSpectrum noiseless_spectrum(const ofbm::Theta& t, std::size_t n,
                                               ofbm::EtaModel model = ofbm::EtaModel::sampled) {
    return ofbm::model_sample_spectrum(t, 1, ofbm::default_j2(n, 2), n, *ofbm::shared_eta_set(2, model));
}

inline ofbm::SampleSpectrum synthesized_spectrum(const ofbm::Theta& t, std::size_t n, std::uint64_t seed) {
    ofbm::SynthesisConfig c;
    c.theta = t;
    c.n = n;
    c.seed = seed;
    return ofbm::analyze(ofbm::synthesize(c), ofbm::AnalysisConfig{});
}

}  // namespace test
