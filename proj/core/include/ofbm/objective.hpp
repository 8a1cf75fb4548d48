#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include "ofbm/eta.hpp"
#include "ofbm/theta.hpp"
#include "ofbm/wavelet.hpp"

namespace ofbm {

struct ObjectiveOptions {
    /// Magnitudes below this are replaced by it before taking log2.
    double floor = 1e-300;
    /// Octaves with |S12| < ratio * sqrt(S11 S22) contribute no cross term.
    double s12_drop_ratio = 1e-12;
};

/// log2|S| per entry at one octave.
struct OctaveTarget {
    int j = 0;
    std::array<double, 3> log2_s{};  ///< entries (1,1), (1,2), (2,2)
    bool use12 = true;
};

/// Sum over octaves and the three unique entries of the squared difference
/// between log2|S| and log2|E(theta)|.
///
/// The constructor preprocesses the spectrum once; evaluation is thread-safe.
class Objective {
public:
    Objective(const SampleSpectrum& spectrum, std::shared_ptr<const EtaSet> eta,
              ObjectiveOptions options = {});

    double operator()(const Theta& theta) const;

    /// Squared residual of each term, in octave-major order (11, 12, 22);
    /// dropped cross terms are reported as 0.
    std::vector<std::array<double, 3>> terms(const Theta& theta) const;

    /// Signed residuals log2|S| - log2|E| of the terms in use, same order as terms().
    std::vector<double> residuals(const Theta& theta) const;

    const std::vector<OctaveTarget>& targets() const { return targets_; }
    const EtaSet& eta() const { return *eta_; }
    const ObjectiveOptions& options() const { return options_; }
    const SampleSpectrum& spectrum() const { return spectrum_; }
    /// Number of octaves whose cross term was dropped.
    std::size_t dropped() const { return dropped_; }

private:
    SampleSpectrum spectrum_;
    std::shared_ptr<const EtaSet> eta_;
    ObjectiveOptions options_;
    std::vector<OctaveTarget> targets_;
    std::size_t dropped_ = 0;
};

/// One-shot evaluation; builds a temporary Objective.
double objective_cn(const Theta& theta, const SampleSpectrum& spectrum, const EtaSet& eta,
                    ObjectiveOptions options = {});

}  // namespace ofbm
