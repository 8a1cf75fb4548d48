#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ofbm/bnb.hpp"
#include "ofbm/eta.hpp"
#include "ofbm/wavelet.hpp"

namespace ofbm {

enum class Method { m_bb, univariate, eigenvalue };

/// "M-BB", "univariate", "eigenvalue".
std::string_view to_string(Method m);
/// Accepts the long names and the CLI short forms m, uni, eig.
Method parse_method(std::string_view s);
/// Short CLI form: m, uni, eig.
std::string_view short_name(Method m);

struct EstimationResult {
    Theta theta_hat;
    /// Coordinates actually estimated; the rest of theta_hat is left at defaults.
    std::array<bool, kNumParams> estimated{};
    double objective_value = 0.0;
    Method method = Method::m_bb;
    std::size_t iterations = 0;
    double grid_count = 0.0;
    double wall_time = 0.0;
    std::size_t candidates = 0;
    bool incomplete = false;
    double lower_bound = 0.0;
    std::string note;
};

/// Least-squares options of the two regression baselines.
struct RegressionOptions {
    /// Weight octave j by K_j (the inverse of the 1/K_j variance of log2 S).
    bool weighted = false;
};

/// Slope and intercept of y on x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Throws std::invalid_argument for fewer than two points or mismatched sizes.
LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> w = {});

/// M-estimator by branch and bound. The objective uses the spectrum's wavelet
/// and the given eta model.
EstimationResult estimate_m(const SampleSpectrum& spectrum, const BnbConfig& config,
                            EtaModel eta_model = EtaModel::sampled);
EstimationResult estimate_m(const Objective& objective, const BnbConfig& config);

/// Fine/coarse split regression of log2 S11 and log2 S22.
/// Throws std::invalid_argument with fewer than two octaves on either side.
EstimationResult estimate_univariate(const SampleSpectrum& spectrum, RegressionOptions options = {});

/// Coarse-scale regression of the sorted eigenvalues of S(2^j); beta from the
/// dominant eigenvector at the coarsest usable octave.
EstimationResult estimate_eigen(const SampleSpectrum& spectrum, RegressionOptions options = {});

/// Midpoint split of the octave list: last fine-scale octave.
int fine_coarse_split(int j1, int j2);

}  // namespace ofbm
