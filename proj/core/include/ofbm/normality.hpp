#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ofbm {

struct NormalityResult {
    double kl = 0.0;  ///< discrete KL(empirical || fitted Gaussian)
    std::size_t bins = 0;
    double mean = 0.0;
    double sd = 0.0;
    std::size_t n = 0;
};

struct Quartiles {
    double q25 = 0.0, q50 = 0.0, q75 = 0.0;
};

/// Linear-interpolation quantile (the usual "type 7" rule); sorts a copy.
double quantile(std::span<const double> x, double p);
Quartiles quartiles(std::span<const double> x);

double mean(std::span<const double> x);
/// Unbiased standard deviation.
double stddev(std::span<const double> x);

/// Freedman-Diaconis bin width, falling back to Scott's rule when the IQR is 0.
double freedman_diaconis_width(std::span<const double> x);

/// Histogram with Freedman-Diaconis bins against a moment-fitted Gaussian
/// integrated over the same bins and renormalised to the histogram range.
/// Throws std::invalid_argument for fewer than `min_samples` values and
/// std::domain_error for zero-variance samples.
NormalityResult normality_check(std::span<const double> samples, std::size_t min_samples = 100);

}  // namespace ofbm
