#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ofbm/eta.hpp"
#include "ofbm/matrix2.hpp"
#include "ofbm/synthesis.hpp"

namespace ofbm {

/// How the pyramid treats the series ends.
///
/// `truncate` keeps only coefficients whose support lies inside the series;
/// `periodic` wraps the series around (orthonormal, every octave halves exactly).
enum class Boundary { truncate, periodic };

std::string_view to_string(Boundary b);
Boundary parse_boundary(std::string_view s);

struct AnalysisConfig {
    int n_psi = 2;
    int j1 = 1;
    int j2 = 0;  ///< 0 selects log2(N) - n_psi - 1
    Boundary boundary = Boundary::truncate;
    std::size_t min_count = 4;  ///< octaves with fewer coefficients are excluded
};

/// Coarsest octave used by default for a series of length n.
int default_j2(std::size_t n, int n_psi);

/// Detail coefficients per octave for both components.
struct WaveletCoefficients {
    int j2 = 0;
    std::vector<std::vector<double>> d1;  ///< d1[j-1] is octave j
    std::vector<std::vector<double>> d2;
    std::vector<double> a1;  ///< approximation left after octave j2
    std::vector<double> a2;

    std::size_t count(int j) const { return d1.at(static_cast<std::size_t>(j - 1)).size(); }
};

/// One level of the orthonormal pyramid: approximation and detail halves.
void dwt_step(std::span<const double> a, const WaveletFilter& f, Boundary b,
              std::vector<double>& approx, std::vector<double>& detail);

/// Single-component pyramid down to `j2`.
std::vector<std::vector<double>> dwt_component(std::span<const double> x, const WaveletFilter& f,
                                               int j2, Boundary b, std::vector<double>* approx = nullptr);

/// Throws std::invalid_argument when the path is shorter than 2^{j2+1}
/// or j1 > j2.
WaveletCoefficients dwt(const Path& path, const AnalysisConfig& config);

struct SpectrumOctave {
    int j = 0;
    std::size_t count = 0;  ///< K_j
    Sym2 s;
};

/// Empirical wavelet spectrum over the octaves actually used.
struct SampleSpectrum {
    std::size_t n = 0;
    int n_psi = 2;
    std::vector<SpectrumOctave> octaves;
    std::vector<int> excluded;  ///< octaves dropped for having too few coefficients
    /// Sample variances of the unit-lag increments; zero when unknown.
    double increment_var1 = 0.0;
    double increment_var2 = 0.0;

    int j1() const { return octaves.empty() ? 0 : octaves.front().j; }
    int j2() const { return octaves.empty() ? 0 : octaves.back().j; }
    /// sqrt of the summed increment variances; upper end of the sigma axes.
    double sigma_max() const;
};

SampleSpectrum sample_spectrum(const WaveletCoefficients& coeffs, const AnalysisConfig& config);

/// dwt + sample_spectrum + increment variances.
SampleSpectrum analyze(const Path& path, const AnalysisConfig& config);

/// Noiseless spectrum E(2^j, theta) laid out like a sample spectrum, with
/// K_j = n / 2^j and increment variances taken from the model.
SampleSpectrum model_sample_spectrum(const Theta& theta, int j1, int j2, std::size_t n,
                                     const EtaSet& eta);

/// Unbiased sample variance of x[t+1] - x[t].
double increment_variance(std::span<const double> x);

}  // namespace ofbm
