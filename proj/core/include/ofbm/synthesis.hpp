#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ofbm/matrix2.hpp"
#include "ofbm/theta.hpp"

namespace ofbm {

struct SynthesisConfig {
    Theta theta;
    std::size_t n = 4096;        ///< samples per component (power of two, >= 256)
    std::uint64_t seed = 0;
    int embedding_factor = 2;    ///< initial circulant length = factor * n
    int max_doublings = 8;
};

/// Sample path of the mixed process, pinned at the origin.
struct Path {
    std::vector<double> y1;
    std::vector<double> y2;
    Theta theta_true;
    std::uint64_t seed = 0;

    std::size_t size() const { return y1.size(); }
};

/// Raised when the block-circulant embedding is indefinite even after the
/// maximum number of length doublings.
class EmbeddingError : public std::runtime_error {
public:
    EmbeddingError(const std::string& what, double min_eigenvalue)
        : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}
    double min_eigenvalue() const { return min_eigenvalue_; }

private:
    double min_eigenvalue_;
};

struct EmbeddingDiagnostics {
    std::size_t circulant_length = 0;
    int doublings = 0;
    double min_eigenvalue = 0.0;  ///< before clipping
    double max_eigenvalue = 0.0;
    std::size_t clipped = 0;      ///< eigenvalues in (-1e-9 max, 0) set to zero
};

/// Exact synthesis of bivariate OfBm by circulant embedding of the latent
/// bivariate fractional Gaussian noise, cumulative summation and mixing.
///
/// The embedding (and its per-frequency square roots) is built once, so many
/// replications can be drawn cheaply with `sample`.
class Synthesizer {
public:
    Synthesizer(const Theta& theta, std::size_t n, int embedding_factor = 2, int max_doublings = 8);

    Path sample(std::uint64_t seed) const;

    /// Latent increment covariance implied by the clipped embedding, lags 0..n-1.
    std::vector<Sym2> implied_covariance() const;
    /// Target latent increment covariance, lags 0..n-1.
    std::vector<Sym2> target_covariance() const;

    const EmbeddingDiagnostics& diagnostics() const { return diag_; }
    std::size_t size() const { return n_; }
    const Theta& theta() const { return theta_; }

private:
    Theta theta_;
    std::size_t n_;
    Mat2 mixing_;
    std::vector<Sym2> spectrum_;   ///< clipped per-frequency spectral matrices
    std::vector<Sym2> root_;       ///< symmetric square roots of spectrum_
    EmbeddingDiagnostics diag_;
};

/// Throws std::invalid_argument for a bad config, std::domain_error for an
/// infeasible theta and EmbeddingError when the embedding fails.
Path synthesize(const SynthesisConfig& config);

}  // namespace ofbm
