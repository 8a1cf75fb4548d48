#include "ofbm/synthesis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <sstream>

#include "fft.hpp"
#include "ofbm/model.hpp"

namespace ofbm {

namespace {

constexpr double kClipRatio = 1e-9;

Theta latent_of(const Theta& t) {
    Theta latent = t;
    latent.beta = 0.0;
    latent.gamma = 0.0;
    return latent;
}

using Complex = std::complex<double>;

// Spectral matrices of the circulant built from `cov` (lags 0..L/2).
std::vector<Sym2> circulant_spectrum(const std::vector<Sym2>& cov, std::size_t length) {
    const std::size_t half = length / 2;
    std::vector<Complex> f11(length), f12(length), f22(length);
    for (std::size_t k = 0; k < length; ++k) {
        const std::size_t lag = (k <= half) ? k : length - k;
        f11[k] = cov[lag].s11;
        f12[k] = cov[lag].s12;
        f22[k] = cov[lag].s22;
    }
    detail::fft_inplace(f11, false);
    detail::fft_inplace(f12, false);
    detail::fft_inplace(f22, false);
    std::vector<Sym2> out(length);
    for (std::size_t w = 0; w < length; ++w) out[w] = {f11[w].real(), f12[w].real(), f22[w].real()};
    return out;
}

}  // namespace

Synthesizer::Synthesizer(const Theta& theta, std::size_t n, int embedding_factor, int max_doublings)
    : theta_(theta), n_(n) {
    if (n < 256 || !std::has_single_bit(n)) {
        throw std::invalid_argument("sample size must be a power of two >= 256");
    }
    if (embedding_factor < 2 || !std::has_single_bit(static_cast<unsigned>(embedding_factor))) {
        throw std::invalid_argument("embedding factor must be a power of two >= 2");
    }
    require_feasible(theta);
    mixing_ = build_mixing(theta.beta, theta.gamma).w;
    const Theta latent = latent_of(theta);

    std::size_t length = n * static_cast<std::size_t>(embedding_factor);
    for (int attempt = 0;; ++attempt, length *= 2) {
        std::vector<Sym2> cov(length / 2 + 1);
        for (std::size_t k = 0; k < cov.size(); ++k) cov[k] = increment_covariance(latent, static_cast<long>(k));
        std::vector<Sym2> spec = circulant_spectrum(cov, length);

        double lo = 0.0, hi = 0.0;
        std::vector<SymEigen2> eig(length);
        for (std::size_t w = 0; w < length; ++w) {
            eig[w] = eigen(spec[w]);
            lo = std::min(lo, eig[w].lambda[0]);
            hi = std::max(hi, eig[w].lambda[1]);
        }
        diag_ = EmbeddingDiagnostics{length, attempt, lo, hi, 0};

        if (lo < -kClipRatio * hi) {
            if (attempt >= max_doublings) {
                std::ostringstream os;
                os << "circulant embedding not nonnegative definite after " << attempt
                   << " doublings (most negative eigenvalue " << lo << ")";
                throw EmbeddingError(os.str(), lo);
            }
            continue;
        }

        spectrum_.resize(length);
        root_.resize(length);
        for (std::size_t w = 0; w < length; ++w) {
            auto [lambda, vec] = eig[w];
            for (double& l : lambda) {
                if (l < 0.0) {
                    l = 0.0;
                    ++diag_.clipped;
                }
            }
            const double r0 = std::sqrt(lambda[0]), r1 = std::sqrt(lambda[1]);
            auto outer = [&](double s0, double s1) {
                return Sym2{s0 * vec[0][0] * vec[0][0] + s1 * vec[1][0] * vec[1][0],
                            s0 * vec[0][0] * vec[0][1] + s1 * vec[1][0] * vec[1][1],
                            s0 * vec[0][1] * vec[0][1] + s1 * vec[1][1] * vec[1][1]};
            };
            spectrum_[w] = outer(lambda[0], lambda[1]);
            root_[w] = outer(r0, r1);
        }
        break;
    }
}

Path Synthesizer::sample(std::uint64_t seed) const {
    const std::size_t length = root_.size();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<Complex> x1(length), x2(length);
    for (std::size_t w = 0; w < length; ++w) {
        const double a_re = normal(rng), a_im = normal(rng);
        const double b_re = normal(rng), b_im = normal(rng);
        const Sym2& r = root_[w];
        x1[w] = Complex(r.s11 * a_re + r.s12 * b_re, r.s11 * a_im + r.s12 * b_im);
        x2[w] = Complex(r.s12 * a_re + r.s22 * b_re, r.s12 * a_im + r.s22 * b_im);
    }
    detail::fft_inplace(x1, true);
    detail::fft_inplace(x2, true);

    const double scale = 1.0 / std::sqrt(static_cast<double>(length));
    Path path;
    path.theta_true = theta_;
    path.seed = seed;
    path.y1.resize(n_);
    path.y2.resize(n_);
    double c1 = 0.0, c2 = 0.0;
    for (std::size_t t = 1; t < n_; ++t) {
        c1 += scale * x1[t - 1].real();
        c2 += scale * x2[t - 1].real();
        path.y1[t] = mixing_.a11 * c1 + mixing_.a12 * c2;
        path.y2[t] = mixing_.a21 * c1 + mixing_.a22 * c2;
    }
    return path;
}

std::vector<Sym2> Synthesizer::implied_covariance() const {
    const std::size_t length = spectrum_.size();
    std::vector<Complex> f11(length), f12(length), f22(length);
    for (std::size_t w = 0; w < length; ++w) {
        f11[w] = spectrum_[w].s11;
        f12[w] = spectrum_[w].s12;
        f22[w] = spectrum_[w].s22;
    }
    detail::fft_inplace(f11, true);
    detail::fft_inplace(f12, true);
    detail::fft_inplace(f22, true);
    const double inv = 1.0 / static_cast<double>(length);
    std::vector<Sym2> out(n_);
    for (std::size_t k = 0; k < n_; ++k) {
        out[k] = {f11[k].real() * inv, f12[k].real() * inv, f22[k].real() * inv};
    }
    return out;
}

std::vector<Sym2> Synthesizer::target_covariance() const {
    const Theta latent = latent_of(theta_);
    std::vector<Sym2> out(n_);
    for (std::size_t k = 0; k < n_; ++k) out[k] = increment_covariance(latent, static_cast<long>(k));
    return out;
}

Path synthesize(const SynthesisConfig& config) {
    return Synthesizer(config.theta, config.n, config.embedding_factor, config.max_doublings)
        .sample(config.seed);
}

}  // namespace ofbm
