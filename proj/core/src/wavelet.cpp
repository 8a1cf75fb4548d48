#include "ofbm/wavelet.hpp"

#include <bit>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "ofbm/eta.hpp"
#include "ofbm/filters.hpp"
#include "ofbm/model.hpp"

namespace ofbm {

std::string_view to_string(Boundary b) {
    return b == Boundary::truncate ? "truncate" : "periodic";
}

Boundary parse_boundary(std::string_view s) {
    if (s == "truncate") return Boundary::truncate;
    if (s == "periodic") return Boundary::periodic;
    throw std::invalid_argument("unknown boundary mode: " + std::string(s));
}

int default_j2(std::size_t n, int n_psi) {
    if (n < 2) throw std::invalid_argument("series too short");
    return static_cast<int>(std::bit_width(n) - 1) - n_psi - 1;
}

void dwt_step(std::span<const double> a, const WaveletFilter& f, Boundary b,
              std::vector<double>& approx, std::vector<double>& detail) {
    const std::size_t len = f.length();
    const std::size_t n = a.size();
    std::size_t out = 0;
    if (b == Boundary::truncate) {
        out = n >= len ? (n - len) / 2 + 1 : 0;
    } else {
        if (n % 2 != 0) throw std::invalid_argument("periodic pyramid needs even lengths");
        out = n / 2;
    }
    approx.assign(out, 0.0);
    detail.assign(out, 0.0);
    for (std::size_t k = 0; k < out; ++k) {
        double sa = 0.0, sd = 0.0;
        for (std::size_t l = 0; l < len; ++l) {
            std::size_t idx = 2 * k + l;
            if (b == Boundary::periodic) idx %= n;
            sa += f.lowpass[l] * a[idx];
            sd += f.highpass[l] * a[idx];
        }
        approx[k] = sa;
        detail[k] = sd;
    }
}

std::vector<std::vector<double>> dwt_component(std::span<const double> x, const WaveletFilter& f,
                                               int j2, Boundary b, std::vector<double>* approx) {
    std::vector<std::vector<double>> details(static_cast<std::size_t>(j2));
    std::vector<double> a(x.begin(), x.end()), next;
    for (int j = 1; j <= j2; ++j) {
        dwt_step(a, f, b, next, details[static_cast<std::size_t>(j - 1)]);
        a.swap(next);
    }
    if (approx) *approx = std::move(a);
    return details;
}

WaveletCoefficients dwt(const Path& path, const AnalysisConfig& config) {
    const std::size_t n = path.size();
    if (path.y2.size() != n) throw std::invalid_argument("components differ in length");
    const int j2 = config.j2 > 0 ? config.j2 : default_j2(n, config.n_psi);
    if (config.j1 < 1 || config.j1 > j2) throw std::invalid_argument("need 1 <= j1 <= j2");
    if (j2 >= 62 || n < (std::size_t{1} << (j2 + 1))) {
        throw std::invalid_argument("path too short for the requested coarsest octave");
    }
    const WaveletFilter& f = wavelet_filter(config.n_psi);
    WaveletCoefficients c;
    c.j2 = j2;
    c.d1 = dwt_component(path.y1, f, j2, config.boundary, &c.a1);
    c.d2 = dwt_component(path.y2, f, j2, config.boundary, &c.a2);
    return c;
}

double SampleSpectrum::sigma_max() const {
    return std::sqrt(increment_var1 + increment_var2);
}

SampleSpectrum sample_spectrum(const WaveletCoefficients& coeffs, const AnalysisConfig& config) {
    SampleSpectrum s;
    s.n_psi = config.n_psi;
    const std::size_t min_count = std::max<std::size_t>(config.min_count, 1);
    for (int j = config.j1; j <= coeffs.j2; ++j) {
        const auto& d1 = coeffs.d1.at(static_cast<std::size_t>(j - 1));
        const auto& d2 = coeffs.d2.at(static_cast<std::size_t>(j - 1));
        const std::size_t k = d1.size();
        if (k < min_count) {
            s.excluded.push_back(j);
            std::cerr << "warning: octave " << j << " has " << k << " coefficients; excluded\n";
            continue;
        }
        double s11 = 0.0, s12 = 0.0, s22 = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            s11 += d1[i] * d1[i];
            s12 += d1[i] * d2[i];
            s22 += d2[i] * d2[i];
        }
        const double inv = 1.0 / static_cast<double>(k);
        s.octaves.push_back({j, k, {s11 * inv, s12 * inv, s22 * inv}});
    }
    if (s.octaves.empty()) throw std::invalid_argument("no octave has enough coefficients");
    return s;
}

double increment_variance(std::span<const double> x) {
    if (x.size() < 3) return 0.0;
    const std::size_t m = x.size() - 1;
    double mean = 0.0;
    for (std::size_t t = 0; t < m; ++t) mean += x[t + 1] - x[t];
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        const double d = x[t + 1] - x[t] - mean;
        ss += d * d;
    }
    return ss / static_cast<double>(m - 1);
}

SampleSpectrum analyze(const Path& path, const AnalysisConfig& config) {
    SampleSpectrum s = sample_spectrum(dwt(path, config), config);
    s.n = path.size();
    s.increment_var1 = increment_variance(path.y1);
    s.increment_var2 = increment_variance(path.y2);
    return s;
}

SampleSpectrum model_sample_spectrum(const Theta& theta, int j1, int j2, std::size_t n,
                                     const EtaSet& eta) {
    const ModelSpectrum e = model_spectrum(theta, j1, j2, eta);
    SampleSpectrum s;
    s.n = n;
    s.n_psi = eta.n_psi();
    for (int j = j1; j <= j2; ++j) {
        const std::size_t k = std::max<std::size_t>(n >> j, 1);
        s.octaves.push_back({j, k, e.at(j)});
    }
    const Sym2 v = increment_covariance(theta, 0);
    s.increment_var1 = v.s11;
    s.increment_var2 = v.s22;
    return s;
}

}  // namespace ofbm
