#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ofbm/filters.hpp"

namespace ofbm {

/// Which wavelet constant enters the model spectrum.
///
/// `continuous` is the integral of |u|^{2h} against the autocorrelation of the
/// mother wavelet; it is the large-octave limit and does not depend on j.
/// `sampled` is the exact per-octave constant for a pyramid transform
/// initialised with unit-spaced samples, so that E[S(2^j)] matches the model
/// at every octave. It converges to `continuous` as j grows.
enum class EtaModel { continuous, sampled };

std::string_view to_string(EtaModel m);
EtaModel parse_eta_model(std::string_view s);

/// Tabulated h -> eta_h on a uniform grid over [0, 1], linearly interpolated.
class EtaTable {
public:
    EtaTable() = default;
    EtaTable(std::string key, std::vector<double> values);

    double operator()(double h) const;

    const std::string& key() const { return key_; }
    std::size_t size() const { return values_.size(); }
    double step() const { return step_; }
    double node(std::size_t i) const { return static_cast<double>(i) * step_; }
    std::span<const double> values() const { return values_; }

    /// True when values rise to a single peak and then fall.
    bool unimodal() const { return unimodal_; }
    double peak_h() const { return node(peak_index_); }
    double peak_value() const { return values_[peak_index_]; }
    std::size_t peak_index() const { return peak_index_; }

    /// Smallest and largest slope of the interpolant over [lo, hi].
    std::pair<double, double> slope_range(double lo, double hi) const;
    /// Smallest and largest node value strictly inside (lo, hi); empty range
    /// gives (+inf, -inf).
    std::pair<double, double> node_range(double lo, double hi) const;

private:
    // Range minimum / maximum over a fixed array in O(1).
    struct SparseMinMax {
        std::vector<std::vector<double>> mins, maxs;
        void build(const std::vector<double>& v);
        std::pair<double, double> query(std::size_t first, std::size_t last) const;
    };

    std::string key_;
    std::vector<double> values_;
    SparseMinMax slopes_, nodes_;
    double step_ = 0.0;
    std::size_t peak_index_ = 0;
    bool unimodal_ = false;
};

/// Cascade approximation of psi_0 at resolution 2^-depth, autocorrelation by
/// discrete convolution, trapezoid quadrature against |u|^{2h}.
EtaTable compute_continuous_eta(const WaveletFilter& f, int cascade_depth = 10,
                                std::size_t intervals = 1024);

/// Exact constant for octave j of the sampled pyramid:
/// -1/2 2^{-j(2h+1)} sum_{n,m} g_j[n] g_j[m] |n-m|^{2h}.
EtaTable compute_sampled_eta(const WaveletFilter& f, int octave, std::size_t intervals = 1024);

void write_eta_csv(const EtaTable& table, const std::filesystem::path& file);
EtaTable read_eta_csv(const std::filesystem::path& file, std::string key);

/// Per-octave eta tables for one wavelet and one model.
class EtaSet {
public:
    static constexpr int kMaxSampledOctave = 12;

    EtaSet(const WaveletFilter& filter, EtaModel model, std::vector<EtaTable> tables);

    /// Table used at octave j >= 1. Sampled sets reuse their last table beyond
    /// kMaxSampledOctave, where the relative change per octave is below 1e-7.
    const EtaTable& table(int octave) const;
    double operator()(double h, int octave) const { return table(octave)(h); }

    const WaveletFilter& filter() const { return *filter_; }
    int n_psi() const { return filter_->n_psi; }
    EtaModel model() const { return model_; }

private:
    const WaveletFilter* filter_;
    EtaModel model_;
    std::vector<EtaTable> tables_;
};

struct EtaOptions {
    std::size_t intervals = 1024;
    int cascade_depth = 10;
    /// When non-empty, tables are read from / written to CSV files here.
    std::filesystem::path cache_dir;
};

std::shared_ptr<const EtaSet> make_eta_set(int n_psi, EtaModel model, const EtaOptions& opts = {});

/// Process-wide memoised set with default options. The cache directory is
/// taken from the OFBM_ETA_CACHE environment variable when set.
std::shared_ptr<const EtaSet> shared_eta_set(int n_psi = 2, EtaModel model = EtaModel::sampled);

}  // namespace ofbm
