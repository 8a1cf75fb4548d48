#include "ofbm/eta.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace ofbm {

std::string_view to_string(EtaModel m) {
    return m == EtaModel::continuous ? "continuous" : "sampled";
}

EtaModel parse_eta_model(std::string_view s) {
    if (s == "continuous") return EtaModel::continuous;
    if (s == "sampled") return EtaModel::sampled;
    throw std::invalid_argument("unknown eta model: " + std::string(s));
}

EtaTable::EtaTable(std::string key, std::vector<double> values)
    : key_(std::move(key)), values_(std::move(values)) {
    if (values_.size() < 2) throw std::invalid_argument("eta table needs at least two nodes");
    step_ = 1.0 / static_cast<double>(values_.size() - 1);
    peak_index_ = static_cast<std::size_t>(
        std::max_element(values_.begin(), values_.end()) - values_.begin());
    unimodal_ = std::is_sorted(values_.begin(), values_.begin() + peak_index_ + 1) &&
                std::is_sorted(values_.rbegin(), values_.rend() - peak_index_);
    std::vector<double> slopes(values_.size() - 1);
    for (std::size_t i = 0; i + 1 < values_.size(); ++i) slopes[i] = (values_[i + 1] - values_[i]) / step_;
    slopes_.build(slopes);
    nodes_.build(values_);
}

void EtaTable::SparseMinMax::build(const std::vector<double>& v) {
    mins.assign(1, v);
    maxs.assign(1, v);
    for (std::size_t w = 1; 2 * w <= v.size(); w *= 2) {
        const auto& pm = mins.back();
        const auto& px = maxs.back();
        std::vector<double> m(pm.size() - w), x(px.size() - w);
        for (std::size_t i = 0; i < m.size(); ++i) {
            m[i] = std::min(pm[i], pm[i + w]);
            x[i] = std::max(px[i], px[i + w]);
        }
        mins.push_back(std::move(m));
        maxs.push_back(std::move(x));
    }
}

std::pair<double, double> EtaTable::SparseMinMax::query(std::size_t first, std::size_t last) const {
    const std::size_t len = last - first + 1;
    const auto level = static_cast<std::size_t>(std::bit_width(len) - 1);
    const std::size_t w = std::size_t{1} << level;
    return {std::min(mins[level][first], mins[level][last + 1 - w]),
            std::max(maxs[level][first], maxs[level][last + 1 - w])};
}

double EtaTable::operator()(double h) const {
    if (!(h > 0.0)) return values_.front();
    if (h >= 1.0) return values_.back();
    const double pos = h / step_;
    const auto i = std::min(static_cast<std::size_t>(pos), values_.size() - 2);
    const double frac = pos - static_cast<double>(i);
    return values_[i] + frac * (values_[i + 1] - values_[i]);
}

std::pair<double, double> EtaTable::slope_range(double lo, double hi) const {
    const std::size_t last = values_.size() - 2;
    auto segment = [&](double h) {
        if (!(h > 0.0)) return std::size_t{0};
        return std::min(static_cast<std::size_t>(h / step_), last);
    };
    return slopes_.query(segment(lo), std::max(segment(lo), segment(hi)));
}

std::pair<double, double> EtaTable::node_range(double lo, double hi) const {
    const double inf = std::numeric_limits<double>::infinity();
    const std::size_t n = values_.size();
    // First node above lo and last node below hi.
    std::size_t first = lo < 0.0 ? 0 : static_cast<std::size_t>(std::floor(lo / step_)) + 1;
    while (first > 0 && node(first - 1) > lo) --first;
    while (first < n && !(node(first) > lo)) ++first;
    if (first >= n) return {inf, -inf};
    std::size_t last = hi >= 1.0 ? n - 1 : static_cast<std::size_t>(std::ceil(hi / step_));
    last = std::min(last, n - 1);
    while (last + 1 < n && node(last + 1) < hi) ++last;
    while (last > 0 && !(node(last) < hi)) --last;
    if (!(node(last) < hi) || last < first) return {inf, -inf};
    return nodes_.query(first, last);
}

namespace {

// Both endpoint values vanish analytically (zero mean, two vanishing moments);
// only rounding noise survives there.
void clean_endpoints(std::vector<double>& v) {
    v.front() = 0.0;
    v.back() = 0.0;
}

std::string table_key(const WaveletFilter& f, EtaModel m, int octave) {
    std::string key = f.id + "_" + std::string(to_string(m));
    if (m == EtaModel::sampled) key += "_j" + std::to_string(octave);
    return key;
}

// phi at the integers 0..L-1 (eigenvector of the two-scale operator for eigenvalue 1).
std::vector<double> scaling_at_integers(const std::vector<double>& h) {
    const std::size_t n = h.size();
    // phi(k) = sqrt2 sum_l h[l] phi(2k - l). Solve by power-style fixed point on the
    // subspace sum phi = 1; the operator has eigenvalue 1 with a simple eigenvector.
    std::vector<double> phi(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n);
    for (int it = 0; it < 20000; ++it) {
        for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t l = 0; l < h.size(); ++l) {
                const auto m = static_cast<std::ptrdiff_t>(2 * k) - static_cast<std::ptrdiff_t>(l);
                if (m >= 0 && m < static_cast<std::ptrdiff_t>(n)) acc += h[l] * phi[m];
            }
            next[k] = std::sqrt(2.0) * acc;
        }
        double s = 0.0;
        for (double v : next) s += v;
        double diff = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            next[k] /= s;
            diff = std::max(diff, std::abs(next[k] - phi[k]));
        }
        phi.swap(next);
        if (diff < 1e-16) break;
    }
    return phi;
}

}  // namespace

EtaTable compute_continuous_eta(const WaveletFilter& f, int cascade_depth, std::size_t intervals) {
    if (cascade_depth < 1) throw std::invalid_argument("cascade depth must be >= 1");
    const auto& h = f.lowpass;
    const auto& g = f.highpass;
    const std::size_t support = h.size() - 1;

    // Cascade refinement of phi on the dyadic grid 2^-level.
    std::vector<double> phi = scaling_at_integers(h);
    for (int level = 1; level <= cascade_depth; ++level) {
        const std::size_t half = std::size_t{1} << (level - 1);
        const std::size_t count = support * (std::size_t{1} << level) + 1;
        std::vector<double> refined(count, 0.0);
        for (std::size_t k = 0; k < count; ++k) {
            double acc = 0.0;
            for (std::size_t l = 0; l < h.size(); ++l) {
                if (k < l * half) break;
                const std::size_t m = k - l * half;
                if (m < phi.size()) acc += h[l] * phi[m];
            }
            refined[k] = std::sqrt(2.0) * acc;
        }
        phi.swap(refined);
    }

    // psi(k 2^-J) = sqrt2 sum_l g[l] phi(2k 2^-J - l)
    const std::size_t scale = std::size_t{1} << cascade_depth;
    std::vector<double> psi(phi.size(), 0.0);
    for (std::size_t k = 0; k < psi.size(); ++k) {
        double acc = 0.0;
        for (std::size_t l = 0; l < g.size(); ++l) {
            if (2 * k < l * scale) break;
            const std::size_t m = 2 * k - l * scale;
            if (m < phi.size()) acc += g[l] * phi[m];
        }
        psi[k] = std::sqrt(2.0) * acc;
    }

    // Autocorrelation Psi(u) at u = k dx, k >= 0 (even in u).
    const double dx = 1.0 / static_cast<double>(scale);
    const std::size_t n = psi.size();
    std::vector<double> acf(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i + k < n; ++i) acc += psi[i] * psi[i + k];
        acf[k] = acc * dx;
    }

    // Trapezoid over u in [-(n-1)dx, (n-1)dx]; integrand even and zero-weighted at u=0 for h>0.
    std::vector<double> logu(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) logu[k] = std::log(static_cast<double>(k) * dx);

    std::vector<double> values(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) {
        const double hh = static_cast<double>(i) / static_cast<double>(intervals);
        double integral = 0.0;
        for (std::size_t k = 1; k < n; ++k) {
            const double w = (k == n - 1) ? 0.5 : 1.0;
            integral += w * std::exp(2.0 * hh * logu[k]) * acf[k];
        }
        integral *= 2.0 * dx;  // both signs of u
        if (i == 0) integral += acf[0] * dx;  // |0|^0 = 1
        values[i] = -0.5 * integral;
    }
    clean_endpoints(values);
    return EtaTable(table_key(f, EtaModel::continuous, 0), std::move(values));
}

EtaTable compute_sampled_eta(const WaveletFilter& f, int octave, std::size_t intervals) {
    if (octave < 1) throw std::invalid_argument("octave must be >= 1");
    const auto& h = f.lowpass;
    const auto& g = f.highpass;

    // Equivalent lowpass after (octave-1) stages, then one highpass stage.
    std::vector<double> low{1.0};
    auto stage = [](const std::vector<double>& prev, const std::vector<double>& filt,
                    std::size_t spacing) {
        std::vector<double> out(prev.size() + spacing * (filt.size() - 1), 0.0);
        for (std::size_t m = 0; m < filt.size(); ++m)
            for (std::size_t n = 0; n < prev.size(); ++n) out[n + spacing * m] += filt[m] * prev[n];
        return out;
    };
    for (int j = 1; j < octave; ++j) low = stage(low, h, std::size_t{1} << (j - 1));
    const std::vector<double> band = stage(low, g, std::size_t{1} << (octave - 1));

    const std::size_t n = band.size();
    std::vector<double> acf(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i + k < n; ++i) acc += band[i] * band[i + k];
        acf[k] = acc;
    }
    std::vector<double> logk(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) logk[k] = std::log(static_cast<double>(k));

    const double j = static_cast<double>(octave);
    std::vector<double> values(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) {
        const double hh = static_cast<double>(i) / static_cast<double>(intervals);
        double acc = 0.0;
        for (std::size_t k = 1; k < n; ++k) acc += acf[k] * std::exp(2.0 * hh * logk[k]);
        acc *= 2.0;
        if (i == 0) acc += acf[0];
        values[i] = -0.5 * acc * std::exp2(-j * (2.0 * hh + 1.0));
    }
    clean_endpoints(values);
    return EtaTable(table_key(f, EtaModel::sampled, octave), std::move(values));
}

void write_eta_csv(const EtaTable& table, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "h,eta\n" << std::setprecision(17);
    for (std::size_t i = 0; i < table.size(); ++i)
        out << table.node(i) << ',' << table.values()[i] << '\n';
}

EtaTable read_eta_csv(const std::filesystem::path& file, std::string key) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    std::string line;
    std::getline(in, line);
    if (line != "h,eta") throw std::runtime_error("bad eta cache header in " + file.string());
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("bad eta cache row");
        values.push_back(std::stod(line.substr(comma + 1)));
    }
    return EtaTable(std::move(key), std::move(values));
}

EtaSet::EtaSet(const WaveletFilter& filter, EtaModel model, std::vector<EtaTable> tables)
    : filter_(&filter), model_(model), tables_(std::move(tables)) {
    if (tables_.empty()) throw std::invalid_argument("empty eta set");
}

const EtaTable& EtaSet::table(int octave) const {
    if (model_ == EtaModel::continuous) return tables_.front();
    if (octave < 1) throw std::out_of_range("octave must be >= 1");
    const auto idx = std::min(static_cast<std::size_t>(octave - 1), tables_.size() - 1);
    return tables_[idx];
}

namespace {

EtaTable cached_or_compute(const std::filesystem::path& dir, const std::string& key,
                           std::size_t intervals, auto&& compute) {
    if (!dir.empty()) {
        const auto file = dir / (key + "_" + std::to_string(intervals) + ".csv");
        if (std::filesystem::exists(file)) {
            try {
                auto t = read_eta_csv(file, key);
                if (t.size() == intervals + 1) return t;
            } catch (const std::exception&) {
                // regenerate below
            }
        }
        EtaTable t = compute();
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (!ec) write_eta_csv(t, file);
        return t;
    }
    return compute();
}

}  // namespace

std::shared_ptr<const EtaSet> make_eta_set(int n_psi, EtaModel model, const EtaOptions& opts) {
    const WaveletFilter& f = wavelet_filter(n_psi);
    std::vector<EtaTable> tables;
    if (model == EtaModel::continuous) {
        const std::string key = table_key(f, model, 0) + "_d" + std::to_string(opts.cascade_depth);
        tables.push_back(cached_or_compute(opts.cache_dir, key, opts.intervals, [&] {
            return compute_continuous_eta(f, opts.cascade_depth, opts.intervals);
        }));
    } else {
        for (int j = 1; j <= EtaSet::kMaxSampledOctave; ++j) {
            tables.push_back(cached_or_compute(opts.cache_dir, table_key(f, model, j), opts.intervals,
                                               [&] { return compute_sampled_eta(f, j, opts.intervals); }));
        }
    }
    return std::make_shared<const EtaSet>(f, model, std::move(tables));
}

std::shared_ptr<const EtaSet> shared_eta_set(int n_psi, EtaModel model) {
    static std::mutex mutex;
    static std::map<std::pair<int, EtaModel>, std::shared_ptr<const EtaSet>> sets;
    std::lock_guard lock(mutex);
    auto& slot = sets[{n_psi, model}];
    if (!slot) {
        EtaOptions opts;
        if (const char* dir = std::getenv("OFBM_ETA_CACHE"); dir != nullptr && *dir != '\0')
            opts.cache_dir = dir;
        slot = make_eta_set(n_psi, model, opts);
    }
    return slot;
}

}  // namespace ofbm
