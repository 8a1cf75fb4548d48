#include "ofbm/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ofbm {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::m_bb: return "M-BB";
        case Method::univariate: return "univariate";
        case Method::eigenvalue: return "eigenvalue";
    }
    return "unknown";
}

std::string_view short_name(Method m) {
    switch (m) {
        case Method::m_bb: return "m";
        case Method::univariate: return "uni";
        case Method::eigenvalue: return "eig";
    }
    return "unknown";
}

Method parse_method(std::string_view s) {
    if (s == "m" || s == "M-BB" || s == "m-bb") return Method::m_bb;
    if (s == "uni" || s == "univariate") return Method::univariate;
    if (s == "eig" || s == "eigen" || s == "eigenvalue") return Method::eigenvalue;
    throw std::invalid_argument("unknown method: " + std::string(s));
}

LineFit fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
    if (x.size() != y.size() || (!w.empty() && w.size() != x.size())) {
        throw std::invalid_argument("regression inputs differ in length");
    }
    if (x.size() < 2) throw std::invalid_argument("regression needs at least two points");
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        sw += wi;
        sx += wi * x[i];
        sy += wi * y[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        sxx += wi * (x[i] - mx) * (x[i] - mx);
        sxy += wi * (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0) throw std::invalid_argument("regression abscissae are all equal");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

int fine_coarse_split(int j1, int j2) { return (j1 + j2) / 2; }

EstimationResult estimate_m(const Objective& objective, const BnbConfig& config) {
    const BnbResult r = solve(objective, config);
    EstimationResult out;
    out.method = Method::m_bb;
    out.theta_hat = r.theta_hat;
    out.estimated.fill(true);
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (config.frozen[i]) out.estimated[i] = false;
    }
    out.objective_value = r.objective;
    out.iterations = r.stats.iterations;
    out.grid_count = r.stats.grid_count;
    out.wall_time = r.stats.wall_time;
    out.candidates = r.candidates.size();
    out.incomplete = r.stats.incomplete;
    out.lower_bound = r.lower_bound;
    if (r.stats.incomplete) out.note = "iteration or time cap reached; best-so-far estimate";
    return out;
}

EstimationResult estimate_m(const SampleSpectrum& spectrum, const BnbConfig& config, EtaModel eta_model) {
    const Objective objective(spectrum, shared_eta_set(spectrum.n_psi, eta_model));
    return estimate_m(objective, config);
}

namespace {

struct Series {
    std::vector<double> j, y, w;
};

void need_two(const Series& s, const char* what) {
    if (s.j.size() < 2) throw std::invalid_argument(std::string("too few octaves for ") + what);
}

double slope(const Series& s, const RegressionOptions& opt) {
    return fit_line(s.j, s.y, opt.weighted ? std::span<const double>(s.w) : std::span<const double>{}).slope;
}

}  // namespace

EstimationResult estimate_univariate(const SampleSpectrum& spectrum, RegressionOptions options) {
    if (spectrum.octaves.empty()) throw std::invalid_argument("empty spectrum");
    const int split = fine_coarse_split(spectrum.j1(), spectrum.j2());
    Series fine1, fine2, coarse1, coarse2;
    for (const auto& o : spectrum.octaves) {
        const double j = o.j;
        const double w = static_cast<double>(o.count);
        Series& s1 = o.j <= split ? fine1 : coarse1;
        Series& s2 = o.j <= split ? fine2 : coarse2;
        if (o.s.s11 > 0.0) {
            s1.j.push_back(j);
            s1.y.push_back(std::log2(o.s.s11));
            s1.w.push_back(w);
        }
        if (o.s.s22 > 0.0) {
            s2.j.push_back(j);
            s2.y.push_back(std::log2(o.s.s22));
            s2.w.push_back(w);
        }
    }
    need_two(fine1, "the fine-scale regression");
    need_two(fine2, "the fine-scale regression");
    need_two(coarse1, "the coarse-scale regression");
    need_two(coarse2, "the coarse-scale regression");

    EstimationResult out;
    out.method = Method::univariate;
    const double fine = std::min(slope(fine1, options), slope(fine2, options));
    const double coarse = std::max(slope(coarse1, options), slope(coarse2, options));
    out.theta_hat.h1 = (fine - 1.0) / 2.0;
    out.theta_hat.h2 = (coarse - 1.0) / 2.0;
    out.estimated[index(Param::h1)] = true;
    out.estimated[index(Param::h2)] = true;
    if (options.weighted) out.note = "weighted by K_j";
    return out;
}

EstimationResult estimate_eigen(const SampleSpectrum& spectrum, RegressionOptions options) {
    if (spectrum.octaves.empty()) throw std::invalid_argument("empty spectrum");
    const int split = fine_coarse_split(spectrum.j1(), spectrum.j2());
    Series small, large;
    const SpectrumOctave* last = nullptr;
    std::size_t skipped = 0;
    for (const auto& o : spectrum.octaves) {
        const SymEigen2 e = eigen(o.s);
        if (!(e.lambda[0] > 0.0) || !std::isfinite(e.lambda[1])) {
            ++skipped;
            continue;
        }
        last = &o;
        if (o.j <= split) continue;
        const double w = static_cast<double>(o.count);
        small.j.push_back(o.j);
        small.y.push_back(std::log2(e.lambda[0]));
        small.w.push_back(w);
        large.j.push_back(o.j);
        large.y.push_back(std::log2(e.lambda[1]));
        large.w.push_back(w);
    }
    need_two(small, "the eigenvalue regression");

    EstimationResult out;
    out.method = Method::eigenvalue;
    out.theta_hat.h1 = (slope(small, options) - 1.0) / 2.0;
    out.theta_hat.h2 = (slope(large, options) - 1.0) / 2.0;
    out.estimated[index(Param::h1)] = true;
    out.estimated[index(Param::h2)] = true;

    // Dominant direction at the coarsest usable octave, second entry made positive.
    const SymEigen2 e = eigen(last->s);
    double v1 = e.vectors[1][0], v2 = e.vectors[1][1];
    if (v2 < 0.0) {
        v1 = -v1;
        v2 = -v2;
    }
    const double beta = v2 > 0.0 ? v1 / v2 : std::copysign(1.0, v1);
    out.theta_hat.beta = std::clamp(beta, -1.0, 1.0);
    out.estimated[index(Param::beta)] = true;
    out.note = "beta from the dominant eigenvector at octave " + std::to_string(last->j);
    if (skipped > 0) out.note += "; " + std::to_string(skipped) + " octave(s) skipped";
    return out;
}

}  // namespace ofbm
