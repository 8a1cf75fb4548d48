#include "ofbm/normality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ofbm {

double quantile(std::span<const double> x, double p) {
    if (x.empty()) throw std::invalid_argument("quantile of an empty sample");
    std::vector<double> v(x.begin(), x.end());
    std::sort(v.begin(), v.end());
    const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(i);
    return v[i] + frac * (v[i + 1] - v[i]);
}

Quartiles quartiles(std::span<const double> x) {
    return {quantile(x, 0.25), quantile(x, 0.5), quantile(x, 0.75)};
}

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double freedman_diaconis_width(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    const double iqr = quantile(x, 0.75) - quantile(x, 0.25);
    if (iqr > 0.0) return 2.0 * iqr / std::cbrt(n);
    return 3.49 * stddev(x) / std::cbrt(n);
}

NormalityResult normality_check(std::span<const double> samples, std::size_t min_samples) {
    if (samples.size() < min_samples) {
        throw std::invalid_argument("normality check needs at least " + std::to_string(min_samples) + " samples");
    }
    NormalityResult r;
    r.n = samples.size();
    r.mean = mean(samples);
    r.sd = stddev(samples);
    if (!(r.sd > 0.0)) throw std::domain_error("zero-variance sample");

    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *mn, hi = *mx;
    double width = freedman_diaconis_width(samples);
    std::size_t bins = width > 0.0 ? static_cast<std::size_t>(std::ceil((hi - lo) / width)) : 1;
    bins = std::clamp<std::size_t>(bins, 1, 10000);
    width = (hi - lo) / static_cast<double>(bins);
    r.bins = bins;

    std::vector<double> p(bins, 0.0);
    for (double v : samples) {
        auto k = width > 0.0 ? static_cast<std::size_t>((v - lo) / width) : 0;
        p[std::min(k, bins - 1)] += 1.0;
    }
    for (double& v : p) v /= static_cast<double>(r.n);

    auto cdf = [&](double x) { return 0.5 * std::erfc(-(x - r.mean) / (r.sd * std::sqrt(2.0))); };
    std::vector<double> q(bins);
    double total = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
        const double a = lo + width * static_cast<double>(k);
        q[k] = cdf(a + width) - cdf(a);
        total += q[k];
    }
    double kl = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
        if (p[k] <= 0.0) continue;
        const double qk = std::max(q[k] / total, 1e-300);
        kl += p[k] * std::log(p[k] / qk);
    }
    r.kl = kl;
    return r;
}

}  // namespace ofbm
