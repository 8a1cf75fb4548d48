#include "ofbm/filters.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace ofbm {

namespace {

WaveletFilter make_filter(std::string id, int n_psi, std::vector<double> h) {
    WaveletFilter f;
    f.id = std::move(id);
    f.n_psi = n_psi;
    const std::size_t len = h.size();
    f.highpass.resize(len);
    for (std::size_t l = 0; l < len; ++l) {
        const double sign = (l % 2 == 0) ? 1.0 : -1.0;
        f.highpass[l] = sign * h[len - 1 - l];
    }
    f.lowpass = std::move(h);
    check_filter(f);
    return f;
}

const WaveletFilter& db2() {
    static const WaveletFilter f = make_filter(
        "db2", 2,
        {0.48296291314453414337, 0.83651630373780790558, 0.22414386804201338103,
         -0.12940952255126038117});
    return f;
}

const WaveletFilter& db3() {
    static const WaveletFilter f = make_filter(
        "db3", 3,
        {0.33267055295008261600, 0.80689150931109257649, 0.45987750211849157010,
         -0.13501102001025458870, -0.08544127388202666169, 0.03522629188570953660});
    return f;
}

const WaveletFilter& sym4() {
    static const WaveletFilter f = make_filter(
        "sym4", 4,
        {0.032223100604051467872, -0.012603967262031303754, -0.099219543576633532585,
         0.29785779560530605140, 0.80373875180513208088, 0.49761866763277498998,
         -0.029635527646002491764, -0.075765714789502213228});
    return f;
}

}  // namespace

const WaveletFilter& wavelet_filter(int n_psi) {
    switch (n_psi) {
        case 2: return db2();
        case 3: return db3();
        case 4: return sym4();
        default:
            throw std::invalid_argument("unsupported number of vanishing moments: " +
                                        std::to_string(n_psi));
    }
}

double filter_defect(const WaveletFilter& f) {
    const auto& h = f.lowpass;
    const auto& g = f.highpass;
    const std::ptrdiff_t len = static_cast<std::ptrdiff_t>(h.size());
    double worst = 0.0;

    double sum = 0.0;
    for (double v : h) sum += v;
    worst = std::max(worst, std::abs(sum - std::sqrt(2.0)));

    // Double-shift orthonormality of h.
    for (std::ptrdiff_t shift = 0; shift < len; shift += 2) {
        double acc = 0.0;
        for (std::ptrdiff_t l = 0; l + shift < len; ++l) acc += h[l] * h[l + shift];
        worst = std::max(worst, std::abs(acc - (shift == 0 ? 1.0 : 0.0)));
    }

    // Vanishing moments of g.
    for (int k = 0; k < f.n_psi; ++k) {
        double acc = 0.0;
        for (std::ptrdiff_t l = 0; l < len; ++l) acc += std::pow(static_cast<double>(l), k) * g[l];
        worst = std::max(worst, std::abs(acc) / std::pow(static_cast<double>(len), k));
    }
    return worst;
}

void check_filter(const WaveletFilter& f, double tol) {
    const double defect = filter_defect(f);
    if (!(defect <= tol)) {
        throw std::logic_error("wavelet filter " + f.id + " fails orthonormality self-check");
    }
}

}  // namespace ofbm
