#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace ofbm {

inline constexpr std::size_t kNumParams = 7;

/// Axis index of each model parameter, in canonical order.
enum class Param : std::size_t { h1 = 0, h2, rho, sigma1, sigma2, beta, gamma };

inline constexpr std::size_t index(Param p) { return static_cast<std::size_t>(p); }

std::string_view param_name(std::size_t axis);

/// Seven-parameter description of a bivariate operator fractional Brownian motion.
///
/// h1 <= h2 are the Hurst eigenvalues, rho the correlation of the latent
/// (unmixed) components, sigma1/sigma2 their standard deviations at unit time,
/// and beta/gamma the mixing coefficients of the column-normalized mixing matrix.
struct Theta {
    double h1 = 0.5;
    double h2 = 0.5;
    double rho = 0.0;
    double sigma1 = 1.0;
    double sigma2 = 1.0;
    double beta = 0.0;
    double gamma = 0.0;

    std::array<double, kNumParams> to_array() const {
        return {h1, h2, rho, sigma1, sigma2, beta, gamma};
    }

    static Theta from_array(const std::array<double, kNumParams>& v) {
        return Theta{v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
    }

    double operator[](Param p) const { return to_array()[index(p)]; }

    friend bool operator==(const Theta&, const Theta&) = default;
};

/// The (beta, gamma, rho) -> -(beta, gamma, rho) image, which leaves the
/// absolute wavelet spectrum unchanged.
inline Theta sign_flipped(const Theta& t) {
    Theta f = t;
    f.rho = -t.rho;
    f.beta = -t.beta;
    f.gamma = -t.gamma;
    return f;
}

/// Restores h1 <= h2 by collapsing both exponents to their midpoint.
inline Theta project_ordering(Theta t) {
    if (t.h1 > t.h2) {
        const double m = 0.5 * (t.h1 + t.h2);
        t.h1 = m;
        t.h2 = m;
    }
    return t;
}

std::string to_string(const Theta& t);

}  // namespace ofbm
