#include "ofbm/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace ofbm {

std::string_view param_name(std::size_t axis) {
    static constexpr std::string_view names[kNumParams] = {"h1",     "h2",   "rho",  "sigma1",
                                                           "sigma2", "beta", "gamma"};
    if (axis >= kNumParams) throw std::out_of_range("parameter axis out of range");
    return names[axis];
}

std::string to_string(const Theta& t) {
    std::ostringstream os;
    os.precision(6);
    os << "(h1=" << t.h1 << ", h2=" << t.h2 << ", rho=" << t.rho << ", sigma1=" << t.sigma1
       << ", sigma2=" << t.sigma2 << ", beta=" << t.beta << ", gamma=" << t.gamma << ")";
    return os.str();
}

namespace {

constexpr double kPi = std::numbers::pi;

void require_hurst(double h, const char* name) {
    if (!(h > 0.0 && h < 1.0)) {
        throw std::domain_error(std::string(name) + " must lie in (0, 1)");
    }
}

}  // namespace

double g_condition(double h1, double h2, double rho) {
    require_hurst(h1, "h1");
    require_hurst(h2, "h2");
    const double direct = std::tgamma(2.0 * h1 + 1.0) * std::tgamma(2.0 * h2 + 1.0) *
                          std::sin(kPi * h1) * std::sin(kPi * h2);
    const double s = std::sin(kPi * (h1 + h2) / 2.0);
    const double cross = std::tgamma(h1 + h2 + 1.0) * s;
    return direct - rho * rho * cross * cross;
}

double max_feasible_rho(double h1, double h2) {
    if (!(h1 >= 0.0 && h1 <= 1.0 && h2 >= 0.0 && h2 <= 1.0)) {
        throw std::domain_error("Hurst exponents must lie in [0, 1]");
    }
    const double num = std::tgamma(2.0 * h1 + 1.0) * std::tgamma(2.0 * h2 + 1.0) *
                       std::sin(kPi * h1) * std::sin(kPi * h2);
    const double den = std::tgamma(h1 + h2 + 1.0) * std::abs(std::sin(kPi * (h1 + h2) / 2.0));
    if (!(num > 0.0)) return 0.0;
    if (!(den > 0.0)) return 1.0;
    return std::sqrt(num) / den;
}

namespace {

const char* first_violation(const Theta& t) {
    if (!(t.h1 > 0.0 && t.h1 < 1.0)) return "h1 must lie in (0, 1)";
    if (!(t.h2 > 0.0 && t.h2 < 1.0)) return "h2 must lie in (0, 1)";
    if (!(t.h1 <= t.h2)) return "h1 must not exceed h2";
    if (!(t.rho >= 0.0 && t.rho <= 1.0)) return "rho must lie in [0, 1]";
    if (!(t.sigma1 > 0.0) || !(t.sigma2 > 0.0)) return "sigma1 and sigma2 must be positive";
    if (!(t.beta >= -1.0 && t.beta <= 1.0)) return "beta must lie in [-1, 1]";
    if (!(t.gamma >= -1.0 && t.gamma <= 1.0)) return "gamma must lie in [-1, 1]";
    if (!(g_condition(t.h1, t.h2, t.rho) > 0.0)) return "g(h1, h2, rho) must be positive";
    if (1.0 + t.beta * t.gamma == 0.0) return "mixing matrix is singular";
    return nullptr;
}

}  // namespace

bool is_feasible(const Theta& t) { return first_violation(t) == nullptr; }

void require_feasible(const Theta& t) {
    if (const char* why = first_violation(t)) {
        throw std::domain_error(std::string("infeasible theta ") + to_string(t) + ": " + why);
    }
}

MixingMatrix build_mixing(double beta, double gamma) {
    if (!(beta >= -1.0 && beta <= 1.0 && gamma >= -1.0 && gamma <= 1.0)) {
        throw std::domain_error("mixing coefficients must lie in [-1, 1]");
    }
    const double ng = std::sqrt(1.0 + gamma * gamma);
    const double nb = std::sqrt(1.0 + beta * beta);
    MixingMatrix m;
    m.w = Mat2{1.0 / ng, beta / nb, -gamma / ng, 1.0 / nb};
    m.singular = (1.0 + beta * gamma == 0.0);
    return m;
}

Sym2 model_spectrum_at(const Theta& t, int octave, const EtaSet& eta) {
    const double j = static_cast<double>(octave);
    const double a = t.sigma1 * t.sigma1 * eta(t.h1, octave) * std::exp2(j * (2.0 * t.h1 + 1.0));
    const double b = t.sigma2 * t.sigma2 * eta(t.h2, octave) * std::exp2(j * (2.0 * t.h2 + 1.0));
    const double c = t.rho * t.sigma1 * t.sigma2 * eta(0.5 * (t.h1 + t.h2), octave) *
                     std::exp2(j * (t.h1 + t.h2 + 1.0));

    const double ig = 1.0 / (1.0 + t.gamma * t.gamma);
    const double ib = 1.0 / (1.0 + t.beta * t.beta);
    const double root = std::sqrt(ig * ib);

    Sym2 e;
    e.s11 = ig * a + 2.0 * t.beta * root * c + t.beta * t.beta * ib * b;
    e.s12 = -t.gamma * ig * a + (1.0 - t.beta * t.gamma) * root * c + t.beta * ib * b;
    e.s22 = t.gamma * t.gamma * ig * a - 2.0 * t.gamma * root * c + ib * b;
    return e;
}

ModelSpectrum model_spectrum(const Theta& t, int j1, int j2, const EtaSet& eta) {
    require_feasible(t);
    if (j1 < 1 || j1 > j2) throw std::invalid_argument("octave range must satisfy 1 <= j1 <= j2");
    ModelSpectrum out;
    out.j1 = j1;
    out.e.reserve(static_cast<std::size_t>(j2 - j1 + 1));
    for (int j = j1; j <= j2; ++j) out.e.push_back(model_spectrum_at(t, j, eta));
    return out;
}

Sym2 increment_covariance(const Theta& t, long lag, long step) {
    require_feasible(t);
    if (step < 1) throw std::invalid_argument("increment step must be >= 1");
    // Covariance of unit increments for a latent pair with summed exponent `hsum`.
    auto kernel = [lag, step](double hsum) {
        const double k = static_cast<double>(lag);
        const double s = static_cast<double>(step);
        return 0.5 * (std::pow(std::abs(k + s), hsum) + std::pow(std::abs(k - s), hsum) -
                      2.0 * std::pow(std::abs(k), hsum));
    };
    Sym2 latent;
    latent.s11 = t.sigma1 * t.sigma1 * kernel(2.0 * t.h1);
    latent.s22 = t.sigma2 * t.sigma2 * kernel(2.0 * t.h2);
    latent.s12 = t.rho * t.sigma1 * t.sigma2 * kernel(t.h1 + t.h2);
    return congruence(build_mixing(t.beta, t.gamma).w, latent);
}

}  // namespace ofbm
