#pragma once

#include <vector>

#include "ofbm/eta.hpp"
#include "ofbm/matrix2.hpp"
#include "ofbm/theta.hpp"

namespace ofbm {

/// Well-posedness function of the latent bivariate process:
/// G(2h1+1)G(2h2+1)sin(pi h1)sin(pi h2) - rho^2 G(h1+h2+1)^2 sin^2(pi(h1+h2)/2).
/// The model exists iff the value is > 0. Throws std::domain_error for h outside (0,1).
double g_condition(double h1, double h2, double rho);

/// Supremum of feasible |rho| at fixed (h1, h2); g is decreasing in rho^2,
/// so g(h1, h2, rho) > 0 iff |rho| < max_feasible_rho(h1, h2). Accepts h in [0,1].
double max_feasible_rho(double h1, double h2);

/// Checks the ordering, range and well-posedness constraints.
bool is_feasible(const Theta& t);

/// Throws std::domain_error naming the first violated constraint.
void require_feasible(const Theta& t);

struct MixingMatrix {
    Mat2 w;
    /// Set when the columns are collinear, i.e. 1 + beta*gamma == 0
    /// (the determinant of the unnormalized matrix [[1, beta], [-gamma, 1]]).
    bool singular = false;
};

/// Column-normalized mixing matrix with positive diagonal.
MixingMatrix build_mixing(double beta, double gamma);

/// Wavelet spectrum E(2^j, theta) at one octave.
Sym2 model_spectrum_at(const Theta& t, int octave, const EtaSet& eta);

struct ModelSpectrum {
    int j1 = 1;
    std::vector<Sym2> e;  ///< e[k] is octave j1 + k

    int j2() const { return j1 + static_cast<int>(e.size()) - 1; }
    const Sym2& at(int j) const { return e.at(static_cast<std::size_t>(j - j1)); }
};

/// Throws std::domain_error for infeasible theta, std::invalid_argument for j1 > j2.
ModelSpectrum model_spectrum(const Theta& t, int j1, int j2, const EtaSet& eta);

/// E[dY(t) dY(t+lag)^T] for the increments dY(t) = Y(t+step) - Y(t).
Sym2 increment_covariance(const Theta& t, long lag, long step = 1);

}  // namespace ofbm
