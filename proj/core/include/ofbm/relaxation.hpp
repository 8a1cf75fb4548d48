#pragma once

#include <cstddef>
#include <vector>

#include "ofbm/interval.hpp"

namespace ofbm {

/// Inner approximation of the feasible set as a union of boxes
/// T_i x [0, rho_i] x [0, sigma_max]^2 x [-1, 1]^2, where T_i is a square of
/// side 1/grid in the (h1, h2) plane and rho_i a certified lower bound of the
/// largest feasible correlation over T_i.
struct Relaxation {
    int grid = 0;
    double sigma_max = 0.0;
    std::vector<ParamBox> cells;
};

/// Certified lower bound (within `tol`) of min max_feasible_rho over the
/// rectangle [h1] x [h2], found by interval subdivision.
double min_feasible_rho(const Interval& h1, const Interval& h2, double tol = 1e-6);

/// Interval enclosure of max_feasible_rho over a rectangle inside [0, 1]^2.
Interval feasible_rho_enclosure(const Interval& h1, const Interval& h2);

/// Keeps squares that are not entirely below the diagonal h1 = h2; squares
/// on the diagonal are kept whole. Throws std::invalid_argument for grid < 2
/// or sigma_max <= 0.
Relaxation build_relaxation(int grid, double sigma_max);

/// Membership of theta in some cell of the relaxation.
bool relaxation_contains(const Relaxation& r, const Theta& t);

}  // namespace ofbm
