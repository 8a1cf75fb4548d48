#pragma once

#include <vector>

#include "ofbm/interval.hpp"
#include "ofbm/objective.hpp"

namespace ofbm {

struct BoundResult {
    double lower = 0.0;
    /// Set when some model entry's enclosure contains 0, so its log2 is
    /// unbounded below and that term contributes little or nothing.
    bool weak = false;
};

/// Per-term view of one bound evaluation.
struct BoundTerm {
    int j = 0;
    int entry = 0;  ///< 0: (1,1), 1: (1,2), 2: (2,2)
    Interval model;      ///< enclosure of E_entry(2^j)
    Interval residual;   ///< enclosure of log2|S| - log2|E|
    double lower = 0.0;  ///< lower bound of the squared residual
    bool weak = false;
    bool dropped = false;
};

/// Certified lower bound of the objective over every theta in the box.
///
/// Intervals are propagated through the spectrum formulas term by term; the
/// mixing coefficients use exact monotone images in beta and gamma.
BoundResult bound_cn(const ParamBox& box, const Objective& objective);

/// Bound of a sub-box of a region already bounded by `parent_lower`: the
/// larger of the two. The mean-value forms inside bound_cn are not
/// inclusion-monotone on their own; this is.
BoundResult refine_bound(const ParamBox& child, const Objective& objective, double parent_lower);

std::vector<BoundTerm> bound_terms(const ParamBox& box, const Objective& objective);

}  // namespace ofbm
