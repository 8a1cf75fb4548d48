#pragma once

#include <string>
#include <vector>

namespace ofbm {

/// Orthonormal compactly supported wavelet given by its two-scale filters.
struct WaveletFilter {
    std::string id;   ///< "db2", "db3", "sym4"
    int n_psi = 0;    ///< number of vanishing moments
    std::vector<double> lowpass;
    std::vector<double> highpass;  ///< g[l] = (-1)^l h[L-1-l]

    std::size_t length() const { return lowpass.size(); }
};

/// Least-asymmetric Daubechies filter with `n_psi` vanishing moments
/// (n_psi in {2, 3, 4}; for 2 and 3 it coincides with the extremal-phase filter).
/// Throws std::invalid_argument for unsupported orders.
const WaveletFilter& wavelet_filter(int n_psi);

/// Largest deviation from the orthonormality and vanishing-moment identities.
double filter_defect(const WaveletFilter& f);

/// Throws std::logic_error when `filter_defect(f) > tol`.
void check_filter(const WaveletFilter& f, double tol = 1e-12);

}  // namespace ofbm
