#pragma once

#include <cstddef>
#include <vector>

#include "classbd/time_series.hpp"

namespace classbd::med {

/// Unit-norm FIR deconvolution filter.
struct FirFilter {
    std::vector<double> taps;

    double norm() const;
    void renormalize(); ///< scales to ||taps||_2 = 1
};

struct MedResult {
    FirFilter filter;
    TimeSeries output;                  ///< valid-mode convolution, length N - L + 1
    std::vector<double> kurtosis_trace; ///< objective after init and each accepted step
    std::size_t iterations = 0;
    bool converged = false;
};

/// Minimum entropy deconvolution via the Wiggins fixed point: each iteration
/// solves R f = c with R the Toeplitz autocorrelation matrix of x and c the
/// cross-correlation of x with y^3, then renormalizes the filter. Stops on
/// |delta kurtosis| < tol, a decreasing step, or max_iters.
///
/// The filter starts as a delayed unit impulse at tap floor(L/2). If R is
/// ill-conditioned it is regularized with lambda*I, lambda = 1e-8*trace(R)/L.
MedResult med_deconvolve(const TimeSeries& x, std::size_t filter_length,
                         std::size_t max_iters = 100, double tol = 1e-6);

} // namespace classbd::med
