#pragma once

#include <complex>
#include <vector>

#include "classbd/time_series.hpp"

namespace classbd {

/// Full two-sided DFT of a signal. Convention, fixed project-wide:
/// unnormalized forward, 1/N on the inverse. Bin k sits at k*fs/N Hz.
struct Spectrum {
    std::vector<std::complex<double>> bins;
    double sample_rate_hz = 0.0;

    std::size_t size() const { return bins.size(); }
    double bin_resolution_hz() const { return sample_rate_hz / static_cast<double>(bins.size()); }
};

namespace fft_engine {

/// In-place complex FFT for any length >= 1 (radix-2 for powers of two,
/// Bluestein otherwise). inverse=true applies the 1/N scaling.
void transform(std::vector<std::complex<double>>& a, bool inverse);

/// Unnormalized forward DFT of a real buffer.
std::vector<std::complex<double>> forward_real(const std::vector<double>& x);

/// 1/N inverse of a complex spectrum; returns the full complex result.
std::vector<std::complex<double>> inverse(const std::vector<std::complex<double>>& bins);

} // namespace fft_engine

/// Forward transform of a signal (length >= 2).
Spectrum fft(const TimeSeries& signal);

/// Inverse transform; imaginary residue of a real signal's spectrum stays
/// below 1e-9 relative and is dropped.
TimeSeries ifft(const Spectrum& spectrum);

} // namespace classbd
