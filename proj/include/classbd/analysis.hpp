#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "classbd/fft.hpp"
#include "classbd/time_series.hpp"

namespace classbd::dsp {

/// One-sided magnitude spectrum of the signal envelope, bins 0..floor(N/2).
/// Bin 0 is the DC bin: it is kept in the data but carries no cyclic
/// information, so loss and FFI consumers skip it.
struct EnvelopeSpectrum {
    std::vector<double> magnitudes;
    double bin_resolution_hz = 0.0;

    std::size_t size() const { return magnitudes.size(); }
    double max_frequency_hz() const {
        return magnitudes.empty() ? 0.0 : bin_resolution_hz * static_cast<double>(magnitudes.size() - 1);
    }
};

/// Analytic signal z(n) = y(n) + j h(n) via the frequency-domain
/// construction: zero negative-frequency bins, double strictly positive
/// ones, keep DC (and the Nyquist bin for even N) unmodified.
std::vector<std::complex<double>> analytic_signal(const TimeSeries& signal);

/// |z(n)| of the analytic signal.
std::vector<double> envelope(const TimeSeries& signal);

EnvelopeSpectrum envelope_spectrum(const TimeSeries& signal);

/// Local second-order product x(t - floor(tau/2)) * x(t + ceil(tau/2)).
/// Odd lags split floor-left / ceil-right; out-of-range indices are rejected.
/// Property-testing instrumentation, not part of the training path.
double instantaneous_autocorrelation(const TimeSeries& signal, std::size_t t, long tau);

/// Mean of the per-harmonic peaks of the squared envelope spectrum,
/// normalized by its maximum non-DC value; each harmonic i*fc is scanned
/// over the drift window [0.9*i*fc, 1.1*i*fc].
double fault_frequency_index(const EnvelopeSpectrum& es, double fc_hz, int harmonics = 5);

/// Index of the largest non-DC magnitude.
std::size_t non_dc_argmax(const EnvelopeSpectrum& es);

/// One-sided `freq_hz,magnitude` CSV of a spectrum (used by the CLI).
void export_spectrum_csv(const std::string& path, const Spectrum& spectrum);
void export_envelope_spectrum_csv(const std::string& path, const EnvelopeSpectrum& es);

} // namespace classbd::dsp
