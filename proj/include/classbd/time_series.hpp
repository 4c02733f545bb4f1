#pragma once

#include <cstddef>
#include <vector>

namespace classbd {

/// Uniformly sampled real-valued signal. The universal currency of the
/// pipeline: generators produce it, filters map it to itself, losses and
/// spectra consume it.
struct TimeSeries {
    std::vector<double> samples;
    double sample_rate_hz = 0.0;

    TimeSeries() = default;
    TimeSeries(std::vector<double> s, double fs) : samples(std::move(s)), sample_rate_hz(fs) {}

    std::size_t size() const { return samples.size(); }
    double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }

    /// Throws ValidationError unless non-empty, fs > 0 and all samples finite.
    void validate(const char* what = "TimeSeries") const;
};

/// Mean of squares. The power convention used for SNR throughout.
double signal_power(const std::vector<double>& x);

/// Sample mean.
double mean(const std::vector<double>& x);

/// Sample standard deviation, n-1 denominator.
double sample_std(const std::vector<double>& x);

/// Z-score standardization: output has mean 0 and sample std 1.
/// Constant signals (zero variance) are rejected.
TimeSeries zscore_normalize(const TimeSeries& signal);

/// 10*log10(Ps/Pn) of two sample buffers, Ps from `signal`, Pn from `noise`.
double measure_snr_db(const std::vector<double>& signal, const std::vector<double>& noise);

} // namespace classbd
