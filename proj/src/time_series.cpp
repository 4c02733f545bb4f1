#include "classbd/time_series.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "classbd/common.hpp"

namespace classbd {

void TimeSeries::validate(const char* what) const {
    require(!samples.empty(), std::string(what) + ": signal must be non-empty");
    require(sample_rate_hz > 0.0, std::string(what) + ": sample_rate_hz must be positive");
    for (double v : samples) {
        if (!std::isfinite(v)) throw ValidationError(std::string(what) + ": signal contains non-finite samples");
    }
}

double signal_power(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return acc / static_cast<double>(x.size());
}

double mean(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (double v : x) acc += v;
    return acc / static_cast<double>(x.size());
}

double sample_std(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    const double mu = mean(x);
    double acc = 0.0;
    for (double v : x) acc += (v - mu) * (v - mu);
    return std::sqrt(acc / static_cast<double>(x.size() - 1));
}

TimeSeries zscore_normalize(const TimeSeries& signal) {
    signal.validate("zscore_normalize");
    require(signal.size() >= 2, "zscore_normalize: need at least 2 samples");
    const double mu = mean(signal.samples);
    const double sd = sample_std(signal.samples);
    double max_abs = 0.0;
    for (double v : signal.samples) max_abs = std::max(max_abs, std::abs(v));
    // constant up to accumulation round-off counts as zero variance
    require(sd > 1e-12 * std::max(1.0, max_abs),
            "zscore_normalize: constant signal has zero variance");
    TimeSeries out = signal;
    for (double& v : out.samples) v = (v - mu) / sd;
    return out;
}

double measure_snr_db(const std::vector<double>& signal, const std::vector<double>& noise) {
    const double ps = signal_power(signal);
    const double pn = signal_power(noise);
    require(ps > 0.0 && pn > 0.0, "measure_snr_db: both buffers need nonzero power");
    return 10.0 * std::log10(ps / pn);
}

} // namespace classbd
