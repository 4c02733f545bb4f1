#include "classbd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "classbd/common.hpp"

namespace classbd::dsp {

std::vector<std::complex<double>> analytic_signal(const TimeSeries& signal) {
    signal.validate("analytic_signal");
    const std::size_t n = signal.size();
    auto bins = fft_engine::forward_real(signal.samples);
    const std::size_t last_pos = (n - 1) / 2; // last strictly positive frequency bin
    for (std::size_t k = 1; k < n; ++k) {
        if (n % 2 == 0 && k == n / 2) continue; // Nyquist stays unmodified
        if (k <= last_pos) {
            bins[k] *= 2.0;
        } else {
            bins[k] = {0.0, 0.0};
        }
    }
    return fft_engine::inverse(bins);
}

std::vector<double> envelope(const TimeSeries& signal) {
    const auto z = analytic_signal(signal);
    std::vector<double> env(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) env[i] = std::abs(z[i]);
    return env;
}

EnvelopeSpectrum envelope_spectrum(const TimeSeries& signal) {
    const auto env = envelope(signal);
    const auto bins = fft_engine::forward_real(env);
    EnvelopeSpectrum es;
    es.bin_resolution_hz = signal.sample_rate_hz / static_cast<double>(env.size());
    es.magnitudes.resize(env.size() / 2 + 1);
    for (std::size_t k = 0; k < es.magnitudes.size(); ++k) es.magnitudes[k] = std::abs(bins[k]);
    return es;
}

double instantaneous_autocorrelation(const TimeSeries& signal, std::size_t t, long tau) {
    signal.validate("instantaneous_autocorrelation");
    // floor/ceil halves: for tau = 3 the pair is (t-1, t+2); negative lags
    // reuse the same pair, so R(t, -tau) = R(t, tau).
    const long lo_off = static_cast<long>(std::floor(static_cast<double>(tau) / 2.0));
    const long hi_off = static_cast<long>(std::ceil(static_cast<double>(tau) / 2.0));
    const long lo = static_cast<long>(t) - lo_off;
    const long hi = static_cast<long>(t) + hi_off;
    const long n = static_cast<long>(signal.size());
    require(lo >= 0 && lo < n && hi >= 0 && hi < n,
            "instantaneous_autocorrelation: t +/- tau/2 out of range");
    return signal.samples[static_cast<std::size_t>(lo)] * signal.samples[static_cast<std::size_t>(hi)];
}

double fault_frequency_index(const EnvelopeSpectrum& es, double fc_hz, int harmonics) {
    require(!es.magnitudes.empty(), "fault_frequency_index: empty spectrum");
    require(es.bin_resolution_hz > 0.0, "fault_frequency_index: bin resolution must be positive");
    require(fc_hz > 0.0, "fault_frequency_index: fc must be positive");
    require(harmonics > 0, "fault_frequency_index: harmonics must be positive");
    require(static_cast<double>(harmonics) * fc_hz * 1.1 <= es.max_frequency_hz(),
            "fault_frequency_index: harmonic window exceeds the spectrum range");

    // Squared spectrum, normalized by its max non-DC value.
    double max_sq = 0.0;
    for (std::size_t k = 1; k < es.magnitudes.size(); ++k)
        max_sq = std::max(max_sq, es.magnitudes[k] * es.magnitudes[k]);
    if (max_sq <= 0.0) return 0.0;

    double acc = 0.0;
    for (int i = 1; i <= harmonics; ++i) {
        const double lo_hz = 0.9 * static_cast<double>(i) * fc_hz;
        const double hi_hz = 1.1 * static_cast<double>(i) * fc_hz;
        std::size_t lo = static_cast<std::size_t>(std::ceil(lo_hz / es.bin_resolution_hz));
        std::size_t hi = static_cast<std::size_t>(std::floor(hi_hz / es.bin_resolution_hz));
        lo = std::max<std::size_t>(lo, 1);
        hi = std::min(hi, es.magnitudes.size() - 1);
        double peak = 0.0;
        for (std::size_t k = lo; k <= hi && k < es.magnitudes.size(); ++k)
            peak = std::max(peak, es.magnitudes[k] * es.magnitudes[k] / max_sq);
        acc += peak;
    }
    return acc / static_cast<double>(harmonics);
}

std::size_t non_dc_argmax(const EnvelopeSpectrum& es) {
    require(es.magnitudes.size() >= 2, "non_dc_argmax: spectrum too short");
    std::size_t best = 1;
    for (std::size_t k = 2; k < es.magnitudes.size(); ++k)
        if (es.magnitudes[k] > es.magnitudes[best]) best = k;
    return best;
}

namespace {

void write_csv(const std::string& path, const std::vector<double>& mags, double df) {
    std::ofstream outf(path);
    require(outf.good(), "export spectrum: cannot open " + path);
    outf << "freq_hz,magnitude\n";
    char buf[64];
    for (std::size_t k = 0; k < mags.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g\n", df * static_cast<double>(k), mags[k]);
        outf << buf;
    }
}

} // namespace

void export_spectrum_csv(const std::string& path, const Spectrum& spectrum) {
    const std::size_t n = spectrum.bins.size();
    std::vector<double> mags(n / 2 + 1);
    for (std::size_t k = 0; k < mags.size(); ++k) mags[k] = std::abs(spectrum.bins[k]);
    write_csv(path, mags, spectrum.bin_resolution_hz());
}

void export_envelope_spectrum_csv(const std::string& path, const EnvelopeSpectrum& es) {
    write_csv(path, es.magnitudes, es.bin_resolution_hz);
}

} // namespace classbd::dsp
