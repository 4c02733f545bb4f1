#include "classbd/synth.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <string>

#include "classbd/common.hpp"
#include "classbd/fft.hpp"

namespace classbd::synth {

void FaultSpec::validate(double sample_rate_hz) const {
    require(sample_rate_hz > 0.0, "FaultSpec: sample rate must be positive");
    require(fault_period_s > 0.0, "FaultSpec: fault_period_s must be positive");
    require(fault_period_s > 2.0 / sample_rate_hz,
            "FaultSpec: fault_period_s must exceed two sample intervals");
    require(resonance_hz > 0.0, "FaultSpec: resonance_hz must be positive");
    require(resonance_hz < sample_rate_hz / 2.0, "FaultSpec: resonance_hz must be below Nyquist");
    require(decay_rate > 0.0, "FaultSpec: decay_rate must be positive");
    require(modulation_period_s >= 0.0, "FaultSpec: modulation_period_s must be non-negative");
    require(std::isfinite(impulse_amplitude), "FaultSpec: impulse_amplitude must be finite");
    require(jitter_fraction >= 0.0 && jitter_fraction <= 0.05,
            "FaultSpec: jitter_fraction must lie in [0, 0.05]");
}

TimeSeries generate_fault_signal(const FaultSpec& spec, double duration_s,
                                 double sample_rate_hz, std::uint64_t seed) {
    spec.validate(sample_rate_hz);
    require(duration_s >= 2.0 * spec.fault_period_s,
            "generate_fault_signal: duration must cover at least two fault periods");

    const std::size_t n = static_cast<std::size_t>(std::floor(duration_s * sample_rate_hz));
    require(n >= 2, "generate_fault_signal: duration too short for the sample rate");

    TimeSeries out(std::vector<double>(n, 0.0), sample_rate_hz);

    // Tail cutoff where exp(-decay*t) < 1e-15: contributions below double
    // round-off for unit-scale signals.
    const double tail_s = 36.0 / spec.decay_rate;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    const double omega = 2.0 * kPi * spec.resonance_hz;
    for (std::size_t i = 0;; ++i) {
        const double nominal = static_cast<double>(i) * spec.fault_period_s;
        if (nominal >= duration_s) break;
        // Drawn even at jitter 0 so the stream layout does not depend on it.
        const double jitter = unit(rng) * spec.jitter_fraction * spec.fault_period_s;
        const double t_i = nominal + jitter;
        if (t_i >= duration_s) continue;

        double q = 1.0;
        if (spec.modulation_period_s > 0.0) {
            q = 0.5 * (1.0 + std::cos(2.0 * kPi * t_i / spec.modulation_period_s));
        }
        const double gain = spec.impulse_amplitude * q;
        if (gain == 0.0) continue;

        const std::size_t first = static_cast<std::size_t>(std::max(0.0, std::ceil(t_i * sample_rate_hz)));
        const std::size_t last = std::min(n - 1, static_cast<std::size_t>(std::floor((t_i + tail_s) * sample_rate_hz)));
        for (std::size_t k = first; k <= last && k < n; ++k) {
            const double dt = static_cast<double>(k) / sample_rate_hz - t_i;
            out.samples[k] += gain * std::exp(-spec.decay_rate * dt) * std::sin(omega * dt);
        }
    }
    return out;
}

NoiseKind noise_kind_from_string(const std::string& s) {
    if (s == "gaussian") return NoiseKind::gaussian;
    if (s == "laplace") return NoiseKind::laplace;
    if (s == "pink") return NoiseKind::pink;
    throw ValidationError("unknown noise kind: " + s);
}

const char* to_string(NoiseKind k) {
    switch (k) {
        case NoiseKind::gaussian: return "gaussian";
        case NoiseKind::laplace: return "laplace";
        case NoiseKind::pink: return "pink";
    }
    return "?";
}

namespace {

// Zero-mean noise with E[n^2] = power for gaussian/laplace; pink noise is
// rescaled to hit the power exactly (its synthesis has arbitrary scale).
std::vector<double> draw_noise(std::size_t length, double power, NoiseKind kind,
                               std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> noise(length);
    switch (kind) {
        case NoiseKind::gaussian: {
            std::normal_distribution<double> dist(0.0, std::sqrt(power));
            for (auto& v : noise) v = dist(rng);
            break;
        }
        case NoiseKind::laplace: {
            // Variance of Laplace(0, b) is 2 b^2.
            const double b = std::sqrt(power / 2.0);
            std::uniform_real_distribution<double> u(-0.5, 0.5);
            for (auto& v : noise) {
                const double r = u(rng);
                v = -b * (r < 0 ? -1.0 : 1.0) * std::log1p(-2.0 * std::abs(r));
            }
            break;
        }
        case NoiseKind::pink: {
            // Frequency-domain synthesis: complex gaussian bins shaped by
            // 1/sqrt(f) so the power spectral density falls as 1/f.
            std::normal_distribution<double> g(0.0, 1.0);
            std::vector<std::complex<double>> bins(length, {0.0, 0.0});
            const std::size_t half = length / 2;
            for (std::size_t k = 1; k <= half; ++k) {
                const double mag = 1.0 / std::sqrt(static_cast<double>(k));
                const std::complex<double> c(g(rng) * mag, g(rng) * mag);
                bins[k] = c;
                if (k != length - k) bins[length - k] = std::conj(c);
            }
            if (length % 2 == 0 && half >= 1) bins[half] = std::complex<double>(bins[half].real(), 0.0);
            auto t = fft_engine::inverse(bins);
            for (std::size_t i = 0; i < length; ++i) noise[i] = t[i].real();
            double p = 0.0;
            for (double v : noise) p += v * v;
            p /= static_cast<double>(length);
            require(p > 0.0, "pink noise synthesis produced zero power");
            const double scale = std::sqrt(power / p);
            for (auto& v : noise) v *= scale;
            break;
        }
    }
    return noise;
}

} // namespace

TimeSeries add_noise_snr(const TimeSeries& signal, double snr_db, NoiseKind kind,
                         std::uint64_t seed) {
    signal.validate("add_noise_snr");
    const double ps = signal_power(signal.samples);
    require(ps > 0.0, "add_noise_snr: signal has zero power");
    const double pn = ps / std::pow(10.0, snr_db / 10.0);
    const auto noise = draw_noise(signal.size(), pn, kind, seed);
    TimeSeries out = signal;
    for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += noise[i];
    return out;
}

TimeSeries noise_with_power(std::size_t length, double sample_rate_hz, double power,
                            NoiseKind kind, std::uint64_t seed) {
    require(length >= 2, "noise_with_power: need at least 2 samples");
    require(sample_rate_hz > 0.0, "noise_with_power: sample rate must be positive");
    require(power > 0.0, "noise_with_power: power must be positive");
    return TimeSeries(draw_noise(length, power, kind, seed), sample_rate_hz);
}

} // namespace classbd::synth
