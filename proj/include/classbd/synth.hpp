#pragma once

#include <cstdint>
#include <string>

#include "classbd/time_series.hpp"

namespace classbd::synth {

/// Parameters of the ideal repetitive-impact signal model
///   x(t) = sum_i p(t - t_i) * q(t_i)
/// with p a decaying resonance, q a raised-cosine (or constant) modulation
/// and t_i spaced fault_period_s apart up to a bounded random drift.
struct FaultSpec {
    double fault_period_s = 0.0;      ///< impact interval T (s)
    double resonance_hz = 0.0;        ///< carrier frequency of p
    double decay_rate = 0.0;          ///< exponential decay of p (1/s)
    double modulation_period_s = 0.0; ///< period of q; 0 means q == 1
    double impulse_amplitude = 1.0;
    double jitter_fraction = 0.0;     ///< arrival-time drift, fraction of T, in [0, 0.05]

    /// Checks the spec against a target sample rate.
    void validate(double sample_rate_hz) const;
};

/// Synthesizes the clean impact train on a uniform sample grid.
/// Deterministic for a fixed seed; additive noise is a separate step.
TimeSeries generate_fault_signal(const FaultSpec& spec, double duration_s,
                                 double sample_rate_hz, std::uint64_t seed);

enum class NoiseKind { gaussian, laplace, pink };

NoiseKind noise_kind_from_string(const std::string& s);
const char* to_string(NoiseKind k);

/// Adds noise calibrated against *this* segment's power:
/// Pn = Ps / 10^(snr_db/10). Gaussian and Laplace draw from the nominal
/// distribution with variance Pn; pink noise is synthesized in the frequency
/// domain with density ~ 1/f and rescaled empirically to Pn.
TimeSeries add_noise_snr(const TimeSeries& signal, double snr_db, NoiseKind kind,
                         std::uint64_t seed);

/// Pure noise with a prescribed power. Used for classes that have no
/// deterministic source signal (healthy runs modelled as broadband floor).
TimeSeries noise_with_power(std::size_t length, double sample_rate_hz, double power,
                            NoiseKind kind, std::uint64_t seed);

} // namespace classbd::synth
