#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "classbd/analysis.hpp"
#include "classbd/common.hpp"
#include "classbd/fft.hpp"
#include "classbd/synth.hpp"
#include "oracles.hpp"

using namespace classbd;

TEST_CASE("fft: delta transforms to all ones") {
    TimeSeries x({1.0, 0.0, 0.0, 0.0}, 4.0);
    const auto spec = fft(x);
    for (const auto& b : spec.bins) {
        CHECK(b.real() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(b.imag()) <= 1e-12);
    }
}

TEST_CASE("fft: cosine concentrates energy in bins k and N-k") {
    const std::size_t n = 64, k = 5;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = std::cos(2.0 * kPi * static_cast<double>(k * i) / static_cast<double>(n));
    const auto spec = fft(TimeSeries(x, 64.0));
    for (std::size_t j = 0; j < n; ++j) {
        const double mag = std::abs(spec.bins[j]);
        if (j == k || j == n - k)
            CHECK(mag == doctest::Approx(n / 2.0).epsilon(1e-9));
        else
            CHECK(mag <= 1e-9 * n);
    }
}

TEST_CASE("fft: non-power-of-two length matches the O(N^2) DFT oracle") {
    for (std::size_t n : {1000u, 729u, 97u}) {
        const auto x = oracle::random_signal(n, 31 + n);
        const auto fast = fft_engine::forward_real(x);
        const auto slow = oracle::dft_real(x);
        double max_err = 0.0, scale = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            max_err = std::max(max_err, std::abs(fast[k] - slow[k]));
            scale = std::max(scale, std::abs(slow[k]));
        }
        CHECK(max_err / scale <= 1e-9);
    }
}

TEST_CASE("fft: round trip at 1e-9 for power-of-two and general lengths") {
    for (std::size_t n : {64u, 1000u, 2048u, 1531u}) {
        TimeSeries x(oracle::random_signal(n, n), 1000.0);
        const auto back = ifft(fft(x));
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            num += (back.samples[i] - x.samples[i]) * (back.samples[i] - x.samples[i]);
            den += x.samples[i] * x.samples[i];
        }
        CHECK(std::sqrt(num / den) <= 1e-9);
    }
}

TEST_CASE("fft: Parseval's identity under the documented normalization") {
    const std::size_t n = 1024;
    const auto x = oracle::random_signal(n, 77);
    const auto spec = fft_engine::forward_real(x);
    double time_energy = 0.0, freq_energy = 0.0;
    for (double v : x) time_energy += v * v;
    for (const auto& b : spec) freq_energy += std::norm(b);
    CHECK(freq_energy / static_cast<double>(n) ==
          doctest::Approx(time_energy).epsilon(1e-9));
}

TEST_CASE("fft: linearity") {
    const std::size_t n = 512;
    const auto a = oracle::random_signal(n, 1);
    const auto b = oracle::random_signal(n, 2);
    std::vector<double> combo(n);
    for (std::size_t i = 0; i < n; ++i) combo[i] = 2.5 * a[i] - 1.25 * b[i];
    const auto fa = fft_engine::forward_real(a);
    const auto fb = fft_engine::forward_real(b);
    const auto fc = fft_engine::forward_real(combo);
    for (std::size_t k = 0; k < n; ++k)
        CHECK(std::abs(fc[k] - (2.5 * fa[k] - 1.25 * fb[k])) <= 1e-8);
}

TEST_CASE("fft: empty and too-short inputs are rejected") {
    CHECK_THROWS_AS(fft(TimeSeries({1.0}, 10.0)), ValidationError);
    CHECK_THROWS_AS(fft(TimeSeries({}, 10.0)), ValidationError);
}

TEST_CASE("analytic signal: cosine has unit envelope") {
    const std::size_t n = 256, k = 12;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = std::cos(2.0 * kPi * static_cast<double>(k * i) / static_cast<double>(n));
    const auto z = dsp::analytic_signal(TimeSeries(x, 256.0));
    for (const auto& v : z) CHECK(std::abs(std::abs(v) - 1.0) <= 1e-6);
}

TEST_CASE("analytic signal: constant input keeps its magnitude") {
    const auto z = dsp::analytic_signal(TimeSeries(std::vector<double>(100, -2.5), 10.0));
    for (const auto& v : z) {
        CHECK(v.real() == doctest::Approx(-2.5).epsilon(1e-12));
        CHECK(std::abs(v.imag()) <= 1e-9);
    }
}

TEST_CASE("analytic signal: real part reproduces the input") {
    const auto x = oracle::random_signal(333, 8);
    const auto z = dsp::analytic_signal(TimeSeries(x, 333.0));
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(std::abs(z[i].real() - x[i]) <= 1e-9 * std::max(1.0, std::abs(x[i])));
}

TEST_CASE("analytic signal: imaginary part matches the periodized Hilbert kernel oracle") {
    const std::size_t n = 64;
    const auto x = oracle::random_signal(n, 1234);
    const auto z = dsp::analytic_signal(TimeSeries(x, 64.0));
    const auto href = oracle::hilbert_circular(x);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(z[i].imag() - href[i]) <= 1e-6);
}

TEST_CASE("envelope spectrum: AM signal peaks at the modulation bin") {
    const std::size_t n = 2048;
    const double fs = 2048.0, fm = 8.0, fc = 200.0;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        x[i] = (1.0 + 0.5 * std::cos(2.0 * kPi * fm * t)) * std::cos(2.0 * kPi * fc * t);
    }
    const auto es = dsp::envelope_spectrum(TimeSeries(x, fs));
    CHECK(dsp::non_dc_argmax(es) == static_cast<std::size_t>(fm));

    // cross-check magnitudes against the all-oracle path
    const auto ref = oracle::envelope_spectrum(x);
    for (std::size_t k = 0; k < es.size(); k += 97)
        CHECK(es.magnitudes[k] == doctest::Approx(ref[k]).epsilon(1e-8));
}

TEST_CASE("envelope spectrum: constant signal is flat") {
    const auto es = dsp::envelope_spectrum(TimeSeries(std::vector<double>(512, 3.0), 512.0));
    for (std::size_t k = 1; k < es.size(); ++k) CHECK(es.magnitudes[k] <= 1e-9);
}

TEST_CASE("envelope spectrum: envelope of c*x scales by c") {
    const auto x = oracle::random_signal(400, 44);
    auto scaled = x;
    for (auto& v : scaled) v *= 3.5;
    const auto e1 = dsp::envelope(TimeSeries(x, 400.0));
    const auto e2 = dsp::envelope(TimeSeries(scaled, 400.0));
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(e2[i] == doctest::Approx(3.5 * e1[i]).epsilon(1e-9));
}

TEST_CASE("instantaneous autocorrelation: tau 0 gives local power") {
    const auto x = oracle::random_signal(64, 3);
    TimeSeries ts(x, 64.0);
    for (std::size_t t : {0u, 13u, 63u}) {
        const double r = dsp::instantaneous_autocorrelation(ts, t, 0);
        CHECK(r == doctest::Approx(x[t] * x[t]));
        CHECK(r >= 0.0);
    }
}

TEST_CASE("instantaneous autocorrelation: white noise averages to zero") {
    const std::size_t n = 8192;
    const auto x = oracle::random_signal(n, 314);
    TimeSeries ts(x, 1000.0);
    const long tau = 6;
    double acc = 0.0, acc2 = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 3; t + 3 < n; ++t) {
        const double r = dsp::instantaneous_autocorrelation(ts, t, tau);
        acc += r;
        acc2 += r * r;
        ++count;
    }
    const double mean_r = acc / static_cast<double>(count);
    const double var = acc2 / static_cast<double>(count) - mean_r * mean_r;
    const double stderr_r = std::sqrt(var / static_cast<double>(count));
    CHECK(std::abs(mean_r) <= 3.0 * stderr_r);
}

TEST_CASE("instantaneous autocorrelation: periodic impulse train is exactly T-periodic") {
    const std::size_t n = 1000, period = 50;
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < n; i += period) x[i] = 1.0;
    TimeSeries ts(x, 1000.0);
    for (long tau : {0L, 3L, 10L}) {
        for (std::size_t t = 100; t + period + 20 < n; t += 7) {
            CHECK(dsp::instantaneous_autocorrelation(ts, t, tau) ==
                  dsp::instantaneous_autocorrelation(ts, t + period, tau));
        }
    }
}

TEST_CASE("instantaneous autocorrelation: out-of-range indices rejected") {
    TimeSeries ts(oracle::random_signal(32, 2), 32.0);
    CHECK_THROWS_AS(dsp::instantaneous_autocorrelation(ts, 0, 4), ValidationError);
    CHECK_THROWS_AS(dsp::instantaneous_autocorrelation(ts, 31, 4), ValidationError);
}

TEST_CASE("FFI: exact peaks at every harmonic give 1.0") {
    dsp::EnvelopeSpectrum es;
    es.bin_resolution_hz = 1.0;
    es.magnitudes.assign(601, 0.0);
    const double a = 0.7;
    for (int i = 1; i <= 5; ++i) es.magnitudes[static_cast<std::size_t>(100 * i)] = a;
    CHECK(dsp::fault_frequency_index(es, 100.0, 5) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("FFI: empty harmonic windows give 0") {
    dsp::EnvelopeSpectrum es;
    es.bin_resolution_hz = 1.0;
    es.magnitudes.assign(601, 0.0);
    es.magnitudes[50] = 2.0; // off-harmonic content only
    CHECK(dsp::fault_frequency_index(es, 100.0, 5) == doctest::Approx(0.0));
}

TEST_CASE("FFI: scale invariance") {
    const auto sig = synth::generate_fault_signal(
        [] {
            synth::FaultSpec s;
            s.fault_period_s = 1.0 / 64.0;
            s.resonance_hz = 1000.0;
            s.decay_rate = 500.0;
            return s;
        }(),
        0.5, 8192.0, 5);
    auto es = dsp::envelope_spectrum(sig);
    const double base = dsp::fault_frequency_index(es, 64.0, 5);
    for (auto& m : es.magnitudes) m *= 42.0;
    CHECK(dsp::fault_frequency_index(es, 64.0, 5) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("FFI: clean beats -10 dB noisy in at least 95 of 100 trials") {
    // sharp impacts (flat envelope harmonics) and coarse bins keep the
    // broadband noise floor out of the harmonic windows
    synth::FaultSpec spec;
    spec.fault_period_s = 1.0 / 64.0;
    spec.resonance_hz = 3000.0;
    spec.decay_rate = 4500.0;
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto clean = synth::generate_fault_signal(spec, 0.125, 16384.0, seed);
        const auto noisy = synth::add_noise_snr(clean, -10.0, synth::NoiseKind::gaussian, seed + 1000);
        const double f_clean = dsp::fault_frequency_index(dsp::envelope_spectrum(clean), 64.0, 5);
        const double f_noisy = dsp::fault_frequency_index(dsp::envelope_spectrum(noisy), 64.0, 5);
        if (f_clean > f_noisy) ++wins;
    }
    CHECK(wins >= 95);
}

TEST_CASE("FFI: harmonic window beyond Nyquist is rejected") {
    dsp::EnvelopeSpectrum es;
    es.bin_resolution_hz = 1.0;
    es.magnitudes.assign(101, 1.0);
    CHECK_THROWS_AS(dsp::fault_frequency_index(es, 50.0, 5), ValidationError);
}
