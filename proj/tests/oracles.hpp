// Independent reference implementations used to freeze expected values.
// Everything here is deliberately brute force (O(N^2) transforms, direct
// summation) and shares no code with the library paths it checks.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;
using cd = std::complex<double>;

// Direct O(N^2) DFT, unnormalized forward.
inline std::vector<cd> dft(const std::vector<cd>& x) {
    const std::size_t n = x.size();
    std::vector<cd> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cd acc(0.0, 0.0);
        for (std::size_t m = 0; m < n; ++m) {
            const double ang = -2.0 * kPi * static_cast<double>(k) * static_cast<double>(m) /
                               static_cast<double>(n);
            acc += x[m] * cd(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

inline std::vector<cd> dft_real(const std::vector<double>& x) {
    std::vector<cd> c(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) c[i] = cd(x[i], 0.0);
    return dft(c);
}

// Direct O(N^2) inverse DFT with the 1/N convention.
inline std::vector<cd> idft(const std::vector<cd>& x) {
    const std::size_t n = x.size();
    std::vector<cd> out(n);
    for (std::size_t m = 0; m < n; ++m) {
        cd acc(0.0, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const double ang = 2.0 * kPi * static_cast<double>(k) * static_cast<double>(m) /
                               static_cast<double>(n);
            acc += x[k] * cd(std::cos(ang), std::sin(ang));
        }
        out[m] = acc / static_cast<double>(n);
    }
    return out;
}

// Analytic signal by the direct frequency-domain construction on the naive
// transforms.
inline std::vector<cd> analytic(const std::vector<double>& x) {
    const std::size_t n = x.size();
    auto bins = dft_real(x);
    const std::size_t last_pos = (n - 1) / 2;
    for (std::size_t k = 1; k < n; ++k) {
        if (n % 2 == 0 && k == n / 2) continue;
        if (k <= last_pos)
            bins[k] *= 2.0;
        else
            bins[k] = cd(0.0, 0.0);
    }
    return idft(bins);
}

// One-sided envelope-spectrum magnitudes through the naive path.
inline std::vector<double> envelope_spectrum(const std::vector<double>& x) {
    const auto z = analytic(x);
    std::vector<double> env(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) env[i] = std::abs(z[i]);
    const auto bins = dft_real(env);
    std::vector<double> mags(x.size() / 2 + 1);
    for (std::size_t k = 0; k < mags.size(); ++k) mags[k] = std::abs(bins[k]);
    return mags;
}

// Exact discrete Hilbert kernel for even N: the periodization of 1/(pi t)
// onto the grid, h[m] = (2/N) cot(pi m / N) for odd m, 0 otherwise.
// Circular convolution with it reproduces the frequency-domain transform.
inline std::vector<double> hilbert_circular(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> kernel(n, 0.0);
    for (std::size_t m = 1; m < n; ++m) {
        if (m % 2 == 1)
            kernel[m] = 2.0 / (static_cast<double>(n) * std::tan(kPi * static_cast<double>(m) /
                                                                 static_cast<double>(n)));
    }
    std::vector<double> out(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double acc = 0.0;
        for (std::size_t m = 0; m < n; ++m) acc += kernel[m] * x[(t + n - m) % n];
        out[t] = acc;
    }
    return out;
}

// Same-length linear convolution (cross-correlation layout, matching the
// library's padding convention: out[p] = b + sum_k w[k] x[p + k - (K-1)/2]).
inline std::vector<double> conv_same(const std::vector<double>& x, const std::vector<double>& w,
                                     double bias) {
    const std::size_t n = x.size(), k = w.size();
    const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>((k - 1) / 2);
    std::vector<double> out(n, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
        double acc = bias;
        for (std::size_t j = 0; j < k; ++j) {
            const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(p + j) - shift;
            if (idx >= 0 && idx < static_cast<std::ptrdiff_t>(n))
                acc += w[j] * x[static_cast<std::size_t>(idx)];
        }
        out[p] = acc;
    }
    return out;
}

// Single-channel quadratic neuron in the expanded sum-product form: the
// double sum over f(i,j) = w1(i) w2(j) of lagged products, plus the power
// term, plus the bias cross terms.
inline std::vector<double> qconv_sum_product(const std::vector<double>& x,
                                             const std::vector<double>& w1, double b1,
                                             const std::vector<double>& w2, double b2,
                                             const std::vector<double>& w3, double b3) {
    const std::size_t n = x.size(), k = w1.size();
    const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>((k - 1) / 2);
    auto at = [&](std::ptrdiff_t idx) {
        return (idx >= 0 && idx < static_cast<std::ptrdiff_t>(n)) ? x[static_cast<std::size_t>(idx)]
                                                                  : 0.0;
    };
    std::vector<double> out(n, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
        double cross = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) {
                const double xi = at(static_cast<std::ptrdiff_t>(p + i) - shift);
                const double xj = at(static_cast<std::ptrdiff_t>(p + j) - shift);
                cross += w1[i] * w2[j] * xi * xj;
            }
        double lin1 = 0.0, lin2 = 0.0, pow_term = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double xi = at(static_cast<std::ptrdiff_t>(p + i) - shift);
            lin1 += w1[i] * xi;
            lin2 += w2[i] * xi;
            pow_term += w3[i] * xi * xi;
        }
        out[p] = cross + b2 * lin1 + b1 * lin2 + b1 * b2 + pow_term + b3;
    }
    return out;
}

// Circular convolution of x with the impulse response of per-bin gains.
inline std::vector<double> circular_conv_with_gain_response(const std::vector<double>& x,
                                                            const std::vector<cd>& gains_full) {
    const auto h = idft(gains_full);
    const std::size_t n = x.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        cd acc(0.0, 0.0);
        for (std::size_t m = 0; m < n; ++m) acc += h[m] * x[(t + n - m) % n];
        out[t] = acc.real();
    }
    return out;
}

inline std::vector<double> random_signal(std::size_t n, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, scale);
    std::vector<double> x(n);
    for (auto& v : x) v = g(rng);
    return x;
}

} // namespace oracle
