#include "classbd/fft.hpp"

#include <cmath>
#include <cstdint>

#include "classbd/common.hpp"

namespace classbd {
namespace fft_engine {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Iterative radix-2 Cooley-Tukey, n a power of two.
void radix2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Bluestein's algorithm for arbitrary n, expressed through a power-of-two
// circular convolution. Chirp phases use n^2 mod 2n to stay exact for large n.
void bluestein(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    const std::size_t m = next_pow2(2 * n - 1);
    std::vector<std::complex<double>> chirp(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t q = (static_cast<std::uint64_t>(i) * i) % (2 * n);
        const double ang = (inverse ? 1.0 : -1.0) * kPi * static_cast<double>(q) / static_cast<double>(n);
        chirp[i] = std::complex<double>(std::cos(ang), std::sin(ang));
    }
    std::vector<std::complex<double>> fa(m, {0.0, 0.0}), fb(m, {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) fa[i] = a[i] * chirp[i];
    fb[0] = std::conj(chirp[0]);
    for (std::size_t i = 1; i < n; ++i) fb[i] = fb[m - i] = std::conj(chirp[i]);
    radix2(fa, false);
    radix2(fb, false);
    for (std::size_t i = 0; i < m; ++i) fa[i] *= fb[i];
    radix2(fa, true);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < n; ++i) a[i] = fa[i] * scale * chirp[i];
}

} // namespace

void transform(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    if (is_pow2(n)) {
        radix2(a, inverse);
    } else {
        bluestein(a, inverse);
    }
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& v : a) v *= scale;
    }
}

std::vector<std::complex<double>> forward_real(const std::vector<double>& x) {
    std::vector<std::complex<double>> a(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) a[i] = std::complex<double>(x[i], 0.0);
    transform(a, false);
    return a;
}

std::vector<std::complex<double>> inverse(const std::vector<std::complex<double>>& bins) {
    std::vector<std::complex<double>> a = bins;
    transform(a, true);
    return a;
}

} // namespace fft_engine

Spectrum fft(const TimeSeries& signal) {
    signal.validate("fft");
    require(signal.size() >= 2, "fft: need at least 2 samples");
    return Spectrum{fft_engine::forward_real(signal.samples), signal.sample_rate_hz};
}

TimeSeries ifft(const Spectrum& spectrum) {
    require(!spectrum.bins.empty(), "ifft: empty spectrum");
    require(spectrum.sample_rate_hz > 0.0, "ifft: sample_rate_hz must be positive");
    const auto full = fft_engine::inverse(spectrum.bins);
    TimeSeries out;
    out.sample_rate_hz = spectrum.sample_rate_hz;
    out.samples.resize(full.size());
    for (std::size_t i = 0; i < full.size(); ++i) out.samples[i] = full[i].real();
    return out;
}

} // namespace classbd
