#include "classbd/med.hpp"

#include <cmath>

#include "classbd/common.hpp"
#include "classbd/losses.hpp"

namespace classbd::med {

double FirFilter::norm() const {
    double acc = 0.0;
    for (double v : taps) acc += v * v;
    return std::sqrt(acc);
}

void FirFilter::renormalize() {
    const double n = norm();
    require(n > 0.0, "FirFilter: cannot normalize a zero filter");
    for (double& v : taps) v /= n;
}

namespace {

// Valid-mode convolution: y(i) = sum_l f(l) x(i + L - 1 - l), i = 0..N-L.
std::vector<double> filter_valid(const std::vector<double>& x, const std::vector<double>& f) {
    const std::size_t n = x.size(), l = f.size();
    std::vector<double> y(n - l + 1, 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < l; ++k) acc += f[k] * x[i + l - 1 - k];
        y[i] = acc;
    }
    return y;
}

// In-place Cholesky; returns false if the matrix is not positive definite.
bool cholesky(std::vector<double>& a, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double dj = std::sqrt(d);
        a[j * n + j] = dj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / dj;
        }
    }
    return true;
}

std::vector<double> cholesky_solve(const std::vector<double>& chol, std::size_t n,
                                   const std::vector<double>& rhs) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = rhs[i];
        for (std::size_t k = 0; k < i; ++k) s -= chol[i * n + k] * y[k];
        y[i] = s / chol[i * n + i];
    }
    std::vector<double> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= chol[k * n + ii] * x[k];
        x[ii] = s / chol[ii * n + ii];
    }
    return x;
}

} // namespace

MedResult med_deconvolve(const TimeSeries& x, std::size_t filter_length,
                         std::size_t max_iters, double tol) {
    x.validate("med_deconvolve");
    require(filter_length >= 1, "med_deconvolve: filter_length must be >= 1");
    require(x.size() > filter_length, "med_deconvolve: signal must be longer than the filter");
    require(max_iters >= 1, "med_deconvolve: max_iters must be >= 1");
    require(tol > 0.0, "med_deconvolve: tol must be positive");

    const std::size_t n = x.size(), l = filter_length;

    // Toeplitz autocorrelation matrix from the lag products of x.
    std::vector<double> r(l, 0.0);
    for (std::size_t d = 0; d < l; ++d) {
        double acc = 0.0;
        for (std::size_t i = 0; i + d < n; ++i) acc += x.samples[i] * x.samples[i + d];
        r[d] = acc;
    }
    require(r[0] > 0.0, "med_deconvolve: zero-power input");

    auto toeplitz = [&](double reg) {
        std::vector<double> a(l * l);
        for (std::size_t i = 0; i < l; ++i)
            for (std::size_t j = 0; j < l; ++j)
                a[i * l + j] = r[static_cast<std::size_t>(std::llabs(
                    static_cast<long long>(i) - static_cast<long long>(j)))];
        for (std::size_t i = 0; i < l; ++i) a[i * l + i] += reg;
        return a;
    };

    // Factor once; the fixed point reuses the same normal matrix.
    std::vector<double> chol = toeplitz(0.0);
    if (!cholesky(chol, l)) {
        const double lambda = 1e-8 * r[0]; // trace(R)/L = r(0)
        chol = toeplitz(lambda);
        if (!cholesky(chol, l))
            throw NumericalError("med_deconvolve: autocorrelation matrix is singular even after regularization");
    }

    MedResult res;
    res.filter.taps.assign(l, 0.0);
    res.filter.taps[l / 2] = 1.0;
    res.output = TimeSeries(filter_valid(x.samples, res.filter.taps), x.sample_rate_hz);
    double kurt = loss::kurtosis(res.output.samples);
    res.kurtosis_trace.push_back(kurt);

    for (std::size_t it = 0; it < max_iters; ++it) {
        // Cross-correlation of x with y^3.
        std::vector<double> c(l, 0.0);
        for (std::size_t k = 0; k < l; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < res.output.size(); ++i) {
                const double y = res.output.samples[i];
                acc += y * y * y * x.samples[i + l - 1 - k];
            }
            c[k] = acc;
        }

        FirFilter cand{cholesky_solve(chol, l, c)};
        if (cand.norm() <= 0.0) break;
        cand.renormalize();

        const auto y_new = filter_valid(x.samples, cand.taps);
        const double kurt_new = loss::kurtosis(y_new);
        res.iterations = it + 1;

        if (kurt_new < kurt - 1e-9 * std::max(1.0, std::abs(kurt))) break; // decreasing step

        res.filter = cand;
        res.output.samples = y_new;
        res.kurtosis_trace.push_back(kurt_new);
        const double delta = std::abs(kurt_new - kurt);
        kurt = kurt_new;
        if (delta < tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

} // namespace classbd::med
