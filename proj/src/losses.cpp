#include "classbd/losses.hpp"

#include <algorithm>
#include <cmath>

#include "classbd/common.hpp"

namespace classbd::loss {

double kurtosis(const std::vector<double>& y) {
    require(!y.empty(), "kurtosis: empty input");
    double s2 = 0.0, s4 = 0.0;
    for (double v : y) {
        const double v2 = v * v;
        s2 += v2;
        s4 += v2 * v2;
    }
    require(s2 > 0.0, "kurtosis: all-zero input");
    return s4 / (s2 * s2);
}

double g_lp_lq_ratio(const std::vector<double>& x, double p, double q) {
    require(!x.empty(), "g_lp_lq: empty input");
    require(p > 0.0 && q > 0.0, "g_lp_lq: p and q must be positive");
    double num = 0.0, den = 0.0;
    for (double v : x) {
        const double a = std::abs(v);
        num += std::pow(a, p);
        den += std::pow(a, q);
    }
    require(den > 0.0, "g_lp_lq: zero input");
    return num / std::pow(den, p / q);
}

double g_lp_lq(const std::vector<double>& x, double p, double q) {
    const double ratio = g_lp_lq_ratio(x, p, q);
    const double lg = std::log(q / p);
    const double sign = (lg > 0.0) ? 1.0 : (lg < 0.0 ? -1.0 : 0.0);
    return sign * ratio;
}

double time_domain_loss(const std::vector<double>& y) {
    return -kurtosis(y);
}

double es_sparsity_loss(const dsp::EnvelopeSpectrum& es) {
    require(es.magnitudes.size() >= 2, "es_sparsity_loss: spectrum too short");
    double s2 = 0.0, s4 = 0.0;
    for (std::size_t k = 1; k < es.magnitudes.size(); ++k) {
        const double m2 = es.magnitudes[k] * es.magnitudes[k];
        s2 += m2;
        s4 += m2 * m2;
    }
    require(s4 > 0.0, "es_sparsity_loss: all non-DC magnitudes are zero");
    return s2 / std::sqrt(s4);
}

double cross_entropy(const std::vector<double>& logits, std::size_t num_classes,
                     const std::vector<int>& labels) {
    require(num_classes > 0, "cross_entropy: num_classes must be positive");
    require(!labels.empty(), "cross_entropy: empty batch");
    require(logits.size() == labels.size() * num_classes,
            "cross_entropy: logits shape mismatch");
    double total = 0.0;
    for (std::size_t b = 0; b < labels.size(); ++b) {
        const int label = labels[b];
        require(label >= 0 && static_cast<std::size_t>(label) < num_classes,
                "cross_entropy: label out of range");
        const double* row = logits.data() + b * num_classes;
        double mx = row[0];
        for (std::size_t c = 1; c < num_classes; ++c) mx = std::max(mx, row[c]);
        double denom = 0.0;
        for (std::size_t c = 0; c < num_classes; ++c) denom += std::exp(row[c] - mx);
        total += std::log(denom) - (row[static_cast<std::size_t>(label)] - mx);
    }
    return total / static_cast<double>(labels.size());
}

LossBreakdown joint_loss(double lc, double lt, double lf, const UncertaintyWeights& w) {
    require(std::isfinite(lc) && std::isfinite(lt) && std::isfinite(lf),
            "joint_loss: loss components must be finite");
    LossBreakdown out;
    out.lc = lc;
    out.lt = lt;
    out.lf = lf;
    out.sigmas = w;
    out.weighted_total = std::exp(-2.0 * w.s_c) * lc + std::exp(-2.0 * w.s_t) * lt +
                         std::exp(-2.0 * w.s_f) * lf + w.s_c + w.s_t + w.s_f;
    return out;
}

} // namespace classbd::loss
