#pragma once

#include <cstddef>
#include <vector>

#include "classbd/analysis.hpp"

namespace classbd::loss {

/// Impulsiveness ratio sum(y^4) / (sum(y^2))^2. Note this is the sparsity
/// surrogate used by deconvolution objectives, not the standardized fourth
/// moment: an isolated unit impulse scores 1, a constant of length N scores
/// 1/N, white noise about 3/N.
double kurtosis(const std::vector<double>& y);

/// Signed generalized sparsity ratio
///   sgn(log(q/p)) * sum|x|^p / (sum|x|^q)^(p/q).
/// p=4,q=2 is -kurtosis; p=2,q=4 is the envelope-spectrum sparsity loss.
double g_lp_lq(const std::vector<double>& x, double p, double q);

/// The unsigned ratio sum|x|^p / (sum|x|^q)^(p/q) (monotonicity tests).
double g_lp_lq_ratio(const std::vector<double>& x, double p, double q);

/// Time-domain deconvolution loss: -kurtosis(y).
double time_domain_loss(const std::vector<double>& y);

/// Envelope-spectrum sparsity sum(ES^2) / sqrt(sum(ES^4)) over non-DC bins.
double es_sparsity_loss(const dsp::EnvelopeSpectrum& es);

/// Mean over the batch of -log softmax(logits)[label], computed with
/// max-subtraction. logits is row-major (batch x num_classes).
double cross_entropy(const std::vector<double>& logits, std::size_t num_classes,
                     const std::vector<int>& labels);

/// Learnable log-sigma weights, one per task; sigma^2 = exp(2s) stays
/// positive by construction. Initialized at -0.5.
struct UncertaintyWeights {
    double s_c = -0.5;
    double s_t = -0.5;
    double s_f = -0.5;
};

struct LossBreakdown {
    double lc = 0.0;
    double lt = 0.0;
    double lf = 0.0;
    double weighted_total = 0.0;
    UncertaintyWeights sigmas;
};

/// total = exp(-2 s_c) lc + exp(-2 s_t) lt + exp(-2 s_f) lf + s_c + s_t + s_f.
LossBreakdown joint_loss(double lc, double lt, double lf, const UncertaintyWeights& w);

} // namespace classbd::loss
