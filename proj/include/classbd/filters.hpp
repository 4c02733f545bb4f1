#pragma once

#include <cstdint>
#include <string>

#include "classbd/graph.hpp"
#include "classbd/param_store.hpp"
#include "classbd/time_series.hpp"

namespace classbd::nn {

/// One quadratic convolution layer: three weight banks and three biases,
/// same-length padding, stride 1.
///   y = act((W1*x + b1) .* (W2*x + b2) + W3*(x.*x) + b3)
class QuadraticConvLayer {
public:
    QuadraticConvLayer(ad::ParameterStore& store, const std::string& name,
                       std::size_t in_channels, std::size_t out_channels,
                       std::size_t kernel_size, ad::Activation activation);

    /// W1 ~ Normal(0, sqrt(1/(32 k))), b1 ~ Uniform(-sqrt(1/k), sqrt(1/k)),
    /// W2 = W3 = 0, b2 = 1, b3 = 0: the layer starts as the plain linear
    /// convolution (W1, b1) and grows its quadratic terms during training.
    void relinear_init(std::uint64_t seed);

    /// Delta-kernel pass-through: the layer copies (or, for a fusing layer,
    /// averages) its input. Used for identity-start ablations.
    void identity_init();

    ad::Var forward(ad::Graph& g, ad::Var x) const;

    /// Convenience single-shot forward without gradient tracking.
    ad::Tensor forward_values(const ad::Tensor& x) const;

    std::size_t in_channels() const { return in_channels_; }
    std::size_t out_channels() const { return out_channels_; }
    std::size_t kernel_size() const { return kernel_size_; }
    ad::Activation activation() const { return activation_; }

    ad::Parameter& w1() { return *w1_; }
    ad::Parameter& w2() { return *w2_; }
    ad::Parameter& w3() { return *w3_; }
    ad::Parameter& b1() { return *b1_; }
    ad::Parameter& b2() { return *b2_; }
    ad::Parameter& b3() { return *b3_; }
    const ad::Parameter& w1() const { return *w1_; }
    const ad::Parameter& b1() const { return *b1_; }

private:
    std::size_t in_channels_, out_channels_, kernel_size_;
    ad::Activation activation_;
    ad::Parameter *w1_, *w2_, *w3_, *b1_, *b2_, *b3_;
};

/// The time-domain deconvolution front half: a widening quadratic layer
/// (1 -> channels) and a symmetric fusing layer (channels -> 1). Output
/// length always equals input length.
class TimeDomainFilter {
public:
    TimeDomainFilter(ad::ParameterStore& store, const std::string& name,
                     std::size_t channels, std::size_t kernel_size,
                     ad::Activation activation);

    void relinear_init(std::uint64_t seed);
    void identity_init();

    /// x (B,1,N) -> (B,1,N).
    ad::Var forward(ad::Graph& g, ad::Var x) const;

    TimeSeries apply(const TimeSeries& x) const;

    QuadraticConvLayer& layer1() { return layer1_; }
    QuadraticConvLayer& layer2() { return layer2_; }
    const QuadraticConvLayer& layer1() const { return layer1_; }
    const QuadraticConvLayer& layer2() const { return layer2_; }

private:
    QuadraticConvLayer layer1_;
    QuadraticConvLayer layer2_;
};

/// Per-bin complex gain and bias applied between forward and inverse FFT.
/// Parameters cover the non-negative frequency bins only; conjugate
/// symmetry is built into the expansion, so real input stays real.
class FrequencyDomainFilter {
public:
    FrequencyDomainFilter(ad::ParameterStore& store, const std::string& name,
                          std::size_t expected_length);

    /// Gains 1+0j, bias 0: the filter starts as an exact identity.
    void identity_init();

    /// x (B,N) -> (B,N); N must equal expected_length.
    ad::Var forward(ad::Graph& g, ad::Var x) const;

    TimeSeries apply(const TimeSeries& x) const;

    std::size_t expected_length() const { return expected_length_; }
    std::size_t half_bins() const { return expected_length_ / 2 + 1; }

    ad::Parameter& gains_re() { return *g_re_; }
    ad::Parameter& gains_im() { return *g_im_; }
    ad::Parameter& bias_re() { return *b_re_; }
    ad::Parameter& bias_im() { return *b_im_; }

private:
    std::size_t expected_length_;
    ad::Parameter *g_re_, *g_im_, *b_re_, *b_im_;
};

/// Both neural deconvolution taps of one forward pass.
struct BdTaps {
    ad::Var time_out = nullptr; ///< x_hat, consumed by the kurtosis loss
    ad::Var freq_out = nullptr; ///< y_hat, consumed by the ES loss and classifier
};

/// x_hat = time filter(x); y_hat = frequency filter(x_hat).
BdTaps classbd_forward(ad::Graph& g, const TimeDomainFilter& tf,
                       const FrequencyDomainFilter& ff, ad::Var x);

} // namespace classbd::nn
