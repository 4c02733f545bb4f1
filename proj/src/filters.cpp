#include "classbd/filters.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "classbd/common.hpp"

namespace classbd::nn {

QuadraticConvLayer::QuadraticConvLayer(ad::ParameterStore& store, const std::string& name,
                                       std::size_t in_channels, std::size_t out_channels,
                                       std::size_t kernel_size, ad::Activation activation)
    : in_channels_(in_channels), out_channels_(out_channels), kernel_size_(kernel_size),
      activation_(activation) {
    require(in_channels > 0 && out_channels > 0 && kernel_size > 0,
            "QuadraticConvLayer: dimensions must be positive");
    const std::vector<std::size_t> wshape{out_channels, in_channels, kernel_size};
    w1_ = &store.create(name + "/W1", wshape);
    w2_ = &store.create(name + "/W2", wshape);
    w3_ = &store.create(name + "/W3", wshape);
    b1_ = &store.create(name + "/b1", {out_channels});
    b2_ = &store.create(name + "/b2", {out_channels});
    b3_ = &store.create(name + "/b3", {out_channels});
}

void QuadraticConvLayer::relinear_init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double sigma = std::sqrt(1.0 / (32.0 * static_cast<double>(kernel_size_)));
    const double bound = std::sqrt(1.0 / static_cast<double>(kernel_size_));
    std::normal_distribution<double> normal(0.0, sigma);
    std::uniform_real_distribution<double> uniform(-bound, bound);
    for (double& v : w1_->value) v = normal(rng);
    for (double& v : b1_->value) v = uniform(rng);
    std::fill(w2_->value.begin(), w2_->value.end(), 0.0);
    std::fill(w3_->value.begin(), w3_->value.end(), 0.0);
    std::fill(b2_->value.begin(), b2_->value.end(), 1.0);
    std::fill(b3_->value.begin(), b3_->value.end(), 0.0);
}

void QuadraticConvLayer::identity_init() {
    std::fill(w1_->value.begin(), w1_->value.end(), 0.0);
    std::fill(b1_->value.begin(), b1_->value.end(), 0.0);
    std::fill(w2_->value.begin(), w2_->value.end(), 0.0);
    std::fill(w3_->value.begin(), w3_->value.end(), 0.0);
    std::fill(b2_->value.begin(), b2_->value.end(), 1.0);
    std::fill(b3_->value.begin(), b3_->value.end(), 0.0);
    // Center tap so same-padding keeps positions aligned. A fusing layer
    // averages its input channels so a widen + fuse pair is an identity.
    const std::size_t center = (kernel_size_ - 1) / 2;
    const double tap = 1.0 / static_cast<double>(in_channels_);
    for (std::size_t oc = 0; oc < out_channels_; ++oc)
        for (std::size_t ic = 0; ic < in_channels_; ++ic)
            w1_->value[(oc * in_channels_ + ic) * kernel_size_ + center] = tap;
}

ad::Var QuadraticConvLayer::forward(ad::Graph& g, ad::Var x) const {
    require(x->value.shape.size() == 3 && x->value.dim(1) == in_channels_,
            "QuadraticConvLayer: input channel mismatch");
    return g.qconv(x, g.param(*w1_), g.param(*b1_), g.param(*w2_), g.param(*b2_),
                   g.param(*w3_), g.param(*b3_), activation_);
}

ad::Tensor QuadraticConvLayer::forward_values(const ad::Tensor& x) const {
    ad::Graph g;
    return forward(g, g.input(x))->value;
}

TimeDomainFilter::TimeDomainFilter(ad::ParameterStore& store, const std::string& name,
                                   std::size_t channels, std::size_t kernel_size,
                                   ad::Activation activation)
    : layer1_(store, name + "/layer1", 1, channels, kernel_size, activation),
      layer2_(store, name + "/layer2", channels, 1, kernel_size, activation) {}

void TimeDomainFilter::relinear_init(std::uint64_t seed) {
    layer1_.relinear_init(mix_seed(seed, 1));
    layer2_.relinear_init(mix_seed(seed, 2));
}

void TimeDomainFilter::identity_init() {
    layer1_.identity_init();
    layer2_.identity_init();
}

ad::Var TimeDomainFilter::forward(ad::Graph& g, ad::Var x) const {
    require(x->value.shape.size() == 3 && x->value.dim(1) == 1,
            "TimeDomainFilter: input must be single-channel (B,1,N)");
    return layer2_.forward(g, layer1_.forward(g, x));
}

TimeSeries TimeDomainFilter::apply(const TimeSeries& x) const {
    x.validate("TimeDomainFilter::apply");
    ad::Graph g;
    ad::Var in = g.input(ad::Tensor({1, 1, x.size()}, x.samples));
    ad::Var out = forward(g, in);
    return TimeSeries(out->value.data, x.sample_rate_hz);
}

FrequencyDomainFilter::FrequencyDomainFilter(ad::ParameterStore& store, const std::string& name,
                                             std::size_t expected_length)
    : expected_length_(expected_length) {
    require(expected_length >= 2, "FrequencyDomainFilter: expected_length must be >= 2");
    const std::size_t h = half_bins();
    g_re_ = &store.create(name + "/gains_re", {h});
    g_im_ = &store.create(name + "/gains_im", {h});
    b_re_ = &store.create(name + "/bias_re", {h});
    b_im_ = &store.create(name + "/bias_im", {h});
    identity_init();
}

void FrequencyDomainFilter::identity_init() {
    std::fill(g_re_->value.begin(), g_re_->value.end(), 1.0);
    std::fill(g_im_->value.begin(), g_im_->value.end(), 0.0);
    std::fill(b_re_->value.begin(), b_re_->value.end(), 0.0);
    std::fill(b_im_->value.begin(), b_im_->value.end(), 0.0);
}

ad::Var FrequencyDomainFilter::forward(ad::Graph& g, ad::Var x) const {
    require(x->value.shape.size() == 2, "FrequencyDomainFilter: input must be (B,N)");
    require(x->value.dim(1) == expected_length_,
            "FrequencyDomainFilter: input length does not match expected_length");
    return g.freq_filter(x, g.param(*g_re_), g.param(*g_im_), g.param(*b_re_), g.param(*b_im_));
}

TimeSeries FrequencyDomainFilter::apply(const TimeSeries& x) const {
    x.validate("FrequencyDomainFilter::apply");
    ad::Graph g;
    ad::Var in = g.input(ad::Tensor({1, x.size()}, x.samples));
    ad::Var out = forward(g, in);
    return TimeSeries(out->value.data, x.sample_rate_hz);
}

BdTaps classbd_forward(ad::Graph& g, const TimeDomainFilter& tf,
                       const FrequencyDomainFilter& ff, ad::Var x) {
    const std::size_t batch = x->value.dim(0);
    const std::size_t n = x->value.dim(2);
    ad::Var xhat3 = tf.forward(g, x);
    ad::Var xhat = g.reshape(xhat3, {batch, n});
    BdTaps taps;
    taps.time_out = xhat;
    taps.freq_out = ff.forward(g, xhat);
    return taps;
}

} // namespace classbd::nn
