#include "classbd/wdcnn.hpp"

#include <cmath>
#include <random>

#include "classbd/common.hpp"

namespace classbd::nn {

namespace {

// TensorFlow-style SAME padding: output length ceil(N / stride).
void same_padding(std::size_t n, std::size_t kernel, std::size_t stride,
                  std::size_t& pad_left, std::size_t& pad_right, std::size_t& out_len) {
    out_len = (n + stride - 1) / stride;
    const std::size_t needed = (out_len - 1) * stride + kernel;
    const std::size_t total = needed > n ? needed - n : 0;
    pad_left = total / 2;
    pad_right = total - pad_left;
}

} // namespace

void WdcnnConfig::validate(std::size_t input_length) const {
    require(num_classes > 0, "WdcnnConfig: num_classes must be positive");
    require(first_kernel > 0 && first_stride > 0, "WdcnnConfig: first stage dims must be positive");
    require(!stage_channels.empty(), "WdcnnConfig: need at least one stage");
    require(fc_width > 0, "WdcnnConfig: fc_width must be positive");
    std::size_t n = input_length;
    for (std::size_t s = 0; s < stage_channels.size(); ++s) {
        require(stage_channels[s] > 0, "WdcnnConfig: stage channels must be positive");
        const std::size_t stride = (s == 0) ? first_stride : 1;
        std::size_t pl, pr, out;
        same_padding(n, (s == 0) ? first_kernel : 3, stride, pl, pr, out);
        n = out;
        require(n >= 2, "WdcnnConfig: feature map collapsed before pooling; "
                        "reduce stages or first_stride for this input length");
        n /= 2; // pool
        require(n >= 1, "WdcnnConfig: feature map collapsed below one sample");
    }
}

Wdcnn::Wdcnn(ad::ParameterStore& store, const std::string& name, const WdcnnConfig& cfg,
             std::size_t input_length)
    : cfg_(cfg), input_length_(input_length) {
    cfg_.validate(input_length);
    std::size_t in_ch = 1;
    std::size_t n = input_length;
    for (std::size_t s = 0; s < cfg_.stage_channels.size(); ++s) {
        ConvStage stage;
        stage.kernel = (s == 0) ? cfg_.first_kernel : 3;
        stage.stride = (s == 0) ? cfg_.first_stride : 1;
        std::size_t out_len;
        same_padding(n, stage.kernel, stage.stride, stage.pad_left, stage.pad_right, out_len);
        const std::size_t out_ch = cfg_.stage_channels[s];
        stage.w = &store.create(name + "/conv" + std::to_string(s) + "/W", {out_ch, in_ch, stage.kernel});
        stage.b = &store.create(name + "/conv" + std::to_string(s) + "/b", {out_ch});
        stages_.push_back(stage);
        in_ch = out_ch;
        n = out_len / 2;
    }
    fc_w_ = &store.create(name + "/fc/W", {cfg_.fc_width, in_ch});
    fc_b_ = &store.create(name + "/fc/b", {cfg_.fc_width});
    head_w_ = &store.create(name + "/head/W", {cfg_.num_classes, cfg_.fc_width});
    head_b_ = &store.create(name + "/head/b", {cfg_.num_classes});
}

void Wdcnn::init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto he_fill = [&rng](ad::Parameter& w, std::size_t fan_in) {
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
        for (double& v : w.value) v = dist(rng);
    };
    for (auto& st : stages_) {
        he_fill(*st.w, st.w->shape[1] * st.w->shape[2]);
        std::fill(st.b->value.begin(), st.b->value.end(), 0.0);
    }
    he_fill(*fc_w_, fc_w_->shape[1]);
    std::fill(fc_b_->value.begin(), fc_b_->value.end(), 0.0);
    he_fill(*head_w_, head_w_->shape[1]);
    std::fill(head_b_->value.begin(), head_b_->value.end(), 0.0);
}

ad::Var Wdcnn::forward(ad::Graph& g, ad::Var y) const {
    require(y->value.shape.size() == 2, "Wdcnn: input must be (B,N)");
    require(y->value.dim(1) == input_length_, "Wdcnn: input length mismatch");
    const std::size_t batch = y->value.dim(0);
    ad::Var h = g.reshape(y, {batch, 1, input_length_});
    for (const auto& st : stages_) {
        h = g.conv1d(h, g.param(*st.w), g.param(*st.b), st.stride, st.pad_left, st.pad_right);
        h = g.relu(h);
        h = g.maxpool2(h);
    }
    h = g.global_avg_pool(h);
    h = g.relu(g.dense(h, g.param(*fc_w_), g.param(*fc_b_)));
    return g.dense(h, g.param(*head_w_), g.param(*head_b_));
}

std::vector<int> predict(const ad::Tensor& logits) {
    require(logits.shape.size() == 2, "predict: logits must be (B,C)");
    const std::size_t b = logits.dim(0), c = logits.dim(1);
    std::vector<int> out(b);
    for (std::size_t i = 0; i < b; ++i) {
        const double* row = logits.data.data() + i * c;
        std::size_t best = 0;
        for (std::size_t j = 1; j < c; ++j)
            if (row[j] > row[best]) best = j;
        out[i] = static_cast<int>(best);
    }
    return out;
}

} // namespace classbd::nn
