#pragma once

#include <cstdint>
#include <vector>

#include "classbd/graph.hpp"
#include "classbd/param_store.hpp"

namespace classbd::nn {

/// Wide-first-kernel 1-D CNN: one wide strided conv stage, small-kernel
/// conv + pool stages, global average pooling, one hidden dense layer and a
/// linear output head.
struct WdcnnConfig {
    std::size_t first_kernel = 64;
    std::size_t first_stride = 16;
    std::vector<std::size_t> stage_channels{16, 32, 64};
    std::size_t fc_width = 100;
    std::size_t num_classes = 0;

    /// Simulates the stage lengths for an input of `input_length` samples
    /// and rejects configs whose feature map collapses below one sample.
    void validate(std::size_t input_length) const;
};

class Wdcnn {
public:
    Wdcnn(ad::ParameterStore& store, const std::string& name, const WdcnnConfig& cfg,
          std::size_t input_length);

    void init(std::uint64_t seed);

    /// y (B,N) -> logits (B,num_classes).
    ad::Var forward(ad::Graph& g, ad::Var y) const;

    const WdcnnConfig& config() const { return cfg_; }
    std::size_t input_length() const { return input_length_; }

private:
    struct ConvStage {
        ad::Parameter* w = nullptr;
        ad::Parameter* b = nullptr;
        std::size_t kernel = 0, stride = 1, pad_left = 0, pad_right = 0;
    };
    WdcnnConfig cfg_;
    std::size_t input_length_;
    std::vector<ConvStage> stages_;
    ad::Parameter *fc_w_, *fc_b_, *head_w_, *head_b_;
};

/// Per-row argmax; ties resolve to the lowest class index.
std::vector<int> predict(const ad::Tensor& logits);

} // namespace classbd::nn
