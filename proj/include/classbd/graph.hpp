#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <vector>

#include "classbd/param_store.hpp"

namespace classbd::ad {

struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {}

    static Tensor zeros(std::vector<std::size_t> shape);
    std::size_t size() const { return data.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }
};

enum class Activation { identity, tanh, relu };

class Graph;

/// One recorded forward operation: its output value, a gradient slot filled
/// during the reverse sweep, and the adjoint closure that pushes cotangents
/// to its parents (and, for parameter leaves, into the store's grad slot).
struct Node {
    Tensor value;
    Tensor grad;
    bool grad_alloc = false;
    bool requires_grad = false;
    std::function<void()> backward_fn;
    const Graph* owner = nullptr;
};

using Var = Node*;

/// Dynamically recorded computation over batched tensors. Creation order is
/// a topological order, so the reverse sweep just walks the node list
/// backwards. One forward recording supports exactly one backward pass.
class Graph {
public:
    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    // ---- leaves -----------------------------------------------------------
    Var input(Tensor value);
    Var param(Parameter& p);
    Var scalar(double v);

    // ---- neural ops -------------------------------------------------------
    /// Linear 1-D convolution (cross-correlation layout, PyTorch-style):
    /// x (B,Cin,N), w (Cout,Cin,K), b (Cout) -> (B,Cout,M).
    Var conv1d(Var x, Var w, Var b, std::size_t stride, std::size_t pad_left, std::size_t pad_right);

    /// Quadratic convolution (W1*x+b1) .* (W2*x+b2) + W3*(x.*x) + b3 with
    /// same-length padding, stride 1, then the activation.
    Var qconv(Var x, Var w1, Var b1, Var w2, Var b2, Var w3, Var b3, Activation act);

    Var relu(Var x);
    Var tanh_act(Var x);
    Var maxpool2(Var x);          ///< width-2 stride-2 max pool over the last dim
    Var global_avg_pool(Var x);   ///< (B,C,N) -> (B,C)
    Var dense(Var x, Var w, Var b); ///< (B,F) x (G,F) -> (B,G)

    // ---- spectral ops -----------------------------------------------------
    /// Per-bin complex gain + bias between forward and inverse FFT.
    /// Half-spectrum parameters (length floor(N/2)+1 each); the negative
    /// frequencies are the conjugates by construction, so real input gives
    /// real output for any parameter values. The imaginary parts of the DC
    /// (and, for even N, Nyquist) bins are structurally unused and keep zero
    /// gradient.
    Var freq_filter(Var x, Var g_re, Var g_im, Var b_re, Var b_im);

    /// Envelope of the analytic signal, sqrt(re^2 + im^2 + eps) with
    /// eps = 1e-12 so the adjoint stays finite at exact zeros.
    Var analytic_envelope(Var x);

    /// Squared magnitudes of the one-sided non-DC DFT bins of each row:
    /// (B,N) -> (B, floor(N/2)).
    Var es_sqmag_nondc(Var x);

    // ---- losses / reductions ---------------------------------------------
    /// Batch mean of sum(s) / sqrt(sum(s^2)) per row.
    Var es_sparsity(Var sqmag);
    /// Batch mean of sum(y^4)/(sum(y^2))^2 per row.
    Var kurtosis_mean(Var x);
    /// Mean -log softmax(logits)[label]; logits (B,C).
    Var cross_entropy(Var logits, std::vector<int> labels);
    Var sum_squares(Var x);

    // ---- elementwise / scalar ---------------------------------------------
    Var add(Var a, Var b);
    Var mul(Var a, Var b);
    Var scale(Var a, double c);
    Var exp_op(Var a);
    Var reshape(Var x, std::vector<std::size_t> shape);

    /// Reverse sweep from a scalar root. Exactly once per graph.
    void backward(Var root);

    std::size_t node_count() const { return nodes_.size(); }

private:
    friend struct Node;
    Var make(Tensor value, bool requires_grad);
    Tensor& grad_of(Var v);
    void check_owned(Var v, const char* op) const;

    std::deque<Node> nodes_;
    bool backward_done_ = false;
};

} // namespace classbd::ad
