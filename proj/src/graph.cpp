#include "classbd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>

#include "classbd/common.hpp"
#include "classbd/fft.hpp"
#include "classbd/threading.hpp"

namespace classbd::ad {

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

namespace {

constexpr double kEnvelopeEps = 1e-12;

struct ConvDims {
    std::size_t B, Cin, N, Cout, K, stride, pad_left, pad_right;
    std::size_t padded() const { return N + pad_left + pad_right; }
    std::size_t out_len() const { return (padded() - K) / stride + 1; }
};

// Zero-padded copy of (B,Cin,N) rows.
std::vector<double> pad_rows(const ConvDims& d, const std::vector<double>& x) {
    const std::size_t np = d.padded();
    std::vector<double> xp(d.B * d.Cin * np, 0.0);
    for (std::size_t b = 0; b < d.B; ++b)
        for (std::size_t c = 0; c < d.Cin; ++c)
            std::memcpy(xp.data() + (b * d.Cin + c) * np + d.pad_left,
                        x.data() + (b * d.Cin + c) * d.N, d.N * sizeof(double));
    return xp;
}

void conv_forward(const ConvDims& d, const std::vector<double>& xp, const std::vector<double>& w,
                  const double* bias, std::vector<double>& out) {
    const std::size_t np = d.padded(), m = d.out_len();
    parallel_for(d.B, [&](std::size_t b) {
        for (std::size_t oc = 0; oc < d.Cout; ++oc) {
            const double* wrow0 = w.data() + oc * d.Cin * d.K;
            double* orow = out.data() + (b * d.Cout + oc) * m;
            const double b0 = bias ? bias[oc] : 0.0;
            for (std::size_t pos = 0; pos < m; ++pos) {
                const std::size_t base = pos * d.stride;
                double acc = b0;
                for (std::size_t ic = 0; ic < d.Cin; ++ic) {
                    const double* wrow = wrow0 + ic * d.K;
                    const double* xrow = xp.data() + (b * d.Cin + ic) * np + base;
                    double s = 0.0;
                    for (std::size_t k = 0; k < d.K; ++k) s += wrow[k] * xrow[k];
                    acc += s;
                }
                orow[pos] = acc;
            }
        }
    });
}

void conv_backward_w(const ConvDims& d, const std::vector<double>& g,
                     const std::vector<double>& xp, std::vector<double>& dw) {
    const std::size_t np = d.padded(), m = d.out_len();
    parallel_for(d.Cout, [&](std::size_t oc) {
        double* dwrow0 = dw.data() + oc * d.Cin * d.K;
        for (std::size_t b = 0; b < d.B; ++b) {
            const double* grow = g.data() + (b * d.Cout + oc) * m;
            for (std::size_t pos = 0; pos < m; ++pos) {
                const double gv = grow[pos];
                if (gv == 0.0) continue;
                const std::size_t base = pos * d.stride;
                for (std::size_t ic = 0; ic < d.Cin; ++ic) {
                    double* dwrow = dwrow0 + ic * d.K;
                    const double* xrow = xp.data() + (b * d.Cin + ic) * np + base;
                    for (std::size_t k = 0; k < d.K; ++k) dwrow[k] += gv * xrow[k];
                }
            }
        }
    });
}

void conv_backward_bias(const ConvDims& d, const std::vector<double>& g, std::vector<double>& db) {
    const std::size_t m = d.out_len();
    for (std::size_t oc = 0; oc < d.Cout; ++oc) {
        double acc = 0.0;
        for (std::size_t b = 0; b < d.B; ++b) {
            const double* grow = g.data() + (b * d.Cout + oc) * m;
            for (std::size_t pos = 0; pos < m; ++pos) acc += grow[pos];
        }
        db[oc] += acc;
    }
}

// Accumulates into a padded-layout buffer dxp (B,Cin,Np).
void conv_backward_x_padded(const ConvDims& d, const std::vector<double>& g,
                            const std::vector<double>& w, std::vector<double>& dxp) {
    const std::size_t np = d.padded(), m = d.out_len();
    parallel_for(d.B, [&](std::size_t b) {
        for (std::size_t oc = 0; oc < d.Cout; ++oc) {
            const double* wrow0 = w.data() + oc * d.Cin * d.K;
            const double* grow = g.data() + (b * d.Cout + oc) * m;
            for (std::size_t pos = 0; pos < m; ++pos) {
                const double gv = grow[pos];
                if (gv == 0.0) continue;
                const std::size_t base = pos * d.stride;
                for (std::size_t ic = 0; ic < d.Cin; ++ic) {
                    const double* wrow = wrow0 + ic * d.K;
                    double* drow = dxp.data() + (b * d.Cin + ic) * np + base;
                    for (std::size_t k = 0; k < d.K; ++k) drow[k] += gv * wrow[k];
                }
            }
        }
    });
}

void add_unpadded(const ConvDims& d, const std::vector<double>& dxp, std::vector<double>& dx,
                  double scale_by = 1.0) {
    const std::size_t np = d.padded();
    for (std::size_t b = 0; b < d.B; ++b)
        for (std::size_t c = 0; c < d.Cin; ++c) {
            const double* src = dxp.data() + (b * d.Cin + c) * np + d.pad_left;
            double* dst = dx.data() + (b * d.Cin + c) * d.N;
            for (std::size_t n = 0; n < d.N; ++n) dst[n] += scale_by * src[n];
        }
}

double act_prime_from_out(Activation act, double out) {
    switch (act) {
        case Activation::identity: return 1.0;
        case Activation::tanh: return 1.0 - out * out;
        case Activation::relu: return out > 0.0 ? 1.0 : 0.0;
    }
    return 1.0;
}

double apply_act(Activation act, double v) {
    switch (act) {
        case Activation::identity: return v;
        case Activation::tanh: return std::tanh(v);
        case Activation::relu: return v > 0.0 ? v : 0.0;
    }
    return v;
}

using cvec = std::vector<std::complex<double>>;

} // namespace

Var Graph::make(Tensor value, bool requires_grad) {
    if (backward_done_) throw UsageError("Graph: cannot record ops after backward");
    nodes_.emplace_back();
    Node& n = nodes_.back();
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    n.owner = this;
    return &n;
}

Tensor& Graph::grad_of(Var v) {
    if (!v->grad_alloc) {
        v->grad = Tensor::zeros(v->value.shape);
        v->grad_alloc = true;
    }
    return v->grad;
}

void Graph::check_owned(Var v, const char* op) const {
    if (v == nullptr || v->owner != this)
        throw UsageError(std::string("Graph::") + op + ": variable does not belong to this graph");
}

Var Graph::input(Tensor value) { return make(std::move(value), false); }

Var Graph::scalar(double v) { return make(Tensor({1}, {v}), false); }

Var Graph::param(Parameter& p) {
    Var node = make(Tensor(p.shape, p.value), true);
    Parameter* pp = &p;
    node->backward_fn = [node, pp]() {
        for (std::size_t i = 0; i < node->grad.data.size(); ++i) pp->grad[i] += node->grad.data[i];
    };
    return node;
}

Var Graph::conv1d(Var x, Var w, Var b, std::size_t stride, std::size_t pad_left,
                  std::size_t pad_right) {
    check_owned(x, "conv1d");
    check_owned(w, "conv1d");
    check_owned(b, "conv1d");
    require(x->value.shape.size() == 3, "conv1d: input must be (B,Cin,N)");
    require(w->value.shape.size() == 3, "conv1d: weights must be (Cout,Cin,K)");
    require(stride >= 1, "conv1d: stride must be >= 1");
    ConvDims d{x->value.dim(0), x->value.dim(1), x->value.dim(2),
               w->value.dim(0), w->value.dim(2), stride, pad_left, pad_right};
    require(w->value.dim(1) == d.Cin, "conv1d: channel mismatch between input and weights");
    require(b->value.size() == d.Cout, "conv1d: bias length mismatch");
    require(d.padded() >= d.K, "conv1d: kernel exceeds padded input");

    const std::size_t m = d.out_len();
    std::vector<double> xp = pad_rows(d, x->value.data);
    Tensor out = Tensor::zeros({d.B, d.Cout, m});
    conv_forward(d, xp, w->value.data, b->value.data.data(), out.data);

    const bool rg = x->requires_grad || w->requires_grad || b->requires_grad;
    Var node = make(std::move(out), rg);
    if (!rg) return node;
    node->backward_fn = [this, node, x, w, b, d, xp = std::move(xp)]() {
        const std::vector<double>& g = node->grad.data;
        if (b->requires_grad) conv_backward_bias(d, g, grad_of(b).data);
        if (w->requires_grad) conv_backward_w(d, g, xp, grad_of(w).data);
        if (x->requires_grad) {
            std::vector<double> dxp(xp.size(), 0.0);
            conv_backward_x_padded(d, g, w->value.data, dxp);
            add_unpadded(d, dxp, grad_of(x).data);
        }
    };
    return node;
}

Var Graph::qconv(Var x, Var w1, Var b1, Var w2, Var b2, Var w3, Var b3, Activation act) {
    check_owned(x, "qconv");
    for (Var v : {w1, b1, w2, b2, w3, b3}) check_owned(v, "qconv");
    require(x->value.shape.size() == 3, "qconv: input must be (B,Cin,N)");
    require(w1->value.shape.size() == 3, "qconv: weights must be (Cout,Cin,K)");
    require(w1->value.shape == w2->value.shape && w1->value.shape == w3->value.shape,
            "qconv: weight banks must share one shape");
    require(b1->value.shape == b2->value.shape && b1->value.shape == b3->value.shape,
            "qconv: biases must share one length");

    const std::size_t K = w1->value.dim(2);
    ConvDims d{x->value.dim(0), x->value.dim(1), x->value.dim(2),
               w1->value.dim(0), K, 1, (K - 1) / 2, K - 1 - (K - 1) / 2};
    require(w1->value.dim(1) == d.Cin, "qconv: channel mismatch between input and weights");
    require(b1->value.size() == d.Cout, "qconv: bias length mismatch");

    std::vector<double> xp = pad_rows(d, x->value.data);
    std::vector<double> xsqp(xp.size());
    for (std::size_t i = 0; i < xp.size(); ++i) xsqp[i] = xp[i] * xp[i];

    const std::size_t rows = d.B * d.Cout * d.N;
    Tensor a1 = Tensor::zeros({d.B, d.Cout, d.N});
    Tensor a2 = Tensor::zeros({d.B, d.Cout, d.N});
    Tensor out = Tensor::zeros({d.B, d.Cout, d.N});
    conv_forward(d, xp, w1->value.data, b1->value.data.data(), a1.data);
    conv_forward(d, xp, w2->value.data, b2->value.data.data(), a2.data);
    conv_forward(d, xsqp, w3->value.data, b3->value.data.data(), out.data); // out holds a3
    for (std::size_t i = 0; i < rows; ++i)
        out.data[i] = apply_act(act, a1.data[i] * a2.data[i] + out.data[i]);

    const bool rg = x->requires_grad || w1->requires_grad || w2->requires_grad ||
                    w3->requires_grad || b1->requires_grad || b2->requires_grad ||
                    b3->requires_grad;
    Var node = make(std::move(out), rg);
    if (!rg) return node;

    node->backward_fn = [this, node, x, w1, b1, w2, b2, w3, b3, d, act,
                         xp = std::move(xp), xsqp = std::move(xsqp),
                         a1 = std::move(a1), a2 = std::move(a2)]() {
        const std::size_t rows = d.B * d.Cout * d.N;
        std::vector<double> g0(rows), ga1(rows), ga2(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            g0[i] = node->grad.data[i] * act_prime_from_out(act, node->value.data[i]);
            ga1[i] = g0[i] * a2.data[i];
            ga2[i] = g0[i] * a1.data[i];
        }
        if (b1->requires_grad) conv_backward_bias(d, ga1, grad_of(b1).data);
        if (b2->requires_grad) conv_backward_bias(d, ga2, grad_of(b2).data);
        if (b3->requires_grad) conv_backward_bias(d, g0, grad_of(b3).data);
        if (w1->requires_grad) conv_backward_w(d, ga1, xp, grad_of(w1).data);
        if (w2->requires_grad) conv_backward_w(d, ga2, xp, grad_of(w2).data);
        if (w3->requires_grad) conv_backward_w(d, g0, xsqp, grad_of(w3).data);
        if (x->requires_grad) {
            std::vector<double> dxp(xp.size(), 0.0);
            conv_backward_x_padded(d, ga1, w1->value.data, dxp);
            conv_backward_x_padded(d, ga2, w2->value.data, dxp);
            std::vector<double> dsq(xp.size(), 0.0);
            conv_backward_x_padded(d, g0, w3->value.data, dsq);
            // d(x^2)/dx: fold 2*x into the padded buffer before unpadding
            for (std::size_t i = 0; i < dxp.size(); ++i) dxp[i] += 2.0 * xp[i] * dsq[i];
            add_unpadded(d, dxp, grad_of(x).data);
        }
    };
    return node;
}

Var Graph::relu(Var x) {
    check_owned(x, "relu");
    Tensor out = x->value;
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    Var node = make(std::move(out), x->requires_grad);
    if (!node->requires_grad) return node;
    node->backward_fn = [this, node, x]() {
        Tensor& dx = grad_of(x);
        for (std::size_t i = 0; i < dx.data.size(); ++i)
            if (node->value.data[i] > 0.0) dx.data[i] += node->grad.data[i];
    };
    return node;
}

Var Graph::tanh_act(Var x) {
    check_owned(x, "tanh");
    Tensor out = x->value;
    for (double& v : out.data) v = std::tanh(v);
    Var node = make(std::move(out), x->requires_grad);
    if (!node->requires_grad) return node;
    node->backward_fn = [this, node, x]() {
        Tensor& dx = grad_of(x);
        for (std::size_t i = 0; i < dx.data.size(); ++i) {
            const double t = node->value.data[i];
            dx.data[i] += node->grad.data[i] * (1.0 - t * t);
        }
    };
    return node;
}

Var Graph::maxpool2(Var x) {
    check_owned(x, "maxpool2");
    require(x->value.shape.size() == 3, "maxpool2: input must be (B,C,N)");
    const std::size_t B = x->value.dim(0), C = x->value.dim(1), N = x->value.dim(2);
    require(N >= 2, "maxpool2: temporal dim too short");
    const std::size_t M = N / 2;
    Tensor out = Tensor::zeros({B, C, M});
    std::vector<std::uint32_t> arg(B * C * M);
    for (std::size_t r = 0; r < B * C; ++r) {
        const double* xi = x->value.data.data() + r * N;
        double* oi = out.data.data() + r * M;
        std::uint32_t* ai = arg.data() + r * M;
        for (std::size_t m_i = 0; m_i < M; ++m_i) {
            const std::size_t j = 2 * m_i;
            if (xi[j] >= xi[j + 1]) {
                oi[m_i] = xi[j];
                ai[m_i] = static_cast<std::uint32_t>(j);
            } else {
                oi[m_i] = xi[j + 1];
                ai[m_i] = static_cast<std::uint32_t>(j + 1);
            }
        }
    }
    Var node = make(std::move(out), x->requires_grad);
    if (!node->requires_grad) return node;
    node->backward_fn = [this, node, x, arg = std::move(arg), N, M, B, C]() {
        Tensor& dx = grad_of(x);
        for (std::size_t r = 0; r < B * C; ++r)
            for (std::size_t m_i = 0; m_i < M; ++m_i)
                dx.data[r * N + arg[r * M + m_i]] += node->grad.data[r * M + m_i];
    };
    return node;
}

Var Graph::global_avg_pool(Var x) {
    check_owned(x, "global_avg_pool");
    require(x->value.shape.size() == 3, "global_avg_pool: input must be (B,C,N)");
    const std::size_t B = x->value.dim(0), C = x->value.dim(1), N = x->value.dim(2);
    Tensor out = Tensor::zeros({B, C});
    for (std::size_t r = 0; r < B * C; ++r) {
        double acc = 0.0;
        for (std::size_t n = 0; n < N; ++n) acc += x->value.data[r * N + n];
        out.data[r] = acc / static_cast<double>(N);
    }
    Var node = make(std::move(out), x->requires_grad);
    if (!node->requires_grad) return node;
    node->backward_fn = [this, node, x, B, C, N]() {
        Tensor& dx = grad_of(x);
        const double inv = 1.0 / static_cast<double>(N);
        for (std::size_t r = 0; r < B * C; ++r) {
            const double gv = node->grad.data[r] * inv;
            for (std::size_t n = 0; n < N; ++n) dx.data[r * N + n] += gv;
        }
    };
    return node;
}

Var Graph::dense(Var x, Var w, Var b) {
    check_owned(x, "dense");
    check_owned(w, "dense");
    check_owned(b, "dense");
    require(x->value.shape.size() == 2, "dense: input must be (B,F)");
    require(w->value.shape.size() == 2, "dense: weights must be (G,F)");
    const std::size_t B = x->value.dim(0), F = x->value.dim(1), G = w->value.dim(0);
    require(w->value.dim(1) == F, "dense: feature size mismatch");
    require(b->value.size() == G, "dense: bias length mismatch");
    Tensor out = Tensor::zeros({B, G});
    for (std::size_t bi = 0; bi < B; ++bi)
        for (std::size_t g_i = 0; g_i < G; ++g_i) {
            double acc = b->value.data[g_i];
            const double* wr = w->value.data.data() + g_i * F;
            const double* xr = x->value.data.data() + bi * F;
            for (std::size_t f = 0; f < F; ++f) acc += wr[f] * xr[f];
            out.data[bi * G + g_i] = acc;
        }
    const bool rg = x->requires_grad || w->requires_grad || b->requires_grad;
    Var node = make(std::move(out), rg);
    if (!rg) return node;
    node->backward_fn = [this, node, x, w, b, B, F, G]() {
        const std::vector<double>& g = node->grad.data;
        if (b->requires_grad) {
            Tensor& db = grad_of(b);
            for (std::size_t g_i = 0; g_i < G; ++g_i)
                for (std::size_t bi = 0; bi < B; ++bi) db.data[g_i] += g[bi * G + g_i];
        }
        if (w->requires_grad) {
            Tensor& dw = grad_of(w);
            for (std::size_t bi = 0; bi < B; ++bi)
                for (std::size_t g_i = 0; g_i < G; ++g_i) {
                    const double gv = g[bi * G + g_i];
                    double* dwr = dw.data.data() + g_i * F;
                    const double* xr = x->value.data.data() + bi * F;
                    for (std::size_t f = 0; f < F; ++f) dwr[f] += gv * xr[f];
                }
        }
        if (x->requires_grad) {
            Tensor& dx = grad_of(x);
            for (std::size_t bi = 0; bi < B; ++bi)
                for (std::size_t g_i = 0; g_i < G; ++g_i) {
                    const double gv = g[bi * G + g_i];
                    const double* wr = w->value.data.data() + g_i * F;
                    double* dxr = dx.data.data() + bi * F;
                    for (std::size_t f = 0; f < F; ++f) dxr[f] += gv * wr[f];
                }
        }
    };
    return node;
}

Var Graph::freq_filter(Var x, Var g_re, Var g_im, Var b_re, Var b_im) {
    check_owned(x, "freq_filter");
    for (Var v : {g_re, g_im, b_re, b_im}) check_owned(v, "freq_filter");
    require(x->value.shape.size() == 2, "freq_filter: input must be (B,N)");
    const std::size_t B = x->value.dim(0), N = x->value.dim(1);
    const std::size_t H = N / 2 + 1;
    for (Var v : {g_re, g_im, b_re, b_im})
        require(v->value.size() == H, "freq_filter: parameter length must be floor(N/2)+1");

    // Conjugate-symmetric expansion of the half-spectrum parameters. The
    // imaginary parts at DC (and Nyquist for even N) are forced to zero so a
    // real input maps to a real output.
    auto expand = [&](const std::vector<double>& re, const std::vector<double>& im) {
        cvec full(N);
        for (std::size_t k = 0; k < N; ++k) {
            const std::size_t kk = (k <= N / 2) ? k : N - k;
            double i = im[kk];
            if (kk == 0 || (N % 2 == 0 && kk == N / 2)) i = 0.0;
            full[k] = (k <= N / 2) ? std::complex<double>(re[kk], i)
                                   : std::complex<double>(re[kk], -i);
        }
        return full;
    };
    const cvec gains = expand(g_re->value.data, g_im->value.data);
    const cvec bias = expand(b_re->value.data, b_im->value.data);

    Tensor out = Tensor::zeros({B, N});
    cvec spectra(B * N);
    for (std::size_t b = 0; b < B; ++b) {
        cvec X = fft_engine::forward_real(
            {x->value.data.begin() + static_cast<std::ptrdiff_t>(b * N),
             x->value.data.begin() + static_cast<std::ptrdiff_t>((b + 1) * N)});
        for (std::size_t k = 0; k < N; ++k) {
            spectra[b * N + k] = X[k];
            X[k] = gains[k] * X[k] + bias[k];
        }
        const cvec y = fft_engine::inverse(X);
        for (std::size_t n = 0; n < N; ++n) out.data[b * N + n] = y[n].real();
    }

    const bool rg = x->requires_grad || g_re->requires_grad || g_im->requires_grad ||
                    b_re->requires_grad || b_im->requires_grad;
    Var node = make(std::move(out), rg);
    if (!rg) return node;

    node->backward_fn = [this, node, x, g_re, g_im, b_re, b_im, B, N, H,
                         gains, spectra = std::move(spectra)]() {
        cvec dg_full(N, {0.0, 0.0}), db_full(N, {0.0, 0.0});
        const bool want_dx = x->requires_grad;
        for (std::size_t b = 0; b < B; ++b) {
            cvec ybar(N);
            for (std::size_t n = 0; n < N; ++n)
                ybar[n] = std::complex<double>(node->grad.data[b * N + n], 0.0);
            // Adjoint of the 1/N inverse transform is (1/N) * forward.
            fft_engine::transform(ybar, false);
            const double inv_n = 1.0 / static_cast<double>(N);
            cvec xbar_spec(N);
            for (std::size_t k = 0; k < N; ++k) {
                const std::complex<double> Ybar = ybar[k] * inv_n;
                dg_full[k] += std::conj(spectra[b * N + k]) * Ybar;
                db_full[k] += Ybar;
                xbar_spec[k] = std::conj(gains[k]) * Ybar;
            }
            if (want_dx) {
                // Adjoint of the unnormalized forward transform of a real
                // buffer: real part of the unnormalized inverse.
                fft_engine::transform(xbar_spec, true);
                Tensor& dx = grad_of(x);
                for (std::size_t n = 0; n < N; ++n)
                    dx.data[b * N + n] += xbar_spec[n].real() * static_cast<double>(N);
            }
        }
        auto fold = [&](const cvec& full, Var re, Var im) {
            if (!re->requires_grad && !im->requires_grad) return;
            Tensor& dre = grad_of(re);
            Tensor& dim = grad_of(im);
            for (std::size_t kk = 0; kk < H; ++kk) {
                double r = full[kk].real();
                double i = full[kk].imag();
                if (kk > 0 && N - kk != kk) {
                    r += full[N - kk].real();
                    i -= full[N - kk].imag();
                }
                dre.data[kk] += r;
                const bool structural_zero = (kk == 0 || (N % 2 == 0 && kk == N / 2));
                if (!structural_zero) dim.data[kk] += i;
            }
        };
        fold(dg_full, g_re, g_im);
        fold(db_full, b_re, b_im);
    };
    return node;
}

Var Graph::analytic_envelope(Var x) {
    check_owned(x, "analytic_envelope");
    require(x->value.shape.size() == 2, "analytic_envelope: input must be (B,N)");
    const std::size_t B = x->value.dim(0), N = x->value.dim(1);
    require(N >= 2, "analytic_envelope: rows too short");

    std::vector<double> mask(N, 0.0);
    mask[0] = 1.0;
    const std::size_t last_pos = (N - 1) / 2;
    for (std::size_t k = 1; k <= last_pos; ++k) mask[k] = 2.0;
    if (N % 2 == 0) mask[N / 2] = 1.0;

    Tensor out = Tensor::zeros({B, N});
    cvec analytic(B * N);
    for (std::size_t b = 0; b < B; ++b) {
        cvec X = fft_engine::forward_real(
            {x->value.data.begin() + static_cast<std::ptrdiff_t>(b * N),
             x->value.data.begin() + static_cast<std::ptrdiff_t>((b + 1) * N)});
        for (std::size_t k = 0; k < N; ++k) X[k] *= mask[k];
        const cvec z = fft_engine::inverse(X);
        for (std::size_t n = 0; n < N; ++n) {
            analytic[b * N + n] = z[n];
            out.data[b * N + n] =
                std::sqrt(z[n].real() * z[n].real() + z[n].imag() * z[n].imag() + kEnvelopeEps);
        }
    }
    Var node = make(std::move(out), x->requires_grad);
    if (!node->requires_grad) return node;
    node->backward_fn = [this, node, x, B, N, mask = std::move(mask),
                         analytic = std::move(analytic)]() {
        Tensor& dx = grad_of(x);
        for (std::size_t b = 0; b < B; ++b) {
            cvec zbar(N);
            for (std::size_t n = 0; n < N; ++n) {
                const double e = node->value.data[b * N + n];
                const double gv = node->grad.data[b * N + n];
                const auto& z = analytic[b * N + n];
                zbar[n] = std::complex<double>(gv * z.real() / e, gv * z.imag() / e);
            }
            // The scalings of F^H and (G)^H cancel: the adjoint of
            // ifft(mask .* fft(x)) is Re(ifft(mask .* fft(zbar))).
            fft_engine::transform(zbar, false);
            for (std::size_t k = 0; k < N; ++k) zbar[k] *= mask[k];
            fft_engine::transform(zbar, true);
            for (std::size_t n = 0; n < N; ++n) dx.data[b * N + n] += zbar[n].real();
        }
    };
    return node;
}

Var Graph::es_sqmag_nondc(Var x) {
    check_owned(x, "es_sqmag_nondc");
    require(x->value.shape.size() == 2, "es_sqmag_nondc: input must be (B,N)");
    const std::size_t B = x->value.dim(0), N = x->value.dim(1);
    const std::size_t M = N / 2;
    require(M >= 1, "es_sqmag_nondc: rows too short");

    Tensor out = Tensor::zeros({B, M});
    cvec spectra(B * N);
    for (std::size_t b = 0; b < B; ++b) {
        const cvec C = fft_engine::forward_real(
            {x->value.data.begin() + static_cast<std::ptrdiff_t>(b * N),
             x->value.data.begin() + static_cast<std::ptrdiff_t>((b + 1) * N)});
        for (std::size_t k = 0; k < N; ++k) spectra[b * N + k] = C[k];
        for (std::size_t k = 1; k <= M; ++k)
            out.data[b * M + k - 1] = std::norm(C[k]);
    }
    Var node = make(std::move(out), x->requires_grad);
    if (!node->requires_grad) return node;
    node->backward_fn = [this, node, x, B, N, M, spectra = std::move(spectra)]() {
        Tensor& dx = grad_of(x);
        for (std::size_t b = 0; b < B; ++b) {
            cvec cbar(N, {0.0, 0.0});
            for (std::size_t k = 1; k <= M; ++k) {
                const double gv = node->grad.data[b * M + k - 1];
                cbar[k] = 2.0 * gv * spectra[b * N + k];
            }
            fft_engine::transform(cbar, true);
            for (std::size_t n = 0; n < N; ++n)
                dx.data[b * N + n] += cbar[n].real() * static_cast<double>(N);
        }
    };
    return node;
}

Var Graph::es_sparsity(Var sqmag) {
    check_owned(sqmag, "es_sparsity");
    require(sqmag->value.shape.size() == 2, "es_sparsity: input must be (B,M)");
    const std::size_t B = sqmag->value.dim(0), M = sqmag->value.dim(1);
    std::vector<double> sums(B), qsums(B);
    double total = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        double s = 0.0, q = 0.0;
        for (std::size_t k = 0; k < M; ++k) {
            const double v = sqmag->value.data[b * M + k];
            s += v;
            q += v * v;
        }
        if (q <= 0.0) throw NumericalError("es_sparsity: all non-DC magnitudes are zero");
        sums[b] = s;
        qsums[b] = q;
        total += s / std::sqrt(q);
    }
    Var node = make(Tensor({1}, {total / static_cast<double>(B)}), sqmag->requires_grad);
    if (!node->requires_grad) return node;
    node->backward_fn = [this, node, sqmag, B, M, sums = std::move(sums),
                         qsums = std::move(qsums)]() {
        Tensor& ds = grad_of(sqmag);
        const double gv = node->grad.data[0] / static_cast<double>(B);
        for (std::size_t b = 0; b < B; ++b) {
            const double rq = 1.0 / std::sqrt(qsums[b]);
            const double coef = sums[b] * rq * rq * rq;
            for (std::size_t k = 0; k < M; ++k)
                ds.data[b * M + k] += gv * (rq - coef * sqmag->value.data[b * M + k]);
        }
    };
    return node;
}

Var Graph::kurtosis_mean(Var x) {
    check_owned(x, "kurtosis_mean");
    require(x->value.shape.size() == 2, "kurtosis_mean: input must be (B,N)");
    const std::size_t B = x->value.dim(0), N = x->value.dim(1);
    std::vector<double> s2(B), s4(B);
    double total = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        double a2 = 0.0, a4 = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
            const double v = x->value.data[b * N + n];
            const double v2 = v * v;
            a2 += v2;
            a4 += v2 * v2;
        }
        if (a2 <= 0.0) throw NumericalError("kurtosis_mean: all-zero row");
        s2[b] = a2;
        s4[b] = a4;
        total += a4 / (a2 * a2);
    }
    Var node = make(Tensor({1}, {total / static_cast<double>(B)}), x->requires_grad);
    if (!node->requires_grad) return node;
    node->backward_fn = [this, node, x, B, N, s2 = std::move(s2), s4 = std::move(s4)]() {
        Tensor& dx = grad_of(x);
        const double gv = node->grad.data[0] / static_cast<double>(B);
        for (std::size_t b = 0; b < B; ++b) {
            const double inv2 = 1.0 / (s2[b] * s2[b]);
            const double c4 = 4.0 * inv2;
            const double c2 = 4.0 * s4[b] * inv2 / s2[b];
            for (std::size_t n = 0; n < N; ++n) {
                const double v = x->value.data[b * N + n];
                dx.data[b * N + n] += gv * (c4 * v * v * v - c2 * v);
            }
        }
    };
    return node;
}

Var Graph::cross_entropy(Var logits, std::vector<int> labels) {
    check_owned(logits, "cross_entropy");
    require(logits->value.shape.size() == 2, "cross_entropy: logits must be (B,C)");
    const std::size_t B = logits->value.dim(0), C = logits->value.dim(1);
    require(labels.size() == B, "cross_entropy: label count mismatch");
    std::vector<double> probs(B * C);
    double total = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        const int label = labels[b];
        require(label >= 0 && static_cast<std::size_t>(label) < C,
                "cross_entropy: label out of range");
        const double* row = logits->value.data.data() + b * C;
        double mx = row[0];
        for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, row[c]);
        double denom = 0.0;
        for (std::size_t c = 0; c < C; ++c) denom += std::exp(row[c] - mx);
        for (std::size_t c = 0; c < C; ++c) probs[b * C + c] = std::exp(row[c] - mx) / denom;
        total += std::log(denom) - (row[static_cast<std::size_t>(label)] - mx);
    }
    Var node = make(Tensor({1}, {total / static_cast<double>(B)}), logits->requires_grad);
    if (!node->requires_grad) return node;
    node->backward_fn = [this, node, logits, B, C, labels = std::move(labels),
                         probs = std::move(probs)]() {
        Tensor& dl = grad_of(logits);
        const double gv = node->grad.data[0] / static_cast<double>(B);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t c = 0; c < C; ++c) {
                const double onehot = (static_cast<std::size_t>(labels[b]) == c) ? 1.0 : 0.0;
                dl.data[b * C + c] += gv * (probs[b * C + c] - onehot);
            }
    };
    return node;
}

Var Graph::sum_squares(Var x) {
    check_owned(x, "sum_squares");
    double total = 0.0;
    for (double v : x->value.data) total += v * v;
    Var node = make(Tensor({1}, {total}), x->requires_grad);
    if (!node->requires_grad) return node;
    node->backward_fn = [this, node, x]() {
        Tensor& dx = grad_of(x);
        const double gv = node->grad.data[0];
        for (std::size_t i = 0; i < dx.data.size(); ++i)
            dx.data[i] += 2.0 * gv * x->value.data[i];
    };
    return node;
}

Var Graph::add(Var a, Var b) {
    check_owned(a, "add");
    check_owned(b, "add");
    require(a->value.shape == b->value.shape, "add: shape mismatch");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b->value.data[i];
    Var node = make(std::move(out), a->requires_grad || b->requires_grad);
    if (!node->requires_grad) return node;
    node->backward_fn = [this, node, a, b]() {
        if (a->requires_grad) {
            Tensor& da = grad_of(a);
            for (std::size_t i = 0; i < da.data.size(); ++i) da.data[i] += node->grad.data[i];
        }
        if (b->requires_grad) {
            Tensor& db = grad_of(b);
            for (std::size_t i = 0; i < db.data.size(); ++i) db.data[i] += node->grad.data[i];
        }
    };
    return node;
}

Var Graph::mul(Var a, Var b) {
    check_owned(a, "mul");
    check_owned(b, "mul");
    require(a->value.shape == b->value.shape, "mul: shape mismatch");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b->value.data[i];
    Var node = make(std::move(out), a->requires_grad || b->requires_grad);
    if (!node->requires_grad) return node;
    node->backward_fn = [this, node, a, b]() {
        if (a->requires_grad) {
            Tensor& da = grad_of(a);
            for (std::size_t i = 0; i < da.data.size(); ++i)
                da.data[i] += node->grad.data[i] * b->value.data[i];
        }
        if (b->requires_grad) {
            Tensor& db = grad_of(b);
            for (std::size_t i = 0; i < db.data.size(); ++i)
                db.data[i] += node->grad.data[i] * a->value.data[i];
        }
    };
    return node;
}

Var Graph::scale(Var a, double c) {
    check_owned(a, "scale");
    Tensor out = a->value;
    for (double& v : out.data) v *= c;
    Var node = make(std::move(out), a->requires_grad);
    if (!node->requires_grad) return node;
    node->backward_fn = [this, node, a, c]() {
        Tensor& da = grad_of(a);
        for (std::size_t i = 0; i < da.data.size(); ++i) da.data[i] += c * node->grad.data[i];
    };
    return node;
}

Var Graph::exp_op(Var a) {
    check_owned(a, "exp");
    Tensor out = a->value;
    for (double& v : out.data) v = std::exp(v);
    Var node = make(std::move(out), a->requires_grad);
    if (!node->requires_grad) return node;
    node->backward_fn = [this, node, a]() {
        Tensor& da = grad_of(a);
        for (std::size_t i = 0; i < da.data.size(); ++i)
            da.data[i] += node->grad.data[i] * node->value.data[i];
    };
    return node;
}

Var Graph::reshape(Var x, std::vector<std::size_t> shape) {
    check_owned(x, "reshape");
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    require(n == x->value.size(), "reshape: element count mismatch");
    Tensor out(std::move(shape), x->value.data);
    Var node = make(std::move(out), x->requires_grad);
    if (!node->requires_grad) return node;
    node->backward_fn = [this, node, x]() {
        Tensor& dx = grad_of(x);
        for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += node->grad.data[i];
    };
    return node;
}

void Graph::backward(Var root) {
    check_owned(root, "backward");
    if (nodes_.empty()) throw UsageError("Graph::backward without a recorded forward");
    if (backward_done_) throw UsageError("Graph::backward called twice on one recording");
    if (root->value.size() != 1) throw UsageError("Graph::backward requires a scalar root");
    backward_done_ = true;
    grad_of(root).data[0] = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        if (it->grad_alloc && it->backward_fn) it->backward_fn();
    }
}

} // namespace classbd::ad
