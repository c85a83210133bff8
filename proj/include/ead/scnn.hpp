#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ead/rng.hpp"
#include "ead/tensor.hpp"

namespace ead {

inline constexpr double kLayerNormEps = 1e-5;
inline constexpr double kLossFloor = 1e-12;

/// Classification category, 1-based: 1..10 are digits 0-9, 11..20 are
/// digits with a trailing decimal point, 21 is a blank cell.
struct DigitLabel {
    int category = 21;

    explicit DigitLabel(int c) : category(c) {
        if (c < 1 || c > 21) throw std::invalid_argument("DigitLabel: category out of range");
    }

    bool is_blank() const { return category == 21; }
    bool has_decimal_point() const { return category >= 11 && category <= 20; }
    /// The digit value 0..9; blank has none.
    int digit() const {
        if (is_blank()) throw std::logic_error("DigitLabel: blank has no digit");
        return (category - 1) % 10;
    }
    /// Zero-based class index for the softmax head.
    std::size_t index() const { return static_cast<std::size_t>(category - 1); }

    friend bool operator==(const DigitLabel&, const DigitLabel&) = default;
};

struct ScnnConfig {
    int num_classes = 21;  // C: categories and filters per conv layer
    int filter_size = 3;   // D
    double gamma_h = 0.5;
    double gamma_w = 0.5;
    std::array<std::size_t, 3> input_shape = {3, 65, 50};
    std::array<std::size_t, 3> conv_strides = {2, 2, 1};  // conv1, conv2, sconv
    std::size_t fc_width = 128;
    std::size_t sfc_width = 64;
    double leaky_slope = 0.01;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;
    bool use_subsample_path = true;  // false = ablated conventional CNN

    void validate() const {
        if (num_classes < 2) throw std::invalid_argument("ScnnConfig: num_classes < 2");
        if (filter_size < 1) throw std::invalid_argument("ScnnConfig: filter_size < 1");
        if (!(gamma_h > 0.0 && gamma_h < 1.0) || !(gamma_w > 0.0 && gamma_w < 1.0)) {
            throw std::invalid_argument("ScnnConfig: gamma_h, gamma_w must lie in (0, 1)");
        }
        for (std::size_t s : conv_strides) {
            if (s < 1) throw std::invalid_argument("ScnnConfig: stride < 1");
        }
        if (fc_width < 1 || sfc_width < 1) throw std::invalid_argument("ScnnConfig: zero width");
        if (!(learning_rate > 0.0)) throw std::invalid_argument("ScnnConfig: learning_rate <= 0");
    }
};

/// All activation shapes implied by a config. Constructing this asserts
/// the whole chain is consistent.
struct ScnnShapes {
    std::array<std::size_t, 3> input{};
    std::array<std::size_t, 3> conv1_out{};
    std::array<std::size_t, 3> conv2_out{};
    std::array<std::size_t, 3> sub{};
    std::array<std::size_t, 3> sconv_out{};
    std::size_t fc_in = 0;
    std::size_t sfc_in = 0;
    std::size_t head_in = 0;
};

namespace detail {
inline std::size_t conv_out_dim(std::size_t in, std::size_t filter, std::size_t stride) {
    if (in < filter) throw std::invalid_argument("conv: input smaller than filter");
    return (in - filter) / stride + 1;
}
}  // namespace detail

inline ScnnShapes derive_shapes(const ScnnConfig& cfg) {
    cfg.validate();
    const auto c = static_cast<std::size_t>(cfg.num_classes);
    const auto d = static_cast<std::size_t>(cfg.filter_size);
    ScnnShapes s;
    s.input = cfg.input_shape;
    s.conv1_out = {c, detail::conv_out_dim(s.input[1], d, cfg.conv_strides[0]),
                   detail::conv_out_dim(s.input[2], d, cfg.conv_strides[0])};
    s.conv2_out = {c, detail::conv_out_dim(s.conv1_out[1], d, cfg.conv_strides[1]),
                   detail::conv_out_dim(s.conv1_out[2], d, cfg.conv_strides[1])};
    s.fc_in = c * s.conv2_out[1] * s.conv2_out[2];
    if (cfg.use_subsample_path) {
        const auto sub_h = static_cast<std::size_t>(
            std::floor(cfg.gamma_h * static_cast<double>(s.conv2_out[1])));
        const auto sub_w = static_cast<std::size_t>(
            std::floor(cfg.gamma_w * static_cast<double>(s.conv2_out[2])));
        if (sub_h < d || sub_w < d) {
            throw std::invalid_argument("ScnnConfig: subsampled region smaller than the filter");
        }
        s.sub = {c, sub_h, sub_w};
        s.sconv_out = {c, detail::conv_out_dim(sub_h, d, cfg.conv_strides[2]),
                       detail::conv_out_dim(sub_w, d, cfg.conv_strides[2])};
        s.sfc_in = c * s.sconv_out[1] * s.sconv_out[2];
        s.head_in = cfg.fc_width + cfg.sfc_width;
    } else {
        s.head_in = cfg.fc_width;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Layers

struct ConvFilterBank {
    Tensor weights;               // (filters, in_channels, D, D)
    std::vector<double> biases;   // per filter

    std::size_t filters() const { return weights.shape.at(0); }
    std::size_t in_channels() const { return weights.shape.at(1); }
    std::size_t filter_size() const { return weights.shape.at(2); }
};

/// Valid (no padding) cross-correlation.
inline Tensor conv2d(const Tensor& input, const ConvFilterBank& f, std::size_t stride) {
    if (input.rank() != 3 || f.weights.rank() != 4) {
        throw std::invalid_argument("conv2d: expected rank-3 input and rank-4 weights");
    }
    if (input.channels() != f.in_channels()) {
        throw std::invalid_argument("conv2d: input channels do not match filter depth");
    }
    const std::size_t d = f.filter_size();
    const std::size_t out_h = detail::conv_out_dim(input.height(), d, stride);
    const std::size_t out_w = detail::conv_out_dim(input.width(), d, stride);
    const std::size_t cin = input.channels();
    const std::size_t in_h = input.height();
    const std::size_t in_w = input.width();

    Tensor out({f.filters(), out_h, out_w});
    const double* in = input.data.data();
    const double* w = f.weights.data.data();
    double* o = out.data.data();

    for (std::size_t fi = 0; fi < f.filters(); ++fi) {
        const double* wf = w + fi * cin * d * d;
        for (std::size_t oy = 0; oy < out_h; ++oy) {
            for (std::size_t ox = 0; ox < out_w; ++ox) {
                double acc = f.biases[fi];
                for (std::size_t c = 0; c < cin; ++c) {
                    const double* inc = in + c * in_h * in_w + oy * stride * in_w + ox * stride;
                    const double* wc = wf + c * d * d;
                    for (std::size_t ky = 0; ky < d; ++ky) {
                        const double* row = inc + ky * in_w;
                        const double* wrow = wc + ky * d;
                        for (std::size_t kx = 0; kx < d; ++kx) acc += wrow[kx] * row[kx];
                    }
                }
                o[(fi * out_h + oy) * out_w + ox] = acc;
            }
        }
    }
    return out;
}

struct Conv2dGrads {
    Tensor d_input;
    Tensor d_weights;
    std::vector<double> d_biases;
};

inline Conv2dGrads conv2d_backward(const Tensor& input, const ConvFilterBank& f,
                                   std::size_t stride, const Tensor& upstream) {
    const std::size_t d = f.filter_size();
    const std::size_t out_h = upstream.height();
    const std::size_t out_w = upstream.width();
    const std::size_t cin = input.channels();
    const std::size_t in_h = input.height();
    const std::size_t in_w = input.width();
    if (upstream.channels() != f.filters() ||
        out_h != detail::conv_out_dim(in_h, d, stride) ||
        out_w != detail::conv_out_dim(in_w, d, stride)) {
        throw std::invalid_argument("conv2d_backward: upstream shape mismatch");
    }

    Conv2dGrads g;
    g.d_input = Tensor(input.shape);
    g.d_weights = Tensor(f.weights.shape);
    g.d_biases.assign(f.filters(), 0.0);

    const double* in = input.data.data();
    const double* w = f.weights.data.data();
    const double* up = upstream.data.data();
    double* din = g.d_input.data.data();
    double* dw = g.d_weights.data.data();

    for (std::size_t fi = 0; fi < f.filters(); ++fi) {
        const double* wf = w + fi * cin * d * d;
        double* dwf = dw + fi * cin * d * d;
        double bias_acc = 0.0;
        for (std::size_t oy = 0; oy < out_h; ++oy) {
            for (std::size_t ox = 0; ox < out_w; ++ox) {
                const double gout = up[(fi * out_h + oy) * out_w + ox];
                if (gout == 0.0) continue;
                bias_acc += gout;
                for (std::size_t c = 0; c < cin; ++c) {
                    const std::size_t base = c * in_h * in_w + oy * stride * in_w + ox * stride;
                    const double* wc = wf + c * d * d;
                    double* dwc = dwf + c * d * d;
                    for (std::size_t ky = 0; ky < d; ++ky) {
                        const double* irow = in + base + ky * in_w;
                        double* dirow = din + base + ky * in_w;
                        const double* wrow = wc + ky * d;
                        double* dwrow = dwc + ky * d;
                        for (std::size_t kx = 0; kx < d; ++kx) {
                            dwrow[kx] += gout * irow[kx];
                            dirow[kx] += gout * wrow[kx];
                        }
                    }
                }
            }
        }
        g.d_biases[fi] = bias_acc;
    }
    return g;
}

/// Per-channel affine parameters; normalization statistics span the whole
/// activation tensor of one sample.
struct LayerNormParams {
    std::vector<double> gain;
    std::vector<double> shift;
};

struct LayerNormCache {
    Tensor normalized;  // x-hat
    double sigma = 0.0;
};

inline Tensor layer_norm(const Tensor& input, const LayerNormParams& p,
                         LayerNormCache* cache = nullptr) {
    if (input.rank() != 3 || p.gain.size() != input.channels() ||
        p.shift.size() != input.channels()) {
        throw std::invalid_argument("layer_norm: parameter/channel mismatch");
    }
    const std::size_t n = input.numel();
    double mu = 0.0;
    for (double v : input.data) mu += v;
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (double v : input.data) {
        const double dv = v - mu;
        var += dv * dv;
    }
    var /= static_cast<double>(n);
    const double sigma = std::sqrt(var + kLayerNormEps);

    Tensor xhat(input.shape);
    for (std::size_t k = 0; k < n; ++k) xhat.data[k] = (input.data[k] - mu) / sigma;

    Tensor out(input.shape);
    const std::size_t hw = input.height() * input.width();
    for (std::size_t c = 0; c < input.channels(); ++c) {
        const double g = p.gain[c];
        const double b = p.shift[c];
        for (std::size_t k = 0; k < hw; ++k) {
            out.data[c * hw + k] = g * xhat.data[c * hw + k] + b;
        }
    }
    if (cache) {
        cache->normalized = std::move(xhat);
        cache->sigma = sigma;
    }
    return out;
}

struct LayerNormGrads {
    Tensor d_input;
    std::vector<double> d_gain;
    std::vector<double> d_shift;
};

inline LayerNormGrads layer_norm_backward(const LayerNormCache& cache, const LayerNormParams& p,
                                          const Tensor& upstream) {
    const Tensor& xhat = cache.normalized;
    if (!upstream.same_shape(xhat)) {
        throw std::invalid_argument("layer_norm_backward: upstream shape mismatch");
    }
    const std::size_t n = xhat.numel();
    const std::size_t channels = xhat.channels();
    const std::size_t hw = xhat.height() * xhat.width();

    LayerNormGrads g;
    g.d_gain.assign(channels, 0.0);
    g.d_shift.assign(channels, 0.0);

    // gradient w.r.t. x-hat, plus the two statistics means
    Tensor gx(xhat.shape);
    double mean_g = 0.0;
    double mean_gx = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
        const double gain = p.gain[c];
        for (std::size_t k = 0; k < hw; ++k) {
            const std::size_t idx = c * hw + k;
            const double up = upstream.data[idx];
            g.d_gain[c] += up * xhat.data[idx];
            g.d_shift[c] += up;
            const double v = up * gain;
            gx.data[idx] = v;
            mean_g += v;
            mean_gx += v * xhat.data[idx];
        }
    }
    mean_g /= static_cast<double>(n);
    mean_gx /= static_cast<double>(n);

    g.d_input = Tensor(xhat.shape);
    for (std::size_t k = 0; k < n; ++k) {
        g.d_input.data[k] = (gx.data[k] - mean_g - xhat.data[k] * mean_gx) / cache.sigma;
    }
    return g;
}

inline Tensor leaky_relu(const Tensor& input, double slope) {
    Tensor out(input.shape);
    for (std::size_t k = 0; k < input.numel(); ++k) {
        const double v = input.data[k];
        out.data[k] = v > 0.0 ? v : slope * v;
    }
    return out;
}

/// Gradient w.r.t. the pre-activation input.
inline Tensor leaky_relu_backward(const Tensor& pre_activation, double slope,
                                  const Tensor& upstream) {
    if (!pre_activation.same_shape(upstream)) {
        throw std::invalid_argument("leaky_relu_backward: shape mismatch");
    }
    Tensor out(upstream.shape);
    for (std::size_t k = 0; k < upstream.numel(); ++k) {
        out.data[k] = upstream.data[k] * (pre_activation.data[k] > 0.0 ? 1.0 : slope);
    }
    return out;
}

/// Copy of the lower-right spatial block, floor(gamma_h*P) x floor(gamma_w*Q),
/// all channels. min_size is the filter size the block must still admit.
inline Tensor subsample_extract(const Tensor& a, double gamma_h, double gamma_w,
                                std::size_t min_size = 1) {
    if (a.rank() != 3) throw std::invalid_argument("subsample_extract: expected rank-3 tensor");
    const std::size_t p = a.height();
    const std::size_t q = a.width();
    const auto sub_h = static_cast<std::size_t>(std::floor(gamma_h * static_cast<double>(p)));
    const auto sub_w = static_cast<std::size_t>(std::floor(gamma_w * static_cast<double>(q)));
    if (sub_h < min_size || sub_w < min_size) {
        throw std::invalid_argument("subsample_extract: region smaller than the filter");
    }
    Tensor out({a.channels(), sub_h, sub_w});
    const std::size_t y0 = p - sub_h;
    const std::size_t x0 = q - sub_w;
    for (std::size_t c = 0; c < a.channels(); ++c) {
        for (std::size_t y = 0; y < sub_h; ++y) {
            for (std::size_t x = 0; x < sub_w; ++x) {
                out.at3(c, y, x) = a.at3(c, y0 + y, x0 + x);
            }
        }
    }
    return out;
}

/// Scatter a gradient on the subsampled block back into a full-size
/// zero tensor (the region sits at the lower-right corner).
inline Tensor subsample_scatter(const Tensor& d_sub, const std::array<std::size_t, 3>& full_shape) {
    Tensor out({full_shape[0], full_shape[1], full_shape[2]});
    const std::size_t y0 = full_shape[1] - d_sub.height();
    const std::size_t x0 = full_shape[2] - d_sub.width();
    for (std::size_t c = 0; c < d_sub.channels(); ++c) {
        for (std::size_t y = 0; y < d_sub.height(); ++y) {
            for (std::size_t x = 0; x < d_sub.width(); ++x) {
                out.at3(c, y0 + y, x0 + x) = d_sub.at3(c, y, x);
            }
        }
    }
    return out;
}

struct DenseParams {
    std::size_t out_width = 0;
    std::size_t in_width = 0;
    std::vector<double> weights;  // row-major (out, in)
    std::vector<double> biases;
};

inline std::vector<double> dense(const DenseParams& p, const std::vector<double>& x) {
    if (x.size() != p.in_width) throw std::invalid_argument("dense: input width mismatch");
    std::vector<double> y(p.out_width);
    for (std::size_t o = 0; o < p.out_width; ++o) {
        const double* row = p.weights.data() + o * p.in_width;
        double acc = p.biases[o];
        for (std::size_t k = 0; k < p.in_width; ++k) acc += row[k] * x[k];
        y[o] = acc;
    }
    return y;
}

struct DenseGrads {
    std::vector<double> d_input;
    std::vector<double> d_weights;
    std::vector<double> d_biases;
};

inline DenseGrads dense_backward(const DenseParams& p, const std::vector<double>& x,
                                 const std::vector<double>& upstream) {
    DenseGrads g;
    g.d_input.assign(p.in_width, 0.0);
    g.d_weights.assign(p.weights.size(), 0.0);
    g.d_biases = upstream;
    for (std::size_t o = 0; o < p.out_width; ++o) {
        const double go = upstream[o];
        const double* row = p.weights.data() + o * p.in_width;
        double* drow = g.d_weights.data() + o * p.in_width;
        for (std::size_t k = 0; k < p.in_width; ++k) {
            drow[k] += go * x[k];
            g.d_input[k] += go * row[k];
        }
    }
    return g;
}

inline std::vector<double> softmax(const std::vector<double>& logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        out[k] = std::exp(logits[k] - m);
        sum += out[k];
    }
    for (double& v : out) v /= sum;
    return out;
}

inline double cross_entropy_loss(const std::vector<double>& probabilities, DigitLabel label) {
    if (label.index() >= probabilities.size()) {
        throw std::invalid_argument("cross_entropy_loss: label outside probability vector");
    }
    return -std::log(std::max(probabilities[label.index()], kLossFloor));
}

// ---------------------------------------------------------------------------
// Full model

struct ScnnParams {
    ConvFilterBank conv1, conv2, sconv;
    LayerNormParams ln1, ln2, ln3;
    DenseParams fc, sfc, head;
    std::uint64_t revision = 0;  // bumped on every update; guards stale caches
};

namespace detail {
inline ConvFilterBank init_conv(Rng& rng, std::size_t filters, std::size_t in_channels,
                                std::size_t d) {
    ConvFilterBank f;
    f.weights = Tensor({filters, in_channels, d, d});
    const double limit = std::sqrt(6.0 / static_cast<double>(in_channels * d * d));
    for (double& w : f.weights.data) w = rng.uniform(-limit, limit);
    f.biases.assign(filters, 0.0);
    return f;
}

inline DenseParams init_dense(Rng& rng, std::size_t out_width, std::size_t in_width) {
    DenseParams p;
    p.out_width = out_width;
    p.in_width = in_width;
    p.weights.resize(out_width * in_width);
    const double limit = std::sqrt(6.0 / static_cast<double>(in_width));
    for (double& w : p.weights) w = rng.uniform(-limit, limit);
    p.biases.assign(out_width, 0.0);
    return p;
}

inline LayerNormParams init_layer_norm(std::size_t channels) {
    LayerNormParams p;
    p.gain.assign(channels, 1.0);
    p.shift.assign(channels, 0.0);
    return p;
}
}  // namespace detail

inline ScnnParams init_params(const ScnnConfig& cfg) {
    const ScnnShapes shapes = derive_shapes(cfg);
    const auto c = static_cast<std::size_t>(cfg.num_classes);
    const auto d = static_cast<std::size_t>(cfg.filter_size);
    Rng rng(mix_seed(cfg.seed, 0x696e6974));  // init stream

    ScnnParams p;
    p.conv1 = detail::init_conv(rng, c, cfg.input_shape[0], d);
    p.conv2 = detail::init_conv(rng, c, c, d);
    p.ln1 = detail::init_layer_norm(c);
    p.ln2 = detail::init_layer_norm(c);
    p.fc = detail::init_dense(rng, cfg.fc_width, shapes.fc_in);
    if (cfg.use_subsample_path) {
        p.sconv = detail::init_conv(rng, c, c, d);
        p.ln3 = detail::init_layer_norm(c);
        p.sfc = detail::init_dense(rng, cfg.sfc_width, shapes.sfc_in);
    }
    p.head = detail::init_dense(rng, c, shapes.head_in);
    return p;
}

/// Everything the backward pass needs from one forward evaluation.
struct ForwardCache {
    Tensor input;
    LayerNormCache ln1_cache, ln2_cache, ln3_cache;
    Tensor n1, a1, n2, a2;          // pre/post activations of the conv trunk
    Tensor sub, n3, a3;             // subsample path
    std::vector<double> fc_pre, fc_act;
    std::vector<double> sfc_pre, sfc_act;
    std::vector<double> head_input;
    std::vector<double> probabilities;
    std::uint64_t params_revision = 0;
};

inline std::vector<double> scnn_forward(const Tensor& image, const ScnnParams& params,
                                        const ScnnConfig& cfg, ForwardCache* cache = nullptr) {
    const ScnnShapes shapes = derive_shapes(cfg);
    if (image.shape != std::vector<std::size_t>{shapes.input[0], shapes.input[1], shapes.input[2]}) {
        throw std::invalid_argument("scnn_forward: image shape mismatch, expected " +
                                    shape_to_string({shapes.input[0], shapes.input[1],
                                                     shapes.input[2]}));
    }

    ForwardCache local;
    ForwardCache& cc = cache ? *cache : local;
    cc.input = image;
    cc.params_revision = params.revision;

    const Tensor z1 = conv2d(image, params.conv1, cfg.conv_strides[0]);
    cc.n1 = layer_norm(z1, params.ln1, &cc.ln1_cache);
    cc.a1 = leaky_relu(cc.n1, cfg.leaky_slope);

    const Tensor z2 = conv2d(cc.a1, params.conv2, cfg.conv_strides[1]);
    cc.n2 = layer_norm(z2, params.ln2, &cc.ln2_cache);
    cc.a2 = leaky_relu(cc.n2, cfg.leaky_slope);

    // path 1: flatten -> FC
    cc.fc_pre = dense(params.fc, cc.a2.data);
    cc.fc_act.resize(cc.fc_pre.size());
    for (std::size_t k = 0; k < cc.fc_pre.size(); ++k) {
        const double v = cc.fc_pre[k];
        cc.fc_act[k] = v > 0.0 ? v : cfg.leaky_slope * v;
    }

    cc.head_input = cc.fc_act;
    if (cfg.use_subsample_path) {
        // path 2: subsample -> SConv -> SFC
        cc.sub = subsample_extract(cc.a2, cfg.gamma_h, cfg.gamma_w,
                                   static_cast<std::size_t>(cfg.filter_size));
        const Tensor z3 = conv2d(cc.sub, params.sconv, cfg.conv_strides[2]);
        cc.n3 = layer_norm(z3, params.ln3, &cc.ln3_cache);
        cc.a3 = leaky_relu(cc.n3, cfg.leaky_slope);

        cc.sfc_pre = dense(params.sfc, cc.a3.data);
        cc.sfc_act.resize(cc.sfc_pre.size());
        for (std::size_t k = 0; k < cc.sfc_pre.size(); ++k) {
            const double v = cc.sfc_pre[k];
            cc.sfc_act[k] = v > 0.0 ? v : cfg.leaky_slope * v;
        }
        cc.head_input.insert(cc.head_input.end(), cc.sfc_act.begin(), cc.sfc_act.end());
    }

    const std::vector<double> logits = dense(params.head, cc.head_input);
    cc.probabilities = softmax(logits);
    return cc.probabilities;
}

/// Which contributions flow into the gradient of the Conv2 activation.
/// FcOnly and SconvOnly isolate the two terms of the dual-path sum.
enum class PathMask { Both, FcOnly, SconvOnly };

struct ScnnGradients {
    Conv2dGrads conv1, conv2, sconv;
    LayerNormGrads ln1, ln2, ln3;
    DenseGrads fc, sfc, head;
    Tensor d_a2;  // gradient w.r.t. the Conv2 activation (post LN + leaky-relu)
};

inline ScnnGradients scnn_backward(const ScnnParams& params, const ScnnConfig& cfg,
                                   const ForwardCache& cache, DigitLabel label,
                                   PathMask mask = PathMask::Both) {
    if (cache.params_revision != params.revision) {
        throw std::invalid_argument("scnn_backward: cache is stale (parameters changed)");
    }
    if (cache.probabilities.size() != static_cast<std::size_t>(cfg.num_classes)) {
        throw std::invalid_argument("scnn_backward: cache does not match config");
    }

    ScnnGradients g;

    // softmax + cross-entropy
    std::vector<double> d_logits = cache.probabilities;
    d_logits[label.index()] -= 1.0;

    g.head = dense_backward(params.head, cache.head_input, d_logits);

    // split the head input gradient into the two path segments
    const std::vector<double>& dh = g.head.d_input;
    std::vector<double> d_fc_act(dh.begin(), dh.begin() + static_cast<std::ptrdiff_t>(cfg.fc_width));

    // path 1 backward
    std::vector<double> d_fc_pre(cfg.fc_width);
    for (std::size_t k = 0; k < cfg.fc_width; ++k) {
        d_fc_pre[k] = d_fc_act[k] * (cache.fc_pre[k] > 0.0 ? 1.0 : cfg.leaky_slope);
    }
    g.fc = dense_backward(params.fc, cache.a2.data, d_fc_pre);
    Tensor d_a2_fc(cache.a2.shape, g.fc.d_input);

    // path 2 backward
    Tensor d_a2_sconv(cache.a2.shape);
    if (cfg.use_subsample_path) {
        std::vector<double> d_sfc_act(dh.begin() + static_cast<std::ptrdiff_t>(cfg.fc_width),
                                      dh.end());
        std::vector<double> d_sfc_pre(cfg.sfc_width);
        for (std::size_t k = 0; k < cfg.sfc_width; ++k) {
            d_sfc_pre[k] = d_sfc_act[k] * (cache.sfc_pre[k] > 0.0 ? 1.0 : cfg.leaky_slope);
        }
        g.sfc = dense_backward(params.sfc, cache.a3.data, d_sfc_pre);

        const Tensor d_a3(cache.a3.shape, g.sfc.d_input);
        const Tensor d_n3 = leaky_relu_backward(cache.n3, cfg.leaky_slope, d_a3);
        g.ln3 = layer_norm_backward(cache.ln3_cache, params.ln3, d_n3);
        g.sconv = conv2d_backward(cache.sub, params.sconv, cfg.conv_strides[2], g.ln3.d_input);
        d_a2_sconv = subsample_scatter(
            g.sconv.d_input, {cache.a2.channels(), cache.a2.height(), cache.a2.width()});
    }

    // dual-path sum on the Conv2 activation
    g.d_a2 = Tensor(cache.a2.shape);
    for (std::size_t k = 0; k < g.d_a2.numel(); ++k) {
        double v = 0.0;
        if (mask != PathMask::SconvOnly) v += d_a2_fc.data[k];
        if (mask != PathMask::FcOnly) v += d_a2_sconv.data[k];
        g.d_a2.data[k] = v;
    }

    // trunk backward
    const Tensor d_n2 = leaky_relu_backward(cache.n2, cfg.leaky_slope, g.d_a2);
    g.ln2 = layer_norm_backward(cache.ln2_cache, params.ln2, d_n2);
    g.conv2 = conv2d_backward(cache.a1, params.conv2, cfg.conv_strides[1], g.ln2.d_input);

    const Tensor d_n1 = leaky_relu_backward(cache.n1, cfg.leaky_slope, g.conv2.d_input);
    g.ln1 = layer_norm_backward(cache.ln1_cache, params.ln1, d_n1);
    g.conv1 = conv2d_backward(cache.input, params.conv1, cfg.conv_strides[0], g.ln1.d_input);

    return g;
}

// ---------------------------------------------------------------------------
// Gradient accumulation + SGD

namespace detail {
inline void axpy(std::vector<double>& acc, const std::vector<double>& v, double a = 1.0) {
    if (acc.empty()) acc.assign(v.size(), 0.0);
    for (std::size_t k = 0; k < v.size(); ++k) acc[k] += a * v[k];
}

inline void axpy(Tensor& acc, const Tensor& v, double a = 1.0) {
    if (acc.data.empty() && !v.data.empty()) acc = Tensor(v.shape);
    for (std::size_t k = 0; k < v.numel(); ++k) acc.data[k] += a * v.data[k];
}
}  // namespace detail

/// Running sum of per-sample gradients; scaled once per minibatch.
struct GradientAccumulator {
    ScnnGradients sum;
    std::size_t count = 0;

    void add(const ScnnGradients& g) {
        detail::axpy(sum.conv1.d_weights, g.conv1.d_weights);
        detail::axpy(sum.conv1.d_biases, g.conv1.d_biases);
        detail::axpy(sum.conv2.d_weights, g.conv2.d_weights);
        detail::axpy(sum.conv2.d_biases, g.conv2.d_biases);
        detail::axpy(sum.ln1.d_gain, g.ln1.d_gain);
        detail::axpy(sum.ln1.d_shift, g.ln1.d_shift);
        detail::axpy(sum.ln2.d_gain, g.ln2.d_gain);
        detail::axpy(sum.ln2.d_shift, g.ln2.d_shift);
        detail::axpy(sum.fc.d_weights, g.fc.d_weights);
        detail::axpy(sum.fc.d_biases, g.fc.d_biases);
        if (!g.sconv.d_weights.data.empty()) {
            detail::axpy(sum.sconv.d_weights, g.sconv.d_weights);
            detail::axpy(sum.sconv.d_biases, g.sconv.d_biases);
            detail::axpy(sum.ln3.d_gain, g.ln3.d_gain);
            detail::axpy(sum.ln3.d_shift, g.ln3.d_shift);
            detail::axpy(sum.sfc.d_weights, g.sfc.d_weights);
            detail::axpy(sum.sfc.d_biases, g.sfc.d_biases);
        }
        detail::axpy(sum.head.d_weights, g.head.d_weights);
        detail::axpy(sum.head.d_biases, g.head.d_biases);
        ++count;
    }
};

namespace detail {
inline void sgd_step(std::vector<double>& theta, const std::vector<double>& grad, double step) {
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= step * grad[k];
}
}  // namespace detail

/// theta -= lr * (sum / count); bumps the revision counter.
inline void sgd_update(ScnnParams& params, const GradientAccumulator& acc, double lr) {
    if (acc.count == 0) throw std::invalid_argument("sgd_update: empty accumulator");
    const double step = lr / static_cast<double>(acc.count);
    detail::sgd_step(params.conv1.weights.data, acc.sum.conv1.d_weights.data, step);
    detail::sgd_step(params.conv1.biases, acc.sum.conv1.d_biases, step);
    detail::sgd_step(params.conv2.weights.data, acc.sum.conv2.d_weights.data, step);
    detail::sgd_step(params.conv2.biases, acc.sum.conv2.d_biases, step);
    detail::sgd_step(params.ln1.gain, acc.sum.ln1.d_gain, step);
    detail::sgd_step(params.ln1.shift, acc.sum.ln1.d_shift, step);
    detail::sgd_step(params.ln2.gain, acc.sum.ln2.d_gain, step);
    detail::sgd_step(params.ln2.shift, acc.sum.ln2.d_shift, step);
    detail::sgd_step(params.fc.weights, acc.sum.fc.d_weights, step);
    detail::sgd_step(params.fc.biases, acc.sum.fc.d_biases, step);
    if (!params.sconv.weights.data.empty()) {
        detail::sgd_step(params.sconv.weights.data, acc.sum.sconv.d_weights.data, step);
        detail::sgd_step(params.sconv.biases, acc.sum.sconv.d_biases, step);
        detail::sgd_step(params.ln3.gain, acc.sum.ln3.d_gain, step);
        detail::sgd_step(params.ln3.shift, acc.sum.ln3.d_shift, step);
        detail::sgd_step(params.sfc.weights, acc.sum.sfc.d_weights, step);
        detail::sgd_step(params.sfc.biases, acc.sum.sfc.d_biases, step);
    }
    detail::sgd_step(params.head.weights, acc.sum.head.d_weights, step);
    detail::sgd_step(params.head.biases, acc.sum.head.d_biases, step);
    ++params.revision;
}

// ---------------------------------------------------------------------------
// Training and evaluation

struct LabeledImage {
    Tensor image;
    DigitLabel label{21};
};

struct EpochMetrics {
    std::size_t epoch = 0;  // 1-based
    double mean_loss = 0.0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
};

struct TrainOptions {
    std::size_t max_epochs = 20;
    std::size_t batch_size = 32;
    /// Stop after the first epoch whose test accuracy reaches this value.
    std::optional<double> stop_at_test_accuracy;
    /// Per-epoch progress callback (epoch metrics already filled in).
    std::function<void(const EpochMetrics&)> on_epoch;
};

inline DigitLabel predict_digit(const Tensor& image, const ScnnParams& params,
                                const ScnnConfig& cfg) {
    const std::vector<double> probs = scnn_forward(image, params, cfg);
    std::size_t best = 0;
    for (std::size_t k = 1; k < probs.size(); ++k) {
        if (probs[k] > probs[best]) best = k;  // ties keep the lowest category
    }
    return DigitLabel(static_cast<int>(best) + 1);
}

inline double evaluate_accuracy(const std::vector<LabeledImage>& set, const ScnnParams& params,
                                const ScnnConfig& cfg) {
    if (set.empty()) throw std::invalid_argument("evaluate_accuracy: empty set");
    std::size_t correct = 0;
    for (const LabeledImage& s : set) {
        if (predict_digit(s.image, params, cfg) == s.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(set.size());
}

/// Row-major (true category - 1, predicted category - 1) counts.
inline std::vector<std::size_t> confusion_matrix(const std::vector<LabeledImage>& set,
                                                 const ScnnParams& params, const ScnnConfig& cfg) {
    const auto c = static_cast<std::size_t>(cfg.num_classes);
    std::vector<std::size_t> counts(c * c, 0);
    for (const LabeledImage& s : set) {
        const DigitLabel pred = predict_digit(s.image, params, cfg);
        counts[s.label.index() * c + pred.index()] += 1;
    }
    return counts;
}

/// Misclassifications between a digit and the same digit with a decimal
/// point (categories k and k+10), both directions.
inline std::size_t decimal_pair_confusions(const std::vector<std::size_t>& confusion,
                                           int num_classes) {
    const auto c = static_cast<std::size_t>(num_classes);
    std::size_t total = 0;
    for (std::size_t k = 0; k < 10; ++k) {
        total += confusion[k * c + (k + 10)];
        total += confusion[(k + 10) * c + k];
    }
    return total;
}

struct TrainResult {
    ScnnParams params;
    std::vector<EpochMetrics> epochs;
};

/// Plain SGD over shuffled minibatches, single-threaded and fully
/// deterministic under cfg.seed.
inline TrainResult train(const std::vector<LabeledImage>& train_set,
                         const std::vector<LabeledImage>& test_set, const ScnnConfig& cfg,
                         const TrainOptions& opts = {}) {
    if (train_set.empty()) throw std::invalid_argument("train: empty corpus");

    TrainResult result;
    result.params = init_params(cfg);
    Rng shuffle_rng(mix_seed(cfg.seed, 0x73687566));  // shuffle stream

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;

    for (std::size_t epoch = 1; epoch <= opts.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += opts.batch_size) {
            const std::size_t end = std::min(begin + opts.batch_size, order.size());
            GradientAccumulator acc;
            for (std::size_t k = begin; k < end; ++k) {
                const LabeledImage& sample = train_set[order[k]];
                ForwardCache cache;
                const std::vector<double> probs =
                    scnn_forward(sample.image, result.params, cfg, &cache);
                loss_sum += cross_entropy_loss(probs, sample.label);
                std::size_t best = 0;
                for (std::size_t j = 1; j < probs.size(); ++j) {
                    if (probs[j] > probs[best]) best = j;
                }
                if (best == sample.label.index()) ++correct;
                acc.add(scnn_backward(result.params, cfg, cache, sample.label));
            }
            sgd_update(result.params, acc, cfg.learning_rate);
        }

        EpochMetrics m;
        m.epoch = epoch;
        m.mean_loss = loss_sum / static_cast<double>(train_set.size());
        m.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
        m.test_accuracy = test_set.empty() ? 0.0 : evaluate_accuracy(test_set, result.params, cfg);
        result.epochs.push_back(m);
        if (opts.on_epoch) opts.on_epoch(m);

        if (opts.stop_at_test_accuracy && !test_set.empty() &&
            m.test_accuracy >= *opts.stop_at_test_accuracy) {
            break;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Checkpoint: self-describing binary container of config + named arrays.
// Doubles are stored verbatim, so a round trip is bit-exact.

namespace detail {

inline void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void write_f64(std::ostream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
inline double read_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

inline void write_array(std::ostream& os, const std::string& name,
                        const std::vector<std::size_t>& shape, const std::vector<double>& data) {
    write_u64(os, name.size());
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u64(os, shape.size());
    for (std::size_t d : shape) write_u64(os, d);
    write_u64(os, data.size());
    os.write(reinterpret_cast<const char*>(data.data()),
             static_cast<std::streamsize>(data.size() * sizeof(double)));
}

struct NamedArray {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> data;
};

inline NamedArray read_array(std::istream& is) {
    NamedArray a;
    a.name.resize(read_u64(is));
    is.read(a.name.data(), static_cast<std::streamsize>(a.name.size()));
    a.shape.resize(read_u64(is));
    for (std::size_t& d : a.shape) d = read_u64(is);
    a.data.resize(read_u64(is));
    is.read(reinterpret_cast<char*>(a.data.data()),
            static_cast<std::streamsize>(a.data.size() * sizeof(double)));
    if (!is) throw std::runtime_error("checkpoint: truncated array block");
    return a;
}

}  // namespace detail

inline constexpr char kCheckpointMagic[8] = {'E', 'A', 'D', 'S', 'C', 'N', 'N', '1'};

inline void save_checkpoint(const std::string& path, const ScnnConfig& cfg,
                            const ScnnParams& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
    os.write(kCheckpointMagic, sizeof kCheckpointMagic);
    detail::write_u64(os, static_cast<std::uint64_t>(cfg.num_classes));
    detail::write_u64(os, static_cast<std::uint64_t>(cfg.filter_size));
    detail::write_f64(os, cfg.gamma_h);
    detail::write_f64(os, cfg.gamma_w);
    for (std::size_t d : cfg.input_shape) detail::write_u64(os, d);
    for (std::size_t s : cfg.conv_strides) detail::write_u64(os, s);
    detail::write_u64(os, cfg.fc_width);
    detail::write_u64(os, cfg.sfc_width);
    detail::write_f64(os, cfg.leaky_slope);
    detail::write_f64(os, cfg.learning_rate);
    detail::write_u64(os, cfg.seed);
    detail::write_u64(os, cfg.use_subsample_path ? 1 : 0);

    std::vector<std::pair<std::string, std::pair<std::vector<std::size_t>, const std::vector<double>*>>>
        arrays = {
            {"conv1.weights", {params.conv1.weights.shape, &params.conv1.weights.data}},
            {"conv1.biases", {{params.conv1.biases.size()}, &params.conv1.biases}},
            {"conv2.weights", {params.conv2.weights.shape, &params.conv2.weights.data}},
            {"conv2.biases", {{params.conv2.biases.size()}, &params.conv2.biases}},
            {"ln1.gain", {{params.ln1.gain.size()}, &params.ln1.gain}},
            {"ln1.shift", {{params.ln1.shift.size()}, &params.ln1.shift}},
            {"ln2.gain", {{params.ln2.gain.size()}, &params.ln2.gain}},
            {"ln2.shift", {{params.ln2.shift.size()}, &params.ln2.shift}},
            {"fc.weights", {{params.fc.out_width, params.fc.in_width}, &params.fc.weights}},
            {"fc.biases", {{params.fc.biases.size()}, &params.fc.biases}},
            {"head.weights", {{params.head.out_width, params.head.in_width}, &params.head.weights}},
            {"head.biases", {{params.head.biases.size()}, &params.head.biases}},
        };
    if (cfg.use_subsample_path) {
        arrays.push_back({"sconv.weights", {params.sconv.weights.shape, &params.sconv.weights.data}});
        arrays.push_back({"sconv.biases", {{params.sconv.biases.size()}, &params.sconv.biases}});
        arrays.push_back({"ln3.gain", {{params.ln3.gain.size()}, &params.ln3.gain}});
        arrays.push_back({"ln3.shift", {{params.ln3.shift.size()}, &params.ln3.shift}});
        arrays.push_back({"sfc.weights", {{params.sfc.out_width, params.sfc.in_width}, &params.sfc.weights}});
        arrays.push_back({"sfc.biases", {{params.sfc.biases.size()}, &params.sfc.biases}});
    }

    detail::write_u64(os, arrays.size());
    for (const auto& [name, body] : arrays) {
        detail::write_array(os, name, body.first, *body.second);
    }
    if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

inline std::pair<ScnnConfig, ScnnParams> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    }

    ScnnConfig cfg;
    cfg.num_classes = static_cast<int>(detail::read_u64(is));
    cfg.filter_size = static_cast<int>(detail::read_u64(is));
    cfg.gamma_h = detail::read_f64(is);
    cfg.gamma_w = detail::read_f64(is);
    for (std::size_t& d : cfg.input_shape) d = detail::read_u64(is);
    for (std::size_t& s : cfg.conv_strides) s = detail::read_u64(is);
    cfg.fc_width = detail::read_u64(is);
    cfg.sfc_width = detail::read_u64(is);
    cfg.leaky_slope = detail::read_f64(is);
    cfg.learning_rate = detail::read_f64(is);
    cfg.seed = detail::read_u64(is);
    cfg.use_subsample_path = detail::read_u64(is) != 0;

    ScnnParams params;
    const std::uint64_t count = detail::read_u64(is);
    for (std::uint64_t k = 0; k < count; ++k) {
        detail::NamedArray a = detail::read_array(is);
        if (a.name == "conv1.weights") params.conv1.weights = Tensor(a.shape, std::move(a.data));
        else if (a.name == "conv1.biases") params.conv1.biases = std::move(a.data);
        else if (a.name == "conv2.weights") params.conv2.weights = Tensor(a.shape, std::move(a.data));
        else if (a.name == "conv2.biases") params.conv2.biases = std::move(a.data);
        else if (a.name == "sconv.weights") params.sconv.weights = Tensor(a.shape, std::move(a.data));
        else if (a.name == "sconv.biases") params.sconv.biases = std::move(a.data);
        else if (a.name == "ln1.gain") params.ln1.gain = std::move(a.data);
        else if (a.name == "ln1.shift") params.ln1.shift = std::move(a.data);
        else if (a.name == "ln2.gain") params.ln2.gain = std::move(a.data);
        else if (a.name == "ln2.shift") params.ln2.shift = std::move(a.data);
        else if (a.name == "ln3.gain") params.ln3.gain = std::move(a.data);
        else if (a.name == "ln3.shift") params.ln3.shift = std::move(a.data);
        else if (a.name == "fc.weights") {
            params.fc.out_width = a.shape.at(0);
            params.fc.in_width = a.shape.at(1);
            params.fc.weights = std::move(a.data);
        } else if (a.name == "fc.biases") params.fc.biases = std::move(a.data);
        else if (a.name == "sfc.weights") {
            params.sfc.out_width = a.shape.at(0);
            params.sfc.in_width = a.shape.at(1);
            params.sfc.weights = std::move(a.data);
        } else if (a.name == "sfc.biases") params.sfc.biases = std::move(a.data);
        else if (a.name == "head.weights") {
            params.head.out_width = a.shape.at(0);
            params.head.in_width = a.shape.at(1);
            params.head.weights = std::move(a.data);
        } else if (a.name == "head.biases") params.head.biases = std::move(a.data);
        else throw std::runtime_error("load_checkpoint: unknown array " + a.name);
    }
    return {cfg, params};
}

}  // namespace ead
