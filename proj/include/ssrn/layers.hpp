#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "ssrn/error.hpp"
#include "ssrn/rng.hpp"
#include "ssrn/tensor.hpp"

namespace ssrn {

// ---------------------------------------------------------------------------
// 2-D convolution
// ---------------------------------------------------------------------------

struct ConvParams {
    Tensor weights;            // (out_channels, in_channels, k, k)
    std::vector<double> bias;  // (out_channels)
    std::size_t stride = 1;
    std::size_t padding = 0;

    std::size_t out_channels() const { return weights.shape()[0]; }
    std::size_t in_channels() const { return weights.shape()[1]; }
    std::size_t kernel() const { return weights.shape()[2]; }

    void validate() const {
        if (weights.rank() != 4)
            throw ShapeError("conv weights must be (out,in,kh,kw)");
        const auto& s = weights.shape();
        if (s[2] != s[3] || (s[2] != 1 && s[2] != 3))
            throw ValueError("conv kernel must be square, 1x1 or 3x3");
        if (bias.size() != s[0])
            throw ShapeError("conv bias length must equal out_channels");
        if (stride == 0)
            throw ValueError("conv stride must be positive");
    }
};

namespace detail {

inline std::size_t conv_out_dim(std::size_t n, std::size_t k, std::size_t stride,
                                std::size_t padding, const char* what) {
    const long long out = (static_cast<long long>(n) + 2 * static_cast<long long>(padding) -
                           static_cast<long long>(k)) /
                              static_cast<long long>(stride) +
                          1;
    if (out < 1)
        throw ShapeError(std::string(what) + ": non-positive output dimension");
    return static_cast<std::size_t>(out);
}

} // namespace detail

inline Tensor conv2d_forward(const Tensor& input, const ConvParams& params) {
    params.validate();
    require_rank3(input, "conv2d_forward");
    if (input.channels() != params.in_channels())
        throw ShapeError("conv2d_forward: input channels " + std::to_string(input.channels()) +
                         " != kernel in_channels " + std::to_string(params.in_channels()));

    const long long h = static_cast<long long>(input.height());
    const long long w = static_cast<long long>(input.width());
    const long long k = static_cast<long long>(params.kernel());
    const long long s = static_cast<long long>(params.stride);
    const long long p = static_cast<long long>(params.padding);
    const std::size_t oh = detail::conv_out_dim(input.height(), params.kernel(), params.stride,
                                                params.padding, "conv2d_forward");
    const std::size_t ow = detail::conv_out_dim(input.width(), params.kernel(), params.stride,
                                                params.padding, "conv2d_forward");

    Tensor out({params.out_channels(), oh, ow});
    for (std::size_t oc = 0; oc < params.out_channels(); ++oc) {
        double* op = out.plane(oc);
        std::fill(op, op + oh * ow, params.bias[oc]);
    }

    // Padding is implicit: per (ky,kx) tap only the output range whose input
    // indices are in bounds is visited, so the inner loops stay branch-free.
    for (std::size_t ic = 0; ic < params.in_channels(); ++ic) {
        const double* ip = input.plane(ic);
        for (std::size_t oc = 0; oc < params.out_channels(); ++oc) {
            double* op = out.plane(oc);
            for (long long ky = 0; ky < k; ++ky) {
                for (long long kx = 0; kx < k; ++kx) {
                    const double wgt =
                        params.weights[((oc * params.in_channels() + ic) * params.kernel() +
                                        static_cast<std::size_t>(ky)) *
                                           params.kernel() +
                                       static_cast<std::size_t>(kx)];
                    if (wgt == 0.0) continue;
                    const long long oy_lo = std::max(0LL, (p - ky + s - 1) / s);
                    const long long oy_hi = std::min(static_cast<long long>(oh),
                                                     (h + p - ky + s - 1) / s);
                    const long long ox_lo = std::max(0LL, (p - kx + s - 1) / s);
                    const long long ox_hi = std::min(static_cast<long long>(ow),
                                                     (w + p - kx + s - 1) / s);
                    for (long long oy = oy_lo; oy < oy_hi; ++oy) {
                        const long long iy = oy * s + ky - p;
                        const double* irow = ip + iy * w;
                        double* orow = op + oy * static_cast<long long>(ow);
                        for (long long ox = ox_lo; ox < ox_hi; ++ox)
                            orow[ox] += wgt * irow[ox * s + kx - p];
                    }
                }
            }
        }
    }
    return out;
}

struct ConvGrads {
    Tensor input;              // dL/d input
    Tensor weights;            // dL/d weights
    std::vector<double> bias;  // dL/d bias
};

inline ConvGrads conv2d_backward(const Tensor& input, const ConvParams& params,
                                 const Tensor& grad_out) {
    params.validate();
    require_rank3(input, "conv2d_backward");
    require_rank3(grad_out, "conv2d_backward");
    if (input.channels() != params.in_channels())
        throw ShapeError("conv2d_backward: input/kernel channel mismatch");
    const std::size_t oh = detail::conv_out_dim(input.height(), params.kernel(), params.stride,
                                                params.padding, "conv2d_backward");
    const std::size_t ow = detail::conv_out_dim(input.width(), params.kernel(), params.stride,
                                                params.padding, "conv2d_backward");
    if (grad_out.channels() != params.out_channels() || grad_out.height() != oh ||
        grad_out.width() != ow)
        throw ShapeError("conv2d_backward: grad_out shape does not match forward output");

    const long long h = static_cast<long long>(input.height());
    const long long w = static_cast<long long>(input.width());
    const long long k = static_cast<long long>(params.kernel());
    const long long s = static_cast<long long>(params.stride);
    const long long p = static_cast<long long>(params.padding);

    ConvGrads g{Tensor(input.shape()), Tensor(params.weights.shape()),
                std::vector<double>(params.out_channels(), 0.0)};

    for (std::size_t oc = 0; oc < params.out_channels(); ++oc) {
        const double* gp = grad_out.plane(oc);
        double acc = 0.0;
        for (std::size_t i = 0; i < oh * ow; ++i) acc += gp[i];
        g.bias[oc] = acc;
    }

    for (std::size_t ic = 0; ic < params.in_channels(); ++ic) {
        const double* ip = input.plane(ic);
        double* gip = g.input.plane(ic);
        for (std::size_t oc = 0; oc < params.out_channels(); ++oc) {
            const double* gp = grad_out.plane(oc);
            for (long long ky = 0; ky < k; ++ky) {
                for (long long kx = 0; kx < k; ++kx) {
                    const std::size_t widx =
                        ((oc * params.in_channels() + ic) * params.kernel() +
                         static_cast<std::size_t>(ky)) *
                            params.kernel() +
                        static_cast<std::size_t>(kx);
                    const double wgt = params.weights[widx];
                    const long long oy_lo = std::max(0LL, (p - ky + s - 1) / s);
                    const long long oy_hi = std::min(static_cast<long long>(oh),
                                                     (h + p - ky + s - 1) / s);
                    const long long ox_lo = std::max(0LL, (p - kx + s - 1) / s);
                    const long long ox_hi = std::min(static_cast<long long>(ow),
                                                     (w + p - kx + s - 1) / s);
                    double wacc = 0.0;
                    for (long long oy = oy_lo; oy < oy_hi; ++oy) {
                        const long long iy = oy * s + ky - p;
                        const double* irow = ip + iy * w;
                        double* girow = gip + iy * w;
                        const double* grow = gp + oy * static_cast<long long>(ow);
                        for (long long ox = ox_lo; ox < ox_hi; ++ox) {
                            const long long ix = ox * s + kx - p;
                            wacc += grow[ox] * irow[ix];
                            girow[ix] += wgt * grow[ox];
                        }
                    }
                    g.weights[widx] += wacc;
                }
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// 3x3 max pooling
// ---------------------------------------------------------------------------

struct PoolParams {
    std::size_t kernel = 3;
    std::size_t stride = 2;
    std::size_t padding = 1;

    void validate() const {
        if (kernel != 3)
            throw ValueError("pool kernel is fixed at 3");
        if (stride != 1 && stride != 2)
            throw ValueError("pool stride must be 1 or 2");
    }
};

struct MaxPoolResult {
    Tensor output;
    // Flat index into the pooled input per output cell; the winning location.
    std::vector<std::size_t> argmax;
};

inline MaxPoolResult maxpool_forward(const Tensor& input, const PoolParams& params) {
    params.validate();
    require_rank3(input, "maxpool_forward");

    const long long h = static_cast<long long>(input.height());
    const long long w = static_cast<long long>(input.width());
    const long long k = static_cast<long long>(params.kernel);
    const long long s = static_cast<long long>(params.stride);
    const long long p = static_cast<long long>(params.padding);
    const std::size_t oh =
        detail::conv_out_dim(input.height(), params.kernel, params.stride, params.padding,
                             "maxpool_forward");
    const std::size_t ow =
        detail::conv_out_dim(input.width(), params.kernel, params.stride, params.padding,
                             "maxpool_forward");

    MaxPoolResult r{Tensor({input.channels(), oh, ow}),
                    std::vector<std::size_t>(input.channels() * oh * ow, 0)};

    std::size_t cell = 0;
    for (std::size_t c = 0; c < input.channels(); ++c) {
        const double* ip = input.plane(c);
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox, ++cell) {
                // Padded cells act as -inf: only in-bounds cells can win.
                double best = -std::numeric_limits<double>::infinity();
                std::size_t best_idx = 0;
                const long long y0 = static_cast<long long>(oy) * s - p;
                const long long x0 = static_cast<long long>(ox) * s - p;
                for (long long ky = std::max(0LL, -y0); ky < k; ++ky) {
                    const long long iy = y0 + ky;
                    if (iy >= h) break;
                    for (long long kx = std::max(0LL, -x0); kx < k; ++kx) {
                        const long long ix = x0 + kx;
                        if (ix >= w) break;
                        const double v = ip[iy * w + ix];
                        if (v > best) {
                            best = v;
                            best_idx = static_cast<std::size_t>(
                                (static_cast<long long>(c) * h + iy) * w + ix);
                        }
                    }
                }
                r.output[cell] = best;
                r.argmax[cell] = best_idx;
            }
        }
    }
    return r;
}

inline Tensor maxpool_backward(const std::vector<std::size_t>& argmax, const Tensor& grad_out,
                               const std::vector<std::size_t>& input_shape) {
    if (input_shape.size() != 3)
        throw ShapeError("maxpool_backward: input shape must be (C,H,W)");
    if (argmax.size() != grad_out.size())
        throw ShapeError("maxpool_backward: argmax indices do not match grad_out");

    Tensor grad_in(input_shape);
    const std::size_t n = grad_in.size();
    for (std::size_t i = 0; i < argmax.size(); ++i) {
        if (argmax[i] >= n)
            throw ShapeError("maxpool_backward: stale argmax index out of range");
        grad_in[argmax[i]] += grad_out[i];
    }
    return grad_in;
}

// ---------------------------------------------------------------------------
// ReLU
// ---------------------------------------------------------------------------

inline Tensor relu_forward(const Tensor& input) {
    Tensor out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i)
        out[i] = input[i] > 0.0 ? input[i] : 0.0;
    return out;
}

inline Tensor relu_backward(const Tensor& input, const Tensor& grad_out) {
    require_same_shape(input, grad_out, "relu_backward");
    Tensor grad_in(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i)
        grad_in[i] = input[i] > 0.0 ? grad_out[i] : 0.0;
    return grad_in;
}

// ---------------------------------------------------------------------------
// Inverted dropout
// ---------------------------------------------------------------------------

struct DropoutState {
    enum class Mode { training, inference };

    DropoutState(double rate, Mode mode, std::uint64_t seed)
        : rate(rate), mode(mode), rng_seed(seed), rng(seed) {
        if (!(rate >= 0.0 && rate < 1.0))
            throw ValueError("dropout rate must lie in [0,1)");
    }

    double rate;
    Mode mode;
    std::uint64_t rng_seed;
    std::mt19937_64 rng;
    std::vector<std::uint8_t> mask;  // last sampled keep-mask (training only)
};

// Training: zero each unit with probability rate, scale survivors by
// 1/(1-rate) so inference needs no rescale. Inference: exact identity.
inline Tensor dropout_forward(const Tensor& input, DropoutState& state) {
    if (state.mode == DropoutState::Mode::inference || state.rate == 0.0) {
        if (state.mode == DropoutState::Mode::training) {
            state.mask.assign(input.size(), 1);
        }
        return input;
    }
    const double scale = 1.0 / (1.0 - state.rate);
    state.mask.assign(input.size(), 0);
    Tensor out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) {
        if (uniform_unit(state.rng) >= state.rate) {
            state.mask[i] = 1;
            out[i] = input[i] * scale;
        }
    }
    return out;
}

inline Tensor dropout_backward(const Tensor& grad_out, const DropoutState& state) {
    if (state.mode == DropoutState::Mode::inference || state.rate == 0.0)
        return grad_out;
    if (state.mask.size() != grad_out.size())
        throw ShapeError("dropout_backward: mask does not match grad_out (missing forward?)");
    const double scale = 1.0 / (1.0 - state.rate);
    Tensor grad_in(grad_out.shape());
    for (std::size_t i = 0; i < grad_out.size(); ++i)
        grad_in[i] = state.mask[i] ? grad_out[i] * scale : 0.0;
    return grad_in;
}

} // namespace ssrn
