#pragma once

// Independent reference implementations used as test oracles. These stay
// deliberately naive (nested loops, direct formulas) and must not share code
// with the library paths they check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "ssrn/layers.hpp"
#include "ssrn/tensor.hpp"

namespace oracle {

// Relative error with a unit floor, so near-zero values are compared
// absolutely.
inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Plain quadruple-loop convolution with explicit zero padding.
inline ssrn::Tensor naive_conv2d(const ssrn::Tensor& input, const ssrn::ConvParams& p) {
    const long long h = static_cast<long long>(input.height());
    const long long w = static_cast<long long>(input.width());
    const long long k = static_cast<long long>(p.kernel());
    const long long s = static_cast<long long>(p.stride);
    const long long pad = static_cast<long long>(p.padding);
    const long long oh = (h + 2 * pad - k) / s + 1;
    const long long ow = (w + 2 * pad - k) / s + 1;

    ssrn::Tensor out({p.out_channels(), static_cast<std::size_t>(oh),
                      static_cast<std::size_t>(ow)});
    for (std::size_t oc = 0; oc < p.out_channels(); ++oc)
        for (long long oy = 0; oy < oh; ++oy)
            for (long long ox = 0; ox < ow; ++ox) {
                double acc = p.bias[oc];
                for (std::size_t ic = 0; ic < p.in_channels(); ++ic)
                    for (long long ky = 0; ky < k; ++ky)
                        for (long long kx = 0; kx < k; ++kx) {
                            const long long iy = oy * s + ky - pad;
                            const long long ix = ox * s + kx - pad;
                            if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                            acc += p.weights[((oc * p.in_channels() + ic) *
                                                  static_cast<std::size_t>(k) +
                                              static_cast<std::size_t>(ky)) *
                                                 static_cast<std::size_t>(k) +
                                             static_cast<std::size_t>(kx)] *
                                   input.at(ic, static_cast<std::size_t>(iy),
                                            static_cast<std::size_t>(ix));
                        }
                out.at(oc, static_cast<std::size_t>(oy), static_cast<std::size_t>(ox)) = acc;
            }
    return out;
}

// Plain 3x3 max pooling, padding 1, out-of-bounds cells never win.
inline ssrn::Tensor naive_maxpool(const ssrn::Tensor& input, std::size_t stride) {
    const long long h = static_cast<long long>(input.height());
    const long long w = static_cast<long long>(input.width());
    const long long s = static_cast<long long>(stride);
    const long long oh = (h + 2 - 3) / s + 1;
    const long long ow = (w + 2 - 3) / s + 1;
    ssrn::Tensor out({input.channels(), static_cast<std::size_t>(oh),
                      static_cast<std::size_t>(ow)});
    for (std::size_t c = 0; c < input.channels(); ++c)
        for (long long oy = 0; oy < oh; ++oy)
            for (long long ox = 0; ox < ow; ++ox) {
                double best = -std::numeric_limits<double>::infinity();
                for (long long ky = 0; ky < 3; ++ky)
                    for (long long kx = 0; kx < 3; ++kx) {
                        const long long iy = oy * s + ky - 1;
                        const long long ix = ox * s + kx - 1;
                        if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                        best = std::max(best, input.at(c, static_cast<std::size_t>(iy),
                                                       static_cast<std::size_t>(ix)));
                    }
                out.at(c, static_cast<std::size_t>(oy), static_cast<std::size_t>(ox)) = best;
            }
    return out;
}

// Direct (non-separable) 4x4-neighborhood cubic interpolation with the Keys
// a=-0.5 kernel, half-pixel mapping and edge clamping.
inline double keys_cubic(double x) {
    x = std::abs(x);
    if (x <= 1.0) return 1.5 * x * x * x - 2.5 * x * x + 1.0;
    if (x < 2.0) return -0.5 * x * x * x + 2.5 * x * x - 4.0 * x + 2.0;
    return 0.0;
}

inline ssrn::Tensor bicubic_direct(const ssrn::Tensor& src, std::size_t target_h,
                                   std::size_t target_w) {
    const long long sh = static_cast<long long>(src.height());
    const long long sw = static_cast<long long>(src.width());
    ssrn::Tensor out({1, target_h, target_w});
    const double sy = static_cast<double>(sh) / static_cast<double>(target_h);
    const double sx = static_cast<double>(sw) / static_cast<double>(target_w);
    for (std::size_t oy = 0; oy < target_h; ++oy) {
        const double py = (static_cast<double>(oy) + 0.5) * sy - 0.5;
        const long long by = static_cast<long long>(std::floor(py));
        for (std::size_t ox = 0; ox < target_w; ++ox) {
            const double px = (static_cast<double>(ox) + 0.5) * sx - 0.5;
            const long long bx = static_cast<long long>(std::floor(px));
            double acc = 0.0;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    const long long ty = std::clamp<long long>(by - 1 + i, 0, sh - 1);
                    const long long tx = std::clamp<long long>(bx - 1 + j, 0, sw - 1);
                    const double wy = keys_cubic(py - static_cast<double>(by - 1 + i));
                    const double wx = keys_cubic(px - static_cast<double>(bx - 1 + j));
                    acc += wy * wx *
                           src.at(0, static_cast<std::size_t>(ty), static_cast<std::size_t>(tx));
                }
            out.at(0, oy, ox) = acc;
        }
    }
    return out;
}

// Central finite difference of a scalar function with respect to one slot.
inline double central_diff(double* slot, const std::function<double()>& f, double h = 1e-5) {
    const double saved = *slot;
    *slot = saved + h;
    const double fp = f();
    *slot = saved - h;
    const double fm = f();
    *slot = saved;
    return (fp - fm) / (2.0 * h);
}

// Tie-aware all-pairs ranking statistic: P(pos > neg) + 0.5 P(pos == neg).
inline double ranking_auc(const std::vector<std::uint8_t>& values,
                          const std::vector<std::uint8_t>& gt) {
    double wins = 0.0;
    std::size_t n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!gt[i]) continue;
        ++n_pos;
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (gt[j]) continue;
            if (values[i] > values[j]) wins += 1.0;
            else if (values[i] == values[j]) wins += 0.5;
        }
    }
    n_neg = values.size() - n_pos;
    return wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Per-threshold counts by brute force, mirroring the >= convention.
struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline Counts count_at_threshold(const std::vector<std::uint8_t>& values,
                                 const std::vector<std::uint8_t>& gt, int t) {
    Counts c;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const bool m = values[i] >= t;
        if (m && gt[i]) ++c.tp;
        else if (m && !gt[i]) ++c.fp;
        else if (!m && gt[i]) ++c.fn;
        else ++c.tn;
    }
    return c;
}

} // namespace oracle
