#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ssrn/error.hpp"
#include "ssrn/tensor.hpp"

namespace ssrn {

// Bicubic size restoration: Keys cubic convolution kernel (a = -0.5), 4x4
// support, separable row/column passes, half-pixel-centered source mapping
// and edge-clamped sampling.

inline double cubic_keys(double x) {
    x = std::abs(x);
    if (x <= 1.0) return ((1.5 * x - 2.5) * x) * x + 1.0;
    if (x < 2.0) return ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0;
    return 0.0;
}

namespace detail {

struct TapSet {
    std::array<std::size_t, 4> idx;  // clamped source indices
    std::array<double, 4> w;         // kernel weights, sum to 1
};

inline std::vector<TapSet> cubic_taps(std::size_t src_n, std::size_t dst_n) {
    std::vector<TapSet> taps(dst_n);
    const double scale = static_cast<double>(src_n) / static_cast<double>(dst_n);
    for (std::size_t d = 0; d < dst_n; ++d) {
        const double pos = (static_cast<double>(d) + 0.5) * scale - 0.5;
        const double base = std::floor(pos);
        const double frac = pos - base;
        const long long b = static_cast<long long>(base);
        for (int i = 0; i < 4; ++i) {
            long long t = b - 1 + i;
            if (t < 0) t = 0;
            if (t >= static_cast<long long>(src_n)) t = static_cast<long long>(src_n) - 1;
            taps[d].idx[static_cast<std::size_t>(i)] = static_cast<std::size_t>(t);
            taps[d].w[static_cast<std::size_t>(i)] = cubic_keys(frac + 1.0 - i);
        }
    }
    return taps;
}

// Horizontal pass: (h, src_w) -> (h, dst_w).
inline void resample_rows(const double* src, std::size_t h, std::size_t src_w, double* dst,
                          const std::vector<TapSet>& taps) {
    const std::size_t dst_w = taps.size();
    for (std::size_t y = 0; y < h; ++y) {
        const double* srow = src + y * src_w;
        double* drow = dst + y * dst_w;
        for (std::size_t x = 0; x < dst_w; ++x) {
            const TapSet& t = taps[x];
            drow[x] = t.w[0] * srow[t.idx[0]] + t.w[1] * srow[t.idx[1]] +
                      t.w[2] * srow[t.idx[2]] + t.w[3] * srow[t.idx[3]];
        }
    }
}

// Vertical pass: (src_h, w) -> (dst_h, w).
inline void resample_cols(const double* src, std::size_t src_h, std::size_t w, double* dst,
                          const std::vector<TapSet>& taps) {
    (void)src_h;
    const std::size_t dst_h = taps.size();
    for (std::size_t y = 0; y < dst_h; ++y) {
        const TapSet& t = taps[y];
        const double* r0 = src + t.idx[0] * w;
        const double* r1 = src + t.idx[1] * w;
        const double* r2 = src + t.idx[2] * w;
        const double* r3 = src + t.idx[3] * w;
        double* drow = dst + y * w;
        for (std::size_t x = 0; x < w; ++x)
            drow[x] = t.w[0] * r0[x] + t.w[1] * r1[x] + t.w[2] * r2[x] + t.w[3] * r3[x];
    }
}

inline void restore_plane(const double* src, std::size_t src_h, std::size_t src_w, double* dst,
                          std::size_t dst_h, std::size_t dst_w) {
    const auto xtaps = cubic_taps(src_w, dst_w);
    const auto ytaps = cubic_taps(src_h, dst_h);
    std::vector<double> tmp(src_h * dst_w);
    resample_rows(src, src_h, src_w, tmp.data(), xtaps);
    resample_cols(tmp.data(), src_h, dst_w, dst, ytaps);
}

// Transpose of restore_plane: scatter instead of gather, pass order reversed.
inline void restore_plane_adjoint(const double* grad, std::size_t dst_h, std::size_t dst_w,
                                  double* out, std::size_t src_h, std::size_t src_w) {
    const auto xtaps = cubic_taps(src_w, dst_w);
    const auto ytaps = cubic_taps(src_h, dst_h);
    std::vector<double> tmp(src_h * dst_w, 0.0);
    for (std::size_t y = 0; y < dst_h; ++y) {
        const TapSet& t = ytaps[y];
        const double* grow = grad + y * dst_w;
        for (int i = 0; i < 4; ++i) {
            double* trow = tmp.data() + t.idx[static_cast<std::size_t>(i)] * dst_w;
            const double wgt = t.w[static_cast<std::size_t>(i)];
            for (std::size_t x = 0; x < dst_w; ++x) trow[x] += wgt * grow[x];
        }
    }
    std::fill(out, out + src_h * src_w, 0.0);
    for (std::size_t y = 0; y < src_h; ++y) {
        const double* trow = tmp.data() + y * dst_w;
        double* orow = out + y * src_w;
        for (std::size_t x = 0; x < dst_w; ++x) {
            const TapSet& t = xtaps[x];
            for (int i = 0; i < 4; ++i)
                orow[t.idx[static_cast<std::size_t>(i)]] +=
                    t.w[static_cast<std::size_t>(i)] * trow[x];
        }
    }
}

} // namespace detail

// Restores a basic saliency map (1,h,w) to (1,target_h,target_w).
inline Tensor restore_size(const Tensor& basic_map, std::size_t target_w, std::size_t target_h) {
    require_rank3(basic_map, "restore_size");
    if (basic_map.channels() != 1)
        throw ShapeError("restore_size: expected a single-channel map");
    if (basic_map.height() < 1 || basic_map.width() < 1 || target_h < 1 || target_w < 1)
        throw ShapeError("restore_size: dimensions must be positive");
    Tensor out({1, target_h, target_w});
    detail::restore_plane(basic_map.data(), basic_map.height(), basic_map.width(), out.data(),
                          target_h, target_w);
    return out;
}

// Adjoint of restore_size: maps a gradient on the restored map back to the
// basic map. Bicubic interpolation is linear, so this is the exact transpose
// of the interpolation weights.
inline Tensor restore_size_adjoint(const Tensor& grad_restored, std::size_t src_h,
                                   std::size_t src_w) {
    require_rank3(grad_restored, "restore_size_adjoint");
    if (grad_restored.channels() != 1)
        throw ShapeError("restore_size_adjoint: expected a single-channel map");
    Tensor out({1, src_h, src_w});
    detail::restore_plane_adjoint(grad_restored.data(), grad_restored.height(),
                                  grad_restored.width(), out.data(), src_h, src_w);
    return out;
}

// Channel-wise bicubic resize of a (C,H,W) tensor.
inline Tensor resize_bicubic(const Tensor& input, std::size_t target_w, std::size_t target_h) {
    require_rank3(input, "resize_bicubic");
    Tensor out({input.channels(), target_h, target_w});
    for (std::size_t c = 0; c < input.channels(); ++c)
        detail::restore_plane(input.plane(c), input.height(), input.width(), out.plane(c),
                              target_h, target_w);
    return out;
}

// Nearest-neighbor resize of a (C,H,W) tensor; preserves the source's value
// set, which keeps binary masks binary.
inline Tensor resize_nearest(const Tensor& input, std::size_t target_w, std::size_t target_h) {
    require_rank3(input, "resize_nearest");
    const double sy = static_cast<double>(input.height()) / static_cast<double>(target_h);
    const double sx = static_cast<double>(input.width()) / static_cast<double>(target_w);
    Tensor out({input.channels(), target_h, target_w});
    for (std::size_t c = 0; c < input.channels(); ++c) {
        const double* ip = input.plane(c);
        double* op = out.plane(c);
        for (std::size_t y = 0; y < target_h; ++y) {
            std::size_t iy = static_cast<std::size_t>((static_cast<double>(y) + 0.5) * sy);
            if (iy >= input.height()) iy = input.height() - 1;
            for (std::size_t x = 0; x < target_w; ++x) {
                std::size_t ix = static_cast<std::size_t>((static_cast<double>(x) + 0.5) * sx);
                if (ix >= input.width()) ix = input.width() - 1;
                op[y * target_w + x] = ip[iy * input.width() + ix];
            }
        }
    }
    return out;
}

} // namespace ssrn
