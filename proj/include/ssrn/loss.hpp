#pragma once

#include <cmath>
#include <cstddef>
#include <iostream>
#include <string>

#include "ssrn/error.hpp"
#include "ssrn/tensor.hpp"

namespace ssrn {

enum class LossKind { weighted_smooth_l1, euclidean, cross_entropy };

inline LossKind loss_kind_from_string(const std::string& s) {
    if (s == "weighted-smooth-l1") return LossKind::weighted_smooth_l1;
    if (s == "euclidean") return LossKind::euclidean;
    if (s == "cross-entropy") return LossKind::cross_entropy;
    throw ValueError("unknown loss kind: " + s);
}

inline std::string to_string(LossKind k) {
    switch (k) {
        case LossKind::weighted_smooth_l1: return "weighted-smooth-l1";
        case LossKind::euclidean: return "euclidean";
        case LossKind::cross_entropy: return "cross-entropy";
    }
    return "?";
}

struct LossConfig {
    LossKind kind = LossKind::weighted_smooth_l1;
    double beta = 1.0;       // balance weight on the salient-region term
    double epsilon = 1e-6;   // cross-entropy clamp

    void validate() const {
        if (!(beta >= 0.0))
            throw ValueError("loss config: beta must be non-negative");
        if (!(epsilon > 0.0 && epsilon < 0.5))
            throw ValueError("loss config: epsilon must lie in (0, 0.5)");
    }
};

struct LossResult {
    double value = 0.0;
    Tensor grad;            // dL/d prediction, same shape as the prediction
    std::size_t n_pos = 0;  // salient pixel count
    std::size_t n_neg = 0;  // background pixel count
};

// Smooth-L1: quadratic inside |z| <= 1, linear outside, continuous at the
// knee together with its derivative.
inline double smooth_l1(double z) {
    const double a = std::abs(z);
    return a <= 1.0 ? 0.5 * z * z : a - 0.5;
}

inline double smooth_l1_grad(double z) {
    if (z > 1.0) return 1.0;
    if (z < -1.0) return -1.0;
    return z;
}

// Total loss over one prediction/target pair. The weighted Smooth-L1 kind is
//   L = (1/N) [ sum_i Psi(p_i - y_i) + beta * (N-/N) * sum_{y_j=1} Psi(p_j - y_j) ]
// with the salient-region term weighted by the background fraction so that
// scarce salient pixels are not drowned out. Euclidean and cross-entropy are
// the controlled-experiment replacements.
inline LossResult total_loss(const Tensor& prediction, const Tensor& target,
                             const LossConfig& config) {
    config.validate();
    require_same_shape(prediction, target, "total_loss");
    const std::size_t n = prediction.size();
    if (n == 0)
        throw ShapeError("total_loss: empty tensors");

    LossResult r;
    r.grad = Tensor(prediction.shape());
    for (std::size_t i = 0; i < n; ++i) {
        const double y = target[i];
        if (y != 0.0 && y != 1.0)
            throw ValueError("total_loss: target must be strictly binary");
        if (y == 1.0)
            ++r.n_pos;
    }
    r.n_neg = n - r.n_pos;

    const double inv_n = 1.0 / static_cast<double>(n);
    switch (config.kind) {
        case LossKind::weighted_smooth_l1: {
            if (r.n_pos == 0 && config.beta > 0.0)
                std::cerr << "ssrn: warning: no salient pixels in target, "
                             "salient-region loss term is empty\n";
            const double ws =
                config.beta * static_cast<double>(r.n_neg) * inv_n;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double z = prediction[i] - target[i];
                const double extra = target[i] == 1.0 ? ws : 0.0;
                acc += smooth_l1(z) * (1.0 + extra);
                r.grad[i] = smooth_l1_grad(z) * (1.0 + extra) * inv_n;
            }
            r.value = acc * inv_n;
            break;
        }
        case LossKind::euclidean: {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double z = prediction[i] - target[i];
                acc += z * z;
                r.grad[i] = z * inv_n;
            }
            r.value = 0.5 * acc * inv_n;
            break;
        }
        case LossKind::cross_entropy: {
            const double lo = config.epsilon;
            const double hi = 1.0 - config.epsilon;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double p = std::min(hi, std::max(lo, prediction[i]));
                const double y = target[i];
                acc -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
                // Gradient at the clamped score; kept alive outside the clamp
                // band so saturated pixels still push back toward it.
                r.grad[i] = (p - y) / (p * (1.0 - p)) * inv_n;
            }
            r.value = acc * inv_n;
            break;
        }
    }
    return r;
}

} // namespace ssrn
