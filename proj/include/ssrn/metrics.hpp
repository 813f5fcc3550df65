#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ssrn/data.hpp"
#include "ssrn/error.hpp"
#include "ssrn/network.hpp"
#include "ssrn/tensor.hpp"

namespace ssrn {

// ---------------------------------------------------------------------------
// Quantization and thresholding
// ---------------------------------------------------------------------------

struct QuantizedMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> values;  // 0..255
};

// Clamp to [0,1] then round(255*s), half-up.
inline QuantizedMap quantize(const Tensor& saliency) {
    require_rank3(saliency, "quantize");
    if (saliency.channels() != 1)
        throw ShapeError("quantize: expected a single-channel map");
    if (!saliency.all_finite())
        throw ValueError("quantize: non-finite saliency values");
    QuantizedMap q;
    q.width = saliency.width();
    q.height = saliency.height();
    q.values.resize(saliency.size());
    for (std::size_t i = 0; i < saliency.size(); ++i) {
        const double v = std::min(1.0, std::max(0.0, saliency[i]));
        q.values[i] = static_cast<std::uint8_t>(std::floor(255.0 * v + 0.5));
    }
    return q;
}

inline std::vector<std::uint8_t> binarize(const QuantizedMap& map, int t) {
    if (t < 0 || t > 255)
        throw ValueError("binarize: threshold must lie in 0..255");
    std::vector<std::uint8_t> m(map.values.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        m[i] = map.values[i] >= t ? 1 : 0;
    return m;
}

// ---------------------------------------------------------------------------
// PR / ROC curves
// ---------------------------------------------------------------------------

struct CurvePoint {
    int threshold;  // 0..255; 256 marks the synthetic origin point
    double precision;
    double recall;
    double tpr;
    double fpr;
};

namespace detail {

inline CurvePoint make_point(int t, std::size_t tp, std::size_t fp, std::size_t n_pos,
                             std::size_t n_neg) {
    // Degenerate conventions: |M|=0 -> precision 1; |G|=0 -> recall/tpr 1;
    // |G-complement|=0 -> fpr 0.
    CurvePoint p{};
    p.threshold = t;
    const std::size_t m = tp + fp;
    p.precision = m == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(m);
    p.recall = n_pos == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(n_pos);
    p.tpr = p.recall;
    p.fpr = n_neg == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(n_neg);
    return p;
}

} // namespace detail

// One point per threshold t in 0..255 (mask = value >= t), plus a synthetic
// origin so the ROC curve is anchored at (0,0).
inline std::vector<CurvePoint> pr_roc_curve(const QuantizedMap& map, const Tensor& gt) {
    require_rank3(gt, "pr_roc_curve");
    if (gt.channels() != 1 || gt.height() != map.height || gt.width() != map.width)
        throw ShapeError("pr_roc_curve: map/ground-truth dimension mismatch");

    std::array<std::size_t, 256> pos_hist{}, neg_hist{};
    std::size_t n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < map.values.size(); ++i) {
        const double y = gt[i];
        if (y != 0.0 && y != 1.0)
            throw ValueError("pr_roc_curve: ground truth must be binary");
        if (y == 1.0) {
            ++pos_hist[map.values[i]];
            ++n_pos;
        } else {
            ++neg_hist[map.values[i]];
            ++n_neg;
        }
    }

    std::vector<CurvePoint> curve;
    curve.reserve(257);
    // Cumulative counts of values >= t, built from t=255 downwards.
    std::vector<std::size_t> tp(256), fp(256);
    std::size_t tp_acc = 0, fp_acc = 0;
    for (int t = 255; t >= 0; --t) {
        tp_acc += pos_hist[static_cast<std::size_t>(t)];
        fp_acc += neg_hist[static_cast<std::size_t>(t)];
        tp[static_cast<std::size_t>(t)] = tp_acc;
        fp[static_cast<std::size_t>(t)] = fp_acc;
    }
    for (int t = 0; t <= 255; ++t)
        curve.push_back(detail::make_point(t, tp[static_cast<std::size_t>(t)],
                                           fp[static_cast<std::size_t>(t)], n_pos, n_neg));
    curve.push_back(CurvePoint{256, 1.0, 0.0, 0.0, 0.0});
    return curve;
}

// Trapezoidal area under the ROC curve, points sorted by fpr (ties by tpr).
inline double auc(std::vector<CurvePoint> curve) {
    if (curve.size() < 2)
        throw ValueError("auc: need at least two curve points");
    std::sort(curve.begin(), curve.end(), [](const CurvePoint& a, const CurvePoint& b) {
        if (a.fpr != b.fpr) return a.fpr < b.fpr;
        return a.tpr < b.tpr;
    });
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) * 0.5;
    return area;
}

struct MaxFResult {
    double f = 0.0;
    int threshold = 0;  // smallest threshold achieving the maximum
};

// Maximal F-measure over the real thresholds (the synthetic origin point is
// not a binarization and is skipped). beta2 weights precision over recall.
inline MaxFResult max_f_measure(const std::vector<CurvePoint>& curve, double beta2 = 0.3) {
    if (curve.empty())
        throw ValueError("max_f_measure: empty curve");
    MaxFResult best;
    bool found = false;
    for (const CurvePoint& p : curve) {
        if (p.threshold > 255) continue;
        const double denom = beta2 * p.precision + p.recall;
        const double f = denom == 0.0
                             ? 0.0
                             : (1.0 + beta2) * p.precision * p.recall / denom;
        if (!found || f > best.f) {
            best.f = f;
            best.threshold = p.threshold;
            found = true;
        }
    }
    if (!found)
        throw ValueError("max_f_measure: curve has no real thresholds");
    return best;
}

// Mean absolute error between the clamped saliency map and the binary mask.
inline double mae(const Tensor& saliency, const Tensor& gt) {
    require_same_shape(saliency, gt, "mae");
    double acc = 0.0;
    for (std::size_t i = 0; i < saliency.size(); ++i) {
        const double s = std::min(1.0, std::max(0.0, saliency[i]));
        acc += std::abs(s - gt[i]);
    }
    return acc / static_cast<double>(saliency.size());
}

// ---------------------------------------------------------------------------
// Dataset-level report
// ---------------------------------------------------------------------------

struct ImageMetrics {
    std::string name;
    std::vector<CurvePoint> curve;
    double auc = 0.0;
    double max_f = 0.0;
    int max_f_threshold = 0;
    double mae = 0.0;
};

struct MetricsReport {
    std::size_t image_count = 0;
    std::vector<ImageMetrics> per_image;
    std::vector<CurvePoint> mean_curve;  // pointwise mean per threshold
    double auc = 0.0;                    // of the mean ROC curve
    double max_f = 0.0;                  // of the mean PR curve
    int max_f_threshold = 0;
    double mae = 0.0;                    // mean of per-image MAE
    std::optional<double> mean_runtime_seconds;
};

inline ImageMetrics evaluate_image(const Tensor& saliency, const Tensor& gt,
                                   const std::string& name = "") {
    ImageMetrics m;
    m.name = name;
    m.curve = pr_roc_curve(quantize(saliency), gt);
    m.auc = auc(m.curve);
    const MaxFResult f = max_f_measure(m.curve);
    m.max_f = f.f;
    m.max_f_threshold = f.threshold;
    m.mae = mae(saliency, gt);
    return m;
}

inline MetricsReport aggregate_metrics(std::vector<ImageMetrics> per_image) {
    if (per_image.empty())
        throw ValueError("aggregate_metrics: no images");
    MetricsReport r;
    r.image_count = per_image.size();
    const std::size_t n_points = per_image.front().curve.size();
    r.mean_curve.resize(n_points);
    for (std::size_t k = 0; k < n_points; ++k) {
        CurvePoint mean{per_image.front().curve[k].threshold, 0.0, 0.0, 0.0, 0.0};
        for (const auto& im : per_image) {
            mean.precision += im.curve[k].precision;
            mean.recall += im.curve[k].recall;
            mean.tpr += im.curve[k].tpr;
            mean.fpr += im.curve[k].fpr;
        }
        const double inv = 1.0 / static_cast<double>(per_image.size());
        mean.precision *= inv;
        mean.recall *= inv;
        mean.tpr *= inv;
        mean.fpr *= inv;
        r.mean_curve[k] = mean;
    }
    r.auc = auc(r.mean_curve);
    const MaxFResult f = max_f_measure(r.mean_curve);
    r.max_f = f.f;
    r.max_f_threshold = f.threshold;
    double mae_acc = 0.0;
    for (const auto& im : per_image) mae_acc += im.mae;
    r.mae = mae_acc / static_cast<double>(per_image.size());
    r.per_image = std::move(per_image);
    return r;
}

inline void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
    out << "t,precision,recall,tpr,fpr\n";
    for (const CurvePoint& p : curve)
        out << p.threshold << ',' << p.precision << ',' << p.recall << ',' << p.tpr << ','
            << p.fpr << '\n';
}

// ---------------------------------------------------------------------------
// Runtime benchmark
// ---------------------------------------------------------------------------

struct BenchReport {
    double mean_seconds = 0.0;
    double min_seconds = 0.0;
    double max_seconds = 0.0;
    std::size_t n = 0;  // images x repeats
};

// Per-image wall clock from opening the image file to the restored
// full-resolution map, strictly sequential; result writing is excluded.
// Optional pre-transform hooks into the timed region (uniform-resize mode).
inline BenchReport bench_runtime(
    Network& net, const Manifest& manifest, std::size_t repeats,
    const std::function<Tensor(const Tensor&)>& pre_transform = {}) {
    if (repeats == 0)
        throw ValueError("bench_runtime: repeats must be positive");
    if (manifest.records.empty())
        throw ValueError("bench_runtime: empty manifest");

    net.set_mode(Network::Mode::inference);
    BenchReport r;
    double total = 0.0;
    r.min_seconds = std::numeric_limits<double>::infinity();
    r.max_seconds = 0.0;
    for (std::size_t rep = 0; rep < repeats; ++rep) {
        for (const auto& rec : manifest.records) {
            const auto t0 = std::chrono::steady_clock::now();
            const PnmImage img = read_pnm(rec.image_path);
            SamplePair pair;
            pair.image = image_to_tensor(img);
            Tensor input = pair.centered_image();
            if (pre_transform) input = pre_transform(input);
            const Tensor saliency = net.forward(input);
            (void)saliency;
            const auto t1 = std::chrono::steady_clock::now();
            const double dt = std::chrono::duration<double>(t1 - t0).count();
            total += dt;
            r.min_seconds = std::min(r.min_seconds, dt);
            r.max_seconds = std::max(r.max_seconds, dt);
            ++r.n;
        }
    }
    r.mean_seconds = total / static_cast<double>(r.n);
    return r;
}

} // namespace ssrn
