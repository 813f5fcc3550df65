#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ssrn/error.hpp"
#include "ssrn/pnm.hpp"
#include "ssrn/resize.hpp"
#include "ssrn/rng.hpp"
#include "ssrn/tensor.hpp"

namespace ssrn {

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

struct ManifestRecord {
    std::string image_path;
    std::string mask_path;
};

// One tab-separated (image, mask) record per line; '#' comments and blank
// lines are skipped. Relative record paths are resolved against the
// manifest's own directory.
struct Manifest {
    std::vector<ManifestRecord> records;
    std::string source_path;
};

inline Manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open manifest " + path);

    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    auto resolve = [&base](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() || base.empty() ? fp.string() : (base / fp).string();
    };

    Manifest m;
    m.source_path = path;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
            line.find('\t', tab + 1) != std::string::npos)
            throw FormatError(path + ":" + std::to_string(line_no) +
                              ": expected exactly two tab-separated paths");
        ManifestRecord rec{resolve(line.substr(0, tab)), resolve(line.substr(tab + 1))};
        if (!seen.insert(rec.image_path).second)
            throw FormatError(path + ":" + std::to_string(line_no) +
                              ": duplicate image path " + rec.image_path);
        m.records.push_back(std::move(rec));
    }
    return m;
}

// ---------------------------------------------------------------------------
// Sample pairs
// ---------------------------------------------------------------------------

struct SamplePair {
    Tensor image;  // (3,H,W), values in [0,1]
    Tensor mask;   // (1,H,W), values in {0,1}
    bool flipped = false;
    std::size_t origin = 0;  // manifest record index

    // Per-channel mean-subtracted view: what the network consumes.
    Tensor centered_image() const {
        Tensor out(image.shape());
        const std::size_t hw = image.height() * image.width();
        for (std::size_t c = 0; c < image.channels(); ++c) {
            const double* ip = image.plane(c);
            double mean = 0.0;
            for (std::size_t i = 0; i < hw; ++i) mean += ip[i];
            mean /= static_cast<double>(hw);
            double* op = out.plane(c);
            for (std::size_t i = 0; i < hw; ++i) op[i] = ip[i] - mean;
        }
        return out;
    }
};

inline Tensor image_to_tensor(const PnmImage& img) {
    Tensor t({3, img.height, img.width});
    const std::size_t hw = img.width * img.height;
    if (img.type == 6) {
        for (std::size_t i = 0; i < hw; ++i)
            for (std::size_t c = 0; c < 3; ++c)
                t.plane(c)[i] = static_cast<double>(img.pixels[i * 3 + c]) / 255.0;
    } else {
        for (std::size_t i = 0; i < hw; ++i) {
            const double v = static_cast<double>(img.pixels[i]) / 255.0;
            t.plane(0)[i] = v;
            t.plane(1)[i] = v;
            t.plane(2)[i] = v;
        }
    }
    return t;
}

inline Tensor mask_to_tensor(const PnmImage& img) {
    Tensor t({1, img.height, img.width});
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        t[i] = img.pixels[i] >= 128 ? 1.0 : 0.0;
    return t;
}

// Decodes one manifest record: PPM/PGM image scaled to [0,1] (grayscale
// broadcast to three channels), PGM mask binarized at 128.
inline SamplePair decode_pair(const ManifestRecord& record, std::size_t origin = 0) {
    const PnmImage img = read_pnm(record.image_path);
    const PnmImage msk = read_pnm(record.mask_path);
    if (msk.type != 5)
        throw FormatError(record.mask_path + ": mask must be 8-bit PGM (P5)");
    if (img.width != msk.width || img.height != msk.height)
        throw ShapeError("image/mask dimension mismatch: " + record.image_path + " is " +
                         std::to_string(img.width) + "x" + std::to_string(img.height) + ", " +
                         record.mask_path + " is " + std::to_string(msk.width) + "x" +
                         std::to_string(msk.height));
    SamplePair pair;
    pair.image = image_to_tensor(img);
    pair.mask = mask_to_tensor(msk);
    pair.origin = origin;
    return pair;
}

inline std::vector<SamplePair> decode_manifest(const Manifest& m) {
    std::vector<SamplePair> out;
    out.reserve(m.records.size());
    for (std::size_t i = 0; i < m.records.size(); ++i)
        out.push_back(decode_pair(m.records[i], i));
    return out;
}

// ---------------------------------------------------------------------------
// Augmentation and splits
// ---------------------------------------------------------------------------

inline Tensor hflip_tensor(const Tensor& t) {
    require_rank3(t, "hflip");
    Tensor out(t.shape());
    const std::size_t w = t.width();
    for (std::size_t c = 0; c < t.channels(); ++c) {
        const double* ip = t.plane(c);
        double* op = out.plane(c);
        for (std::size_t y = 0; y < t.height(); ++y)
            for (std::size_t x = 0; x < w; ++x)
                op[y * w + x] = ip[y * w + (w - 1 - x)];
    }
    return out;
}

inline SamplePair hflip(const SamplePair& pair) {
    SamplePair out;
    out.image = hflip_tensor(pair.image);
    out.mask = hflip_tensor(pair.mask);
    out.flipped = !pair.flipped;
    out.origin = pair.origin;
    return out;
}

// Horizontal-flip augmentation: every sample appears in original and
// mirrored form, exactly doubling the set.
inline std::vector<SamplePair> augment(const std::vector<SamplePair>& samples) {
    if (samples.empty())
        throw ValueError("augment: empty sample set");
    std::vector<SamplePair> out;
    out.reserve(samples.size() * 2);
    for (const auto& s : samples) out.push_back(s);
    for (const auto& s : samples) out.push_back(hflip(s));
    return out;
}

inline std::pair<Manifest, Manifest> split_train_val(const Manifest& manifest, double ratio,
                                                     std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ValueError("split_train_val: ratio must lie strictly in (0,1)");
    const std::size_t n = manifest.records.size();
    const std::size_t n_train = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * ratio));
    if (n_train == 0 || n_train >= n)
        throw ValueError("split_train_val: degenerate split (one side empty)");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    shuffle(order, rng);

    Manifest train, val;
    train.source_path = manifest.source_path;
    val.source_path = manifest.source_path;
    for (std::size_t i = 0; i < n; ++i)
        (i < n_train ? train : val).records.push_back(manifest.records[order[i]]);
    return {std::move(train), std::move(val)};
}

// Uniform-resize input mode: image bicubic-resized to side x side, mask
// nearest-neighbor-resized and re-binarized so it stays strictly binary.
inline SamplePair resize_uniform(const SamplePair& pair, std::size_t side) {
    if (side < 8)
        throw ValueError("resize_uniform: side must be at least 8");
    SamplePair out;
    out.image = resize_bicubic(pair.image, side, side);
    out.mask = resize_nearest(pair.mask, side, side);
    for (std::size_t i = 0; i < out.mask.size(); ++i)
        out.mask[i] = out.mask[i] >= 0.5 ? 1.0 : 0.0;
    out.flipped = pair.flipped;
    out.origin = pair.origin;
    return out;
}

// Saliency map writer: 8-bit PGM, round(255 * clamp(s, 0, 1)).
inline PnmImage saliency_to_pgm(const Tensor& saliency) {
    require_rank3(saliency, "saliency_to_pgm");
    if (saliency.channels() != 1)
        throw ShapeError("saliency_to_pgm: expected a single-channel map");
    PnmImage img;
    img.type = 5;
    img.width = saliency.width();
    img.height = saliency.height();
    img.pixels.resize(saliency.size());
    for (std::size_t i = 0; i < saliency.size(); ++i) {
        const double v = std::min(1.0, std::max(0.0, saliency[i]));
        img.pixels[i] = static_cast<std::uint8_t>(std::floor(255.0 * v + 0.5));
    }
    return img;
}

} // namespace ssrn
