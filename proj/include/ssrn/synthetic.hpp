#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "ssrn/data.hpp"
#include "ssrn/error.hpp"
#include "ssrn/pnm.hpp"
#include "ssrn/rng.hpp"
#include "ssrn/tensor.hpp"

namespace ssrn {

// Seeded generator for desk-scale experiments: one bright axis-aligned
// rectangle per image on a textured dark background, with the rectangle as
// the ground-truth salient object.

struct ToyOptions {
    std::size_t side = 64;
    double background_base = 0.10;
    double background_noise = 0.18;   // per-pixel uniform texture amplitude
    double rectangle_base = 0.78;
    double rectangle_noise = 0.14;
    double min_extent = 0.25;         // rectangle side as a fraction of image side
    double max_extent = 0.55;
};

inline SamplePair make_toy_pair(std::mt19937_64& rng, const ToyOptions& opt = {}) {
    const std::size_t s = opt.side;
    if (s < 8)
        throw ValueError("make_toy_pair: side must be at least 8");

    const std::size_t min_ext = static_cast<std::size_t>(opt.min_extent * static_cast<double>(s));
    const std::size_t max_ext = static_cast<std::size_t>(opt.max_extent * static_cast<double>(s));
    const std::size_t rw = min_ext + uniform_index(rng, max_ext - min_ext + 1);
    const std::size_t rh = min_ext + uniform_index(rng, max_ext - min_ext + 1);
    const std::size_t rx = uniform_index(rng, s - rw + 1);
    const std::size_t ry = uniform_index(rng, s - rh + 1);

    SamplePair pair;
    pair.image = Tensor({3, s, s});
    pair.mask = Tensor({1, s, s});

    // Mild horizontal shading so the background is not flat.
    const double shade = uniform_real(rng, -0.04, 0.04);
    for (std::size_t y = 0; y < s; ++y) {
        for (std::size_t x = 0; x < s; ++x) {
            const bool inside = x >= rx && x < rx + rw && y >= ry && y < ry + rh;
            const double base = inside ? opt.rectangle_base : opt.background_base;
            const double amp = inside ? opt.rectangle_noise : opt.background_noise;
            const double grain = uniform_real(rng, 0.0, amp);
            const double tilt = shade * (static_cast<double>(x) / static_cast<double>(s) - 0.5);
            for (std::size_t c = 0; c < 3; ++c) {
                double v = base + grain + tilt + uniform_real(rng, -0.02, 0.02);
                v = std::min(1.0, std::max(0.0, v));
                // Store exactly what an 8-bit file would hold.
                v = std::floor(255.0 * v + 0.5) / 255.0;
                pair.image.at(c, y, x) = v;
            }
            pair.mask.at(0, y, x) = inside ? 1.0 : 0.0;
        }
    }
    return pair;
}

inline std::vector<SamplePair> make_toy_set(std::size_t count, std::uint64_t seed,
                                            const ToyOptions& opt = {}) {
    std::mt19937_64 rng(seed);
    std::vector<SamplePair> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(make_toy_pair(rng, opt));
        out.back().origin = i;
    }
    return out;
}

inline PnmImage pair_image_to_ppm(const SamplePair& pair) {
    PnmImage img;
    img.type = 6;
    img.width = pair.image.width();
    img.height = pair.image.height();
    img.pixels.resize(img.width * img.height * 3);
    for (std::size_t i = 0; i < img.width * img.height; ++i)
        for (std::size_t c = 0; c < 3; ++c)
            img.pixels[i * 3 + c] = static_cast<std::uint8_t>(
                std::floor(255.0 * pair.image.plane(c)[i] + 0.5));
    return img;
}

inline PnmImage pair_mask_to_pgm(const SamplePair& pair) {
    PnmImage img;
    img.type = 5;
    img.width = pair.mask.width();
    img.height = pair.mask.height();
    img.pixels.resize(img.width * img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = pair.mask[i] == 1.0 ? 255 : 0;
    return img;
}

// Writes count image/mask pairs plus a manifest.tsv into dir; returns the
// manifest path.
inline std::string generate_toy_dataset(const std::string& dir, std::size_t count,
                                        std::uint64_t seed, const ToyOptions& opt = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::mt19937_64 rng(seed);

    const std::string manifest_path = (fs::path(dir) / "manifest.tsv").string();
    std::ofstream manifest(manifest_path);
    if (!manifest)
        throw IoError("cannot open " + manifest_path + " for writing");

    char name[32];
    for (std::size_t i = 0; i < count; ++i) {
        SamplePair pair = make_toy_pair(rng, opt);
        std::snprintf(name, sizeof name, "img_%04zu.ppm", i);
        const std::string img_name = name;
        std::snprintf(name, sizeof name, "msk_%04zu.pgm", i);
        const std::string msk_name = name;
        write_pnm((fs::path(dir) / img_name).string(), pair_image_to_ppm(pair));
        write_pnm((fs::path(dir) / msk_name).string(), pair_mask_to_pgm(pair));
        manifest << img_name << '\t' << msk_name << '\n';
    }
    manifest.close();
    if (!manifest)
        throw IoError("failed writing " + manifest_path);
    return manifest_path;
}

} // namespace ssrn
