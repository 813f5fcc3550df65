#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include "ssrn/error.hpp"

namespace ssrn {

// Minimal binary PNM codec: 8-bit PGM (P5) and PPM (P6), maxval 255.

struct PnmImage {
    int type = 0;  // 5 = grayscale, 6 = rgb
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  // row-major, interleaved for P6

    std::size_t samples_per_pixel() const { return type == 6 ? 3 : 1; }
};

namespace detail {

// Reads the next header token, skipping whitespace and '#' comments.
inline std::string pnm_token(std::istream& in, const std::string& path) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    while (c != EOF && !std::isspace(c) && c != '#') {
        tok.push_back(static_cast<char>(c));
        if (std::isspace(in.peek()) || in.peek() == '#' || in.peek() == EOF) break;
        c = in.get();
    }
    if (tok.empty())
        throw FormatError(path + ": truncated PNM header");
    return tok;
}

inline std::size_t pnm_number(std::istream& in, const std::string& path) {
    const std::string tok = pnm_token(in, path);
    std::size_t value = 0;
    for (char ch : tok) {
        if (!std::isdigit(static_cast<unsigned char>(ch)))
            throw FormatError(path + ": invalid PNM header field '" + tok + "'");
        value = value * 10 + static_cast<std::size_t>(ch - '0');
    }
    return value;
}

} // namespace detail

inline PnmImage read_pnm(std::istream& in, const std::string& path = "<stream>") {
    PnmImage img;
    char m0 = 0, m1 = 0;
    if (!in.get(m0) || !in.get(m1))
        throw FormatError(path + ": truncated PNM header");
    if (m0 != 'P' || (m1 != '5' && m1 != '6'))
        throw FormatError(path + ": unsupported magic bytes (expected P5 or P6)");
    img.type = m1 - '0';
    img.width = detail::pnm_number(in, path);
    img.height = detail::pnm_number(in, path);
    const std::size_t maxval = detail::pnm_number(in, path);
    if (maxval != 255)
        throw FormatError(path + ": unsupported maxval " + std::to_string(maxval) +
                          " (only 8-bit, maxval 255)");
    if (img.width == 0 || img.height == 0)
        throw FormatError(path + ": zero image dimension");
    // Exactly one whitespace byte separates the header from the payload.
    const int sep = in.get();
    if (sep == EOF || !std::isspace(sep))
        throw FormatError(path + ": malformed header/payload separator");

    const std::size_t n = img.width * img.height * img.samples_per_pixel();
    img.pixels.resize(n);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw FormatError(path + ": truncated payload (expected " + std::to_string(n) +
                          " bytes, got " + std::to_string(in.gcount()) + ")");
    return img;
}

inline PnmImage read_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    return read_pnm(in, path);
}

inline void write_pnm(std::ostream& out, const PnmImage& img) {
    if (img.type != 5 && img.type != 6)
        throw ValueError("write_pnm: type must be 5 or 6");
    if (img.pixels.size() != img.width * img.height * img.samples_per_pixel())
        throw ShapeError("write_pnm: pixel buffer does not match dimensions");
    out << 'P' << img.type << '\n'
        << img.width << ' ' << img.height << '\n'
        << "255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
}

inline void write_pnm(const std::string& path, const PnmImage& img) {
    if (path.empty())
        throw IoError("write_pnm: empty path");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    write_pnm(out, img);
    if (!out)
        throw IoError("failed writing " + path);
}

} // namespace ssrn
