#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "ssrn/error.hpp"
#include "ssrn/network.hpp"

namespace ssrn {

class BadMagicError : public FormatError {
public:
    using FormatError::FormatError;
};

class VersionError : public FormatError {
public:
    using FormatError::FormatError;
};

class ChecksumError : public FormatError {
public:
    using FormatError::FormatError;
};

// Array lengths or trailing bytes disagree with the config-derived layout.
class ModelLayoutError : public ShapeError {
public:
    using ShapeError::ShapeError;
};

namespace detail {

inline std::uint32_t crc32(const std::uint8_t* data, std::size_t n) {
    static const std::array<std::uint32_t, 256> table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k)
                c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < n; ++i)
        crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

struct ByteWriter {
    std::vector<std::uint8_t> bytes;

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        bytes.insert(bytes.end(), b, b + n);
    }
};

struct ByteReader {
    const std::uint8_t* p;
    std::size_t n;
    std::size_t pos = 0;

    void need(std::size_t k) const {
        if (pos + k > n)
            throw ModelLayoutError("model file: unexpected end of data");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string str(std::size_t k) {
        need(k);
        std::string s(reinterpret_cast<const char*>(p + pos), k);
        pos += k;
        return s;
    }
};

inline void write_u32_array(ByteWriter& w, const std::vector<std::size_t>& v) {
    w.u32(static_cast<std::uint32_t>(v.size()));
    for (std::size_t x : v) w.u32(static_cast<std::uint32_t>(x));
}

inline std::vector<std::size_t> read_u32_array(ByteReader& r) {
    const std::uint32_t count = r.u32();
    std::vector<std::size_t> v(count);
    for (auto& x : v) x = r.u32();
    return v;
}

} // namespace detail

inline constexpr std::uint32_t kModelVersion = 1;
inline constexpr char kModelMagic[4] = {'S', 'S', 'R', 'N'};

// Serializes config and weights. Weights are stored as little-endian 32-bit
// IEEE-754 with a 64-bit length prefix per array, in network order; the file
// ends with a CRC-32 of all preceding bytes. Identical networks produce
// byte-identical files.
inline std::vector<std::uint8_t> model_bytes(const Network& net) {
    detail::ByteWriter w;
    w.raw(kModelMagic, 4);
    w.u32(kModelVersion);

    const NetworkConfig& c = net.config;
    w.u32(static_cast<std::uint32_t>(c.preset_name.size()));
    w.raw(c.preset_name.data(), c.preset_name.size());
    detail::write_u32_array(w, c.stage_layer_counts);
    detail::write_u32_array(w, c.stage_channels);
    detail::write_u32_array(w, c.pool_strides);
    detail::write_u32_array(w, c.fcn_channels);
    w.f64(c.dropout_rate);
    w.u32(c.final_activation == FinalActivation::linear_clamp ? 0u : 1u);
    w.u32(static_cast<std::uint32_t>(c.input_channels));

    auto write_layers = [&w](const std::vector<ConvParams>& layers) {
        for (const ConvParams& l : layers) {
            w.u64(l.weights.size());
            for (std::size_t i = 0; i < l.weights.size(); ++i)
                w.f32(static_cast<float>(l.weights[i]));
            w.u64(l.bias.size());
            for (double b : l.bias) w.f32(static_cast<float>(b));
        }
    };
    write_layers(net.conv_layers);
    write_layers(net.fcn_layers);

    const std::uint32_t crc = detail::crc32(w.bytes.data(), w.bytes.size());
    w.u32(crc);
    return w.bytes;
}

inline void save_model(const Network& net, const std::string& path) {
    if (path.empty())
        throw IoError("save_model: empty path");
    const std::vector<std::uint8_t> bytes = model_bytes(net);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("failed writing " + path);
}

inline Network model_from_bytes(const std::vector<std::uint8_t>& bytes,
                                const std::string& path = "<bytes>") {
    if (bytes.size() < 12)
        throw ModelLayoutError(path + ": file too short to be a model");
    if (std::memcmp(bytes.data(), kModelMagic, 4) != 0)
        throw BadMagicError(path + ": bad magic (not a model file)");
    {
        const std::uint32_t stored = static_cast<std::uint32_t>(bytes[bytes.size() - 4]) |
                                     static_cast<std::uint32_t>(bytes[bytes.size() - 3]) << 8 |
                                     static_cast<std::uint32_t>(bytes[bytes.size() - 2]) << 16 |
                                     static_cast<std::uint32_t>(bytes[bytes.size() - 1]) << 24;
        const std::uint32_t actual = detail::crc32(bytes.data(), bytes.size() - 4);
        if (stored != actual)
            throw ChecksumError(path + ": CRC mismatch (corrupted model file)");
    }

    detail::ByteReader r{bytes.data(), bytes.size() - 4, 4};
    const std::uint32_t version = r.u32();
    if (version != kModelVersion)
        throw VersionError(path + ": unsupported model version " + std::to_string(version));

    NetworkConfig c;
    const std::uint32_t name_len = r.u32();
    c.preset_name = r.str(name_len);
    c.stage_layer_counts = detail::read_u32_array(r);
    c.stage_channels = detail::read_u32_array(r);
    c.pool_strides = detail::read_u32_array(r);
    c.fcn_channels = detail::read_u32_array(r);
    c.dropout_rate = r.f64();
    c.final_activation = r.u32() == 0 ? FinalActivation::linear_clamp : FinalActivation::relu;
    c.input_channels = r.u32();
    try {
        c.validate();
    } catch (const Error& e) {
        throw ModelLayoutError(path + ": invalid stored config: " + e.what());
    }

    Network net = build_network(c, 0);
    auto read_layers = [&r, &path](std::vector<ConvParams>& layers) {
        for (ConvParams& l : layers) {
            const std::uint64_t wn = r.u64();
            if (wn != l.weights.size())
                throw ModelLayoutError(path + ": weight array length " + std::to_string(wn) +
                                       " does not match config-derived shape " +
                                       std::to_string(l.weights.size()));
            for (std::size_t i = 0; i < l.weights.size(); ++i)
                l.weights[i] = static_cast<double>(r.f32());
            const std::uint64_t bn = r.u64();
            if (bn != l.bias.size())
                throw ModelLayoutError(path + ": bias array length mismatch");
            for (auto& b : l.bias) b = static_cast<double>(r.f32());
        }
    };
    read_layers(net.conv_layers);
    read_layers(net.fcn_layers);
    if (r.pos != r.n)
        throw ModelLayoutError(path + ": trailing bytes after parameter arrays");
    return net;
}

inline Network load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open model " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return model_from_bytes(bytes, path);
}

} // namespace ssrn
