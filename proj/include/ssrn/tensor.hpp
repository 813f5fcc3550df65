#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ssrn/error.hpp"

namespace ssrn {

// Dense n-dimensional array of doubles in row-major order. Feature maps use
// the (channels, height, width) layout; convolution kernels use
// (out_channels, in_channels, kh, kw).
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0)
        : shape_(std::move(shape)), data_(numel(shape_), fill) {}

    Tensor(std::vector<std::size_t> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (numel(shape_) != data_.size())
            throw ShapeError("tensor data length does not match shape");
    }

    static std::size_t numel(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // Rank-3 (C,H,W) accessors.
    std::size_t channels() const { return dim(0); }
    std::size_t height() const { return dim(1); }
    std::size_t width() const { return dim(2); }

    double& at(std::size_t c, std::size_t y, std::size_t x) {
        return data_[(c * dim(1) + y) * dim(2) + x];
    }
    double at(std::size_t c, std::size_t y, std::size_t x) const {
        return data_[(c * dim(1) + y) * dim(2) + x];
    }

    double* plane(std::size_t c) { return data_.data() + c * dim(1) * dim(2); }
    const double* plane(std::size_t c) const { return data_.data() + c * dim(1) * dim(2); }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    std::string shape_string() const {
        std::ostringstream os;
        os << '(';
        for (std::size_t i = 0; i < shape_.size(); ++i)
            os << (i ? "," : "") << shape_[i];
        os << ')';
        return os.str();
    }

private:
    std::size_t dim(std::size_t i) const {
        if (i >= shape_.size())
            throw ShapeError("tensor rank too small for requested axis");
        return shape_[i];
    }

    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_string() +
                         " vs " + b.shape_string());
}

inline void require_rank3(const Tensor& t, const char* what) {
    if (t.rank() != 3)
        throw ShapeError(std::string(what) + ": expected a (C,H,W) tensor, got rank " +
                         std::to_string(t.rank()));
}

} // namespace ssrn
