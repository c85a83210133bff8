#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ead {

/// Dense row-major tensor of doubles. Activations use the order
/// channels x height x width.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shp, double fill = 0.0) : shape(std::move(shp)) {
        data.assign(numel_of(shape), fill);
    }

    Tensor(std::vector<std::size_t> shp, std::vector<double> values)
        : shape(std::move(shp)), data(std::move(values)) {
        if (data.size() != numel_of(shape)) {
            throw std::invalid_argument("Tensor: data length does not match shape");
        }
    }

    static std::size_t numel_of(const std::vector<std::size_t>& shp) {
        std::size_t n = 1;
        for (std::size_t d : shp) {
            if (d == 0) throw std::invalid_argument("Tensor: zero dimension");
            n *= d;
        }
        return n;
    }

    std::size_t numel() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }

    // rank-3 accessors (c, y, x)
    std::size_t channels() const { return shape.at(0); }
    std::size_t height() const { return shape.at(1); }
    std::size_t width() const { return shape.at(2); }

    double& at3(std::size_t c, std::size_t y, std::size_t x) {
        return data[(c * shape[1] + y) * shape[2] + x];
    }
    double at3(std::size_t c, std::size_t y, std::size_t x) const {
        return data[(c * shape[1] + y) * shape[2] + x];
    }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }

    bool all_finite() const {
        for (double v : data) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }
};

inline std::string shape_to_string(const std::vector<std::size_t>& shape) {
    std::string s = "(";
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (k) s += ", ";
        s += std::to_string(shape[k]);
    }
    return s + ")";
}

}  // namespace ead
