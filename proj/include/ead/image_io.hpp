#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <png.h>

#include "ead/tensor.hpp"

namespace ead {

/// Write a 3 x H x W tensor in [0, 1] as an 8-bit RGB PNG.
inline void write_png(const std::string& path, const Tensor& image) {
    if (image.rank() != 3 || image.channels() != 3) {
        throw std::invalid_argument("write_png: expected a 3 x H x W tensor");
    }
    const std::size_t h = image.height();
    const std::size_t w = image.width();
    std::vector<png_byte> buffer(h * w * 3);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                const double v = std::clamp(image.at3(c, y, x), 0.0, 1.0);
                buffer[(y * w + x) * 3 + c] = static_cast<png_byte>(std::lround(v * 255.0));
            }
        }
    }

    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(w);
    img.height = static_cast<png_uint_32>(h);
    img.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&img, path.c_str(), 0, buffer.data(), 0, nullptr)) {
        throw std::runtime_error("write_png: " + path + ": " + img.message);
    }
}

/// Read an RGB PNG into a 3 x H x W tensor with values in [0, 1].
inline Tensor read_png(const std::string& path) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str())) {
        throw std::runtime_error("read_png: " + path + ": " + img.message);
    }
    img.format = PNG_FORMAT_RGB;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr)) {
        throw std::runtime_error("read_png: " + path + ": " + img.message);
    }

    Tensor out({3, img.height, img.width});
    for (std::size_t y = 0; y < img.height; ++y) {
        for (std::size_t x = 0; x < img.width; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                out.at3(c, y, x) =
                    static_cast<double>(buffer[(y * img.width + x) * 3 + c]) / 255.0;
            }
        }
    }
    return out;
}

// raw tensor dump: lossless container for frames and digit images
inline constexpr char kTensorDumpMagic[8] = {'E', 'A', 'D', 'T', 'N', 'S', 'R', '1'};

inline void write_tensor_dump(const std::string& path, const Tensor& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_tensor_dump: cannot open " + path);
    os.write(kTensorDumpMagic, sizeof kTensorDumpMagic);
    const std::uint64_t rank = t.rank();
    os.write(reinterpret_cast<const char*>(&rank), sizeof rank);
    for (std::size_t d : t.shape) {
        const std::uint64_t dim = d;
        os.write(reinterpret_cast<const char*>(&dim), sizeof dim);
    }
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!os) throw std::runtime_error("write_tensor_dump: write failed for " + path);
}

inline Tensor read_tensor_dump(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_tensor_dump: cannot open " + path);
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::string(magic, 8) != std::string(kTensorDumpMagic, 8)) {
        throw std::runtime_error("read_tensor_dump: bad magic in " + path);
    }
    std::uint64_t rank = 0;
    is.read(reinterpret_cast<char*>(&rank), sizeof rank);
    std::vector<std::size_t> shape(rank);
    for (std::uint64_t k = 0; k < rank; ++k) {
        std::uint64_t dim = 0;
        is.read(reinterpret_cast<char*>(&dim), sizeof dim);
        shape[k] = dim;
    }
    Tensor out(shape);
    is.read(reinterpret_cast<char*>(out.data.data()),
            static_cast<std::streamsize>(out.data.size() * sizeof(double)));
    if (!is) throw std::runtime_error("read_tensor_dump: truncated file " + path);
    return out;
}

/// Frames are accepted either as PNG or as raw tensor dumps (.t64).
inline Tensor load_frame(const std::string& path) {
    const auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".png") return read_png(path);
    if (ext == ".t64") return read_tensor_dump(path);
    throw std::invalid_argument("load_frame: unsupported extension on " + path);
}

}  // namespace ead
