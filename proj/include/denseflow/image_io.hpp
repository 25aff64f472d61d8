#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "denseflow/image.hpp"

namespace denseflow {

// Raw 8-bit decode result; channels is 1 (gray) or 3 (RGB), rows interleaved.
struct DecodedImage {
    Index width = 0;
    Index height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;
};

// Reads a binary PGM (P5) or an 8-bit PNG, dispatching on the file magic.
DecodedImage decode_image_file(const std::filesystem::path& path);

void encode_pgm(const std::filesystem::path& path, Index width, Index height,
                const std::uint8_t* gray);
void encode_png_gray8(const std::filesystem::path& path, Index width, Index height,
                      const std::uint8_t* gray);
void encode_png_rgb8(const std::filesystem::path& path, Index width, Index height,
                     const std::uint8_t* rgb);

// Loads an image as normalized intensities in [0,1]; color inputs are
// reduced with the luminance weights 0.299 R + 0.587 G + 0.114 B first.
template <typename Scalar>
Image<Scalar> load_image(const std::filesystem::path& path) {
    const DecodedImage d = decode_image_file(path);
    Image<Scalar> img(d.height, d.width);
    const std::uint8_t* p = d.pixels.data();
    for (Index y = 0; y < d.height; ++y) {
        for (Index x = 0; x < d.width; ++x) {
            if (d.channels == 1) {
                img(y, x) = Scalar(*p++) / Scalar(255);
            } else {
                const Scalar lum = Scalar(0.299) * Scalar(p[0])
                                 + Scalar(0.587) * Scalar(p[1])
                                 + Scalar(0.114) * Scalar(p[2]);
                img(y, x) = lum / Scalar(255);
                p += 3;
            }
        }
    }
    return img;
}

// Quantizes [0,1] intensities to 8 bits, clamping out-of-range values.
template <typename Scalar>
std::vector<std::uint8_t> quantize_gray8(const Image<Scalar>& image) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(static_cast<size_t>(image.size()));
    for (Index y = 0; y < image.rows(); ++y) {
        for (Index x = 0; x < image.cols(); ++x) {
            const Scalar v = std::clamp(image(y, x), Scalar(0), Scalar(1));
            bytes.push_back(static_cast<std::uint8_t>(std::lround(double(v) * 255.0)));
        }
    }
    return bytes;
}

// Writes a gray image as PNG or PGM depending on the path extension.
template <typename Scalar>
void save_gray_image(const std::filesystem::path& path, const Image<Scalar>& image) {
    const std::vector<std::uint8_t> bytes = quantize_gray8(image);
    if (path.extension() == ".pgm") {
        encode_pgm(path, image.cols(), image.rows(), bytes.data());
    } else {
        encode_png_gray8(path, image.cols(), image.rows(), bytes.data());
    }
}

} // namespace denseflow
