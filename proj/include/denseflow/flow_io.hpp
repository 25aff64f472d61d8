#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "denseflow/flow_field.hpp"

namespace denseflow {

// Flow-file magic: the float 202021.25 spells "PIEH" in little-endian bytes.
inline constexpr float kFloMagic = 202021.25f;

// Components larger than this in magnitude mark unknown ground-truth flow.
inline constexpr float kUnknownFlowThreshold = 1e9f;

// Byte layout: 4-byte magic float, int32 width, int32 height, then
// interleaved (u, v) float32 pairs in row-major order, all little-endian.
struct FloContents {
    FlowFieldf flow;
    Mask valid; // false where a component carried the unknown-flow sentinel
};

std::vector<std::uint8_t> write_flo(const FlowFieldf& flow);
FloContents read_flo(const std::uint8_t* data, std::size_t size);
FloContents read_flo(const std::vector<std::uint8_t>& bytes);

void write_flo_file(const std::filesystem::path& path, const FlowFieldf& flow);
FloContents read_flo_file(const std::filesystem::path& path);

struct Rgb8 {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb8&) const = default;
};

// Row-major RGB triplets; (y*width + x)*3 indexes the red byte of (x, y).
struct FlowColorImage {
    Index width = 0;
    Index height = 0;
    std::vector<std::uint8_t> rgb;
};

inline constexpr int kWheelSize = 55;

// Hue circle with segment lengths sized to perceptual discriminability
// (15 red-yellow, 6 yellow-green, 4 green-cyan, 11 cyan-blue, 13 blue-magenta,
// 6 magenta-red).
const std::array<Rgb8, kWheelSize>& flow_color_wheel();

// Color of a single vector: hue from the flow direction, white at zero
// motion, saturating toward the wheel color as |w| approaches max_magnitude.
Rgb8 flow_pixel_color(double u, double v, double max_magnitude);

namespace detail {

// 99th-percentile magnitude, guarded away from zero, for auto-normalization.
template <typename Scalar>
double default_color_normalizer(const FlowField<Scalar>& flow) {
    std::vector<double> mags;
    mags.reserve(static_cast<size_t>(flow.u.size()));
    for (Index y = 0; y < flow.height(); ++y) {
        for (Index x = 0; x < flow.width(); ++x) {
            mags.push_back(std::hypot(static_cast<double>(flow.u(y, x)),
                                      static_cast<double>(flow.v(y, x))));
        }
    }
    std::sort(mags.begin(), mags.end());
    return mags[static_cast<size_t>(0.99 * double(mags.size() - 1))];
}

} // namespace detail

template <typename Scalar>
FlowColorImage flow_to_color(const FlowField<Scalar>& flow,
                             std::optional<Scalar> max_magnitude = std::nullopt) {
    double normalizer = max_magnitude ? static_cast<double>(*max_magnitude)
                                      : detail::default_color_normalizer(flow);
    normalizer = std::max(normalizer, 1e-6);

    FlowColorImage image;
    image.width = flow.width();
    image.height = flow.height();
    image.rgb.resize(static_cast<size_t>(image.width * image.height) * 3);
    size_t at = 0;
    for (Index y = 0; y < flow.height(); ++y) {
        for (Index x = 0; x < flow.width(); ++x) {
            const Rgb8 c = flow_pixel_color(static_cast<double>(flow.u(y, x)),
                                            static_cast<double>(flow.v(y, x)), normalizer);
            image.rgb[at++] = c.r;
            image.rgb[at++] = c.g;
            image.rgb[at++] = c.b;
        }
    }
    return image;
}

} // namespace denseflow
