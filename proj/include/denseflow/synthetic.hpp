#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "denseflow/flow_field.hpp"
#include "denseflow/image.hpp"

namespace denseflow {

enum class SceneKind { Translation, Rotation, Zoom };

// Frame pair with analytic ground-truth flow; frame2 is frame1 resampled
// through the inverse of the ground-truth motion.
template <typename Scalar>
struct SyntheticScene {
    Image<Scalar> frame1;
    Image<Scalar> frame2;
    FlowField<Scalar> gt;
    SceneKind kind = SceneKind::Translation;
};

// Seeded uniform noise in [0,1) smoothed twice by the 5x5 kernel; the raw
// draws are mapped from mt19937_64 words directly so output is identical
// across platforms.
template <typename Scalar>
Image<Scalar> noise_texture(Index width, Index height, std::uint64_t seed) {
    if (width < 1 || height < 1) {
        throw ShapeError("noise_texture: dimensions must be positive, got "
                         + detail::dims_string(width, height));
    }
    std::mt19937_64 rng(seed);
    Image<Scalar> img(height, width);
    for (Index y = 0; y < height; ++y) {
        for (Index x = 0; x < width; ++x) {
            img(y, x) = Scalar((rng() >> 11) * 0x1.0p-53);
        }
    }
    return gaussian_smooth(gaussian_smooth(img));
}

namespace detail {

// frame2(x,y) = frame1 at the inverse-motion preimage of (x,y)
template <typename Scalar, typename InverseMap>
Image<Scalar> resample_inverse(const Image<Scalar>& frame1, InverseMap&& inverse) {
    Image<Scalar> out(frame1.rows(), frame1.cols());
    for (Index y = 0; y < frame1.rows(); ++y) {
        for (Index x = 0; x < frame1.cols(); ++x) {
            const auto [sx, sy] = inverse(Scalar(x), Scalar(y));
            out(y, x) = bilinear_sample(frame1, sx, sy);
        }
    }
    return out;
}

} // namespace detail

// Global shift by (dx, dy): ground truth is the constant field (dx, dy).
template <typename Scalar>
SyntheticScene<Scalar> make_translation_scene(Index width, Index height,
                                              Scalar dx, Scalar dy, std::uint64_t seed) {
    SyntheticScene<Scalar> scene;
    scene.kind = SceneKind::Translation;
    scene.frame1 = noise_texture<Scalar>(width, height, seed);
    scene.frame2 = detail::resample_inverse(scene.frame1, [dx, dy](Scalar x, Scalar y) {
        return std::pair<Scalar, Scalar>(x - dx, y - dy);
    });
    scene.gt = {Image<Scalar>::Constant(height, width, dx),
                Image<Scalar>::Constant(height, width, dy)};
    return scene;
}

// Rotation about the frame center by angle_degrees (counterclockwise in
// image coordinates with y pointing down the rows).
template <typename Scalar>
SyntheticScene<Scalar> make_rotation_scene(Index width, Index height,
                                           Scalar angle_degrees, std::uint64_t seed) {
    const Scalar cx = Scalar(width - 1) / 2;
    const Scalar cy = Scalar(height - 1) / 2;
    const Scalar theta = angle_degrees * std::numbers::pi_v<Scalar> / 180;
    const Scalar c = std::cos(theta);
    const Scalar s = std::sin(theta);

    SyntheticScene<Scalar> scene;
    scene.kind = SceneKind::Rotation;
    scene.frame1 = noise_texture<Scalar>(width, height, seed);
    scene.frame2 = detail::resample_inverse(scene.frame1, [=](Scalar x, Scalar y) {
        const Scalar rx = x - cx, ry = y - cy;
        // inverse rotation
        return std::pair<Scalar, Scalar>(cx + c * rx + s * ry, cy - s * rx + c * ry);
    });
    scene.gt = zero_flow<Scalar>(width, height);
    for (Index y = 0; y < height; ++y) {
        for (Index x = 0; x < width; ++x) {
            const Scalar rx = Scalar(x) - cx, ry = Scalar(y) - cy;
            scene.gt.u(y, x) = (c * rx - s * ry) - rx;
            scene.gt.v(y, x) = (s * rx + c * ry) - ry;
        }
    }
    return scene;
}

// Uniform scaling about the frame center by factor scale > 0.
template <typename Scalar>
SyntheticScene<Scalar> make_zoom_scene(Index width, Index height,
                                       Scalar scale, std::uint64_t seed) {
    if (!(scale > 0)) {
        throw ParameterError("zoom scale must be > 0");
    }
    const Scalar cx = Scalar(width - 1) / 2;
    const Scalar cy = Scalar(height - 1) / 2;

    SyntheticScene<Scalar> scene;
    scene.kind = SceneKind::Zoom;
    scene.frame1 = noise_texture<Scalar>(width, height, seed);
    scene.frame2 = detail::resample_inverse(scene.frame1, [=](Scalar x, Scalar y) {
        return std::pair<Scalar, Scalar>(cx + (x - cx) / scale, cy + (y - cy) / scale);
    });
    scene.gt = zero_flow<Scalar>(width, height);
    for (Index y = 0; y < height; ++y) {
        for (Index x = 0; x < width; ++x) {
            scene.gt.u(y, x) = (scale - 1) * (Scalar(x) - cx);
            scene.gt.v(y, x) = (scale - 1) * (Scalar(y) - cy);
        }
    }
    return scene;
}

} // namespace denseflow
