#pragma once

#include <string>
#include <utility>
#include <vector>

#include "denseflow/image.hpp"

namespace denseflow {

// Smallest dimension a pyramid level may have; construction stops before
// either axis would drop below it.
inline constexpr Index kMinPyramidExtent = 8;

// Ordered list of progressively halved images, index 0 finest.
template <typename Scalar>
struct GaussianPyramid {
    std::vector<Image<Scalar>> levels;

    int num_levels() const { return static_cast<int>(levels.size()); }
    const Image<Scalar>& level(int k) const { return levels[static_cast<size_t>(k)]; }
};

// Every-second-pixel subsampling anchored at index 0; dimensions ceil(n/2).
template <typename Scalar>
Image<Scalar> downsample2(const Image<Scalar>& image) {
    const Index h = image.rows();
    const Index w = image.cols();
    if (w < 2 || h < 2) {
        throw ShapeError("downsample2: both dimensions must be >= 2, got "
                         + detail::dims_string(w, h));
    }
    Image<Scalar> out((h + 1) / 2, (w + 1) / 2);
    for (Index y = 0; y < out.rows(); ++y) {
        for (Index x = 0; x < out.cols(); ++x) {
            out(y, x) = image(2 * y, 2 * x);
        }
    }
    return out;
}

// Level k+1 = downsample2(gaussian_smooth(level k)), stopping early if the
// next level would be smaller than 8 on either axis. Requested depths beyond
// that bound are silently truncated; num_levels() reports the actual depth.
template <typename Scalar>
GaussianPyramid<Scalar> build_pyramid(const Image<Scalar>& image, int requested_levels) {
    if (requested_levels < 1) {
        throw ParameterError("build_pyramid: requested_levels must be >= 1, got "
                             + std::to_string(requested_levels));
    }
    if (image.rows() < 1 || image.cols() < 1) {
        throw DegenerateInputError("build_pyramid: empty image");
    }
    GaussianPyramid<Scalar> pyramid;
    pyramid.levels.push_back(image);
    while (pyramid.num_levels() < requested_levels) {
        const Image<Scalar>& cur = pyramid.levels.back();
        const Index next_w = (cur.cols() + 1) / 2;
        const Index next_h = (cur.rows() + 1) / 2;
        if (next_w < kMinPyramidExtent || next_h < kMinPyramidExtent) {
            break;
        }
        pyramid.levels.push_back(downsample2(gaussian_smooth(cur)));
    }
    return pyramid;
}

} // namespace denseflow
