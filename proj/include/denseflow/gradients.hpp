#pragma once

#include "denseflow/image.hpp"

namespace denseflow {

// The data-term derivatives shared by both solvers: Sobel I_x, I_y from the
// first frame and the pixel-wise temporal difference I_t = frame2 - frame1.
template <typename Scalar>
struct Gradients {
    Image<Scalar> ix;
    Image<Scalar> iy;
    Image<Scalar> it;
};

template <typename Scalar>
Gradients<Scalar> compute_gradients(const Image<Scalar>& frame1, const Image<Scalar>& frame2) {
    detail::require_same_shape(frame1, frame2, "frame");
    auto [ix, iy] = spatial_gradients(frame1);
    return {std::move(ix), std::move(iy), temporal_gradient(frame1, frame2)};
}

} // namespace denseflow
