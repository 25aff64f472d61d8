#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "denseflow/image.hpp"

namespace denseflow {

// Dense displacement field: u(y,x) horizontal and v(y,x) vertical, in pixels
// of the grid the field lives on.
template <typename Scalar>
struct FlowField {
    Image<Scalar> u;
    Image<Scalar> v;

    FlowField() = default;
    FlowField(Image<Scalar> u_, Image<Scalar> v_) : u(std::move(u_)), v(std::move(v_)) {
        detail::require_same_shape(u, v, "flow channel");
    }

    Index width() const { return u.cols(); }
    Index height() const { return u.rows(); }

    bool all_finite() const { return u.allFinite() && v.allFinite(); }
};

using FlowFieldf = FlowField<float>;
using FlowFieldd = FlowField<double>;

// Per-pixel validity; false marks pixels excluded from aggregates.
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Euclidean norm of the stacked change in (u, v) between two fields.
template <typename Scalar>
struct FlowDelta {
    Scalar l2_norm = 0;
};

template <typename Scalar>
FlowField<Scalar> zero_flow(Index width, Index height) {
    if (width < 1 || height < 1) {
        throw ShapeError("zero_flow: dimensions must be positive, got "
                         + detail::dims_string(width, height));
    }
    return {Image<Scalar>::Zero(height, width), Image<Scalar>::Zero(height, width)};
}

template <typename Scalar>
FlowDelta<Scalar> flow_delta(const FlowField<Scalar>& before, const FlowField<Scalar>& after) {
    detail::require_same_shape(before.u, after.u, "flow_delta: field");
    const Scalar ss = (after.u - before.u).square().sum()
                    + (after.v - before.v).square().sum();
    return {std::sqrt(ss)};
}

template <typename Scalar>
FlowField<Scalar> operator+(const FlowField<Scalar>& a, const FlowField<Scalar>& b) {
    detail::require_same_shape(a.u, b.u, "flow sum: field");
    return {a.u + b.u, a.v + b.v};
}

template <typename To, typename From>
FlowField<To> flow_cast(const FlowField<From>& flow) {
    return {flow.u.template cast<To>(), flow.v.template cast<To>()};
}

// Bilinearly resamples each channel onto the larger grid (corner samples map
// to corner samples) and rescales the displacements by the per-axis size
// ratio so they remain expressed in destination-grid pixels.
template <typename Scalar>
FlowField<Scalar> upsample_flow(const FlowField<Scalar>& flow, Index new_width, Index new_height) {
    const Index ow = flow.width();
    const Index oh = flow.height();
    if (new_width < ow || new_height < oh) {
        throw ShapeError("upsample_flow: target " + detail::dims_string(new_width, new_height)
                         + " smaller than source " + detail::dims_string(ow, oh));
    }
    const Scalar sx = (new_width > 1 && ow > 1) ? Scalar(ow - 1) / Scalar(new_width - 1) : Scalar(0);
    const Scalar sy = (new_height > 1 && oh > 1) ? Scalar(oh - 1) / Scalar(new_height - 1) : Scalar(0);
    const Scalar gain_x = Scalar(new_width) / Scalar(ow);
    const Scalar gain_y = Scalar(new_height) / Scalar(oh);

    FlowField<Scalar> out = zero_flow<Scalar>(new_width, new_height);
    for (Index y = 0; y < new_height; ++y) {
        const Scalar src_y = Scalar(y) * sy;
        for (Index x = 0; x < new_width; ++x) {
            const Scalar src_x = Scalar(x) * sx;
            out.u(y, x) = bilinear_sample(flow.u, src_x, src_y) * gain_x;
            out.v(y, x) = bilinear_sample(flow.v, src_x, src_y) * gain_y;
        }
    }
    return out;
}

// Inverse-mapping warp: output(x,y) = image sampled at (x + u(x,y), y + v(x,y)),
// with out-of-range coordinates clamped to the border.
template <typename Scalar>
Image<Scalar> warp(const Image<Scalar>& image, const FlowField<Scalar>& flow) {
    detail::require_same_shape(image, flow.u, "warp: image vs flow");
    const Index h = image.rows();
    const Index w = image.cols();
    Image<Scalar> out(h, w);
    for (Index y = 0; y < h; ++y) {
        for (Index x = 0; x < w; ++x) {
            out(y, x) = bilinear_sample(image, Scalar(x) + flow.u(y, x), Scalar(y) + flow.v(y, x));
        }
    }
    return out;
}

} // namespace denseflow
