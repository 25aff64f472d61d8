#pragma once

#include <cmath>
#include <numbers>

#include "denseflow/flow_field.hpp"

namespace denseflow {

// Guard constant in the angular-error normalization, in normalized units.
inline constexpr double kAngularErrorEpsilon = 1e-8;

// AAE (degrees) and EPE (pixels) over the unmasked pixels of a field pair.
struct FlowErrorReport {
    double aae_degrees = 0;
    double epe_pixels = 0;
    Index pixel_count = 0;
    Index masked_out = 0;
};

namespace detail {

template <typename Scalar>
void require_metric_inputs(const FlowField<Scalar>& est, const FlowField<Scalar>& gt,
                           const Mask* mask) {
    require_same_shape(est.u, gt.u, "metrics: field");
    if (mask != nullptr) {
        require_same_shape(est.u, *mask, "metrics: field vs mask");
    }
}

} // namespace detail

// Mean angular deviation between estimated and reference vectors, in degrees:
// per pixel, arccos of the guarded normalized dot product
//   (u ug + v vg) / (sqrt(u^2+v^2+eps) sqrt(ug^2+vg^2+eps) + eps)
// with the arccos argument clamped to [-1, 1].
template <typename Scalar>
Scalar average_angular_error(const FlowField<Scalar>& est, const FlowField<Scalar>& gt,
                             const Mask* mask = nullptr) {
    detail::require_metric_inputs(est, gt, mask);
    const Scalar eps = Scalar(kAngularErrorEpsilon);
    Scalar sum = 0;
    Index count = 0;
    for (Index y = 0; y < est.height(); ++y) {
        for (Index x = 0; x < est.width(); ++x) {
            if (mask != nullptr && !(*mask)(y, x)) continue;
            const Scalar u = est.u(y, x), v = est.v(y, x);
            const Scalar ug = gt.u(y, x), vg = gt.v(y, x);
            const Scalar num = u * ug + v * vg;
            const Scalar den = std::sqrt(u * u + v * v + eps)
                             * std::sqrt(ug * ug + vg * vg + eps) + eps;
            const Scalar arg = std::clamp(num / den, Scalar(-1), Scalar(1));
            sum += std::acos(arg);
            ++count;
        }
    }
    if (count == 0) throw EmptyDomainError("average_angular_error: no unmasked pixels");
    return sum / Scalar(count) * Scalar(180) / std::numbers::pi_v<Scalar>;
}

// Mean Euclidean distance between estimated and reference vectors, in pixels.
template <typename Scalar>
Scalar endpoint_error(const FlowField<Scalar>& est, const FlowField<Scalar>& gt,
                      const Mask* mask = nullptr) {
    detail::require_metric_inputs(est, gt, mask);
    Scalar sum = 0;
    Index count = 0;
    for (Index y = 0; y < est.height(); ++y) {
        for (Index x = 0; x < est.width(); ++x) {
            if (mask != nullptr && !(*mask)(y, x)) continue;
            const Scalar du = est.u(y, x) - gt.u(y, x);
            const Scalar dv = est.v(y, x) - gt.v(y, x);
            sum += std::sqrt(du * du + dv * dv);
            ++count;
        }
    }
    if (count == 0) throw EmptyDomainError("endpoint_error: no unmasked pixels");
    return sum / Scalar(count);
}

template <typename Scalar>
FlowErrorReport evaluate_pair(const FlowField<Scalar>& est, const FlowField<Scalar>& gt,
                              const Mask* mask = nullptr) {
    detail::require_metric_inputs(est, gt, mask);
    FlowErrorReport report;
    report.aae_degrees = static_cast<double>(average_angular_error(est, gt, mask));
    report.epe_pixels = static_cast<double>(endpoint_error(est, gt, mask));
    const Index total = est.width() * est.height();
    report.pixel_count = mask != nullptr ? mask->template cast<Index>().sum() : total;
    report.masked_out = total - report.pixel_count;
    return report;
}

} // namespace denseflow
