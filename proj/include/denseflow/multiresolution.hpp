#pragma once

#include <string>
#include <utility>
#include <vector>

#include "denseflow/horn_schunck.hpp"
#include "denseflow/pyramid.hpp"

namespace denseflow {

template <typename Scalar>
struct MrParams {
    int levels = 4;                 // requested pyramid depth
    HsParams<Scalar> hs;            // applied unchanged at every level
};

// One HsTrace per level actually run, coarsest first.
template <typename Scalar>
struct MrTrace {
    std::vector<std::pair<int, HsTrace<Scalar>>> per_level;
    int actual_levels = 0;
};

namespace detail {

template <typename Fn>
auto run_level(int level, Fn&& fn) {
    try {
        return fn();
    } catch (const NumericalInstabilityError& e) {
        throw NumericalInstabilityError("level " + std::to_string(level) + ": " + e.what());
    }
}

} // namespace detail

// Coarse-to-fine Horn-Schunck: solve from zero flow at the coarsest level,
// then per finer level upsample the running flow, warp the second image by
// it, estimate the residual motion between the first image and the warped
// one (from zero, since the warp already absorbs the upsampled motion), and
// accumulate. The warp always resamples the level's original second image.
template <typename Scalar>
std::pair<FlowField<Scalar>, MrTrace<Scalar>> mrhs_solve(const Image<Scalar>& frame1,
                                                         const Image<Scalar>& frame2,
                                                         const MrParams<Scalar>& params) {
    if (params.levels < 1) throw ParameterError("levels must be >= 1");
    params.hs.validate();
    detail::require_same_shape(frame1, frame2, "mrhs_solve: frame");

    const GaussianPyramid<Scalar> pyr1 = build_pyramid(frame1, params.levels);
    const GaussianPyramid<Scalar> pyr2 = build_pyramid(frame2, params.levels);
    const int coarsest = pyr1.num_levels() - 1;

    MrTrace<Scalar> trace;
    trace.actual_levels = pyr1.num_levels();

    FlowField<Scalar> flow = zero_flow<Scalar>(pyr1.level(coarsest).cols(),
                                               pyr1.level(coarsest).rows());
    {
        auto [solved, tr] = detail::run_level(coarsest, [&] {
            return hs_solve(pyr1.level(coarsest), pyr2.level(coarsest), flow, params.hs);
        });
        flow = std::move(solved);
        trace.per_level.emplace_back(coarsest, tr);
    }

    for (int level = coarsest - 1; level >= 0; --level) {
        const Image<Scalar>& target1 = pyr1.level(level);
        const Image<Scalar>& target2 = pyr2.level(level);
        const FlowField<Scalar> upsampled = upsample_flow(flow, target1.cols(), target1.rows());
        const Image<Scalar> warped = warp(target2, upsampled);
        auto [residual, tr] = detail::run_level(level, [&] {
            return hs_solve(target1, warped,
                            zero_flow<Scalar>(target1.cols(), target1.rows()), params.hs);
        });
        flow = upsampled + residual;
        trace.per_level.emplace_back(level, tr);
    }
    return {std::move(flow), std::move(trace)};
}

} // namespace denseflow
