#pragma once

#include <limits>
#include <string>
#include <utility>

#include "denseflow/flow_field.hpp"
#include "denseflow/gradients.hpp"

namespace denseflow {

template <typename Scalar>
struct HsParams {
    Scalar alpha = 1;                      // regularization weight
    Scalar epsilon = Scalar(1e-8);         // division guard in the update denominator
    int max_iterations = 5000;
    Scalar convergence_threshold = Scalar(1e-5); // on the L2 norm of the flow change

    void validate() const {
        if (!(alpha > 0)) throw ParameterError("alpha must be > 0");
        if (!(epsilon > 0)) throw ParameterError("epsilon must be > 0");
        if (max_iterations < 1) throw ParameterError("max_iterations must be >= 1");
        if (!(convergence_threshold > 0)) throw ParameterError("convergence_threshold must be > 0");
    }
};

template <typename Scalar>
struct HsTrace {
    int iterations_run = 0;
    Scalar final_delta = 0;
    bool converged = false;
    Scalar energy_initial = 0;
    Scalar energy_final = 0;
};

// Discrete energy: sum over pixels of (Ix u + Iy v + It)^2 plus alpha times
// the squared forward differences of u and v (zero at the last row/column).
// Diagnostic only; the iteration below minimizes its smoothed-average variant.
template <typename Scalar>
Scalar hs_energy(const FlowField<Scalar>& flow, const Gradients<Scalar>& g, Scalar alpha) {
    detail::require_same_shape(flow.u, g.ix, "hs_energy: flow vs gradients");
    const Index h = flow.height();
    const Index w = flow.width();

    const Scalar data = (g.ix * flow.u + g.iy * flow.v + g.it).square().sum();

    Scalar smooth = 0;
    if (w > 1) {
        smooth += (flow.u.rightCols(w - 1) - flow.u.leftCols(w - 1)).square().sum();
        smooth += (flow.v.rightCols(w - 1) - flow.v.leftCols(w - 1)).square().sum();
    }
    if (h > 1) {
        smooth += (flow.u.bottomRows(h - 1) - flow.u.topRows(h - 1)).square().sum();
        smooth += (flow.v.bottomRows(h - 1) - flow.v.topRows(h - 1)).square().sum();
    }
    return data + alpha * smooth;
}

// One sweep of the iterative scheme: replace each channel by its 5x5
// Gaussian local average, then apply the pixel-wise correction
//   u = ubar - Ix (Ix ubar + Iy vbar + It) / (alpha^2 + Ix^2 + Iy^2 + eps)
// and symmetrically for v.
template <typename Scalar>
FlowField<Scalar> hs_update_step(const FlowField<Scalar>& flow, const Gradients<Scalar>& g,
                                 const HsParams<Scalar>& params) {
    detail::require_same_shape(flow.u, g.ix, "hs_update_step: flow vs gradients");
    detail::require_same_shape(g.ix, g.iy, "hs_update_step: gradient");
    detail::require_same_shape(g.ix, g.it, "hs_update_step: gradient");

    const Image<Scalar> ubar = gaussian_smooth(flow.u);
    const Image<Scalar> vbar = gaussian_smooth(flow.v);
    const Image<Scalar> quotient =
        (g.ix * ubar + g.iy * vbar + g.it)
        / (params.alpha * params.alpha + g.ix.square() + g.iy.square() + params.epsilon);
    return {ubar - g.ix * quotient, vbar - g.iy * quotient};
}

// Iterates hs_update_step from initial_flow until the flow change drops
// below the convergence threshold or max_iterations is reached. Gradients
// are computed once, from the first frame.
template <typename Scalar>
std::pair<FlowField<Scalar>, HsTrace<Scalar>> hs_solve(const Image<Scalar>& frame1,
                                                       const Image<Scalar>& frame2,
                                                       const FlowField<Scalar>& initial_flow,
                                                       const HsParams<Scalar>& params) {
    params.validate();
    detail::require_same_shape(frame1, frame2, "hs_solve: frame");
    detail::require_same_shape(frame1, initial_flow.u, "hs_solve: frame vs initial flow");

    const Gradients<Scalar> g = compute_gradients(frame1, frame2);

    HsTrace<Scalar> trace;
    trace.energy_initial = hs_energy(initial_flow, g, params.alpha);

    FlowField<Scalar> flow = initial_flow;
    Scalar delta = std::numeric_limits<Scalar>::infinity();
    for (int iter = 1; iter <= params.max_iterations; ++iter) {
        FlowField<Scalar> next = hs_update_step(flow, g, params);
        if (!next.all_finite()) {
            throw NumericalInstabilityError("hs_solve: non-finite flow at iteration "
                                            + std::to_string(iter));
        }
        delta = flow_delta(flow, next).l2_norm;
        flow = std::move(next);
        trace.iterations_run = iter;
        if (delta < params.convergence_threshold) {
            trace.converged = true;
            break;
        }
    }
    trace.final_delta = delta;
    trace.energy_final = hs_energy(flow, g, params.alpha);
    return {std::move(flow), trace};
}

} // namespace denseflow
