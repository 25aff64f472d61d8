#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "denseflow/gradients.hpp"
#include "denseflow/image.hpp"

namespace denseflow {

template <typename Scalar>
struct LkParams {
    int window_radius = 2;                  // window is (2r+1) x (2r+1)
    Scalar min_eigenvalue = Scalar(1e-4);   // acceptance threshold on the structure tensor

    void validate() const {
        if (window_radius < 1) throw ParameterError("window_radius must be >= 1");
        if (min_eigenvalue < 0) throw ParameterError("min_eigenvalue must be >= 0");
    }
};

template <typename Scalar>
struct LkPoint {
    Index x = 0;
    Index y = 0;
    Scalar u = 0;
    Scalar v = 0;
    bool accepted = false;
};

// Motion estimates at selected points; rejected points carry (u,v) = (0,0).
template <typename Scalar>
struct SparseFlow {
    std::vector<LkPoint<Scalar>> points;
};

// Sum of outer products of the stacked gradient rows over a window:
// [[sum Ix^2, sum IxIy], [sum IxIy, sum Iy^2]]. Symmetric PSD.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> structure_tensor(const Image<Scalar>& ix_patch,
                                             const Image<Scalar>& iy_patch) {
    detail::require_same_shape(ix_patch, iy_patch, "structure_tensor: patch");
    if (ix_patch.size() == 0) {
        throw DegenerateInputError("structure_tensor: empty patch");
    }
    Eigen::Matrix<Scalar, 2, 2> m;
    m(0, 0) = ix_patch.square().sum();
    m(0, 1) = (ix_patch * iy_patch).sum();
    m(1, 0) = m(0, 1);
    m(1, 1) = iy_patch.square().sum();
    return m;
}

// Smaller eigenvalue of a symmetric 2x2 matrix.
template <typename Scalar>
Scalar min_eigenvalue_2x2(const Eigen::Matrix<Scalar, 2, 2>& m) {
    const Scalar tr = m(0, 0) + m(1, 1);
    const Scalar disc = std::hypot(m(0, 0) - m(1, 1), 2 * m(0, 1));
    return (tr - disc) / 2;
}

// Least-squares flow at one point over the window centered there (the center
// is clamped so the window fits inside the frame). The normal equations
// (A^T A) w = A^T b with b = -It are solved in closed form via the adjugate.
// Points whose structure tensor is too weak are rejected, never an error;
// exactly singular tensors are rejected as well so accepted flow is finite.
template <typename Scalar>
LkPoint<Scalar> lk_solve_point(const Gradients<Scalar>& g, Index x, Index y,
                               const LkParams<Scalar>& params) {
    params.validate();
    const Index w = g.ix.cols();
    const Index h = g.ix.rows();
    const Index r = params.window_radius;
    if (2 * r + 1 > w || 2 * r + 1 > h) {
        throw DegenerateInputError("lk_solve_point: window "
                                   + std::to_string(2 * r + 1) + "x" + std::to_string(2 * r + 1)
                                   + " does not fit in a " + detail::dims_string(w, h) + " frame");
    }
    const Index cx = std::clamp<Index>(x, r, w - 1 - r);
    const Index cy = std::clamp<Index>(y, r, h - 1 - r);

    Scalar sxx = 0, sxy = 0, syy = 0, rhs_x = 0, rhs_y = 0;
    for (Index j = cy - r; j <= cy + r; ++j) {
        for (Index i = cx - r; i <= cx + r; ++i) {
            const Scalar gx = g.ix(j, i);
            const Scalar gy = g.iy(j, i);
            const Scalar gt = g.it(j, i);
            sxx += gx * gx;
            sxy += gx * gy;
            syy += gy * gy;
            rhs_x += gx * -gt;
            rhs_y += gy * -gt;
        }
    }

    LkPoint<Scalar> result;
    result.x = x;
    result.y = y;
    Eigen::Matrix<Scalar, 2, 2> tensor;
    tensor << sxx, sxy, sxy, syy;
    const Scalar lambda_min = min_eigenvalue_2x2(tensor);
    if (lambda_min < params.min_eigenvalue || !(lambda_min > 0)) {
        return result;
    }
    const Scalar det = sxx * syy - sxy * sxy;
    result.u = (syy * rhs_x - sxy * rhs_y) / det;
    result.v = (sxx * rhs_y - sxy * rhs_x) / det;
    result.accepted = true;
    return result;
}

// Evaluates lk_solve_point at every stride-th pixel whose window fits inside
// the frame, in row-major order.
template <typename Scalar>
SparseFlow<Scalar> lk_solve_grid(const Image<Scalar>& frame1, const Image<Scalar>& frame2,
                                 Index stride, const LkParams<Scalar>& params) {
    params.validate();
    if (stride < 1) throw ParameterError("stride must be >= 1");
    detail::require_same_shape(frame1, frame2, "lk_solve_grid: frame");

    const Gradients<Scalar> g = compute_gradients(frame1, frame2);
    const Index w = frame1.cols();
    const Index h = frame1.rows();
    const Index r = params.window_radius;

    SparseFlow<Scalar> flow;
    for (Index y = 0; y < h; y += stride) {
        if (y < r || y + r >= h) continue;
        for (Index x = 0; x < w; x += stride) {
            if (x < r || x + r >= w) continue;
            flow.points.push_back(lk_solve_point(g, x, y, params));
        }
    }
    return flow;
}

} // namespace denseflow
