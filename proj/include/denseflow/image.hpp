#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "denseflow/errors.hpp"

namespace denseflow {

// A grayscale image: row-major 2D array of intensities, (row, col) = (y, x).
// Intensities are nominally in [0,1] after ingestion but the numerics do not
// depend on that.
template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Imagef = Image<float>;
using Imaged = Image<double>;

using Index = Eigen::Index;

namespace detail {

inline Index clamp_index(Index i, Index n) {
    return std::clamp<Index>(i, 0, n - 1);
}

inline std::string dims_string(Index w, Index h) {
    return std::to_string(w) + "x" + std::to_string(h);
}

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(what) + " dimensions differ: "
                         + dims_string(a.cols(), a.rows()) + " vs "
                         + dims_string(b.cols(), b.rows()));
    }
}

} // namespace detail

// Square odd-sized filter mask. Smoothing kernels must sum to 1 within 1e-12.
template <typename Scalar>
struct Kernel {
    Image<Scalar> weights;

    explicit Kernel(Image<Scalar> w) : weights(std::move(w)) {
        if (weights.rows() != weights.cols()) {
            throw ParameterError("kernel must be square, got "
                                 + detail::dims_string(weights.cols(), weights.rows()));
        }
        if (weights.rows() < 1 || weights.rows() % 2 == 0) {
            throw ParameterError("kernel size must be odd and positive, got "
                                 + std::to_string(weights.rows()));
        }
    }

    int size() const { return static_cast<int>(weights.rows()); }
    int radius() const { return size() / 2; }

    bool is_normalized(Scalar tol = Scalar(1e-12)) const {
        return std::abs(weights.sum() - Scalar(1)) <= tol;
    }
};

// 3x3 Sobel masks scaled by 1/8 so a unit intensity ramp has gradient 1.
template <typename Scalar>
Kernel<Scalar> sobel_x_kernel() {
    Image<Scalar> w(3, 3);
    w << -1, 0, 1,
         -2, 0, 2,
         -1, 0, 1;
    return Kernel<Scalar>(Image<Scalar>(w / Scalar(8)));
}

template <typename Scalar>
Kernel<Scalar> sobel_y_kernel() {
    Image<Scalar> w(3, 3);
    w << -1, -2, -1,
          0,  0,  0,
          1,  2,  1;
    return Kernel<Scalar>(Image<Scalar>(w / Scalar(8)));
}

// 5x5 binomial approximation of a Gaussian: outer product of (1,4,6,4,1)/16.
// Weights are dyadic rationals and sum to exactly 1.
template <typename Scalar>
Kernel<Scalar> gaussian5_kernel() {
    Eigen::Array<Scalar, 5, 1> b;
    b << 1, 4, 6, 4, 1;
    b /= Scalar(16);
    Image<Scalar> w = b.matrix() * b.matrix().transpose();
    return Kernel<Scalar>(std::move(w));
}

// Filters the image with the kernel, replicating edge pixels outside the
// frame. Output has the input's dimensions.
template <typename Scalar>
Image<Scalar> convolve(const Image<Scalar>& image, const Kernel<Scalar>& kernel) {
    const Index h = image.rows();
    const Index w = image.cols();
    if (h < 1 || w < 1) {
        throw DegenerateInputError("convolve: empty image");
    }
    const int k = kernel.size();
    const int r = kernel.radius();
    // a window centered anywhere must reach at least one unreplicated pixel
    // per axis; beyond 2n-1 taps the kernel outgrows even the clamped support
    if (k > 2 * w - 1 && k > 2 * h - 1) {
        throw DegenerateInputError("convolve: " + std::to_string(k) + "x"
                                   + std::to_string(k) + " kernel exceeds both dimensions of a "
                                   + detail::dims_string(w, h) + " image");
    }

    Image<Scalar> out(h, w);
    const Scalar* kw = kernel.weights.data();
    std::vector<const Scalar*> src(static_cast<size_t>(k));
    for (Index y = 0; y < h; ++y) {
        for (int t = 0; t < k; ++t) {
            src[static_cast<size_t>(t)] = image.data() + detail::clamp_index(y + t - r, h) * w;
        }
        Scalar* dst = out.data() + y * w;
        for (Index x = 0; x < w; ++x) {
            Scalar acc = 0;
            if (x >= r && x + r < w) {
                for (int ty = 0; ty < k; ++ty) {
                    const Scalar* s = src[static_cast<size_t>(ty)] + (x - r);
                    const Scalar* wrow = kw + ty * k;
                    for (int tx = 0; tx < k; ++tx) {
                        acc += wrow[tx] * s[tx];
                    }
                }
            } else {
                for (int ty = 0; ty < k; ++ty) {
                    const Scalar* s = src[static_cast<size_t>(ty)];
                    const Scalar* wrow = kw + ty * k;
                    for (int tx = 0; tx < k; ++tx) {
                        acc += wrow[tx] * s[detail::clamp_index(x + tx - r, w)];
                    }
                }
            }
            dst[x] = acc;
        }
    }
    return out;
}

// Sobel derivatives (I_x, I_y) of the image, same size as the input, with
// replicated borders. The stencil is evaluated in difference form so constant
// images yield exact zeros and a unit ramp yields exactly 1.
template <typename Scalar>
std::pair<Image<Scalar>, Image<Scalar>> spatial_gradients(const Image<Scalar>& image) {
    const Index h = image.rows();
    const Index w = image.cols();
    if (h < 3 || w < 3) {
        throw DegenerateInputError("spatial_gradients: image must be at least 3x3, got "
                                   + detail::dims_string(w, h));
    }
    Image<Scalar> ix(h, w);
    Image<Scalar> iy(h, w);
    for (Index y = 0; y < h; ++y) {
        const Index ym = detail::clamp_index(y - 1, h);
        const Index yp = detail::clamp_index(y + 1, h);
        for (Index x = 0; x < w; ++x) {
            const Index xm = detail::clamp_index(x - 1, w);
            const Index xp = detail::clamp_index(x + 1, w);
            ix(y, x) = ((image(ym, xp) - image(ym, xm))
                        + 2 * (image(y, xp) - image(y, xm))
                        + (image(yp, xp) - image(yp, xm))) / 8;
            iy(y, x) = ((image(yp, xm) - image(ym, xm))
                        + 2 * (image(yp, x) - image(ym, x))
                        + (image(yp, xp) - image(ym, xp))) / 8;
        }
    }
    return {std::move(ix), std::move(iy)};
}

// I_t = frame2 - frame1, pixel-wise.
template <typename Scalar>
Image<Scalar> temporal_gradient(const Image<Scalar>& frame1, const Image<Scalar>& frame2) {
    detail::require_same_shape(frame1, frame2, "temporal_gradient: frame");
    return frame2 - frame1;
}

// 5x5 binomial smoothing; preserves constants and total mass.
template <typename Scalar>
Image<Scalar> gaussian_smooth(const Image<Scalar>& image) {
    return convolve(image, gaussian5_kernel<Scalar>());
}

// Bilinear interpolation at (x, y) with coordinates clamped to the image
// rectangle; exact at lattice points and on bilinear functions.
template <typename Scalar>
Scalar bilinear_sample(const Image<Scalar>& image, Scalar x, Scalar y) {
    const Index w = image.cols();
    const Index h = image.rows();
    x = std::clamp(x, Scalar(0), Scalar(w - 1));
    y = std::clamp(y, Scalar(0), Scalar(h - 1));
    const Index i = static_cast<Index>(std::floor(x));
    const Index j = static_cast<Index>(std::floor(y));
    const Index i1 = std::min(i + 1, w - 1);
    const Index j1 = std::min(j + 1, h - 1);
    const Scalar a = x - Scalar(i);
    const Scalar b = y - Scalar(j);
    return (1 - a) * (1 - b) * image(j, i)
         + a * (1 - b) * image(j, i1)
         + (1 - a) * b * image(j1, i)
         + a * b * image(j1, i1);
}

} // namespace denseflow
