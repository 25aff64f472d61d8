#include <doctest.h>

#include <random>

#include "denseflow/flow_field.hpp"
#include "denseflow/image.hpp"
#include "test_util.hpp"

using namespace denseflow;
using testutil::uniform;

TEST_CASE("convolve keeps constant images fixed under a normalized kernel") {
    const auto kernel = gaussian5_kernel<double>();
    REQUIRE(kernel.is_normalized());

    Imaged img = Imaged::Constant(9, 7, 0.5);
    Imaged out = convolve(img, kernel);
    CHECK((out == 0.5).all()); // dyadic constant: exact

    img.setConstant(0.37);
    out = convolve(img, kernel);
    CHECK((out - 0.37).abs().maxCoeff() < 1e-15);
}

TEST_CASE("convolve imprints a 5x5 Gaussian around a centered impulse") {
    Imaged img = Imaged::Zero(7, 7);
    img(3, 3) = 1.0;
    const auto kernel = gaussian5_kernel<double>();
    const Imaged out = convolve(img, kernel);
    const Imaged expected = testutil::reference_convolve(img, kernel.weights);
    CHECK((out - expected).abs().maxCoeff() == 0.0);
    // response window equals the kernel weights
    for (Index dy = -2; dy <= 2; ++dy)
        for (Index dx = -2; dx <= 2; ++dx)
            CHECK(out(3 + dy, 3 + dx) == doctest::Approx(kernel.weights(2 + dy, 2 + dx)).epsilon(1e-15));
}

TEST_CASE("convolve with the 3x3 identity kernel returns the input") {
    Imaged w = Imaged::Zero(3, 3);
    w(1, 1) = 1.0;
    const Kernel<double> identity(std::move(w));
    std::mt19937_64 rng(11);
    const Imaged img = testutil::random_image<double>(rng, 6, 5);
    CHECK((convolve(img, identity) == img).all());
}

TEST_CASE("convolve matches the reference implementation on random inputs") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 20; ++trial) {
        const Index w = 3 + Index(rng() % 12);
        const Index h = 3 + Index(rng() % 12);
        const Imaged img = testutil::random_image<double>(rng, w, h, -2.0, 2.0);
        const auto kernel = (trial % 2 == 0) ? gaussian5_kernel<double>() : sobel_x_kernel<double>();
        if (kernel.size() > w && kernel.size() > h) continue;
        const Imaged got = convolve(img, kernel);
        const Imaged expected = testutil::reference_convolve(img, kernel.weights);
        CHECK((got - expected).abs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("convolve rejects kernels exceeding both image dimensions") {
    const Imaged img = Imaged::Constant(2, 2, 1.0);
    CHECK_THROWS_AS(convolve(img, gaussian5_kernel<double>()), DegenerateInputError);
    // larger than only one dimension: handled by clamping
    const Imaged wide = Imaged::Constant(2, 9, 1.0);
    CHECK_NOTHROW(convolve(wide, gaussian5_kernel<double>()));
    // a 3x3 grid still supports the 5x5 smoothing through replication
    CHECK_NOTHROW(convolve(Imaged(Imaged::Constant(3, 3, 1.0)), gaussian5_kernel<double>()));
}

TEST_CASE("kernel construction enforces odd square sizes") {
    CHECK_THROWS_AS(Kernel<double>(Imaged::Zero(4, 4)), ParameterError);
    CHECK_THROWS_AS(Kernel<double>(Imaged::Zero(3, 5)), ParameterError);
}

TEST_CASE("spatial gradients of a constant image vanish") {
    const Imaged img = Imaged::Constant(8, 8, 0.42);
    const auto [ix, iy] = spatial_gradients(img);
    CHECK(ix.abs().maxCoeff() == 0.0);
    CHECK(iy.abs().maxCoeff() == 0.0);
}

TEST_CASE("spatial gradients of a unit ramp are 1 in the interior") {
    Imaged img(6, 8);
    for (Index y = 0; y < 6; ++y)
        for (Index x = 0; x < 8; ++x) img(y, x) = double(x);
    const auto [ix, iy] = spatial_gradients(img);
    for (Index y = 1; y < 5; ++y) {
        for (Index x = 1; x < 7; ++x) {
            CHECK(ix(y, x) == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(iy(y, x) == doctest::Approx(0.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("spatial gradients transpose symmetry") {
    std::mt19937_64 rng(33);
    const Imaged img = testutil::random_image<double>(rng, 9, 7);
    const Imaged imgT = img.transpose();
    const auto [ix, iy] = spatial_gradients(img);
    const auto [txT, tyT] = spatial_gradients(imgT);
    const Imaged tyT_T = tyT.transpose();
    CHECK((ix == tyT_T).all()); // same term order per pixel: exact
}

TEST_CASE("spatial gradients reject images smaller than the stencil") {
    CHECK_THROWS_AS(spatial_gradients(Imaged(Imaged::Constant(2, 8, 1.0))), DegenerateInputError);
    CHECK_THROWS_AS(spatial_gradients(Imaged(Imaged::Constant(8, 2, 1.0))), DegenerateInputError);
}

TEST_CASE("temporal gradient is the frame difference") {
    Imaged f1 = Imaged::Constant(4, 4, 0.5);
    Imaged f2 = Imaged::Constant(4, 4, 0.7);
    const Imaged it = temporal_gradient(f1, f2);
    CHECK((it - 0.2).abs().maxCoeff() < 1e-15);

    CHECK(temporal_gradient(f1, f1).abs().maxCoeff() == 0.0);

    std::mt19937_64 rng(44);
    const Imaged a = testutil::random_image<double>(rng, 5, 6);
    const Imaged b = testutil::random_image<double>(rng, 5, 6);
    CHECK((temporal_gradient(a, b) + temporal_gradient(b, a)).abs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(temporal_gradient(a, Imaged(Imaged::Zero(5, 6))), ShapeError);
}

TEST_CASE("gaussian smoothing preserves constants and interior mass") {
    const Imaged img = Imaged::Constant(10, 10, 0.25);
    CHECK((gaussian_smooth(img) == 0.25).all());

    std::mt19937_64 rng(55);
    Imaged supported = Imaged::Zero(16, 16);
    for (Index y = 2; y < 14; ++y)
        for (Index x = 2; x < 14; ++x) supported(y, x) = uniform(rng, 0.0, 1.0);
    const Imaged smoothed = gaussian_smooth(supported);
    CHECK(std::abs(smoothed.sum() - supported.sum()) < 1e-9);
}

TEST_CASE("gaussian impulse response equals the kernel weights") {
    Imaged img = Imaged::Zero(11, 11);
    img(5, 5) = 1.0;
    const Imaged out = gaussian_smooth(img);
    const Imaged expected = testutil::reference_convolve(img, gaussian5_kernel<double>().weights);
    CHECK((out - expected).abs().maxCoeff() == 0.0);
}

TEST_CASE("bilinear sampling is exact at lattice points") {
    std::mt19937_64 rng(66);
    int checked = 0;
    while (checked < 1200) {
        const Index w = 2 + Index(rng() % 14);
        const Index h = 2 + Index(rng() % 14);
        const Imaged img = testutil::random_image<double>(rng, w, h, -3.0, 3.0);
        for (int k = 0; k < 25; ++k, ++checked) {
            const Index x = Index(rng() % std::uint64_t(w));
            const Index y = Index(rng() % std::uint64_t(h));
            CHECK(bilinear_sample(img, double(x), double(y)) == img(y, x));
        }
    }
}

TEST_CASE("bilinear sampling at a cell center averages the corners") {
    Imaged img(2, 2);
    img << 0, 1,
           2, 3;
    CHECK(bilinear_sample(img, 0.5, 0.5) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("bilinear sampling reproduces bilinear functions") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = uniform(rng, -1, 1), b = uniform(rng, -1, 1);
        const double c = uniform(rng, -1, 1), d = uniform(rng, -1, 1);
        Imaged img(12, 12);
        for (Index y = 0; y < 12; ++y)
            for (Index x = 0; x < 12; ++x)
                img(y, x) = a * double(x) + b * double(y) + c * double(x) * double(y) + d;
        for (int k = 0; k < 5; ++k) {
            const double sx = uniform(rng, 0, 11), sy = uniform(rng, 0, 11);
            const double expected = a * sx + b * sy + c * sx * sy + d;
            CHECK(std::abs(bilinear_sample(img, sx, sy) - expected) < 1e-12);
        }
    }
}

TEST_CASE("bilinear sampling clamps out-of-range coordinates") {
    Imaged img(2, 3);
    img << 1, 2, 3,
           4, 5, 6;
    CHECK(bilinear_sample(img, -5.0, 0.0) == 1.0);
    CHECK(bilinear_sample(img, 10.0, 10.0) == 6.0);
    CHECK(bilinear_sample(img, 1.0, -0.25) == 2.0);
}

TEST_CASE("warp with zero flow is the identity") {
    std::mt19937_64 rng(88);
    const Imaged img = testutil::random_image<double>(rng, 9, 6);
    const auto zero = zero_flow<double>(9, 6);
    CHECK((warp(img, zero) == img).all());
}

TEST_CASE("warp by a constant (-1, 0) flow shifts a ramp") {
    Imaged ramp(5, 8);
    for (Index y = 0; y < 5; ++y)
        for (Index x = 0; x < 8; ++x) ramp(y, x) = double(x);
    const FlowField<double> flow{Imaged::Constant(5, 8, -1.0), Imaged::Zero(5, 8)};
    const Imaged out = warp(ramp, flow);
    for (Index y = 0; y < 5; ++y)
        for (Index x = 1; x < 8; ++x)
            CHECK(out(y, x) == doctest::Approx(double(x) - 1.0).epsilon(1e-15));
}

TEST_CASE("warp clamps coordinates mapped outside the image") {
    std::mt19937_64 rng(99);
    const Imaged img = testutil::random_image<double>(rng, 6, 6);
    const FlowField<double> flow{Imaged::Constant(6, 6, 100.0), Imaged::Constant(6, 6, -100.0)};
    const Imaged out = warp(img, flow);
    CHECK(out.allFinite());
    CHECK((out == img(0, 5)).all()); // everything lands on the top-right corner

    CHECK_THROWS_AS(warp(img, zero_flow<double>(5, 6)), ShapeError);
}

TEST_CASE("float instantiation of the imagery operations") {
    Imagef img = Imagef::Constant(8, 8, 0.5f);
    CHECK((gaussian_smooth(img) == 0.5f).all());
    const auto [ix, iy] = spatial_gradients(img);
    CHECK(ix.abs().maxCoeff() == 0.0f);
    CHECK(bilinear_sample(img, 3.25f, 4.75f) == 0.5f);
}
