#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "denseflow/horn_schunck.hpp"
#include "test_util.hpp"

using namespace denseflow;

namespace {

// Independent per-pixel transcription of the update displays, built on the
// reference convolution with locally constructed binomial weights.
FlowField<double> reference_update(const FlowField<double>& flow, const Gradients<double>& g,
                                   double alpha, double eps) {
    Imaged weights(5, 5);
    const double taps[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
    for (Index i = 0; i < 5; ++i)
        for (Index j = 0; j < 5; ++j) weights(i, j) = taps[i] * taps[j];
    const Imaged ubar = testutil::reference_convolve(flow.u, weights);
    const Imaged vbar = testutil::reference_convolve(flow.v, weights);

    FlowField<double> next = zero_flow<double>(flow.width(), flow.height());
    for (Index y = 0; y < flow.height(); ++y) {
        for (Index x = 0; x < flow.width(); ++x) {
            const double ix = g.ix(y, x), iy = g.iy(y, x), it = g.it(y, x);
            const double den = alpha * alpha + ix * ix + iy * iy + eps;
            next.u(y, x) = ubar(y, x) - ix * (ix * ubar(y, x) + iy * vbar(y, x) + it) / den;
            next.v(y, x) = vbar(y, x) - iy * (ix * ubar(y, x) + iy * vbar(y, x) + it) / den;
        }
    }
    return next;
}

// The 3x3 hand fixture: every value listed explicitly.
struct HandFixture {
    FlowField<double> flow;
    Gradients<double> g;
};

HandFixture hand_fixture() {
    Imaged u(3, 3), v(3, 3), ix(3, 3), iy(3, 3), it(3, 3);
    u << 0.5, -0.3, 0.2,
         0.1, 0.4, -0.2,
         0.0, 0.3, 0.1;
    v << -0.1, 0.2, 0.3,
          0.0, -0.4, 0.1,
          0.2, 0.1, -0.3;
    ix << 0.1, -0.2, 0.3,
          0.0, 0.5, -0.1,
          0.2, 0.1, 0.0;
    iy << -0.3, 0.1, 0.2,
           0.4, -0.2, 0.0,
           0.1, 0.0, 0.3;
    it << 0.05, -0.1, 0.2,
          0.1, 0.0, -0.05,
         -0.2, 0.15, 0.1;
    return {FlowField<double>{u, v}, Gradients<double>{ix, iy, it}};
}

std::pair<Imaged, Imaged> blob_pair() {
    return {testutil::gaussian_blob(64, 64, 31.5, 31.5, 10.0),
            testutil::gaussian_blob(64, 64, 32.5, 31.5, 10.0)};
}

} // namespace

TEST_CASE("update step keeps zero flow fixed when the temporal gradient vanishes") {
    std::mt19937_64 rng(1);
    Gradients<double> g{testutil::random_image<double>(rng, 12, 10, -0.5, 0.5),
                        testutil::random_image<double>(rng, 12, 10, -0.5, 0.5),
                        Imaged::Zero(10, 12)};
    const auto flow = zero_flow<double>(12, 10);
    const auto next = hs_update_step(flow, g, HsParams<double>{});
    CHECK((next.u == 0.0).all());
    CHECK((next.v == 0.0).all());
}

TEST_CASE("update step collapses to the local average for huge alpha") {
    std::mt19937_64 rng(2);
    Gradients<double> g{testutil::random_image<double>(rng, 10, 10, -1.0, 1.0),
                        testutil::random_image<double>(rng, 10, 10, -1.0, 1.0),
                        testutil::random_image<double>(rng, 10, 10, -1.0, 1.0)};
    FlowField<double> flow = testutil::random_flow<double>(rng, 10, 10, -1.0, 1.0);
    HsParams<double> params;
    params.alpha = 1e6;
    const auto next = hs_update_step(flow, g, params);
    const Imaged ubar = gaussian_smooth(flow.u);
    const Imaged vbar = gaussian_smooth(flow.v);
    CHECK((next.u - ubar).abs().maxCoeff() <= 1e-11);
    CHECK((next.v - vbar).abs().maxCoeff() <= 1e-11);
}

TEST_CASE("update step matches the per-pixel transcription on the 3x3 hand fixture") {
    const HandFixture fx = hand_fixture();
    HsParams<double> params;
    params.alpha = 0.7;
    const auto got = hs_update_step(fx.flow, fx.g, params);
    const auto expected = reference_update(fx.flow, fx.g, params.alpha, params.epsilon);
    CHECK((got.u - expected.u).abs().maxCoeff() < 1e-12);
    CHECK((got.v - expected.v).abs().maxCoeff() < 1e-12);
}

TEST_CASE("update step matches the transcription on random grids") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const Index w = 3 + Index(rng() % 10);
        const Index h = 3 + Index(rng() % 10);
        Gradients<double> g{testutil::random_image<double>(rng, w, h, -1.0, 1.0),
                            testutil::random_image<double>(rng, w, h, -1.0, 1.0),
                            testutil::random_image<double>(rng, w, h, -0.3, 0.3)};
        const auto flow = testutil::random_flow<double>(rng, w, h, -2.0, 2.0);
        const auto got = hs_update_step(flow, g, HsParams<double>{});
        const auto expected = reference_update(flow, g, 1.0, 1e-8);
        CHECK((got.u - expected.u).abs().maxCoeff() < 1e-12);
        CHECK((got.v - expected.v).abs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("energy vanishes for zero flow without temporal change") {
    Gradients<double> g{Imaged::Constant(4, 4, 0.3), Imaged::Constant(4, 4, -0.2),
                        Imaged::Zero(4, 4)};
    CHECK(hs_energy(zero_flow<double>(4, 4), g, 1.0) == 0.0);
}

TEST_CASE("energy of a constant field is zero when data terms vanish") {
    Gradients<double> g{Imaged::Zero(5, 5), Imaged::Zero(5, 5), Imaged::Zero(5, 5)};
    const FlowField<double> flow{Imaged::Constant(5, 5, 2.5), Imaged::Constant(5, 5, -1.5)};
    CHECK(hs_energy(flow, g, 3.0) == 0.0);
}

TEST_CASE("energy matches the scalar evaluation on a 2x2 hand fixture") {
    Imaged u(2, 2), v(2, 2), ix(2, 2), iy(2, 2), it(2, 2);
    u << 1.0, 2.0,
         3.0, 4.0;
    v << -1.0, 0.5,
          0.0, 2.0;
    ix << 0.2, -0.1,
          0.3, 0.0;
    iy << 0.1, 0.4,
         -0.2, 0.1;
    it << 0.05, -0.2,
          0.1, 0.0;
    const double alpha = 0.8;

    double expected = 0.0;
    for (Index y = 0; y < 2; ++y) {
        for (Index x = 0; x < 2; ++x) {
            const double r = ix(y, x) * u(y, x) + iy(y, x) * v(y, x) + it(y, x);
            expected += r * r;
        }
    }
    // forward differences, replicated (zero) at the last row/column
    double smooth = 0.0;
    for (Index y = 0; y < 2; ++y) {
        smooth += std::pow(u(y, 1) - u(y, 0), 2) + std::pow(v(y, 1) - v(y, 0), 2);
    }
    for (Index x = 0; x < 2; ++x) {
        smooth += std::pow(u(1, x) - u(0, x), 2) + std::pow(v(1, x) - v(0, x), 2);
    }
    expected += alpha * smooth;

    CHECK(hs_energy(FlowField<double>{u, v}, Gradients<double>{ix, iy, it}, alpha)
          == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("identical frames converge to zero flow in one iteration") {
    std::mt19937_64 rng(4);
    const Imaged frame = testutil::random_image<double>(rng, 24, 18);
    const auto [flow, trace] = hs_solve(frame, frame, zero_flow<double>(24, 18),
                                        HsParams<double>{});
    CHECK(trace.iterations_run == 1);
    CHECK(trace.converged);
    CHECK(trace.final_delta == 0.0);
    CHECK((flow.u == 0.0).all());
    CHECK((flow.v == 0.0).all());
    CHECK(trace.energy_initial == 0.0);
    CHECK(trace.energy_final == 0.0);
}

TEST_CASE("solver recovers a 1-pixel blob translation within half a pixel") {
    const auto [f1, f2] = blob_pair();
    HsParams<double> params; // alpha = 1.0, tol = 1e-5, cap 5000
    const auto [flow, trace] = hs_solve(f1, f2, zero_flow<double>(64, 64), params);

    CHECK(trace.iterations_run <= 5000);
    CHECK(trace.converged == (trace.final_delta < params.convergence_threshold));

    const Mask mask = testutil::textured_mask(f1);
    const double epe = testutil::interior_epe(flow, 1.0, 0.0, mask);
    CHECK(epe < 0.5);
}

TEST_CASE("energy does not increase over the blob fixture run") {
    const auto [f1, f2] = blob_pair();
    const auto [flow, trace] = hs_solve(f1, f2, zero_flow<double>(64, 64), HsParams<double>{});
    CHECK(trace.energy_final <= trace.energy_initial);
}

TEST_CASE("solver is deterministic") {
    const auto [f1, f2] = blob_pair();
    HsParams<double> params;
    params.max_iterations = 50;
    const auto [flow_a, trace_a] = hs_solve(f1, f2, zero_flow<double>(64, 64), params);
    const auto [flow_b, trace_b] = hs_solve(f1, f2, zero_flow<double>(64, 64), params);
    CHECK((flow_a.u == flow_b.u).all());
    CHECK((flow_a.v == flow_b.v).all());
    CHECK(trace_a.iterations_run == trace_b.iterations_run);
    CHECK(trace_a.final_delta == trace_b.final_delta);
    CHECK(trace_a.energy_final == trace_b.energy_final);
}

TEST_CASE("tightening the convergence threshold never lowers the iteration count") {
    const auto [f1, f2] = blob_pair();
    HsParams<double> params;
    params.max_iterations = 400;
    int previous = 0;
    for (const double tol : {1e-1, 1e-2, 1e-3, 1e-4}) {
        params.convergence_threshold = tol;
        const auto [flow, trace] = hs_solve(f1, f2, zero_flow<double>(64, 64), params);
        CHECK(trace.iterations_run >= previous);
        CHECK(trace.converged == (trace.final_delta < tol));
        previous = trace.iterations_run;
    }
}

TEST_CASE("non-finite intermediates raise a numerical-instability error") {
    std::mt19937_64 rng(5);
    const Imaged f1 = testutil::random_image<double>(rng, 8, 8);
    const Imaged f2 = testutil::random_image<double>(rng, 8, 8);
    auto poisoned = zero_flow<double>(8, 8);
    poisoned.u(3, 3) = std::numeric_limits<double>::quiet_NaN();
    try {
        hs_solve(f1, f2, poisoned, HsParams<double>{});
        FAIL("expected NumericalInstabilityError");
    } catch (const NumericalInstabilityError& e) {
        CHECK(std::string(e.what()).find("iteration 1") != std::string::npos);
    }
}

TEST_CASE("parameter and shape validation") {
    std::mt19937_64 rng(6);
    const Imaged f = testutil::random_image<double>(rng, 8, 8);
    HsParams<double> bad;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(hs_solve(f, f, zero_flow<double>(8, 8), bad), ParameterError);
    bad = HsParams<double>{};
    bad.max_iterations = 0;
    CHECK_THROWS_AS(hs_solve(f, f, zero_flow<double>(8, 8), bad), ParameterError);
    bad = HsParams<double>{};
    bad.convergence_threshold = 0.0;
    CHECK_THROWS_AS(hs_solve(f, f, zero_flow<double>(8, 8), bad), ParameterError);
    bad = HsParams<double>{};
    bad.epsilon = 0.0;
    CHECK_THROWS_AS(hs_solve(f, f, zero_flow<double>(8, 8), bad), ParameterError);

    CHECK_THROWS_AS(hs_solve(f, testutil::random_image<double>(rng, 7, 8),
                             zero_flow<double>(8, 8), HsParams<double>{}),
                    ShapeError);
    CHECK_THROWS_AS(hs_solve(f, f, zero_flow<double>(7, 8), HsParams<double>{}), ShapeError);
}
