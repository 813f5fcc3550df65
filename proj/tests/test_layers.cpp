#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "ssrn/layers.hpp"
#include "ssrn/rng.hpp"

using namespace ssrn;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng, double lo = -1.0,
                     double hi = 1.0) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = uniform_real(rng, lo, hi);
    return t;
}

ConvParams random_conv(std::size_t out_ch, std::size_t in_ch, std::size_t k, std::size_t stride,
                       std::size_t padding, std::mt19937_64& rng) {
    ConvParams p;
    p.weights = random_tensor({out_ch, in_ch, k, k}, rng);
    p.bias.resize(out_ch);
    for (auto& b : p.bias) b = uniform_real(rng, -0.5, 0.5);
    p.stride = stride;
    p.padding = padding;
    return p;
}

} // namespace

// ---------------------------------------------------------------------------
// conv2d
// ---------------------------------------------------------------------------

TEST_CASE("conv2d all-ones 3x3 counts its in-bounds neighborhood") {
    Tensor input({1, 3, 3}, 1.0);
    ConvParams p;
    p.weights = Tensor({1, 1, 3, 3}, 1.0);
    p.bias = {0.0};
    p.stride = 1;
    p.padding = 1;

    const Tensor out = conv2d_forward(input, p);
    const double expected[3][3] = {{4, 6, 4}, {6, 9, 6}, {4, 6, 4}};
    for (std::size_t y = 0; y < 3; ++y)
        for (std::size_t x = 0; x < 3; ++x)
            REQUIRE(out.at(0, y, x) == expected[y][x]);
}

TEST_CASE("conv2d 1x1 identity kernel passes input through") {
    std::mt19937_64 rng(11);
    const Tensor input = random_tensor({1, 5, 7}, rng);
    ConvParams p;
    p.weights = Tensor({1, 1, 1, 1}, 1.0);
    p.bias = {0.0};

    const Tensor out = conv2d_forward(input, p);
    REQUIRE(out.same_shape(input));
    for (std::size_t i = 0; i < out.size(); ++i) REQUIRE(out[i] == input[i]);
}

TEST_CASE("conv2d zero input yields the bias everywhere") {
    std::mt19937_64 rng(12);
    Tensor input({2, 4, 4}, 0.0);
    ConvParams p = random_conv(3, 2, 3, 1, 1, rng);
    p.bias = {0.25, -1.5, 3.0};
    const Tensor out = conv2d_forward(input, p);
    for (std::size_t oc = 0; oc < 3; ++oc)
        for (std::size_t i = 0; i < 16; ++i) REQUIRE(out.plane(oc)[i] == p.bias[oc]);
}

TEST_CASE("conv2d rejects bad shapes") {
    std::mt19937_64 rng(13);
    ConvParams p = random_conv(2, 3, 3, 1, 1, rng);
    REQUIRE_THROWS_AS(conv2d_forward(Tensor({2, 4, 4}), p), ShapeError);
    // 3x3 kernel without padding on a 2-pixel side: non-positive output.
    p.padding = 0;
    REQUIRE_THROWS_AS(conv2d_forward(Tensor({3, 2, 2}), p), ShapeError);
}

TEST_CASE("conv2d matches the naive oracle across strides and paddings") {
    std::mt19937_64 rng(14);
    struct Case {
        std::size_t in_ch, out_ch, k, stride, padding, h, w;
    };
    const Case cases[] = {
        {1, 1, 3, 1, 1, 5, 5}, {2, 3, 3, 1, 1, 6, 4},  {3, 2, 3, 2, 1, 7, 9},
        {2, 2, 1, 1, 0, 4, 4}, {4, 1, 1, 2, 0, 6, 6},  {1, 4, 3, 2, 0, 8, 5},
    };
    for (const Case& c : cases) {
        const Tensor input = random_tensor({c.in_ch, c.h, c.w}, rng);
        const ConvParams p = random_conv(c.out_ch, c.in_ch, c.k, c.stride, c.padding, rng);
        const Tensor got = conv2d_forward(input, p);
        const Tensor want = oracle::naive_conv2d(input, p);
        REQUIRE(got.same_shape(want));
        for (std::size_t i = 0; i < got.size(); ++i)
            REQUIRE_THAT(got[i], Catch::Matchers::WithinAbs(want[i], 1e-12));
    }
}

TEST_CASE("conv2d is linear in its input when bias is zero") {
    std::mt19937_64 rng(15);
    ConvParams p = random_conv(2, 2, 3, 1, 1, rng);
    p.bias = {0.0, 0.0};
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor x = random_tensor({2, 5, 6}, rng);
        const Tensor y = random_tensor({2, 5, 6}, rng);
        const double a = uniform_real(rng, -2.0, 2.0);
        const double b = uniform_real(rng, -2.0, 2.0);
        Tensor combo({2, 5, 6});
        for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = a * x[i] + b * y[i];
        const Tensor fc = conv2d_forward(combo, p);
        const Tensor fx = conv2d_forward(x, p);
        const Tensor fy = conv2d_forward(y, p);
        for (std::size_t i = 0; i < fc.size(); ++i)
            REQUIRE_THAT(fc[i], Catch::Matchers::WithinAbs(a * fx[i] + b * fy[i], 1e-9));
    }
}

TEST_CASE("conv2d backward zero grad gives zero gradients") {
    std::mt19937_64 rng(16);
    const Tensor input = random_tensor({2, 4, 4}, rng);
    const ConvParams p = random_conv(3, 2, 3, 1, 1, rng);
    const ConvGrads g = conv2d_backward(input, p, Tensor({3, 4, 4}, 0.0));
    for (std::size_t i = 0; i < g.input.size(); ++i) REQUIRE(g.input[i] == 0.0);
    for (std::size_t i = 0; i < g.weights.size(); ++i) REQUIRE(g.weights[i] == 0.0);
    for (double b : g.bias) REQUIRE(b == 0.0);
}

TEST_CASE("conv2d backward identity kernel routes grad straight through") {
    std::mt19937_64 rng(17);
    const Tensor input = random_tensor({1, 4, 5}, rng);
    ConvParams p;
    p.weights = Tensor({1, 1, 1, 1}, 1.0);
    p.bias = {0.0};
    const Tensor grad_out = random_tensor({1, 4, 5}, rng);
    const ConvGrads g = conv2d_backward(input, p, grad_out);
    for (std::size_t i = 0; i < grad_out.size(); ++i) REQUIRE(g.input[i] == grad_out[i]);
}

TEST_CASE("conv2d backward matches finite differences") {
    std::mt19937_64 rng(18);
    Tensor input = random_tensor({1, 4, 4}, rng);
    ConvParams p = random_conv(2, 1, 3, 1, 1, rng);
    const Tensor grad_out = random_tensor({2, 4, 4}, rng);

    auto objective = [&] {
        const Tensor out = conv2d_forward(input, p);
        double acc = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) acc += grad_out[i] * out[i];
        return acc;
    };
    const ConvGrads g = conv2d_backward(input, p, grad_out);

    for (std::size_t i = 0; i < input.size(); ++i) {
        const double fd = oracle::central_diff(&input[i], objective);
        REQUIRE(oracle::rel_err(g.input[i], fd) < 1e-6);
    }
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
        const double fd = oracle::central_diff(&p.weights[i], objective);
        REQUIRE(oracle::rel_err(g.weights[i], fd) < 1e-6);
    }
    for (std::size_t i = 0; i < p.bias.size(); ++i) {
        const double fd = oracle::central_diff(&p.bias[i], objective);
        REQUIRE(oracle::rel_err(g.bias[i], fd) < 1e-6);
    }
}

TEST_CASE("conv2d backward rejects mismatched grad shape") {
    std::mt19937_64 rng(19);
    const Tensor input = random_tensor({1, 4, 4}, rng);
    const ConvParams p = random_conv(1, 1, 3, 1, 1, rng);
    REQUIRE_THROWS_AS(conv2d_backward(input, p, Tensor({1, 3, 4})), ShapeError);
}

// ---------------------------------------------------------------------------
// max pooling
// ---------------------------------------------------------------------------

TEST_CASE("maxpool 2x2 input stride 2 pools to the maximum") {
    Tensor input({1, 2, 2}, {1.0, 2.0, 3.0, 4.0});
    const MaxPoolResult r = maxpool_forward(input, PoolParams{3, 2, 1});
    REQUIRE(r.output.height() == 1);
    REQUIRE(r.output.width() == 1);
    REQUIRE(r.output[0] == 4.0);
    REQUIRE(r.argmax[0] == 3);
}

TEST_CASE("maxpool stride 1 keeps dims and constants") {
    Tensor input({2, 5, 4}, 2.5);
    const MaxPoolResult r = maxpool_forward(input, PoolParams{3, 1, 1});
    REQUIRE(r.output.same_shape(input));
    for (std::size_t i = 0; i < r.output.size(); ++i) REQUIRE(r.output[i] == 2.5);
}

TEST_CASE("maxpool output dims follow ceil(n/2) for stride 2 and n for stride 1") {
    for (std::size_t n = 1; n <= 64; ++n) {
        Tensor input({1, n, n}, 1.0);
        const MaxPoolResult s2 = maxpool_forward(input, PoolParams{3, 2, 1});
        REQUIRE(s2.output.height() == (n + 1) / 2);
        REQUIRE(s2.output.width() == (n + 1) / 2);
        const MaxPoolResult s1 = maxpool_forward(input, PoolParams{3, 1, 1});
        REQUIRE(s1.output.height() == n);
        REQUIRE(s1.output.width() == n);
    }
}

TEST_CASE("maxpool matches the naive oracle") {
    std::mt19937_64 rng(20);
    for (std::size_t stride : {1u, 2u}) {
        const Tensor input = random_tensor({2, 7, 5}, rng);
        const MaxPoolResult got = maxpool_forward(input, PoolParams{3, stride, 1});
        const Tensor want = oracle::naive_maxpool(input, stride);
        REQUIRE(got.output.same_shape(want));
        for (std::size_t i = 0; i < want.size(); ++i) REQUIRE(got.output[i] == want[i]);
    }
}

TEST_CASE("maxpool backward routes grad to winners and accumulates overlaps") {
    // Single forced window.
    Tensor input({1, 2, 2}, {1.0, 2.0, 3.0, 4.0});
    const MaxPoolResult r = maxpool_forward(input, PoolParams{3, 2, 1});
    Tensor grad_out({1, 1, 1}, 5.0);
    const Tensor gi = maxpool_backward(r.argmax, grad_out, input.shape());
    REQUIRE(gi[3] == 5.0);
    REQUIRE(gi[0] == 0.0);

    // Stride 1: one dominant cell wins every window covering it.
    Tensor peak({1, 3, 3}, 0.0);
    peak.at(0, 1, 1) = 10.0;
    const MaxPoolResult rp = maxpool_forward(peak, PoolParams{3, 1, 1});
    Tensor ones({1, 3, 3}, 1.0);
    const Tensor gp = maxpool_backward(rp.argmax, ones, peak.shape());
    REQUIRE(gp.at(0, 1, 1) == 9.0);  // all nine windows route here

    // Zero grad stays zero.
    const Tensor gz = maxpool_backward(rp.argmax, Tensor({1, 3, 3}, 0.0), peak.shape());
    for (std::size_t i = 0; i < gz.size(); ++i) REQUIRE(gz[i] == 0.0);
}

TEST_CASE("maxpool backward matches finite differences on tie-free input") {
    std::mt19937_64 rng(21);
    Tensor input({1, 6, 6});
    // Distinct values guarantee a tie-free max everywhere.
    std::vector<double> shuffled(36);
    for (std::size_t i = 0; i < 36; ++i) shuffled[i] = static_cast<double>(i) * 0.1;
    shuffle(shuffled, rng);
    for (std::size_t i = 0; i < 36; ++i) input[i] = shuffled[i];

    const PoolParams pp{3, 1, 1};
    const Tensor grad_out = random_tensor({1, 6, 6}, rng);
    auto objective = [&] {
        const MaxPoolResult r = maxpool_forward(input, pp);
        double acc = 0.0;
        for (std::size_t i = 0; i < r.output.size(); ++i) acc += grad_out[i] * r.output[i];
        return acc;
    };
    const MaxPoolResult r = maxpool_forward(input, pp);
    const Tensor gi = maxpool_backward(r.argmax, grad_out, input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) {
        const double fd = oracle::central_diff(&input[i], objective);
        REQUIRE(oracle::rel_err(gi[i], fd) < 1e-6);
    }
}

TEST_CASE("maxpool backward rejects stale indices") {
    std::vector<std::size_t> stale{100};
    REQUIRE_THROWS_AS(maxpool_backward(stale, Tensor({1, 1, 1}, 1.0), {1, 2, 2}), ShapeError);
    std::vector<std::size_t> short_idx{0};
    REQUIRE_THROWS_AS(maxpool_backward(short_idx, Tensor({1, 2, 2}, 1.0), {1, 2, 2}),
                      ShapeError);
}

// ---------------------------------------------------------------------------
// relu
// ---------------------------------------------------------------------------

TEST_CASE("relu clips negatives and passes positives") {
    Tensor x({1, 1, 2}, {-1.0, 2.0});
    const Tensor y = relu_forward(x);
    REQUIRE(y[0] == 0.0);
    REQUIRE(y[1] == 2.0);

    Tensor nonneg({1, 2, 2}, {0.0, 1.0, 2.0, 3.0});
    const Tensor id = relu_forward(nonneg);
    for (std::size_t i = 0; i < id.size(); ++i) REQUIRE(id[i] == nonneg[i]);
}

TEST_CASE("relu backward masks by the sign of the forward input") {
    Tensor x({1, 1, 2}, {-1.0, 3.0});
    Tensor g({1, 1, 2}, {5.0, 7.0});
    const Tensor gi = relu_backward(x, g);
    REQUIRE(gi[0] == 0.0);
    REQUIRE(gi[1] == 7.0);
}

// ---------------------------------------------------------------------------
// dropout
// ---------------------------------------------------------------------------

TEST_CASE("dropout inference mode is bit-identical to its input") {
    std::mt19937_64 rng(22);
    const Tensor x = random_tensor({1, 16, 16}, rng);
    DropoutState state(0.5, DropoutState::Mode::inference, 7);
    const Tensor y = dropout_forward(x, state);
    for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(y[i] == x[i]);
}

TEST_CASE("dropout with rate zero is the identity in both modes") {
    std::mt19937_64 rng(23);
    const Tensor x = random_tensor({1, 8, 8}, rng);
    for (auto mode : {DropoutState::Mode::training, DropoutState::Mode::inference}) {
        DropoutState state(0.0, mode, 7);
        const Tensor y = dropout_forward(x, state);
        for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(y[i] == x[i]);
    }
}

TEST_CASE("dropout rejects rates outside [0,1)") {
    REQUIRE_THROWS_AS(DropoutState(1.0, DropoutState::Mode::training, 1), ValueError);
    REQUIRE_THROWS_AS(DropoutState(-0.1, DropoutState::Mode::training, 1), ValueError);
}

TEST_CASE("dropout keep fraction and mean are unbiased at rate 0.5") {
    Tensor x({1, 1000, 1000}, 1.0);
    DropoutState state(0.5, DropoutState::Mode::training, 42);
    const Tensor y = dropout_forward(x, state);
    std::size_t kept = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0.0) ++kept;
        sum += y[i];
    }
    const double frac = static_cast<double>(kept) / static_cast<double>(y.size());
    REQUIRE(frac >= 0.498);
    REQUIRE(frac <= 0.502);
    const double mean = sum / static_cast<double>(y.size());
    REQUIRE_THAT(mean, Catch::Matchers::WithinAbs(1.0, 0.01));
}

TEST_CASE("dropout backward replays the sampled mask and scale") {
    std::mt19937_64 rng(24);
    const Tensor x = random_tensor({1, 10, 10}, rng);
    DropoutState state(0.3, DropoutState::Mode::training, 9);
    const Tensor y = dropout_forward(x, state);
    const Tensor g = random_tensor({1, 10, 10}, rng);
    const Tensor gi = dropout_backward(g, state);
    const double scale = 1.0 / 0.7;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (state.mask[i])
            REQUIRE_THAT(gi[i], Catch::Matchers::WithinAbs(g[i] * scale, 1e-15));
        else
            REQUIRE(gi[i] == 0.0);
    }
    // The outputs themselves follow the same mask.
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (state.mask[i])
            REQUIRE_THAT(y[i], Catch::Matchers::WithinAbs(x[i] * scale, 1e-15));
        else
            REQUIRE(y[i] == 0.0);
    }
}
