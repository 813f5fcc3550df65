#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "ssrn/data.hpp"
#include "ssrn/resize.hpp"
#include "ssrn/rng.hpp"

using namespace ssrn;

namespace {

Tensor random_map(std::size_t h, std::size_t w, std::mt19937_64& rng) {
    Tensor t({1, h, w});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = uniform_real(rng, -1.0, 2.0);
    return t;
}

} // namespace

TEST_CASE("restore_size at identity scale reproduces the input") {
    std::mt19937_64 rng(31);
    const Tensor src = random_map(6, 9, rng);
    const Tensor out = restore_size(src, 9, 6);
    REQUIRE(out.same_shape(src));
    for (std::size_t i = 0; i < out.size(); ++i)
        REQUIRE_THAT(out[i], Catch::Matchers::WithinAbs(src[i], 1e-9));
}

TEST_CASE("restore_size preserves constants under upscaling") {
    const Tensor src({1, 5, 4}, 5.0);
    const Tensor out = restore_size(src, 32, 40);
    REQUIRE(out.height() == 40);
    REQUIRE(out.width() == 32);
    for (std::size_t i = 0; i < out.size(); ++i)
        REQUIRE_THAT(out[i], Catch::Matchers::WithinAbs(5.0, 1e-9));
}

TEST_CASE("restore_size matches the direct non-separable oracle") {
    std::mt19937_64 rng(32);
    const Tensor src = random_map(6, 7, rng);
    const Tensor got = restore_size(src, 56, 48);
    const Tensor want = oracle::bicubic_direct(src, 48, 56);
    REQUIRE(got.same_shape(want));
    for (std::size_t i = 0; i < got.size(); ++i)
        REQUIRE_THAT(got[i], Catch::Matchers::WithinAbs(want[i], 1e-6));

    // Downscale direction as well.
    const Tensor small_got = restore_size(src, 3, 4);
    const Tensor small_want = oracle::bicubic_direct(src, 4, 3);
    for (std::size_t i = 0; i < small_got.size(); ++i)
        REQUIRE_THAT(small_got[i], Catch::Matchers::WithinAbs(small_want[i], 1e-6));
}

TEST_CASE("restore_size commutes with horizontal mirroring") {
    std::mt19937_64 rng(33);
    const Tensor src = random_map(5, 8, rng);
    const Tensor a = restore_size(hflip_tensor(src), 40, 25);
    const Tensor b = hflip_tensor(restore_size(src, 40, 25));
    for (std::size_t i = 0; i < a.size(); ++i)
        REQUIRE_THAT(a[i], Catch::Matchers::WithinAbs(b[i], 1e-9));
}

TEST_CASE("restore_size adjoint satisfies the inner-product identity") {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t sh = 2 + uniform_index(rng, 6);
        const std::size_t sw = 2 + uniform_index(rng, 6);
        const std::size_t th = 1 + uniform_index(rng, 24);
        const std::size_t tw = 1 + uniform_index(rng, 24);
        const Tensor x = random_map(sh, sw, rng);
        const Tensor y = random_map(th, tw, rng);
        const Tensor rx = restore_size(x, tw, th);
        const Tensor ay = restore_size_adjoint(y, sh, sw);
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < rx.size(); ++i) lhs += rx[i] * y[i];
        for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * ay[i];
        REQUIRE_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 1e-9));
    }
}

TEST_CASE("restore_size validates its input") {
    REQUIRE_THROWS_AS(restore_size(Tensor({2, 3, 3}), 6, 6), ShapeError);
    REQUIRE_THROWS_AS(restore_size(Tensor({3, 3}, 1.0), 6, 6), ShapeError);
}

TEST_CASE("resize_nearest preserves the source value set") {
    Tensor mask({1, 4, 4}, 0.0);
    mask.at(0, 1, 1) = 1.0;
    mask.at(0, 2, 2) = 1.0;
    const Tensor up = resize_nearest(mask, 9, 13);
    REQUIRE(up.height() == 13);
    REQUIRE(up.width() == 9);
    for (std::size_t i = 0; i < up.size(); ++i)
        REQUIRE((up[i] == 0.0 || up[i] == 1.0));

    // Identity scale is exact.
    const Tensor same = resize_nearest(mask, 4, 4);
    for (std::size_t i = 0; i < same.size(); ++i) REQUIRE(same[i] == mask[i]);
}
