#include <doctest.h>

#include <cmath>
#include <random>

#include "inbd/training.hpp"

using namespace inbd;

TEST_CASE("augment_boundary with gamma = 0 is the identity") {
    std::mt19937_64 rng(1);
    std::vector<real> radii = {10, 20, 30, 25, 15};
    const auto out = augment_boundary(radii, 0, 0, rng);
    for (size_t i = 0; i < radii.size(); ++i) CHECK(out[i] == doctest::Approx(radii[i]));
}

TEST_CASE("augment_boundary matches the analytic formula given a cloned rng") {
    std::mt19937_64 rng(123), clone(123);
    std::uniform_real_distribution<real> u11(-1, 1);
    const real x0 = u11(clone), x1 = u11(clone);

    std::vector<real> radii(16);
    for (size_t i = 0; i < radii.size(); ++i) radii[i] = 20.0 + i;
    const real g0 = 4.0, g1 = 4.0;
    const auto out = augment_boundary(radii, g0, g1, rng);
    const int M = 16;
    for (int a = 0; a < M; ++a) {
        const real phi = 2 * PI * a / M;
        const real want = std::max(radii[a] + std::cos(phi + x0) * g0 + x1 * g1, real(1));
        CHECK(out[a] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("augment_boundary clamps to 1 px") {
    std::mt19937_64 rng(5);
    const auto out = augment_boundary(std::vector<real>(8, 0.5), 4, 4, rng);
    for (real v : out) CHECK(v >= 1.0);
}

TEST_CASE("cosine schedule endpoints and midpoint") {
    CHECK(cosine_lr(1e-3, 0, 100) == doctest::Approx(1e-3));
    CHECK(cosine_lr(1e-3, 50, 100) == doctest::Approx(0.5e-3));
    CHECK(cosine_lr(1e-3, 100, 100) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(cosine_lr(2.0, 25, 100) == doctest::Approx(2.0 * 0.5 * (1 + std::cos(PI * 0.25))));
}

TEST_CASE("AdamW single step matches the closed form") {
    ModelParams params;
    Tensor t({2});
    t.v = {1.0, -2.0};
    Param& p = params.add("w", t);
    p.grad.v = {0.5, -0.25};

    const real lr = 1e-2, wd = 1e-2, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    AdamW opt(wd, b1, b2, eps);
    opt.step(params, lr);

    for (int i = 0; i < 2; ++i) {
        const real g = i == 0 ? 0.5 : -0.25;
        const real x = i == 0 ? 1.0 : -2.0;
        const real m = (1 - b1) * g, v = (1 - b2) * g * g;
        const real mhat = m / (1 - b1), vhat = v / (1 - b2);
        const real want = x - lr * (mhat / (std::sqrt(vhat) + eps) + wd * x);
        CHECK(params.get("w").value.v[i] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("AdamW rejects non-finite gradients and names the parameter") {
    ModelParams params;
    Param& p = params.add("f.enc1.w", Tensor({1}, 0.0));
    p.grad.v[0] = std::numeric_limits<real>::quiet_NaN();
    AdamW opt;
    try {
        opt.step(params, 1e-3);
        FAIL("expected NonFiniteGradient");
    } catch (const NonFiniteGradient& e) {
        CHECK(std::string(e.what()).find("f.enc1.w") != std::string::npos);
    }
}

TEST_CASE("color_jitter stays in [0,1] and matches the affine formula") {
    std::mt19937_64 rng(9), clone(9);
    std::uniform_real_distribution<real> u(0.8, 1.2);
    const real brightness = u(clone), contrast = u(clone);

    ImageRaster img(3, 4, 4);
    std::mt19937_64 rng2(10);
    std::uniform_real_distribution<real> u01(0, 1);
    for (real& v : img.data) v = u01(rng2);
    const ImageRaster out = color_jitter(img, rng);
    for (size_t i = 0; i < img.data.size(); ++i) {
        const real want = std::clamp(((img.data[i] - 0.5) * contrast + 0.5) * brightness, real(0), real(1));
        CHECK(out.data[i] == doctest::Approx(want).epsilon(1e-12));
        CHECK(out.data[i] >= 0.0);
        CHECK(out.data[i] <= 1.0);
    }
}

TEST_CASE("boundary_from_annotation recovers a known disk radius") {
    const int S = 100;
    InstanceLabelMap labels(S, S);
    const real cx = 50, cy = 50;
    for (int y = 0; y < S; ++y)
        for (int x = 0; x < S; ++x) {
            const real r = std::hypot(x - cx, y - cy);
            if (r <= 12.0)
                labels.at(y, x) = 1;
            else if (r <= 25.0)
                labels.at(y, x) = 2;
        }
    const RingBoundary b1 = boundary_from_annotation(labels, 1);
    CHECK(b1.ring_index == 1);
    CHECK(std::abs(b1.origin.x - cx) < 1.0);
    CHECK(std::abs(b1.origin.y - cy) < 1.0);
    for (real r : b1.radii) CHECK(std::abs(r - 12.0) <= 1.2);
    const RingBoundary b2 = boundary_from_annotation(labels, 2);
    for (real r : b2.radii) CHECK(std::abs(r - 25.0) <= 1.2);

    InstanceLabelMap empty(8, 8);
    CHECK_THROWS_AS(boundary_from_annotation(empty, 1), EmptyMask);
}

TEST_CASE("enumerate_items yields every (image, ring) pair") {
    std::vector<TrainImage> images(2);
    images[0].gt_boundaries.resize(3);
    images[1].gt_boundaries.resize(2);
    const auto items = enumerate_items(images);
    REQUIRE(items.size() == 5);
    CHECK(items[0].image_index == 0);
    CHECK(items[0].ring_index == 1);
    CHECK(items[2].ring_index == 3);
    CHECK(items[3].image_index == 1);
}

TEST_CASE("TrainConfig validation") {
    TrainConfig c;
    c.validate();
    c.n_radial = 30;
    CHECK_THROWS_AS(c.validate(), ConfigInvalid);
    c.n_radial = 64;
    c.epochs = 0;
    CHECK_THROWS_AS(c.validate(), ConfigInvalid);
}
