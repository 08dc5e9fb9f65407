#include <doctest.h>

#include <cmath>

#include "inbd/segmentation.hpp"

using namespace inbd;

TEST_CASE("make_seg_targets on a hand-built label map") {
    // 1 1 2 2
    // 1 1 2 2
    // 0 0 2 2
    InstanceLabelMap labels(3, 4);
    labels.labels = {1, 1, 2, 2, 1, 1, 2, 2, 0, 0, 2, 2};
    const SegTargets t = make_seg_targets(labels);

    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x) {
            CHECK(t.background.at(0, y, x) == (labels.at(y, x) == 0 ? 1.0 : 0.0));
            CHECK(t.center.at(0, y, x) == (labels.at(y, x) == 1 ? 1.0 : 0.0));
        }
    // every foreground pixel here touches a different label (1|2 and 2|0
    // edges), so after dilation the whole foreground is boundary
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x)
            if (labels.at(y, x) != 0) CHECK(t.boundaries.at(0, y, x) == 1.0);
    // background never carries boundary
    CHECK(t.boundaries.at(0, 2, 0) == 0.0);
}

TEST_CASE("interior pixels away from any edge are not boundary") {
    const int S = 16;
    InstanceLabelMap labels(S, S);
    for (auto& v : labels.labels) v = 1;  // one big instance, no adjacency
    const SegTargets t = make_seg_targets(labels);
    for (int y = 2; y < S - 2; ++y)
        for (int x = 2; x < S - 2; ++x) CHECK(t.boundaries.at(0, y, x) == 0.0);
}

TEST_CASE("dice_loss on known values") {
    ImageRaster pred(1, 1, 4), target(1, 1, 4);
    pred.data = {1, 1, 0, 0};
    target.data = {1, 1, 0, 0};
    CHECK(dice_loss(pred, target) == doctest::Approx(1.0 - 4.0 / (4.0 + 1e-6)).epsilon(1e-9));

    target.data = {0, 0, 1, 1};
    CHECK(dice_loss(pred, target) == doctest::Approx(1.0).epsilon(1e-9));

    ImageRaster other(1, 2, 2);
    CHECK_THROWS_AS(dice_loss(pred, ImageRaster(1, 1, 3)), ShapeMismatch);
}

TEST_CASE("gaussian_blur preserves a constant image and the mass of a spike") {
    ImageRaster flat(1, 9, 9);
    for (real& v : flat.data) v = 0.4;
    const ImageRaster out = gaussian_blur(flat, 1.2);
    for (real v : out.data) CHECK(v == doctest::Approx(0.4).epsilon(1e-9));

    ImageRaster spike(1, 21, 21);
    spike.at(0, 10, 10) = 1.0;
    const ImageRaster b = gaussian_blur(spike, 1.0);
    real mass = 0;
    for (real v : b.data) mass += v;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(b.at(0, 10, 10) < 1.0);
    CHECK(b.at(0, 10, 10) > b.at(0, 10, 12));
}
