#include <doctest.h>

#include <cmath>

#include "inbd/synth.hpp"

using namespace inbd;

TEST_CASE("generate_sample is deterministic per seed and differs across seeds") {
    SynthConfig cfg;
    cfg.image_size = 128;
    cfg.n_rings = 4;
    cfg.mean_ring_width = 12;
    cfg.seed = 77;
    const SynthSample a = generate_sample(cfg);
    const SynthSample b = generate_sample(cfg);
    CHECK(a.image.data == b.image.data);
    CHECK(a.labels.labels == b.labels.labels);

    cfg.seed = 78;
    const SynthSample c = generate_sample(cfg);
    CHECK(a.image.data != c.image.data);
}

TEST_CASE("generated labels are chronological and consistent with the boundaries") {
    SynthConfig cfg;
    cfg.image_size = 160;
    cfg.n_rings = 5;
    cfg.mean_ring_width = 13;
    cfg.seed = 5;
    const SynthSample s = generate_sample(cfg);
    CHECK(s.labels.max_label() == 5);
    REQUIRE(s.boundaries.size() == 5);
    for (int k = 0; k < 5; ++k) CHECK(s.boundaries[k].ring_index == k + 1);

    const InstanceLabelMap re = rasterize_rings(s.boundaries, 160, 160);
    CHECK(re.labels == s.labels.labels);

    // pixel values stay in [0,1]
    for (real v : s.image.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    // center pixel belongs to ring 1
    const Point o = s.boundaries.front().origin;
    CHECK(s.labels.at(static_cast<int>(o.y), static_cast<int>(o.x)) == 1);
}

TEST_CASE("wedging produces zero-width arcs for some seed") {
    SynthConfig cfg;
    cfg.image_size = 160;
    cfg.n_rings = 6;
    cfg.mean_ring_width = 11;
    cfg.wedging_prob = 1.0;  // force wedges
    bool found_wedge = false;
    for (uint64_t seed = 0; seed < 10 && !found_wedge; ++seed) {
        cfg.seed = seed;
        const SynthSample s = generate_sample(cfg);
        for (size_t k = 1; k < s.boundaries.size(); ++k) {
            const auto& outer = s.boundaries[k].radii;
            const auto inner = resample_circular(s.boundaries[k - 1].radii,
                                                 static_cast<int>(outer.size()));
            for (size_t a = 0; a < outer.size(); ++a)
                if (outer[a] <= inner[a] + 0.5) found_wedge = true;
        }
    }
    CHECK(found_wedge);
}

TEST_CASE("SynthConfig validation") {
    SynthConfig cfg;
    cfg.validate();
    cfg.n_rings = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigInvalid);
    cfg = SynthConfig{};
    cfg.wedging_prob = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigInvalid);
    cfg = SynthConfig{};
    cfg.image_size = 16;
    CHECK_THROWS_AS(cfg.validate(), ConfigInvalid);
}

TEST_CASE("oracle_seg_maps: exact partition and corruption knobs") {
    SynthConfig cfg;
    cfg.image_size = 96;
    cfg.n_rings = 3;
    cfg.mean_ring_width = 10;
    cfg.seed = 2;
    const SynthSample s = generate_sample(cfg);

    const SegMaps maps = oracle_seg_maps(s.labels);
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x) {
            CHECK(maps.y_bg.at(0, y, x) == (s.labels.at(y, x) == 0 ? 1.0 : 0.0));
            CHECK(maps.y_ct.at(0, y, x) == (s.labels.at(y, x) == 1 ? 1.0 : 0.0));
        }
    // boundary map is nonempty and only on foreground
    real bd_sum = 0;
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x) {
            bd_sum += maps.y_bd.at(0, y, x);
            if (maps.y_bd.at(0, y, x) > 0.5) CHECK(s.labels.at(y, x) != 0);
        }
    CHECK(bd_sum > 0);

    OracleCorruption corr;
    corr.blur_sigma = 1.0;
    const SegMaps blurred = oracle_seg_maps(s.labels, corr);
    CHECK(blurred.y_bg.data != maps.y_bg.data);

    corr = {};
    corr.flip_prob = -0.1;
    CHECK_THROWS_AS(oracle_seg_maps(s.labels, corr), ConfigInvalid);
}
