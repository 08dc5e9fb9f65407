#include "inbd/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace inbd {

void SynthConfig::validate() const {
    if (image_size < 32) throw ConfigInvalid("synth: image_size must be >= 32");
    if (n_rings < 1) throw ConfigInvalid("synth: n_rings must be >= 1");
    if (mean_ring_width <= 0) throw ConfigInvalid("synth: mean_ring_width must be > 0");
    if (width_jitter < 0 || width_jitter >= 1) throw ConfigInvalid("synth: width_jitter in [0,1)");
    if (wedging_prob < 0 || wedging_prob > 1) throw ConfigInvalid("synth: wedging_prob in [0,1]");
    if (wedge_arc_min <= 0 || wedge_arc_max < wedge_arc_min || wedge_arc_max > 2 * PI)
        throw ConfigInvalid("synth: bad wedge arc range");
    if (boundary_contrast < 0 || boundary_contrast > 1)
        throw ConfigInvalid("synth: boundary_contrast in [0,1]");
    if (noise_sigma < 0 || texture < 0) throw ConfigInvalid("synth: negative noise amplitude");
}

namespace {

constexpr int PROFILE_RES = 720;

// smooth periodic perturbation, a few low harmonics
std::vector<real> harmonic_profile(std::mt19937_64& rng, real amplitude) {
    std::uniform_real_distribution<real> uphase(0, 2 * PI);
    std::uniform_real_distribution<real> uamp(0.3, 1.0);
    std::vector<real> out(PROFILE_RES, 0);
    for (int h = 1; h <= 4; ++h) {
        const real a = amplitude * uamp(rng) / h;
        const real phase = uphase(rng);
        for (int i = 0; i < PROFILE_RES; ++i)
            out[i] += a * std::cos(h * (2 * PI * i / PROFILE_RES) + phase);
    }
    return out;
}

real circ_dist(real a, real b) {
    real d = std::fmod(std::abs(a - b), 2 * PI);
    return std::min(d, 2 * PI - d);
}

// taper factor over a wedge arc: smooth pinch reaching 0 at the arc center
real wedge_factor(real angle, real center, real arc) {
    const real d = circ_dist(angle, center);
    if (d >= arc / 2) return 1.0;
    return 0.5 - 0.5 * std::cos(PI * d / (arc / 2));
}

real profile_at(const std::vector<real>& radii, real angle) {
    const int M = static_cast<int>(radii.size());
    real pos = angle / (2 * PI) * M;
    pos = std::fmod(pos, static_cast<real>(M));
    if (pos < 0) pos += M;
    const int i0 = static_cast<int>(std::floor(pos)) % M;
    const int i1 = (i0 + 1) % M;
    const real f = pos - std::floor(pos);
    return radii[i0] * (1 - f) + radii[i1] * f;
}

}  // namespace

SynthSample generate_sample(const SynthConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<real> u01(0, 1);
    std::uniform_real_distribution<real> u11(-1, 1);
    std::normal_distribution<real> gauss(0, 1);

    const int S = config.image_size;
    const Point origin{S / 2.0 + u11(rng) * 0.03 * S, S / 2.0 + u11(rng) * 0.03 * S};

    // per-ring outer radius profiles, built outward
    std::vector<std::vector<real>> profiles;
    std::vector<real> prev(PROFILE_RES, 0);
    for (int k = 0; k < config.n_rings; ++k) {
        const real base = config.mean_ring_width * (1.0 + config.width_jitter * u11(rng));
        std::vector<real> pert = harmonic_profile(rng, 0.25);
        std::vector<real> width(PROFILE_RES);
        for (int i = 0; i < PROFILE_RES; ++i) width[i] = std::max(base * (1.0 + pert[i]), real(0.5));
        if (k > 0 && u01(rng) < config.wedging_prob) {
            std::uniform_real_distribution<real> uarc(config.wedge_arc_min, config.wedge_arc_max);
            const int n_arcs = u01(rng) < 0.3 ? 2 : 1;  // 2 arcs emulate disconnected rings
            for (int w = 0; w < n_arcs; ++w) {
                const real arc = uarc(rng);
                const real center = u01(rng) * 2 * PI;
                for (int i = 0; i < PROFILE_RES; ++i)
                    width[i] *= wedge_factor(2 * PI * i / PROFILE_RES, center, arc);
            }
        }
        std::vector<real> outer(PROFILE_RES);
        for (int i = 0; i < PROFILE_RES; ++i) outer[i] = prev[i] + width[i];
        profiles.push_back(outer);
        prev = std::move(outer);
    }

    // scale so the section fits inside the image
    real max_r = 0;
    for (real v : profiles.back()) max_r = std::max(max_r, v);
    const real scale = std::min(real(1), 0.45 * S / max_r);
    if (scale < 1)
        for (auto& p : profiles)
            for (real& v : p) v *= scale;

    SynthSample sample;
    sample.boundaries.reserve(profiles.size());
    for (size_t k = 0; k < profiles.size(); ++k) {
        RingBoundary b;
        b.radii = profiles[k];
        b.origin = origin;
        b.ring_index = static_cast<int>(k + 1);
        sample.boundaries.push_back(std::move(b));
    }
    sample.labels = rasterize_rings(sample.boundaries, S, S);

    // per-ring base colors around a wood palette
    std::vector<std::array<real, 3>> colors(config.n_rings + 1);
    colors[0] = {0.93, 0.91, 0.87};  // background
    for (int k = 1; k <= config.n_rings; ++k)
        colors[k] = {0.76 + 0.06 * u11(rng), 0.60 + 0.06 * u11(rng), 0.44 + 0.06 * u11(rng)};
    // pith: the center ring is visibly darker, as in real cross-sections
    colors[1] = {0.50 + 0.04 * u11(rng), 0.37 + 0.04 * u11(rng), 0.27 + 0.04 * u11(rng)};

    // cell-like speckle: value noise on a coarse lattice
    const int cell = 4;
    const int gh = S / cell + 2, gw = S / cell + 2;
    std::vector<real> lattice(static_cast<size_t>(gh) * gw);
    for (real& v : lattice) v = u01(rng);
    auto speckle = [&](real x, real y) {
        const real gx = x / cell, gy = y / cell;
        const int x0 = static_cast<int>(gx), y0 = static_cast<int>(gy);
        const real fx = gx - x0, fy = gy - y0;
        auto l = [&](int xi, int yi) { return lattice[static_cast<size_t>(yi) * gw + xi]; };
        return l(x0, y0) * (1 - fx) * (1 - fy) + l(x0 + 1, y0) * fx * (1 - fy) +
               l(x0, y0 + 1) * (1 - fx) * fy + l(x0 + 1, y0 + 1) * fx * fy;
    };

    sample.image = ImageRaster(3, S, S);
    for (int y = 0; y < S; ++y)
        for (int x = 0; x < S; ++x) {
            const int32_t label = sample.labels.at(y, x);
            std::array<real, 3> col = colors[std::min<int32_t>(label, config.n_rings)];
            const real dx = x - origin.x, dy = y - origin.y;
            const real r = std::hypot(dx, dy);
            real angle = std::atan2(dy, dx);
            if (angle < 0) angle += 2 * PI;
            if (label > 0) {
                // within-ring shading towards the late-wood side
                const real inner = label > 1 ? profile_at(profiles[label - 2], angle) : 0;
                const real outer = profile_at(profiles[label - 1], angle);
                const real t = outer > inner ? std::clamp((r - inner) / (outer - inner), real(0), real(1))
                                             : real(0);
                for (real& c : col) c *= 1.0 - 0.18 * t;
            }
            // dark boundary curves
            real bdist = std::numeric_limits<real>::max();
            for (const auto& p : profiles) bdist = std::min(bdist, std::abs(r - profile_at(p, angle)));
            if (bdist < 1.25)
                for (real& c : col) c *= 1.0 - config.boundary_contrast * (1.0 - bdist / 1.25);
            const real sp = 1.0 + config.texture * (speckle(x, y) - 0.5);
            for (int c = 0; c < 3; ++c)
                sample.image.at(c, y, x) = std::clamp(col[c] * sp + config.noise_sigma * gauss(rng),
                                                      real(0), real(1));
        }
    return sample;
}

SegMaps oracle_seg_maps(const InstanceLabelMap& labels, const OracleCorruption& corruption) {
    if (corruption.flip_prob < 0 || corruption.blur_sigma < 0)
        throw ConfigInvalid("oracle_seg_maps: corruption parameters must be >= 0");
    const SegTargets t = make_seg_targets(labels);
    SegMaps maps{t.background, t.boundaries, t.center};
    if (corruption.blur_sigma > 0) {
        maps.y_bg = gaussian_blur(maps.y_bg, corruption.blur_sigma);
        maps.y_bd = gaussian_blur(maps.y_bd, corruption.blur_sigma);
        maps.y_ct = gaussian_blur(maps.y_ct, corruption.blur_sigma);
    }
    if (corruption.flip_prob > 0) {
        std::mt19937_64 rng(corruption.seed);
        std::uniform_real_distribution<real> u01(0, 1);
        for (ImageRaster* m : {&maps.y_bg, &maps.y_bd, &maps.y_ct})
            for (real& v : m->data)
                if (u01(rng) < corruption.flip_prob) v = 1.0 - v;
    }
    return maps;
}

}  // namespace inbd
