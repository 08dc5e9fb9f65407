#include "inbd/inference.hpp"

#include <algorithm>
#include <cmath>

namespace inbd {

const char* stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::BackgroundReached: return "BackgroundReached";
        case StopReason::NoBoundaryAhead: return "NoBoundaryAhead";
        case StopReason::MaxIterations: return "MaxIterations";
    }
    return "?";
}

ExtractedBoundary extract_next_boundary(const Tensor& logits, const PolarGrid& grid) {
    if (logits.shape.size() != 3 || logits.shape[0] != 2 || logits.shape[1] != grid.n_radial ||
        logits.shape[2] != grid.n_angular)
        throw ShapeMismatch("extract_next_boundary: logits do not match grid");
    const int N = grid.n_radial, M = grid.n_angular;
    ExtractedBoundary out;
    out.radii.assign(M, undefined_value());
    out.clamped.assign(M, false);
    for (int a = 0; a < M; ++a) {
        int max_pos = -1;       // max of x~ (positive rows)
        int min_neg = N;        // min of the complement
        for (int r = 0; r < N; ++r) {
            const bool positive = logits.at3(1, r, a) > logits.at3(0, r, a);
            if (positive)
                max_pos = r;
            else
                min_neg = std::min(min_neg, r);
        }
        if (max_pos < 0) continue;  // no positives: undefined
        if (min_neg == N) {         // all positive: clamp to the outermost radius
            out.radii[a] = grid.radius(N - 1, a);
            out.clamped[a] = true;
            ++out.defined_count;
        } else if (max_pos == min_neg - 1) {  // contiguous prefix from row 0
            out.radii[a] = grid.radius(max_pos, a);
            ++out.defined_count;
        }
    }
    return out;
}

Tensor OracleNextRing::logits(const SampledPatch&, const PolarGrid& grid, int ring_index) const {
    Tensor sampled = sample_grid_labels(labels_, grid);
    Tensor out({2, grid.n_radial, grid.n_angular});
    for (int r = 0; r < grid.n_radial; ++r)
        for (int a = 0; a < grid.n_angular; ++a) {
            const bool next = static_cast<int>(sampled.at2(r, a)) == ring_index + 1;
            out.at3(1, r, a) = next ? 10.0 : -10.0;
        }
    return out;
}

Tensor ModelNextRing::logits(const SampledPatch& patch, const PolarGrid&, int) const {
    Graph g;
    Var in = g.leaf(patch.channels, false);
    INBDForward fwd = INBDNet::forward(g, in, *params_, /*beta=*/0.0);
    return fwd.logits->value;
}

SegMaps NetClassifier::classify(const ImageRaster& image) const {
    const ImageRaster small = downscale4(image);
    Graph g;
    Tensor input({3, small.height, small.width});
    input.v = small.data;
    Var logits = SegNet::forward(g, g.leaf(std::move(input), false), *params_);
    const int H = small.height, W = small.width;
    SegMaps maps{ImageRaster(1, H, W), ImageRaster(1, H, W), ImageRaster(1, H, W)};
    ImageRaster* out[3] = {&maps.y_bg, &maps.y_bd, &maps.y_ct};
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x)
                out[c]->at(0, y, x) = 1.0 / (1.0 + std::exp(-logits->value.at3(c, y, x)));
    // the center seed needs a binary mask. The targets are multi-label (the
    // center region includes its own boundary band), so plain channel argmax
    // systematically cedes the outer center annulus to the boundary channel
    // and the seed undershoots; an absolute 0.5 cut alone is brittle for a
    // rare class. Take the union of both.
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const real ct = logits->value.at3(2, y, x);
            const bool argmax_ct =
                ct > logits->value.at3(0, y, x) && ct > logits->value.at3(1, y, x);
            maps.y_ct.at(0, y, x) = (argmax_ct || ct > 0.0) ? 1.0 : 0.0;
        }
    // morphological opening: the seed boundary takes per-angle maxima, so a
    // single spilled pixel would inflate it
    {
        ImageRaster eroded(1, H, W);
        auto morph = [&](const ImageRaster& in, ImageRaster& out, bool erode) {
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) {
                    real v = erode ? 1.0 : 0.0;
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            const int ny = y + dy, nx = x + dx;
                            const real n = (ny >= 0 && ny < H && nx >= 0 && nx < W)
                                               ? in.at(0, ny, nx)
                                               : 0.0;
                            v = erode ? std::min(v, n) : std::max(v, n);
                        }
                    out.at(0, y, x) = v;
                }
        };
        morph(maps.y_ct, eroded, true);
        morph(eroded, maps.y_ct, false);
    }
    maps.y_bg = upsample_bilinear(maps.y_bg, image.height, image.width);
    maps.y_bd = upsample_bilinear(maps.y_bd, image.height, image.width);
    maps.y_ct = upsample_bilinear(maps.y_ct, image.height, image.width);
    return maps;
}

RingBoundary center_ring_boundary(const ImageRaster& y_ct, const Point& origin, int n_angles) {
    std::vector<real> max_r(n_angles, undefined_value());
    long positives = 0;
    for (int y = 0; y < y_ct.height; ++y)
        for (int x = 0; x < y_ct.width; ++x) {
            if (y_ct.at(0, y, x) <= 0.5) continue;
            ++positives;
            bin_pixel_max_radius(max_r, origin, x, y);
        }
    if (positives == 0) throw EmptyMask("center_ring_boundary: center mask is empty");
    RingBoundary b;
    b.radii = circular_interpolate(max_r);
    for (real& v : b.radii) v = std::max(v, real(1));
    b.origin = origin;
    b.ring_index = 1;
    return b;
}

RingBoundary next_ring_step(const ImageRaster& image, const SegMaps& maps,
                            const RingBoundary& prev_boundary, const NextRingSource& source,
                            const InferenceOptions& opts) {
    const int M = std::max(compute_angular_resolution(prev_boundary, opts.alpha), opts.m_min);
    RingBoundary prev = prev_boundary;
    prev.radii = resample_circular(prev_boundary.radii, M);
    for (real& v : prev.radii) v += GRID_INNER_OFFSET;

    const real extent = estimate_radial_extent(maps.y_bd, prev.origin, prev);  // may throw
    const PolarGrid grid = build_polar_grid(prev.origin, prev, extent, opts.n_radial, M);
    const SampledPatch patch = assemble_patch(image, maps.y_bg, maps.y_bd, grid);
    const Tensor logits = source.logits(patch, grid, prev.ring_index);

    RingBoundary next;
    next.origin = prev.origin;
    next.ring_index = prev.ring_index + 1;
    const ExtractedBoundary ext = extract_next_boundary(logits, grid);
    if (ext.defined_count == 0) {
        next.radii = prev.radii;
        for (real& v : next.radii) v += 1.0;
        next.low_confidence = true;
    } else {
        next.radii = circular_interpolate(ext.radii);
    }
    // monotonicity clamp; zero-width supports wedging rings
    for (int a = 0; a < M; ++a) next.radii[a] = std::max(next.radii[a], prev.radii[a]);
    return next;
}

namespace {
real median_bg_on_boundary(const ImageRaster& y_bg, const RingBoundary& b) {
    std::vector<real> vals(b.radii.size());
    const int M = b.size();
    for (int a = 0; a < M; ++a) {
        const real phi = 2 * PI * a / M;
        vals[a] = sample_bilinear(y_bg, 0, b.origin.x + b.radii[a] * std::cos(phi),
                                  b.origin.y + b.radii[a] * std::sin(phi), /*fill=*/1.0);
    }
    std::nth_element(vals.begin(), vals.begin() + M / 2, vals.end());
    return vals[M / 2];
}
}  // namespace

DetectionResult detect_rings(const ImageRaster& image, const PixelClassifier& classifier,
                             const NextRingSource& source, const InferenceOptions& opts) {
    const SegMaps maps = classifier.classify(image);
    const Point origin = center_of_mass(maps.y_ct);  // EmptyMask propagates

    DetectionResult res;
    res.boundaries.push_back(center_ring_boundary(maps.y_ct, origin));
    res.stop_reason = StopReason::MaxIterations;
    for (res.iterations = 1; res.iterations < opts.max_iters; ++res.iterations) {
        RingBoundary next;
        try {
            next = next_ring_step(image, maps, res.boundaries.back(), source, opts);
        } catch (const NoBoundaryAhead&) {
            res.stop_reason = StopReason::NoBoundaryAhead;
            break;
        }
        if (median_bg_on_boundary(maps.y_bg, next) > 0.5) {
            res.stop_reason = StopReason::BackgroundReached;
            break;
        }
        res.boundaries.push_back(std::move(next));
    }
    res.label_map = rasterize_rings(res.boundaries, image.height, image.width);
    return res;
}

}  // namespace inbd
