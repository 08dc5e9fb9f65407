#include "inbd/polar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace inbd {

real RingBoundary::mean_radius() const {
    if (radii.empty()) return 0;
    return std::accumulate(radii.begin(), radii.end(), real(0)) / static_cast<real>(radii.size());
}

Point center_of_mass(const ImageRaster& mask, int channel, real threshold) {
    real sx = 0, sy = 0;
    long n = 0;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(channel, y, x) > threshold) {
                sx += x;
                sy += y;
                ++n;
            }
    if (n == 0) throw EmptyMask("center_of_mass: no positive pixels");
    return {sx / n, sy / n};
}

void bin_pixel_max_radius(std::vector<real>& max_r, const Point& origin, real x, real y) {
    const int n = static_cast<int>(max_r.size());
    const real dx = x - origin.x, dy = y - origin.y;
    const real r = std::hypot(dx, dy);
    real angle = std::atan2(dy, dx);
    if (angle < 0) angle += 2 * PI;
    const real half = std::atan2(real(0.71), std::max(r, real(0.71)));
    const int b0 = static_cast<int>(std::floor((angle - half) / (2 * PI) * n));
    const int b1 = static_cast<int>(std::floor((angle + half) / (2 * PI) * n));
    for (int b = b0; b <= b1; ++b) {
        const int bi = ((b % n) + n) % n;
        if (is_undefined(max_r[bi]) || r > max_r[bi]) max_r[bi] = r;
    }
}

int compute_angular_resolution(const RingBoundary& prev, real alpha) {
    if (prev.radii.empty()) throw ShapeMismatch("compute_angular_resolution: empty boundary");
    if (alpha <= 0) throw ConfigInvalid("compute_angular_resolution: alpha must be > 0");
    const int m = static_cast<int>(std::lround(alpha * prev.mean_radius()));
    return std::max(m, M_MIN);
}

real estimate_radial_extent(const ImageRaster& boundary_map, const Point& origin,
                            const RingBoundary& prev) {
    const int M = prev.size();
    const real max_r = std::hypot(static_cast<real>(boundary_map.width),
                                  static_cast<real>(boundary_map.height));
    auto positive = [&](real r, real cosv, real sinv) {
        const int x = static_cast<int>(std::lround(origin.x + r * cosv));
        const int y = static_cast<int>(std::lround(origin.y + r * sinv));
        if (x < 0 || x >= boundary_map.width || y < 0 || y >= boundary_map.height) return false;
        return boundary_map.at(0, y, x) > 0.5;
    };
    std::vector<real> distances;
    distances.reserve(M);
    for (int a = 0; a < M; ++a) {
        const real phi = 2 * PI * a / M;
        const real cosv = std::cos(phi), sinv = std::sin(phi);
        real r = prev.radii[a];
        // skip the positive run belonging to the previous boundary itself
        while (r <= max_r && positive(r, cosv, sinv)) r += 1.0;
        bool hit = false;
        for (; r <= max_r; r += 1.0)
            if (positive(r, cosv, sinv)) {
                hit = true;
                break;
            }
        if (hit) distances.push_back(r - prev.radii[a]);
    }
    if (distances.size() * 20 < static_cast<size_t>(M))  // < 5% of rays
        throw NoBoundaryAhead("estimate_radial_extent: boundary ahead on fewer than 5% of rays");
    // nearest-rank 95th percentile
    std::sort(distances.begin(), distances.end());
    const size_t rank = static_cast<size_t>(std::ceil(0.95 * distances.size()));
    return 1.5 * distances[rank - 1];
}

std::vector<real> resample_circular(const std::vector<real>& radii, int new_size) {
    const int M = static_cast<int>(radii.size());
    if (M == 0) throw ShapeMismatch("resample_circular: empty profile");
    if (M == new_size) return radii;
    std::vector<real> out(new_size);
    for (int a = 0; a < new_size; ++a) {
        const real pos = static_cast<real>(a) * M / new_size;
        const int i0 = static_cast<int>(std::floor(pos)) % M;
        const int i1 = (i0 + 1) % M;
        const real f = pos - std::floor(pos);
        out[a] = radii[i0] * (1 - f) + radii[i1] * f;
    }
    return out;
}

PolarGrid build_polar_grid(const Point& origin, const RingBoundary& prev, real extent, int n_radial,
                           int n_angular) {
    if (extent <= 0) throw ConfigInvalid("build_polar_grid: extent must be > 0");
    if (n_radial < 2 || n_angular < 1) throw ConfigInvalid("build_polar_grid: bad resolution");
    PolarGrid grid;
    grid.origin = origin;
    grid.n_radial = n_radial;
    grid.n_angular = n_angular;
    grid.angles.resize(n_angular);
    for (int a = 0; a < n_angular; ++a) grid.angles[a] = 2 * PI * a / n_angular;
    const std::vector<real> inner = resample_circular(prev.radii, n_angular);
    grid.radii.resize(static_cast<size_t>(n_radial) * n_angular);
    for (int r = 0; r < n_radial; ++r) {
        const real t = static_cast<real>(r) / (n_radial - 1);
        for (int a = 0; a < n_angular; ++a) grid.radius(r, a) = inner[a] + extent * t;
    }
    return grid;
}

Tensor sample_grid(const ImageRaster& raster, int channel, const PolarGrid& grid, SampleMode mode) {
    Tensor out({grid.n_radial, grid.n_angular});
    for (int r = 0; r < grid.n_radial; ++r)
        for (int a = 0; a < grid.n_angular; ++a) {
            const Point p = grid.position(r, a);
            if (mode == SampleMode::Bilinear) {
                out.at2(r, a) = sample_bilinear(raster, channel, p.x, p.y);
            } else {
                const int xi = static_cast<int>(std::lround(p.x));
                const int yi = static_cast<int>(std::lround(p.y));
                out.at2(r, a) = (xi < 0 || xi >= raster.width || yi < 0 || yi >= raster.height)
                                    ? 0
                                    : raster.at(channel, yi, xi);
            }
        }
    return out;
}

Tensor sample_grid_labels(const InstanceLabelMap& labels, const PolarGrid& grid) {
    Tensor out({grid.n_radial, grid.n_angular});
    for (int r = 0; r < grid.n_radial; ++r)
        for (int a = 0; a < grid.n_angular; ++a) {
            const Point p = grid.position(r, a);
            out.at2(r, a) = sample_nearest(labels, p.x, p.y);
        }
    return out;
}

std::vector<real> circular_interpolate(const std::vector<real>& values) {
    const int M = static_cast<int>(values.size());
    std::vector<int> defined;
    for (int i = 0; i < M; ++i)
        if (!is_undefined(values[i])) defined.push_back(i);
    if (defined.empty()) throw AllUndefined("circular_interpolate: no defined entries");
    if (static_cast<int>(defined.size()) == M) return values;
    std::vector<real> out = values;
    const int D = static_cast<int>(defined.size());
    for (int k = 0; k < D; ++k) {
        const int i0 = defined[k];
        const int i1 = defined[(k + 1) % D];
        const int gap = (i1 - i0 + M) % M;  // 0 only when D == 1
        const int span = gap == 0 ? M : gap;
        for (int s = 1; s < span; ++s) {
            const int idx = (i0 + s) % M;
            const real f = static_cast<real>(s) / span;
            out[idx] = values[i0] * (1 - f) + values[i1 % M] * f;
        }
    }
    return out;
}

namespace {
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

InstanceLabelMap rasterize_rings(const std::vector<RingBoundary>& boundaries, int height, int width) {
    InstanceLabelMap out(height, width);
    if (boundaries.empty()) return out;
    const Point origin = boundaries.front().origin;
    const int K = static_cast<int>(boundaries.size());
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const real dx = x - origin.x, dy = y - origin.y;
            const real r = std::hypot(dx, dy);
            real angle = std::atan2(dy, dx);
            if (angle < 0) angle += 2 * PI;
            real clamped = 0;  // cumulative max enforces non-decreasing radii across rings
            int32_t label = 0;
            for (int k = 0; k < K; ++k) {
                clamped = std::max(clamped, profile_at(boundaries[k].radii, angle));
                if (r <= clamped) {
                    label = static_cast<int32_t>(k + 1);
                    break;
                }
            }
            out.at(y, x) = label;
        }
    return out;
}

SampledPatch assemble_patch(const ImageRaster& rgb, const ImageRaster& y_bg, const ImageRaster& y_bd,
                            const PolarGrid& grid) {
    if (rgb.channels < 3) throw ShapeMismatch("assemble_patch: expects an RGB raster");
    const int N = grid.n_radial, M = grid.n_angular;
    SampledPatch patch;
    patch.channels = Tensor({PATCH_CHANNELS, N, M});
    const real diag = std::hypot(static_cast<real>(rgb.width), static_cast<real>(rgb.height));
    for (int c = 0; c < 3; ++c) {
        Tensor t = sample_grid(rgb, c, grid, SampleMode::Bilinear);
        std::copy(t.v.begin(), t.v.end(), patch.channels.v.begin() + static_cast<size_t>(c) * N * M);
    }
    Tensor bg = sample_grid(y_bg, 0, grid, SampleMode::Bilinear);
    Tensor bd = sample_grid(y_bd, 0, grid, SampleMode::Bilinear);
    std::copy(bg.v.begin(), bg.v.end(), patch.channels.v.begin() + static_cast<size_t>(3) * N * M);
    std::copy(bd.v.begin(), bd.v.end(), patch.channels.v.begin() + static_cast<size_t>(4) * N * M);
    for (int r = 0; r < N; ++r)
        for (int a = 0; a < M; ++a) patch.channels.at3(5, r, a) = grid.radius(r, a) / diag;
    // channel 6 (omega) stays 0; it is produced inside the network forward.
    return patch;
}

}  // namespace inbd
