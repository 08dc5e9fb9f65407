#ifndef INBD_POLAR_HPP
#define INBD_POLAR_HPP

#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "inbd/autodiff.hpp"
#include "inbd/common.hpp"
#include "inbd/raster.hpp"

namespace inbd {

struct Point {
    real x = 0;
    real y = 0;
};

// Per-angle boundary radii of one ring.
struct RingBoundary {
    std::vector<real> radii;  // length M, pixels
    Point origin;
    int ring_index = 0;
    bool low_confidence = false;

    int size() const { return static_cast<int>(radii.size()); }
    real mean_radius() const;
};

// Polar sampling lattice: N radial x M angular cells around `origin`.
// radii[r][a] is column-wise non-decreasing in r; angles[a] = 2*pi*a/M.
struct PolarGrid {
    Point origin;
    int n_radial = 0;   // N
    int n_angular = 0;  // M
    std::vector<real> radii;   // N*M, row-major [r*M + a]
    std::vector<real> angles;  // M

    real radius(int r, int a) const { return radii[static_cast<size_t>(r) * n_angular + a]; }
    real& radius(int r, int a) { return radii[static_cast<size_t>(r) * n_angular + a]; }
    // cartesian position of cell (r,a)
    Point position(int r, int a) const {
        const real rho = radius(r, a);
        return {origin.x + rho * std::cos(angles[a]), origin.y + rho * std::sin(angles[a])};
    }
};

// 7-channel polar patch: [R, G, B, y_bg, y_bd, rho_normalized, omega].
struct SampledPatch {
    Tensor channels;  // [7, N, M]
};
inline constexpr int PATCH_CHANNELS = 7;

// Offset added to the previous boundary when building the sampling grid, so
// that row 0 lands inside the next ring rather than on the boundary pixels
// of the previous one (nearest-sampled labels there belong to the previous
// ring and would make every column's positive prefix start late).
inline constexpr real GRID_INNER_OFFSET = 1.0;

// Record a pixel's radius into per-angle max bins, spreading it over the
// angular footprint the pixel covers (half-diagonal 0.71 px). Without the
// spread, bins finer than the rim pixel spacing dip to interior pixels.
void bin_pixel_max_radius(std::vector<real>& max_r, const Point& origin, real x, real y);

// Mean coordinate of positive pixels. Throws EmptyMask.
Point center_of_mass(const ImageRaster& mask, int channel = 0, real threshold = 0.5);

// Eq.-style angular resolution: round(alpha * mean radius), clamped to M_MIN.
int compute_angular_resolution(const RingBoundary& prev, real alpha);

// Distance from the previous boundary outward to the nearest positive pixel
// of the (binarized) boundary map, per angle; returns 1.5 x nearest-rank
// 95th percentile of the defined distances. Throws NoBoundaryAhead when
// fewer than 5% of the rays hit a positive pixel.
real estimate_radial_extent(const ImageRaster& boundary_map, const Point& origin,
                            const RingBoundary& prev);

// Resample a closed per-angle radius profile to a new length by circular
// linear interpolation of the radii.
std::vector<real> resample_circular(const std::vector<real>& radii, int new_size);

// Build the grid: radii[0][a] = prev radii (resampled to M), radii[N-1][a] =
// prev + extent, uniformly spaced inbetween.
PolarGrid build_polar_grid(const Point& origin, const RingBoundary& prev, real extent, int n_radial,
                           int n_angular);

enum class SampleMode { Bilinear, Nearest };

// Sample one raster channel on the grid. Out-of-bounds points take 0.
Tensor sample_grid(const ImageRaster& raster, int channel, const PolarGrid& grid, SampleMode mode);
// Nearest-mode sampling of an integer label map (labels stay integral).
Tensor sample_grid_labels(const InstanceLabelMap& labels, const PolarGrid& grid);

// Fill undefined entries (NaN) by linear interpolation between the nearest
// defined neighbors in circular index distance. Throws AllUndefined.
std::vector<real> circular_interpolate(const std::vector<real>& values);

// Rasterize an ordered boundary list into a chronological label map.
// Ring radii are clamped to be non-decreasing across rings; zero-width rings
// are absent at the affected angles.
InstanceLabelMap rasterize_rings(const std::vector<RingBoundary>& boundaries, int height, int width);

// Assemble the 7-channel patch (omega channel initialized to 0).
SampledPatch assemble_patch(const ImageRaster& rgb, const ImageRaster& y_bg, const ImageRaster& y_bd,
                            const PolarGrid& grid);

inline real undefined_value() { return std::numeric_limits<real>::quiet_NaN(); }
inline bool is_undefined(real v) { return std::isnan(v); }

}  // namespace inbd

#endif
