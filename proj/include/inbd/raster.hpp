#ifndef INBD_RASTER_HPP
#define INBD_RASTER_HPP

#include <cstdint>
#include <vector>

#include "inbd/common.hpp"

namespace inbd {

// Planar multi-channel 2D raster, values typically in [0,1].
// Layout: data[c*H*W + y*W + x].
struct ImageRaster {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<real> data;

    ImageRaster() = default;
    ImageRaster(int c, int h, int w, real fill = 0)
        : channels(c), height(h), width(w), data(static_cast<size_t>(c) * h * w, fill) {}

    real& at(int c, int y, int x) { return data[(static_cast<size_t>(c) * height + y) * width + x]; }
    real at(int c, int y, int x) const { return data[(static_cast<size_t>(c) * height + y) * width + x]; }

    bool same_size(const ImageRaster& o) const { return height == o.height && width == o.width; }

    // Single channel as a view-by-copy.
    ImageRaster channel(int c) const {
        ImageRaster out(1, height, width);
        std::copy(data.begin() + static_cast<size_t>(c) * height * width,
                  data.begin() + static_cast<size_t>(c + 1) * height * width, out.data.begin());
        return out;
    }
};

// Integer instance label raster. 0 = background, k >= 1 = ring k in
// chronological order from the center outward.
struct InstanceLabelMap {
    int height = 0;
    int width = 0;
    std::vector<int32_t> labels;

    InstanceLabelMap() = default;
    InstanceLabelMap(int h, int w, int32_t fill = 0)
        : height(h), width(w), labels(static_cast<size_t>(h) * w, fill) {}

    int32_t& at(int y, int x) { return labels[static_cast<size_t>(y) * width + x]; }
    int32_t at(int y, int x) const { return labels[static_cast<size_t>(y) * width + x]; }

    int32_t max_label() const {
        int32_t m = 0;
        for (int32_t v : labels) m = std::max(m, v);
        return m;
    }
};

// Bilinear sample of one channel; out-of-bounds points take `fill`.
real sample_bilinear(const ImageRaster& r, int c, real x, real y, real fill = 0);

// Nearest-neighbor sample of a label map; out-of-bounds -> 0 (background).
int32_t sample_nearest(const InstanceLabelMap& m, real x, real y);

// Area-averaging (box) downsampling by 1/4. Output dims = ceil(dim/4).
// Throws TooSmall if either dimension < 8.
ImageRaster downscale4(const ImageRaster& img);

// Bilinear upsampling to an exact target size.
ImageRaster upsample_bilinear(const ImageRaster& img, int out_h, int out_w);

}  // namespace inbd

#endif
