#include "inbd/raster.hpp"

#include <algorithm>
#include <cmath>

namespace inbd {

real sample_bilinear(const ImageRaster& r, int c, real x, real y, real fill) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const real fx = x - x0, fy = y - y0;
    auto px = [&](int xi, int yi) -> real {
        if (xi < 0 || xi >= r.width || yi < 0 || yi >= r.height) return fill;
        return r.at(c, yi, xi);
    };
    return px(x0, y0) * (1 - fx) * (1 - fy) + px(x0 + 1, y0) * fx * (1 - fy) +
           px(x0, y0 + 1) * (1 - fx) * fy + px(x0 + 1, y0 + 1) * fx * fy;
}

int32_t sample_nearest(const InstanceLabelMap& m, real x, real y) {
    const int xi = static_cast<int>(std::lround(x));
    const int yi = static_cast<int>(std::lround(y));
    if (xi < 0 || xi >= m.width || yi < 0 || yi >= m.height) return 0;
    return m.at(yi, xi);
}

ImageRaster downscale4(const ImageRaster& img) {
    if (img.height < 8 || img.width < 8) throw TooSmall("downscale4: dimensions must be >= 8");
    const int oh = (img.height + 3) / 4;
    const int ow = (img.width + 3) / 4;
    ImageRaster out(img.channels, oh, ow);
    for (int c = 0; c < img.channels; ++c)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                real sum = 0;
                int n = 0;
                for (int dy = 0; dy < 4; ++dy)
                    for (int dx = 0; dx < 4; ++dx) {
                        const int y = oy * 4 + dy, x = ox * 4 + dx;
                        if (y < img.height && x < img.width) {
                            sum += img.at(c, y, x);
                            ++n;
                        }
                    }
                out.at(c, oy, ox) = sum / n;
            }
    return out;
}

ImageRaster upsample_bilinear(const ImageRaster& img, int out_h, int out_w) {
    ImageRaster out(img.channels, out_h, out_w);
    const real sy = static_cast<real>(img.height) / out_h;
    const real sx = static_cast<real>(img.width) / out_w;
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < out_h; ++y)
            for (int x = 0; x < out_w; ++x) {
                // align sample centers
                const real fy = std::clamp((y + 0.5) * sy - 0.5, real(0), real(img.height - 1));
                const real fx = std::clamp((x + 0.5) * sx - 0.5, real(0), real(img.width - 1));
                out.at(c, y, x) = sample_bilinear(img, c, fx, fy);
            }
    return out;
}

}  // namespace inbd
