#ifndef INBD_SEGMENTATION_HPP
#define INBD_SEGMENTATION_HPP

#include <memory>

#include "inbd/common.hpp"
#include "inbd/raster.hpp"

namespace inbd {

// Pixel classifier output: three probability rasters in [0,1], full
// resolution (implementations working at x0.25 upsample before returning).
struct SegMaps {
    ImageRaster y_bg;
    ImageRaster y_bd;
    ImageRaster y_ct;
};

// Binary training targets derived from an instance label map:
//   background = (label == 0)
//   boundaries = pixels 8-adjacent to a different ring label, dilated by 1 px
//   center     = (label == 1)
struct SegTargets {
    ImageRaster background;
    ImageRaster boundaries;
    ImageRaster center;
};

SegTargets make_seg_targets(const InstanceLabelMap& labels);

// Dice loss on probabilities: 1 - 2*sum(p*t) / (sum(p^2) + sum(t^2) + eps).
real dice_loss(const ImageRaster& pred, const ImageRaster& target, real eps = 1e-6);

// L_f on logits: 0.01*CE(background) + 1.0*Dice(boundaries) + 0.1*CE(center).
// CE is per-pixel binary cross-entropy with logits, averaged over pixels.
real segmentation_loss(const ImageRaster& logits_bg, const ImageRaster& logits_bd,
                       const ImageRaster& logits_ct, const SegTargets& targets);

// Anything that maps an image to segmentation maps qualifies.
class PixelClassifier {
public:
    virtual ~PixelClassifier() = default;
    virtual SegMaps classify(const ImageRaster& image) const = 0;
};

// Gaussian blur (separable), used by the oracle classifier corruption.
ImageRaster gaussian_blur(const ImageRaster& img, real sigma);

}  // namespace inbd

#endif
