#include "inbd/segmentation.hpp"

#include <algorithm>
#include <cmath>

#include "inbd/autodiff.hpp"
#include "inbd/model.hpp"

namespace inbd {

SegTargets make_seg_targets(const InstanceLabelMap& labels) {
    const int H = labels.height, W = labels.width;
    SegTargets t{ImageRaster(1, H, W), ImageRaster(1, H, W), ImageRaster(1, H, W)};
    ImageRaster adjacent(1, H, W);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const int32_t l = labels.at(y, x);
            t.background.at(0, y, x) = l == 0 ? 1 : 0;
            t.center.at(0, y, x) = l == 1 ? 1 : 0;
            if (l == 0) continue;
            bool adj = false;
            for (int dy = -1; dy <= 1 && !adj; ++dy)
                for (int dx = -1; dx <= 1 && !adj; ++dx) {
                    const int ny = y + dy, nx = x + dx;
                    if (ny < 0 || ny >= H || nx < 0 || nx >= W) continue;
                    if (labels.at(ny, nx) != l) adj = true;  // ring/ring and ring/background edges
                }
            if (adj) adjacent.at(0, y, x) = 1;
        }
    // dilate by 1 px (within the foreground) so thin boundaries give the
    // Dice term nonzero support
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            if (labels.at(y, x) == 0) continue;
            bool on = false;
            for (int dy = -1; dy <= 1 && !on; ++dy)
                for (int dx = -1; dx <= 1 && !on; ++dx) {
                    const int ny = y + dy, nx = x + dx;
                    if (ny >= 0 && ny < H && nx >= 0 && nx < W && adjacent.at(0, ny, nx) > 0.5) on = true;
                }
            t.boundaries.at(0, y, x) = on ? 1 : 0;
        }
    return t;
}

real dice_loss(const ImageRaster& pred, const ImageRaster& target, real eps) {
    if (!pred.same_size(target)) throw ShapeMismatch("dice_loss: shapes differ");
    return dice_scalar(pred.data, target.data, eps);
}

real segmentation_loss(const ImageRaster& logits_bg, const ImageRaster& logits_bd,
                       const ImageRaster& logits_ct, const SegTargets& targets) {
    if (!logits_bg.same_size(targets.background) || !logits_bd.same_size(targets.boundaries) ||
        !logits_ct.same_size(targets.center))
        throw ShapeMismatch("segmentation_loss: shapes differ");
    const int H = logits_bg.height, W = logits_bg.width;
    Graph g;
    Tensor stacked({3, H, W});
    std::copy(logits_bg.data.begin(), logits_bg.data.end(), stacked.v.begin());
    std::copy(logits_bd.data.begin(), logits_bd.data.end(),
              stacked.v.begin() + static_cast<size_t>(H) * W);
    std::copy(logits_ct.data.begin(), logits_ct.data.end(),
              stacked.v.begin() + 2 * static_cast<size_t>(H) * W);
    Tensor tbg({H, W}), tbd({H, W}), tct({H, W});
    tbg.v = targets.background.data;
    tbd.v = targets.boundaries.data;
    tct.v = targets.center.data;
    Var loss = segmentation_loss_graph(g, g.leaf(std::move(stacked)), tbg, tbd, tct);
    return loss->value.v[0];
}

ImageRaster gaussian_blur(const ImageRaster& img, real sigma) {
    if (sigma <= 0) return img;
    const int radius = std::max(1, static_cast<int>(std::ceil(3 * sigma)));
    std::vector<real> k(2 * radius + 1);
    real sum = 0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += k[i + radius];
    }
    for (real& v : k) v /= sum;
    ImageRaster tmp(img.channels, img.height, img.width);
    ImageRaster out(img.channels, img.height, img.width);
    for (int c = 0; c < img.channels; ++c) {
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                real s = 0;
                for (int i = -radius; i <= radius; ++i)
                    s += k[i + radius] * img.at(c, y, std::clamp(x + i, 0, img.width - 1));
                tmp.at(c, y, x) = s;
            }
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                real s = 0;
                for (int i = -radius; i <= radius; ++i)
                    s += k[i + radius] * tmp.at(c, std::clamp(y + i, 0, img.height - 1), x);
                out.at(c, y, x) = s;
            }
    }
    return out;
}

}  // namespace inbd
