#ifndef INBD_SYNTH_HPP
#define INBD_SYNTH_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "inbd/polar.hpp"
#include "inbd/raster.hpp"
#include "inbd/segmentation.hpp"

namespace inbd {

struct SynthConfig {
    int image_size = 512;
    int n_rings = 6;
    real mean_ring_width = 24;
    real width_jitter = 0.3;       // fraction of the mean width
    real wedging_prob = 0.3;
    real wedge_arc_min = PI / 3;   // radians
    real wedge_arc_max = PI;
    real boundary_contrast = 0.6;  // 0..1, darkening of boundary curves
    real noise_sigma = 0.02;
    real texture = 0.15;           // cell-like speckle amplitude
    uint64_t seed = 0;

    void validate() const;
};

struct SynthSample {
    ImageRaster image;  // RGB in [0,1]
    InstanceLabelMap labels;
    std::vector<RingBoundary> boundaries;  // ground truth, chronological
};

// Procedural cross-section with known ring annotation. Deterministic per seed.
SynthSample generate_sample(const SynthConfig& config);

struct OracleCorruption {
    real flip_prob = 0;
    real blur_sigma = 0;
    uint64_t seed = 0;
};

// Exact segmentation maps derived from a label map, optionally blurred and
// pixel-flipped to emulate classifier noise. Stands in for the network f.
SegMaps oracle_seg_maps(const InstanceLabelMap& labels, const OracleCorruption& corruption = {});

class OracleClassifier : public PixelClassifier {
public:
    OracleClassifier(InstanceLabelMap labels, OracleCorruption corruption = {})
        : labels_(std::move(labels)), corruption_(corruption) {}
    SegMaps classify(const ImageRaster&) const override { return oracle_seg_maps(labels_, corruption_); }

private:
    InstanceLabelMap labels_;
    OracleCorruption corruption_;
};

}  // namespace inbd

#endif
