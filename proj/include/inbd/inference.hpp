#ifndef INBD_INFERENCE_HPP
#define INBD_INFERENCE_HPP

#include <memory>
#include <vector>

#include "inbd/model.hpp"
#include "inbd/polar.hpp"
#include "inbd/segmentation.hpp"

namespace inbd {

// Per-column boundary extraction result; radii NaN where ambiguous.
struct ExtractedBoundary {
    std::vector<real> radii;
    std::vector<bool> clamped;  // column was all-positive, clamped to the outermost radius
    int defined_count = 0;
};

// Columnwise last-positive-row rule: positives must form a contiguous prefix
// from row 0; all-positive columns clamp to the outermost radius; anything
// else is undefined. Logits are binarized by argmax.
ExtractedBoundary extract_next_boundary(const Tensor& logits /*[2,N,M]*/, const PolarGrid& grid);

// Produces the 2-class next-ring logits for a polar patch.
class NextRingSource {
public:
    virtual ~NextRingSource() = default;
    virtual Tensor logits(const SampledPatch& patch, const PolarGrid& grid, int ring_index) const = 0;
};

// Perfect logits derived from a ground-truth annotation (isolation testing).
class OracleNextRing : public NextRingSource {
public:
    explicit OracleNextRing(InstanceLabelMap labels) : labels_(std::move(labels)) {}
    Tensor logits(const SampledPatch&, const PolarGrid& grid, int ring_index) const override;

private:
    InstanceLabelMap labels_;
};

// Runs the INBD network g (beta = 0 at inference).
class ModelNextRing : public NextRingSource {
public:
    explicit ModelNextRing(ModelParams& params) : params_(&params) {}
    Tensor logits(const SampledPatch& patch, const PolarGrid&, int) const override;

private:
    ModelParams* params_;
};

// Trained segmentation network f: downscale x0.25, forward, sigmoid,
// upsample back to full resolution.
class NetClassifier : public PixelClassifier {
public:
    explicit NetClassifier(ModelParams& params) : params_(&params) {}
    SegMaps classify(const ImageRaster& image) const override;

private:
    ModelParams* params_;
};

struct InferenceOptions {
    real alpha = 2 * PI;
    int n_radial = 256;
    int m_min = M_MIN;
    int max_iters = 100;
};

enum class StopReason { BackgroundReached, NoBoundaryAhead, MaxIterations };

struct DetectionResult {
    std::vector<RingBoundary> boundaries;  // ring_index 1..K
    InstanceLabelMap label_map;
    int iterations = 0;
    StopReason stop_reason = StopReason::BackgroundReached;
};

// Outer boundary of the detected center ring: per-angle max radius of the
// thresholded y_ct mask, gaps filled circularly. Throws EmptyMask.
RingBoundary center_ring_boundary(const ImageRaster& y_ct, const Point& origin, int n_angles = 360);

// One iteration: angular resolution (alpha rule), radial extent (P95 rule),
// grid, 7-channel patch, logits, extraction + circular interpolation.
// Propagates NoBoundaryAhead; an all-undefined extraction falls back to the
// previous radii + 1 px, flagged low-confidence.
RingBoundary next_ring_step(const ImageRaster& image, const SegMaps& maps,
                            const RingBoundary& prev_boundary, const NextRingSource& source,
                            const InferenceOptions& opts);

// Full iterative detection: center seed, next-ring loop, background stop.
DetectionResult detect_rings(const ImageRaster& image, const PixelClassifier& classifier,
                             const NextRingSource& source, const InferenceOptions& opts = {});

const char* stop_reason_name(StopReason r);

}  // namespace inbd

#endif
