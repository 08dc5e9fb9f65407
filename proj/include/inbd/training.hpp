#ifndef INBD_TRAINING_HPP
#define INBD_TRAINING_HPP

#include <functional>
#include <random>
#include <vector>

#include "inbd/inference.hpp"
#include "inbd/model.hpp"
#include "inbd/polar.hpp"
#include "inbd/segmentation.hpp"
#include "inbd/synth.hpp"

namespace inbd {

struct TrainConfig {
    int epochs = 100;
    real base_lr = 1e-3;
    int n_iterations = 3;  // iterative-training depth per item
    real gamma0 = 4;       // cosine augmentation amplitude, px
    real gamma1 = 4;       // uniform offset amplitude, px
    uint64_t seed = 0;
    real weight_decay = 1e-2;
    real alpha = 2 * PI;
    int n_radial = 256;
    int m_min = M_MIN;
    bool color_jitter = true;

    void validate() const;
};

// Eq.-style polar boundary augmentation:
//   rho_hat[a] = rho[a] + cos(phi_a + X0)*gamma0 + X1*gamma1,  X ~ U(-1,1),
// clamped to >= 1 px. X1 is a single offset shared across angles.
std::vector<real> augment_boundary(const std::vector<real>& radii, real gamma0, real gamma1,
                                   std::mt19937_64& rng);

// Cosine annealing: lr_t = base * 0.5 * (1 + cos(pi * t / T))
real cosine_lr(real base_lr, int t, int total);

// Decoupled-weight-decay adaptive optimizer.
class AdamW {
public:
    explicit AdamW(real weight_decay = 1e-2, real beta1 = 0.9, real beta2 = 0.999, real eps = 1e-8)
        : weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {}
    // Applies one update from the accumulated gradients; throws
    // NonFiniteGradient naming the offending parameter.
    void step(ModelParams& params, real lr);

private:
    real weight_decay_, beta1_, beta2_, eps_;
    int t_ = 0;
    std::map<std::string, std::pair<Tensor, Tensor>> moments_;
};

// One training item: an image, its annotation, and a starting ring index.
struct TrainItem {
    int image_index = 0;
    int ring_index = 1;  // seed ring i
};

struct TrainImage {
    ImageRaster image;
    InstanceLabelMap labels;
    std::vector<RingBoundary> gt_boundaries;  // chronological, outer profiles
    SegMaps seg_maps;                         // cached y_bg/y_bd (oracle or model f)
};

// Every (image, ring) pair serves as a seed once per epoch.
std::vector<TrainItem> enumerate_items(const std::vector<TrainImage>& images);

// One INBD training epoch per the iterative procedure: seed from annotation,
// loop n iterations of augment -> grid -> forward -> accumulate loss -> next
// seed from the prediction; backpropagate loss/n once per item.
// Returns the mean per-item loss.
real train_epoch(const std::vector<TrainImage>& images, ModelParams& params,
                 const TrainConfig& config, AdamW& optimizer, real lr, std::mt19937_64& rng);

// One epoch of segmentation training at x0.25 resolution.
real train_seg_epoch(const std::vector<TrainImage>& images, ModelParams& params,
                     const TrainConfig& config, AdamW& optimizer, real lr, std::mt19937_64& rng);

// Derive a per-angle outer boundary profile of ring `i` from an annotation.
RingBoundary boundary_from_annotation(const InstanceLabelMap& labels, int ring_index,
                                      int n_angles = 360);

// Max relative error between analytic gradients and central finite
// differences over every parameter scalar. `loss_fn` must build the graph,
// run backward into params.grad, and return the loss value.
real finite_diff_check(const std::function<real()>& loss_fn, ModelParams& params, real epsilon = 1e-4);

// Brightness/contrast jitter with factors U(0.8, 1.2).
ImageRaster color_jitter(const ImageRaster& image, std::mt19937_64& rng);

}  // namespace inbd

#endif
