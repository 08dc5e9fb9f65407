#ifndef INBD_MODEL_HPP
#define INBD_MODEL_HPP

#include <map>
#include <random>
#include <string>

#include "inbd/autodiff.hpp"
#include "inbd/common.hpp"

namespace inbd {

// Flat named parameter collection with gradient buffers.
struct ModelParams {
    std::map<std::string, Param> params;

    Param& add(const std::string& name, Tensor t);
    Param& get(const std::string& name);
    const Param& get(const std::string& name) const;
    bool has(const std::string& name) const { return params.count(name) > 0; }
    void zero_grads();
    size_t scalar_count() const;

    // Binary container: magic "INBD", version u32 LE, then per-parameter
    // records (name length u32, name bytes, rank u32, dims u32, f32 data).
    void save(const std::string& path) const;
    static ModelParams load(const std::string& path);
};

// Kernel-weight initialization helpers.
void init_conv(ModelParams& mp, std::mt19937_64& rng, const std::string& prefix,
               int out_ch, int in_ch, int kh, int kw);

// ---------------------------------------------------------------------------
// Segmentation network f: RGB image (at x0.25 resolution) -> 3 logit maps
// (background, boundaries, center). Plain zero-padded convolutions.

struct SegNet {
    static void init(ModelParams& mp, std::mt19937_64& rng);
    // x: [3,H,W] -> logits [3,H,W]
    static Var forward(Graph& g, Var x, ModelParams& mp);
};

// Segmentation loss, Dice on boundary probabilities plus weighted
// cross-entropy terms: 0.01*CE(bg) + 1.0*Dice(bd) + 0.1*CE(ct).
inline constexpr real SEG_LOSS_WEIGHTS[3] = {0.01, 1.0, 0.1};
Var segmentation_loss_graph(Graph& g, Var logits /*[3,H,W]*/, const Tensor& target_bg,
                            const Tensor& target_bd, const Tensor& target_ct);

// ---------------------------------------------------------------------------
// Next-ring network g: 7-channel polar patch -> per-cell 2-class logits,
// with the wedging-ring detection (WRD) recurrent head.

struct WRDSignal {
    Var omega_plus;   // [M], pre-sigmoid radial mean of channel 0
    Var omega_minus;  // [M], pre-sigmoid radial mean of channel 1
    Var omega_raw;    // [M], accumulated recurrence (omega')
    Var omega;        // [M], omega' - max(omega')
    real beta = 0;
};

struct INBDForward {
    Var logits;  // [2,N,M]
    WRDSignal wrd;
};

struct INBDNet {
    static void init(ModelParams& mp, std::mt19937_64& rng);
    // patch: [7,N,M]; beta seeds the WRD recurrence (arbitrary at inference).
    static INBDForward forward(Graph& g, Var patch, ModelParams& mp, real beta);
};

// The accumulating WRD recurrence on pre-sigmoid signals:
//   w'[0] = beta; w'[j] = w'[j-1] + sigmoid(plus[j-1]) - sigmoid(minus[j-1])
//   w = w' - max(w')
WRDSignal wrd_recurrence(Graph& g, Var omega_plus, Var omega_minus, real beta);

// BCE between sigmoid(omega_raw) and the per-angle next-ring indicator.
Var wrd_loss_graph(Graph& g, Var omega_raw, const Tensor& target_row);

// Training-time beta: +15 if the target at angle 0 is positive, else -15.
real wrd_training_beta(const Tensor& target_row);

// L_g = CE(logits, target) + 0.01 * L_wrd
inline constexpr real LAMBDA_WRD = 0.01;
Var total_loss_graph(Graph& g, Var logits, const Tensor& target_cells, Var omega_raw,
                     const Tensor& target_row);

}  // namespace inbd

#endif
