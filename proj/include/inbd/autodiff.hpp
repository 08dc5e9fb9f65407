#ifndef INBD_AUTODIFF_HPP
#define INBD_AUTODIFF_HPP

#include <functional>
#include <memory>
#include <numeric>
#include <vector>

#include "inbd/common.hpp"

namespace inbd {

// Dense row-major tensor of reals.
struct Tensor {
    std::vector<int> shape;
    std::vector<real> v;

    Tensor() = default;
    explicit Tensor(std::vector<int> s, real fill = 0) : shape(std::move(s)) {
        v.assign(numel_of(shape), fill);
    }
    static size_t numel_of(const std::vector<int>& s) {
        size_t n = 1;
        for (int d : s) n *= static_cast<size_t>(d);
        return n;
    }
    size_t numel() const { return v.size(); }

    real& at3(int c, int i, int j) { return v[(static_cast<size_t>(c) * shape[1] + i) * shape[2] + j]; }
    real at3(int c, int i, int j) const { return v[(static_cast<size_t>(c) * shape[1] + i) * shape[2] + j]; }
    real& at2(int i, int j) { return v[static_cast<size_t>(i) * shape[1] + j]; }
    real at2(int i, int j) const { return v[static_cast<size_t>(i) * shape[1] + j]; }
};

// A named parameter with its gradient accumulator.
struct Param {
    Tensor value;
    Tensor grad;

    explicit Param(Tensor t) : value(std::move(t)), grad(value.shape) {}
    Param() = default;
    void zero_grad() { std::fill(grad.v.begin(), grad.v.end(), real(0)); }
};

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
    Tensor value;
    Tensor grad;
    std::function<void()> backprop;  // adds into parent grads
    bool requires_grad = false;
};

// Reverse-mode tape. Nodes are recorded in construction order, which is a
// valid topological order of the DAG; backward() walks it in reverse.
class Graph {
public:
    Var leaf(Tensor t, bool requires_grad = false);
    Var param(Param& p);

    // 2D convolution on [C,N,M] with "same" padding. The radial axis (N) is
    // zero-padded; the angular axis (M) wraps around when `circular`.
    // Kernel sizes must be odd. Output spatial dims: ceil(N/sr) x ceil(M/sa).
    Var conv2d(Var x, Var w, Var b, int stride_r = 1, int stride_a = 1, bool circular = true);

    Var relu(Var x);
    Var sigmoid(Var x);
    // Per-channel normalization over the spatial extent, no affine terms.
    Var instance_norm(Var x, real eps = 1e-5);
    // MaxPool kernel (2,1), stride (2,1): halves the radial axis.
    Var maxpool_radial2(Var x);
    // Nearest upsample x2 towards a target spatial size (tn<=2N, tm<=2M).
    Var upsample_to(Var x, int tn, int tm);
    Var concat_channels(const std::vector<Var>& xs);
    // [C,N,M] -> [C,M], mean over the radial axis.
    Var radial_mean(Var x);
    // [C,M] -> [M]
    Var select_row(Var x, int row);
    // [C,N,M] -> [N,M]
    Var select_channel3(Var x, int channel);
    // out[0] = beta; out[j] = out[j-1] + s[j-1]  (the accumulating recurrence)
    Var shifted_cumsum(Var s, real beta);
    // x - max(x), elementwise over a 1-D signal
    Var sub_max(Var x);
    // ca*a + cb*b, elementwise, same shapes
    Var axpby(Var a, Var b, real ca, real cb);
    // [M] -> [1,N,M], replicated along the radial axis
    Var broadcast_row(Var x, int n_radial);

    // losses (scalar outputs, shape {1})
    Var softmax_ce2(Var logits /*[2,N,M]*/, const Tensor& target /*[N,M] in {0,1}*/);
    Var bce_with_logits(Var x, const Tensor& target);
    Var dice_of_probs(Var p, const Tensor& target, real eps = 1e-6);
    Var combine(const std::vector<Var>& terms, const std::vector<real>& coeffs);

    // Propagates d(loss)/d(everything); flushes into bound Param::grad.
    void backward(const Var& loss);

private:
    Var make(Tensor value, bool requires_grad);
    std::vector<Var> order_;
    std::vector<std::pair<Var, Param*>> bindings_;
};

// Scalar dice: 1 - 2*sum(p*t) / (sum(p^2) + sum(t^2) + eps)
real dice_scalar(const std::vector<real>& pred, const std::vector<real>& target, real eps = 1e-6);

}  // namespace inbd

#endif
