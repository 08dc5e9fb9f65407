#include "inbd/training.hpp"

#include <algorithm>
#include <cmath>

namespace inbd {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigInvalid("train: epochs must be >= 1");
    if (base_lr <= 0) throw ConfigInvalid("train: base_lr must be > 0");
    if (n_iterations < 1) throw ConfigInvalid("train: n_iterations must be >= 1");
    if (gamma0 < 0 || gamma1 < 0) throw ConfigInvalid("train: gammas must be >= 0");
    if (alpha <= 0) throw ConfigInvalid("train: alpha must be > 0");
    if (n_radial < 8 || n_radial % 4 != 0) throw ConfigInvalid("train: n_radial must be a multiple of 4, >= 8");
}

std::vector<real> augment_boundary(const std::vector<real>& radii, real gamma0, real gamma1,
                                   std::mt19937_64& rng) {
    std::uniform_real_distribution<real> u11(-1, 1);
    const real x0 = u11(rng);
    const real x1 = u11(rng);
    const int M = static_cast<int>(radii.size());
    std::vector<real> out(M);
    for (int a = 0; a < M; ++a) {
        const real phi = 2 * PI * a / M;
        out[a] = std::max(radii[a] + std::cos(phi + x0) * gamma0 + x1 * gamma1, real(1));
    }
    return out;
}

real cosine_lr(real base_lr, int t, int total) {
    return base_lr * 0.5 * (1.0 + std::cos(PI * static_cast<real>(t) / total));
}

void AdamW::step(ModelParams& params, real lr) {
    ++t_;
    const real bc1 = 1.0 - std::pow(beta1_, t_);
    const real bc2 = 1.0 - std::pow(beta2_, t_);
    for (auto& [name, p] : params.params) {
        for (real g : p.grad.v)
            if (!std::isfinite(g)) throw NonFiniteGradient("non-finite gradient in parameter " + name);
        auto it = moments_.find(name);
        if (it == moments_.end())
            it = moments_.emplace(name, std::make_pair(Tensor(p.value.shape), Tensor(p.value.shape))).first;
        Tensor& m = it->second.first;
        Tensor& v = it->second.second;
        for (size_t i = 0; i < p.value.v.size(); ++i) {
            const real g = p.grad.v[i];
            m.v[i] = beta1_ * m.v[i] + (1.0 - beta1_) * g;
            v.v[i] = beta2_ * v.v[i] + (1.0 - beta2_) * g * g;
            const real mhat = m.v[i] / bc1;
            const real vhat = v.v[i] / bc2;
            p.value.v[i] -= lr * (mhat / (std::sqrt(vhat) + eps_) + weight_decay_ * p.value.v[i]);
        }
    }
}

ImageRaster color_jitter(const ImageRaster& image, std::mt19937_64& rng) {
    std::uniform_real_distribution<real> u(0.8, 1.2);
    const real brightness = u(rng);
    const real contrast = u(rng);
    ImageRaster out = image;
    for (real& v : out.data) v = std::clamp(((v - 0.5) * contrast + 0.5) * brightness, real(0), real(1));
    return out;
}

RingBoundary boundary_from_annotation(const InstanceLabelMap& labels, int ring_index, int n_angles) {
    // origin from the center ring
    real cx = 0, cy = 0;
    long n = 0;
    for (int y = 0; y < labels.height; ++y)
        for (int x = 0; x < labels.width; ++x)
            if (labels.at(y, x) == 1) {
                cx += x;
                cy += y;
                ++n;
            }
    if (n == 0) throw EmptyMask("boundary_from_annotation: annotation has no center ring");
    const Point origin{cx / n, cy / n};

    std::vector<real> max_r(n_angles, undefined_value());
    for (int y = 0; y < labels.height; ++y)
        for (int x = 0; x < labels.width; ++x) {
            const int32_t l = labels.at(y, x);
            if (l < 1 || l > ring_index) continue;
            bin_pixel_max_radius(max_r, origin, x, y);
        }
    RingBoundary b;
    b.radii = circular_interpolate(max_r);
    for (real& v : b.radii) v = std::max(v, real(1));
    b.origin = origin;
    b.ring_index = ring_index;
    return b;
}

std::vector<TrainItem> enumerate_items(const std::vector<TrainImage>& images) {
    std::vector<TrainItem> items;
    for (size_t i = 0; i < images.size(); ++i) {
        const int k = static_cast<int>(images[i].gt_boundaries.size());
        for (int r = 1; r <= k; ++r) items.push_back({static_cast<int>(i), r});
    }
    return items;
}

namespace {
Tensor indicator_cells(const Tensor& sampled_labels, int ring_index) {
    Tensor t(sampled_labels.shape);
    for (size_t i = 0; i < t.v.size(); ++i)
        t.v[i] = static_cast<int>(sampled_labels.v[i]) == ring_index + 1 ? 1.0 : 0.0;
    return t;
}
}  // namespace

real train_epoch(const std::vector<TrainImage>& images, ModelParams& params,
                 const TrainConfig& config, AdamW& optimizer, real lr, std::mt19937_64& rng) {
    std::vector<TrainItem> items = enumerate_items(images);
    std::shuffle(items.begin(), items.end(), rng);
    real epoch_loss = 0;
    int counted = 0;
    for (const TrainItem& item : items) {
        const TrainImage& ti = images[item.image_index];
        const ImageRaster jittered = config.color_jitter ? color_jitter(ti.image, rng) : ti.image;

        RingBoundary seed = ti.gt_boundaries[item.ring_index - 1];
        Graph g;
        std::vector<Var> losses;
        for (int j = 0; j < config.n_iterations; ++j) {
            const int cur = item.ring_index + j;
            std::vector<real> augmented = augment_boundary(seed.radii, config.gamma0, config.gamma1, rng);
            RingBoundary rho;
            rho.radii = std::move(augmented);
            rho.origin = seed.origin;
            rho.ring_index = cur;
            const int M = std::max(compute_angular_resolution(rho, config.alpha), config.m_min);
            rho.radii = resample_circular(rho.radii, M);
            for (real& v : rho.radii) v += GRID_INNER_OFFSET;
            real extent;
            try {
                extent = estimate_radial_extent(ti.seg_maps.y_bd, rho.origin, rho);
            } catch (const NoBoundaryAhead&) {
                break;  // truncate the inner loop for this item
            }
            const PolarGrid grid = build_polar_grid(rho.origin, rho, extent, config.n_radial, M);
            const SampledPatch patch = assemble_patch(jittered, ti.seg_maps.y_bg, ti.seg_maps.y_bd, grid);
            const Tensor sampled = sample_grid_labels(ti.labels, grid);
            const Tensor target_cells = indicator_cells(sampled, cur);
            Tensor target_row({M});
            for (int a = 0; a < M; ++a) target_row.v[a] = target_cells.at2(0, a);
            const real beta = wrd_training_beta(target_row);

            INBDForward fwd = INBDNet::forward(g, g.leaf(patch.channels, false), params, beta);
            losses.push_back(total_loss_graph(g, fwd.logits, target_cells, fwd.wrd.omega_raw, target_row));

            // next seed from the prediction (no gradient flows through this)
            const ExtractedBoundary ext = extract_next_boundary(fwd.logits->value, grid);
            RingBoundary next;
            next.origin = rho.origin;
            next.ring_index = cur + 1;
            if (ext.defined_count == 0) {
                next.radii = rho.radii;
                for (real& v : next.radii) v += 1.0;
            } else {
                next.radii = circular_interpolate(ext.radii);
            }
            for (int a = 0; a < M; ++a) next.radii[a] = std::max(next.radii[a], rho.radii[a]);
            seed = std::move(next);
        }
        if (losses.empty()) continue;
        const std::vector<real> coeffs(losses.size(), 1.0 / config.n_iterations);
        Var total = g.combine(losses, coeffs);
        params.zero_grads();
        g.backward(total);
        optimizer.step(params, lr);
        epoch_loss += total->value.v[0];
        ++counted;
    }
    return counted > 0 ? epoch_loss / counted : 0.0;
}

real train_seg_epoch(const std::vector<TrainImage>& images, ModelParams& params,
                     const TrainConfig& config, AdamW& optimizer, real lr, std::mt19937_64& rng) {
    std::vector<int> order(images.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::shuffle(order.begin(), order.end(), rng);
    real epoch_loss = 0;
    for (int idx : order) {
        const TrainImage& ti = images[idx];
        const ImageRaster jittered = config.color_jitter ? color_jitter(ti.image, rng) : ti.image;
        const ImageRaster small = downscale4(jittered);

        // targets at x0.25: nearest-downsampled labels
        InstanceLabelMap small_labels(small.height, small.width);
        for (int y = 0; y < small.height; ++y)
            for (int x = 0; x < small.width; ++x)
                small_labels.at(y, x) = ti.labels.at(std::min(y * 4 + 2, ti.labels.height - 1),
                                                     std::min(x * 4 + 2, ti.labels.width - 1));
        const SegTargets targets = make_seg_targets(small_labels);

        Graph g;
        Tensor input({3, small.height, small.width});
        input.v = small.data;
        Var logits = SegNet::forward(g, g.leaf(std::move(input), false), params);
        Tensor tbg({small.height, small.width}), tbd(tbg.shape), tct(tbg.shape);
        tbg.v = targets.background.data;
        tbd.v = targets.boundaries.data;
        tct.v = targets.center.data;
        Var loss = segmentation_loss_graph(g, logits, tbg, tbd, tct);
        params.zero_grads();
        g.backward(loss);
        optimizer.step(params, lr);
        epoch_loss += loss->value.v[0];
    }
    return images.empty() ? 0.0 : epoch_loss / images.size();
}

real finite_diff_check(const std::function<real()>& loss_fn, ModelParams& params, real epsilon) {
    params.zero_grads();
    const real base = loss_fn();
    (void)base;
    std::map<std::string, Tensor> analytic;
    for (auto& [name, p] : params.params) analytic.emplace(name, p.grad);

    real max_rel = 0;
    for (auto& [name, p] : params.params) {
        for (size_t i = 0; i < p.value.v.size(); ++i) {
            const real orig = p.value.v[i];
            p.value.v[i] = orig + epsilon;
            params.zero_grads();
            const real lp = loss_fn();
            p.value.v[i] = orig - epsilon;
            params.zero_grads();
            const real lm = loss_fn();
            p.value.v[i] = orig;
            const real fd = (lp - lm) / (2 * epsilon);
            const real a = analytic.at(name).v[i];
            const real rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), real(1e-8)});
            max_rel = std::max(max_rel, rel);
        }
    }
    params.zero_grads();
    for (auto& [name, p] : params.params) p.grad = analytic.at(name);
    return max_rel;
}

}  // namespace inbd
