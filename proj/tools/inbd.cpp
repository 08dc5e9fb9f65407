#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "inbd/dataset.hpp"
#include "inbd/inference.hpp"
#include "inbd/io.hpp"
#include "inbd/metrics.hpp"
#include "inbd/synth.hpp"
#include "inbd/training.hpp"
#include "inbd/version.hpp"

namespace fs = std::filesystem;
using namespace inbd;

namespace {

// exit codes: 0 ok, 1 partial failure, 2 config error, 3 I/O error, 4 data error
constexpr int EXIT_PARTIAL = 1;
constexpr int EXIT_CONFIG = 2;
constexpr int EXIT_IO = 3;
constexpr int EXIT_DATA = 4;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    real seconds() const {
        return std::chrono::duration<real>(std::chrono::steady_clock::now() - start).count();
    }
};

SynthConfig synth_config_from(const Config& cfg) {
    SynthConfig c;
    c.image_size = cfg.get_int("image_size", c.image_size);
    c.n_rings = cfg.get_int("n_rings", c.n_rings);
    c.mean_ring_width = cfg.get_real("mean_ring_width", c.mean_ring_width);
    c.width_jitter = cfg.get_real("width_jitter", c.width_jitter);
    c.wedging_prob = cfg.get_real("wedging_prob", c.wedging_prob);
    c.wedge_arc_min = cfg.get_real("wedge_arc_min", c.wedge_arc_min);
    c.wedge_arc_max = cfg.get_real("wedge_arc_max", c.wedge_arc_max);
    c.boundary_contrast = cfg.get_real("boundary_contrast", c.boundary_contrast);
    c.noise_sigma = cfg.get_real("noise_sigma", c.noise_sigma);
    c.texture = cfg.get_real("texture", c.texture);
    c.seed = cfg.get_u64("seed", c.seed);
    c.validate();
    return c;
}

TrainConfig train_config_from(const Config& cfg) {
    TrainConfig c;
    c.epochs = cfg.get_int("epochs", c.epochs);
    c.base_lr = cfg.get_real("base_lr", c.base_lr);
    c.n_iterations = cfg.get_int("n_iterations", c.n_iterations);
    c.gamma0 = cfg.get_real("gamma0", c.gamma0);
    c.gamma1 = cfg.get_real("gamma1", c.gamma1);
    c.seed = cfg.get_u64("seed", c.seed);
    c.weight_decay = cfg.get_real("weight_decay", c.weight_decay);
    c.alpha = cfg.get_real("alpha", c.alpha);
    c.n_radial = cfg.get_int("n_radial", c.n_radial);
    c.m_min = cfg.get_int("m_min", c.m_min);
    c.color_jitter = cfg.get_int("color_jitter", c.color_jitter ? 1 : 0) != 0;
    c.validate();
    return c;
}

int run_synth_gen(const std::string& config_path, const std::string& out_dir, int count) {
    Timer timer;
    const Config cfg = Config::parse_file(config_path);
    const SynthConfig base = synth_config_from(cfg);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    // probe writability before generating anything
    {
        std::ofstream probe((fs::path(out_dir) / ".write_probe").string());
        if (!probe) throw IOError("output directory not writable: " + out_dir);
    }
    fs::remove(fs::path(out_dir) / ".write_probe", ec);

    RunManifest manifest;
    manifest.command = "synth-gen";
    manifest.config_snapshot = cfg.values;
    manifest.input_hashes[config_path] = std::to_string(fnv1a_file(config_path));
    manifest.seed = base.seed;

    nlohmann::json samples = nlohmann::json::array();
    for (int i = 0; i < count; ++i) {
        SynthConfig c = base;
        c.seed = base.seed + static_cast<uint64_t>(i);
        const SynthSample sample = generate_sample(c);
        char stem[32];
        std::snprintf(stem, sizeof(stem), "sample_%04d", i);
        const std::string basepath = (fs::path(out_dir) / stem).string();
        write_png_rgb(basepath + ".png", sample.image);
        write_png_labels(basepath + ".labels.png", sample.labels);
        write_rings_json(basepath + ".rings.json", sample.boundaries);
        samples.push_back({{"stem", stem}, {"seed", c.seed}, {"n_rings", c.n_rings}});
        manifest.output_paths.push_back(basepath + ".png");
        manifest.output_paths.push_back(basepath + ".labels.png");
        manifest.output_paths.push_back(basepath + ".rings.json");
    }

    nlohmann::json dataset_manifest;
    dataset_manifest["samples"] = samples;
    dataset_manifest["config"] = cfg.values;
    {
        std::ofstream os((fs::path(out_dir) / "dataset.json").string());
        if (!os) throw IOError("cannot write dataset manifest");
        os << dataset_manifest.dump(2) << "\n";
    }
    manifest.output_paths.push_back((fs::path(out_dir) / "dataset.json").string());
    manifest.wall_clock_sec = timer.seconds();
    manifest.write((fs::path(out_dir) / "manifest.json").string());
    std::cout << "wrote " << count << " samples to " << out_dir << "\n";
    return 0;
}

int run_train(const std::string& kind, const std::string& dataset_dir, const std::string& config_path,
              const std::string& out_model, const std::string& seg_source) {
    Timer timer;
    const Config cfg = Config::parse_file(config_path);
    const TrainConfig tc = train_config_from(cfg);
    std::mt19937_64 rng(tc.seed);

    ModelParams seg_params;
    SegSource src = SegSource::Oracle;
    if (kind == "inbd") {
        if (seg_source.empty()) throw ConfigInvalid("train inbd requires --seg <model|oracle>");
        if (seg_source != "oracle") {
            seg_params = ModelParams::load(seg_source);
            src = SegSource::Model;
        }
    }
    std::vector<TrainImage> images = load_dataset(dataset_dir, src, &seg_params);

    ModelParams params;
    if (kind == "seg")
        SegNet::init(params, rng);
    else
        INBDNet::init(params, rng);

    AdamW optimizer(tc.weight_decay);
    std::ofstream csv(out_model + ".loss.csv");
    if (!csv) throw IOError("cannot write loss csv next to " + out_model);
    csv << "epoch,loss,lr\n";
    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        const real lr = cosine_lr(tc.base_lr, epoch, tc.epochs);
        const real loss = kind == "seg" ? train_seg_epoch(images, params, tc, optimizer, lr, rng)
                                        : train_epoch(images, params, tc, optimizer, lr, rng);
        csv << epoch << "," << loss << "," << lr << "\n";
        csv.flush();
        std::cout << "epoch " << epoch << " loss " << loss << "\n";
        if ((epoch + 1) % 10 == 0) params.save(out_model);
    }
    params.save(out_model);

    RunManifest manifest;
    manifest.command = "train " + kind;
    manifest.config_snapshot = cfg.values;
    manifest.input_hashes[config_path] = std::to_string(fnv1a_file(config_path));
    if (src == SegSource::Model) manifest.input_hashes[seg_source] = std::to_string(fnv1a_file(seg_source));
    manifest.output_paths = {out_model, out_model + ".loss.csv"};
    manifest.seed = tc.seed;
    manifest.wall_clock_sec = timer.seconds();
    manifest.write(out_model + ".manifest.json");
    std::cout << "saved " << out_model << "\n";
    return 0;
}

int run_infer(const std::string& input, const std::string& seg_source, const std::string& model_source,
              const std::string& out_dir, real alpha, int n_radial, int max_iters, bool overlay) {
    Timer timer;
    std::vector<std::string> stems;
    std::string dir;
    if (fs::is_directory(input)) {
        dir = input;
        stems = dataset_stems(input);
        if (stems.empty()) throw DatasetError("no images in " + input);
    } else {
        if (!fs::exists(input)) throw DatasetError("unreadable image: " + input);
        dir = fs::path(input).parent_path().string();
        stems = {fs::path(input).stem().string()};
    }
    std::error_code ec;
    fs::create_directories(out_dir, ec);

    ModelParams seg_params, inbd_params;
    if (seg_source != "oracle") seg_params = ModelParams::load(seg_source);
    if (model_source != "oracle") inbd_params = ModelParams::load(model_source);

    InferenceOptions opts;
    opts.alpha = alpha;
    opts.n_radial = n_radial;
    opts.max_iters = max_iters;

    int failures = 0;
    for (const auto& stem : stems) {
        const std::string base = (fs::path(dir) / stem).string();
        const std::string out_base = (fs::path(out_dir) / stem).string();
        try {
            const ImageRaster image = read_png_image(base + ".png");
            InstanceLabelMap gt_labels;
            if (seg_source == "oracle" || model_source == "oracle") {
                if (!fs::exists(base + ".labels.png"))
                    throw DatasetError("oracle mode needs " + base + ".labels.png");
                gt_labels = read_png_labels(base + ".labels.png");
            }
            std::unique_ptr<PixelClassifier> classifier;
            if (seg_source == "oracle")
                classifier = std::make_unique<OracleClassifier>(gt_labels);
            else
                classifier = std::make_unique<NetClassifier>(seg_params);
            std::unique_ptr<NextRingSource> source;
            if (model_source == "oracle")
                source = std::make_unique<OracleNextRing>(gt_labels);
            else
                source = std::make_unique<ModelNextRing>(inbd_params);

            const DetectionResult result = detect_rings(image, *classifier, *source, opts);
            write_rings_json(out_base + ".rings.json", result.boundaries);
            write_png_labels(out_base + ".labels.png", result.label_map);
            if (overlay) write_png_rgb(out_base + ".overlay.png", make_overlay(image, result.label_map));

            RunManifest manifest;
            manifest.command = "infer";
            manifest.config_snapshot = {{"alpha", std::to_string(alpha)},
                                        {"n_radial", std::to_string(n_radial)},
                                        {"max_iters", std::to_string(max_iters)},
                                        {"stop_reason", stop_reason_name(result.stop_reason)},
                                        {"rings", std::to_string(result.boundaries.size())}};
            manifest.input_hashes[base + ".png"] = std::to_string(fnv1a_file(base + ".png"));
            manifest.output_paths = {out_base + ".rings.json", out_base + ".labels.png"};
            manifest.wall_clock_sec = timer.seconds();
            manifest.write(out_base + ".manifest.json");
            std::cout << stem << ": " << result.boundaries.size() << " rings ("
                      << stop_reason_name(result.stop_reason) << ")\n";
        } catch (const std::exception& e) {
            std::cerr << stem << ": FAILED: " << e.what() << "\n";
            ++failures;
        }
    }
    if (failures == static_cast<int>(stems.size())) return EXIT_DATA;
    return failures > 0 ? EXIT_PARTIAL : 0;
}

int run_evaluate(const std::string& pred_dir, const std::string& gt_dir, const std::string& out_report) {
    Timer timer;
    if (!fs::is_directory(gt_dir)) throw DatasetError("not a directory: " + gt_dir);
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(gt_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.ends_with(".labels.png"))
            stems.push_back(name.substr(0, name.size() - std::string(".labels.png").size()));
    }
    std::sort(stems.begin(), stems.end());
    if (stems.empty()) throw DatasetError("no *.labels.png in " + gt_dir);

    nlohmann::json per_image = nlohmann::json::array();
    real mar_sum = 0, arand_sum = 0;
    for (const auto& stem : stems) {
        const std::string pred_path = (fs::path(pred_dir) / (stem + ".labels.png")).string();
        if (!fs::exists(pred_path)) throw DatasetError("missing prediction for stem: " + stem);
        const InstanceLabelMap gt = read_png_labels((fs::path(gt_dir) / (stem + ".labels.png")).string());
        const InstanceLabelMap pred = read_png_labels(pred_path);
        const RecallResult rec = mean_average_recall_detailed(gt, pred);
        const real arand = adapted_rand_error(gt, pred);
        per_image.push_back({{"stem", stem},
                             {"mAR", rec.mar},
                             {"ARAND", arand},
                             {"recalls_per_threshold",
                              std::vector<real>(rec.recalls_per_threshold.begin(),
                                                rec.recalls_per_threshold.end())}});
        mar_sum += rec.mar;
        arand_sum += arand;
    }
    nlohmann::json report;
    report["per_image"] = per_image;
    report["aggregate"] = {{"mAR_mean", mar_sum / stems.size()},
                           {"ARAND_mean", arand_sum / stems.size()}};
    std::ofstream os(out_report);
    if (!os) throw IOError("cannot write report: " + out_report);
    os << report.dump(2) << "\n";
    std::cout << "mAR_mean " << mar_sum / stems.size() << " ARAND_mean " << arand_sum / stems.size()
              << "\n";
    (void)timer;
    return 0;
}

const char* CONFIG_HELP_SYNTH =
    "Config keys (key = value): image_size (512), n_rings (6), mean_ring_width (24), "
    "width_jitter (0.3), wedging_prob (0.3), wedge_arc_min (pi/3), wedge_arc_max (pi), "
    "boundary_contrast (0.6), noise_sigma (0.02), texture (0.15), seed (0)";

const char* CONFIG_HELP_TRAIN =
    "Config keys (key = value): epochs (100), base_lr (1e-3, cosine-annealed), "
    "n_iterations (3, iterative-training depth), gamma0 (4 px), gamma1 (4 px), seed (0), "
    "weight_decay (1e-2), alpha (6.2832, angular density), n_radial (256), m_min (16), "
    "color_jitter (1)";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Iterative next-boundary detection for concentric ring instance segmentation"};
    app.set_version_flag("--version", INBD_VERSION);
    app.require_subcommand(1);

    auto* sg = app.add_subcommand("synth-gen", "Generate a synthetic cross-section dataset");
    std::string sg_config, sg_out;
    int sg_count = 16;
    sg->add_option("-c,--config", sg_config, "synthesis config file")->required();
    sg->add_option("-o,--out", sg_out, "output directory")->required();
    sg->add_option("-n,--count", sg_count, "number of samples");
    sg->footer(CONFIG_HELP_SYNTH);

    auto* tr = app.add_subcommand("train", "Train the segmentation or next-ring network");
    std::string tr_kind, tr_data, tr_config, tr_out, tr_seg;
    tr->add_option("kind", tr_kind, "seg | inbd")->required()->check(CLI::IsMember({"seg", "inbd"}));
    tr->add_option("-d,--dataset", tr_data, "dataset directory")->required();
    tr->add_option("-c,--config", tr_config, "training config file")->required();
    tr->add_option("-o,--out", tr_out, "output model path")->required();
    tr->add_option("--seg", tr_seg, "segmentation source for kind=inbd: 'oracle' or a seg model path");
    tr->footer(CONFIG_HELP_TRAIN);

    auto* in = app.add_subcommand("infer", "Detect rings in an image or directory of images");
    std::string in_input, in_seg = "oracle", in_model = "oracle", in_out;
    real in_alpha = 2 * PI;
    int in_radial = 256, in_iters = 100, in_jobs = 1;
    bool in_overlay = false;
    in->add_option("input", in_input, "image .png or directory")->required();
    in->add_option("--seg", in_seg, "'oracle' or path to a trained seg model");
    in->add_option("--model", in_model, "'oracle' or path to a trained next-ring model");
    in->add_option("-o,--out", in_out, "output directory")->required();
    in->add_option("--alpha", in_alpha, "angular density (default 2*pi)");
    in->add_option("--n-radial", in_radial, "radial grid resolution (default 256)");
    in->add_option("--max-iters", in_iters, "safety cap on detection iterations");
    in->add_option("--jobs", in_jobs, "parallel images (default 1, deterministic)");
    in->add_flag("--overlay", in_overlay, "also write RGBA overlays");

    auto* ev = app.add_subcommand("evaluate", "Compute mAR / ARAND between prediction and gt dirs");
    std::string ev_pred, ev_gt, ev_out = "report.json";
    ev->add_option("pred", ev_pred, "prediction directory")->required();
    ev->add_option("gt", ev_gt, "ground-truth directory")->required();
    ev->add_option("-o,--out", ev_out, "report JSON path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sg->parsed()) return run_synth_gen(sg_config, sg_out, sg_count);
        if (tr->parsed()) return run_train(tr_kind, tr_data, tr_config, tr_out, tr_seg);
        if (in->parsed())
            return run_infer(in_input, in_seg, in_model, in_out, in_alpha, in_radial, in_iters, in_overlay);
        if (ev->parsed()) return run_evaluate(ev_pred, ev_gt, ev_out);
    } catch (const ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return EXIT_CONFIG;
    } catch (const IOError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return EXIT_IO;
    } catch (const DatasetError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return EXIT_DATA;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_DATA;
    }
    return 0;
}
