#include "inbd/dataset.hpp"

#include <algorithm>
#include <filesystem>

#include "inbd/inference.hpp"
#include "inbd/io.hpp"
#include "inbd/synth.hpp"

namespace fs = std::filesystem;

namespace inbd {

std::vector<std::string> dataset_stems(const std::string& dir) {
    if (!fs::is_directory(dir)) throw DatasetError("not a directory: " + dir);
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (!name.ends_with(".png")) continue;
        if (name.ends_with(".labels.png") || name.ends_with(".bg.png") || name.ends_with(".bd.png") ||
            name.ends_with(".ct.png") || name.ends_with(".overlay.png"))
            continue;
        stems.push_back(entry.path().stem().string());
    }
    std::sort(stems.begin(), stems.end());
    return stems;
}

std::vector<TrainImage> load_dataset(const std::string& dir, SegSource seg_source,
                                     ModelParams* seg_params) {
    const auto stems = dataset_stems(dir);
    if (stems.empty()) throw DatasetError("no images found in " + dir);
    std::vector<TrainImage> out;
    out.reserve(stems.size());
    for (const auto& stem : stems) {
        const std::string base = (fs::path(dir) / stem).string();
        TrainImage ti;
        ti.image = read_png_image(base + ".png");
        if (!fs::exists(base + ".labels.png"))
            throw DatasetError("missing label map for " + stem + " (" + base + ".labels.png)");
        ti.labels = read_png_labels(base + ".labels.png");
        if (ti.labels.height != ti.image.height || ti.labels.width != ti.image.width)
            throw DatasetError("label map size mismatch for " + stem);
        if (fs::exists(base + ".rings.json")) {
            ti.gt_boundaries = read_rings_json(base + ".rings.json");
        } else {
            const int k = ti.labels.max_label();
            if (k < 1) throw DatasetError("annotation has no rings: " + stem);
            for (int i = 1; i <= k; ++i) ti.gt_boundaries.push_back(boundary_from_annotation(ti.labels, i));
        }
        if (seg_source == SegSource::Oracle) {
            ti.seg_maps = oracle_seg_maps(ti.labels);
        } else {
            NetClassifier classifier(*seg_params);
            ti.seg_maps = classifier.classify(ti.image);
        }
        out.push_back(std::move(ti));
    }
    return out;
}

}  // namespace inbd
