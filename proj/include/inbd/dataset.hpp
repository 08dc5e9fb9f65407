#ifndef INBD_DATASET_HPP
#define INBD_DATASET_HPP

#include <string>
#include <vector>

#include "inbd/training.hpp"

namespace inbd {

// Dataset directory layout: <stem>.png (RGB image), <stem>.labels.png
// (16-bit label map), optional <stem>.rings.json (ground-truth boundaries,
// derived from the label map when absent).
std::vector<std::string> dataset_stems(const std::string& dir);

enum class SegSource { Oracle, Model };

std::vector<TrainImage> load_dataset(const std::string& dir, SegSource seg_source,
                                     ModelParams* seg_params);

}  // namespace inbd

#endif
