#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "inbd/inference.hpp"
#include "inbd/metrics.hpp"
#include "inbd/polar.hpp"
#include "inbd/synth.hpp"
#include "inbd/version.hpp"

namespace py = pybind11;
using namespace inbd;

namespace {

ImageRaster raster_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> arr) {
    if (arr.ndim() == 2) {
        ImageRaster img(1, static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
        std::copy(arr.data(), arr.data() + arr.size(), img.data.begin());
        return img;
    }
    if (arr.ndim() == 3) {  // H x W x C -> planar C x H x W
        const int h = static_cast<int>(arr.shape(0));
        const int w = static_cast<int>(arr.shape(1));
        const int c = static_cast<int>(arr.shape(2));
        ImageRaster img(c, h, w);
        auto a = arr.unchecked<3>();
        for (int ch = 0; ch < c; ++ch)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) img.at(ch, y, x) = a(y, x, ch);
        return img;
    }
    throw py::value_error("expected a 2-d or 3-d (H,W,C) array");
}

py::array_t<double> raster_to_array(const ImageRaster& img) {
    py::array_t<double> arr({img.height, img.width, img.channels});
    auto a = arr.mutable_unchecked<3>();
    for (int ch = 0; ch < img.channels; ++ch)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) a(y, x, ch) = img.at(ch, y, x);
    return arr;
}

InstanceLabelMap labels_from_array(py::array_t<int32_t, py::array::c_style | py::array::forcecast> arr) {
    if (arr.ndim() != 2) throw py::value_error("label map must be 2-d");
    InstanceLabelMap m(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
    std::copy(arr.data(), arr.data() + arr.size(), m.labels.begin());
    return m;
}

py::array_t<int32_t> labels_to_array(const InstanceLabelMap& m) {
    py::array_t<int32_t> arr({m.height, m.width});
    std::copy(m.labels.begin(), m.labels.end(), arr.mutable_data());
    return arr;
}

}  // namespace

PYBIND11_MODULE(pyinbd, m) {
    m.doc() = "Iterative next-boundary detection for ring instance segmentation";
    m.attr("__version__") = INBD_VERSION;

    m.def(
        "center_of_mass",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> mask) {
            const Point p = center_of_mass(raster_from_array(mask));
            return py::make_tuple(p.x, p.y);
        },
        py::arg("mask"), "Center of mass (x, y) of a non-negative weight mask.");

    m.def("angular_resolution",
          [](const std::vector<real>& radii, real alpha) {
              RingBoundary b;
              b.radii = radii;
              return compute_angular_resolution(b, alpha);
          },
          py::arg("radii"), py::arg("alpha") = 2 * PI,
          "Number of angular grid columns for a boundary: round(alpha * mean radius), floor 16.");

    m.def("circular_interpolate", &circular_interpolate, py::arg("values"),
          "Fill NaN gaps by linear interpolation with wrap-around.");

    m.def("resample_circular", &resample_circular, py::arg("values"), py::arg("count"),
          "Resample a circular sequence to a new length by periodic linear interpolation.");

    m.def(
        "rasterize_rings",
        [](const std::vector<std::vector<real>>& rings, real ox, real oy, int height, int width) {
            std::vector<RingBoundary> bs;
            for (size_t i = 0; i < rings.size(); ++i) {
                RingBoundary b;
                b.radii = rings[i];
                b.origin = {ox, oy};
                b.ring_index = static_cast<int>(i) + 1;
                bs.push_back(std::move(b));
            }
            return labels_to_array(rasterize_rings(bs, height, width));
        },
        py::arg("rings"), py::arg("origin_x"), py::arg("origin_y"), py::arg("height"),
        py::arg("width"), "Rasterize per-angle ring radii into an instance label map.");

    m.def(
        "mean_average_recall",
        [](py::array_t<int32_t, py::array::c_style | py::array::forcecast> gt,
           py::array_t<int32_t, py::array::c_style | py::array::forcecast> pred) {
            return mean_average_recall_detailed(labels_from_array(gt), labels_from_array(pred)).mar;
        },
        py::arg("gt"), py::arg("pred"),
        "Mean average recall over IoU thresholds 0.50:0.05:0.95.");

    m.def(
        "adapted_rand_error",
        [](py::array_t<int32_t, py::array::c_style | py::array::forcecast> gt,
           py::array_t<int32_t, py::array::c_style | py::array::forcecast> pred) {
            return adapted_rand_error(labels_from_array(gt), labels_from_array(pred));
        },
        py::arg("gt"), py::arg("pred"), "Adapted Rand error (ground-truth background excluded).");

    m.def(
        "generate_sample",
        [](int image_size, int n_rings, uint64_t seed) {
            SynthConfig cfg;
            cfg.image_size = image_size;
            cfg.n_rings = n_rings;
            cfg.seed = seed;
            cfg.validate();
            const SynthSample s = generate_sample(cfg);
            return py::make_tuple(raster_to_array(s.image), labels_to_array(s.labels));
        },
        py::arg("image_size") = 512, py::arg("n_rings") = 6, py::arg("seed") = 0,
        "Generate a synthetic cross-section: (image HxWx3 in [0,1], label map HxW).");

    m.def(
        "detect_rings_oracle",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> image,
           py::array_t<int32_t, py::array::c_style | py::array::forcecast> labels, real alpha,
           int max_iters) {
            const ImageRaster img = raster_from_array(image);
            const InstanceLabelMap gt = labels_from_array(labels);
            OracleClassifier classifier(gt);
            OracleNextRing source(gt);
            InferenceOptions opts;
            opts.alpha = alpha;
            opts.max_iters = max_iters;
            const DetectionResult res = detect_rings(img, classifier, source, opts);
            py::list rings;
            for (const auto& b : res.boundaries) rings.append(b.radii);
            return py::make_tuple(labels_to_array(res.label_map), rings,
                                  std::string(stop_reason_name(res.stop_reason)));
        },
        py::arg("image"), py::arg("labels"), py::arg("alpha") = 2 * PI, py::arg("max_iters") = 100,
        "Run iterative ring detection with oracle segmentation and next-ring classification.");
}
