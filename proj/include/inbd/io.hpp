#ifndef INBD_IO_HPP
#define INBD_IO_HPP

#include <map>
#include <string>
#include <vector>

#include "inbd/polar.hpp"
#include "inbd/raster.hpp"
#include "inbd/segmentation.hpp"

namespace inbd {

// ---- PNG -------------------------------------------------------------
// 8-bit RGB(A) / grayscale; label maps are 16-bit single channel.

void write_png_rgb(const std::string& path, const ImageRaster& img);       // 3 or 4 channels
void write_png_gray8(const std::string& path, const ImageRaster& img);     // values x255
void write_png_labels(const std::string& path, const InstanceLabelMap& labels);

ImageRaster read_png_image(const std::string& path);       // -> RGB in [0,1]
InstanceLabelMap read_png_labels(const std::string& path);  // grayscale 8/16-bit

// ---- ring boundary JSON ------------------------------------------------
// {origin:[x,y], rings:[{index:int, radii:[..], angles_count:int}]}

void write_rings_json(const std::string& path, const std::vector<RingBoundary>& boundaries);
std::vector<RingBoundary> read_rings_json(const std::string& path);

// ---- seg map cache ------------------------------------------------------
// three 8-bit PNGs per image: <stem>.bg.png / .bd.png / .ct.png

void write_seg_maps(const std::string& stem, const SegMaps& maps);
SegMaps read_seg_maps(const std::string& stem);

// ---- flat key = value config --------------------------------------------

struct Config {
    std::map<std::string, std::string> values;

    static Config parse_file(const std::string& path);
    bool has(const std::string& key) const { return values.count(key) > 0; }
    real get_real(const std::string& key, real def) const;
    int get_int(const std::string& key, int def) const;
    uint64_t get_u64(const std::string& key, uint64_t def) const;
    std::string get_str(const std::string& key, const std::string& def) const;
};

// ---- run manifest ---------------------------------------------------------

uint64_t fnv1a_file(const std::string& path);

struct RunManifest {
    std::string command;
    std::map<std::string, std::string> config_snapshot;
    std::map<std::string, std::string> input_hashes;  // path -> hex hash
    std::vector<std::string> output_paths;
    uint64_t seed = 0;
    real wall_clock_sec = 0;

    void write(const std::string& path) const;
};

// RGBA overlay with per-ring colors over the input image.
ImageRaster make_overlay(const ImageRaster& image, const InstanceLabelMap& labels);

}  // namespace inbd

#endif
