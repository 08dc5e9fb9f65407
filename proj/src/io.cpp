#include "inbd/io.hpp"

#include <png.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "inbd/version.hpp"

namespace inbd {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

void write_png(const std::string& path, int width, int height, int color_type, int bit_depth,
               const std::vector<png_bytep>& rows) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IOError("cannot open for writing: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IOError("png write failed: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16) png_set_swap(png);  // little-endian host buffers
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

uint8_t to_byte(real v) { return static_cast<uint8_t>(std::lround(std::clamp(v, real(0), real(1)) * 255)); }

}  // namespace

void write_png_rgb(const std::string& path, const ImageRaster& img) {
    if (img.channels != 3 && img.channels != 4) throw IOError("write_png_rgb: expects 3 or 4 channels");
    const int C = img.channels;
    std::vector<uint8_t> buf(static_cast<size_t>(img.height) * img.width * C);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < C; ++c)
                buf[(static_cast<size_t>(y) * img.width + x) * C + c] = to_byte(img.at(c, y, x));
    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y) rows[y] = buf.data() + static_cast<size_t>(y) * img.width * C;
    write_png(path, img.width, img.height, C == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_RGBA, 8, rows);
}

void write_png_gray8(const std::string& path, const ImageRaster& img) {
    if (img.channels != 1) throw IOError("write_png_gray8: expects 1 channel");
    std::vector<uint8_t> buf(static_cast<size_t>(img.height) * img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            buf[static_cast<size_t>(y) * img.width + x] = to_byte(img.at(0, y, x));
    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y) rows[y] = buf.data() + static_cast<size_t>(y) * img.width;
    write_png(path, img.width, img.height, PNG_COLOR_TYPE_GRAY, 8, rows);
}

void write_png_labels(const std::string& path, const InstanceLabelMap& labels) {
    std::vector<uint16_t> buf(static_cast<size_t>(labels.height) * labels.width);
    for (size_t i = 0; i < buf.size(); ++i) {
        const int32_t v = labels.labels[i];
        if (v < 0 || v > 65535) throw IOError("write_png_labels: label out of 16-bit range");
        buf[i] = static_cast<uint16_t>(v);
    }
    std::vector<png_bytep> rows(labels.height);
    for (int y = 0; y < labels.height; ++y)
        rows[y] = reinterpret_cast<png_bytep>(buf.data() + static_cast<size_t>(y) * labels.width);
    write_png(path, labels.width, labels.height, PNG_COLOR_TYPE_GRAY, 16, rows);
}

namespace {
struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FilePtr fp;
    int width = 0, height = 0, channels = 0, bit_depth = 0;
    std::vector<uint8_t> data;  // interleaved, native rows

    explicit PngReader(const std::string& path, bool want_labels) {
        fp.reset(std::fopen(path.c_str(), "rb"));
        if (!fp) throw IOError("cannot open: " + path);
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        info = png_create_info_struct(png);
        if (setjmp(png_jmpbuf(png))) {
            png_destroy_read_struct(&png, &info, nullptr);
            throw IOError("png read failed: " + path);
        }
        png_init_io(png, fp.get());
        png_read_info(png, info);
        width = static_cast<int>(png_get_image_width(png, info));
        height = static_cast<int>(png_get_image_height(png, info));
        bit_depth = png_get_bit_depth(png, info);
        const int color = png_get_color_type(png, info);
        if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (!want_labels && bit_depth == 16) png_set_strip_16(png);
        if (want_labels && bit_depth == 16) png_set_swap(png);
        png_read_update_info(png, info);
        bit_depth = png_get_bit_depth(png, info);
        channels = png_get_channels(png, info);
        const size_t rowbytes = png_get_rowbytes(png, info);
        data.resize(rowbytes * height);
        std::vector<png_bytep> rows(height);
        for (int y = 0; y < height; ++y) rows[y] = data.data() + rowbytes * y;
        png_read_image(png, rows.data());
        png_destroy_read_struct(&png, &info, nullptr);
    }
};
}  // namespace

ImageRaster read_png_image(const std::string& path) {
    PngReader r(path, false);
    ImageRaster out(3, r.height, r.width);
    for (int y = 0; y < r.height; ++y)
        for (int x = 0; x < r.width; ++x) {
            const uint8_t* px = r.data.data() + (static_cast<size_t>(y) * r.width + x) * r.channels;
            for (int c = 0; c < 3; ++c)
                out.at(c, y, x) = px[std::min(c, r.channels - 1)] / 255.0;
        }
    return out;
}

InstanceLabelMap read_png_labels(const std::string& path) {
    PngReader r(path, true);
    if (r.channels != 1) throw IOError("read_png_labels: expects single-channel PNG: " + path);
    InstanceLabelMap out(r.height, r.width);
    if (r.bit_depth == 16) {
        const uint16_t* p = reinterpret_cast<const uint16_t*>(r.data.data());
        for (size_t i = 0; i < out.labels.size(); ++i) out.labels[i] = p[i];
    } else {
        for (size_t i = 0; i < out.labels.size(); ++i) out.labels[i] = r.data[i];
    }
    return out;
}

// ---------------------------------------------------------------------------

void write_rings_json(const std::string& path, const std::vector<RingBoundary>& boundaries) {
    nlohmann::json j;
    j["origin"] = {boundaries.empty() ? 0.0 : boundaries.front().origin.x,
                   boundaries.empty() ? 0.0 : boundaries.front().origin.y};
    j["rings"] = nlohmann::json::array();
    for (const auto& b : boundaries) {
        nlohmann::json r;
        r["index"] = b.ring_index;
        r["radii"] = b.radii;
        r["angles_count"] = b.size();
        j["rings"].push_back(std::move(r));
    }
    std::ofstream os(path);
    if (!os) throw IOError("cannot write: " + path);
    os << j.dump(2) << "\n";
}

std::vector<RingBoundary> read_rings_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IOError("cannot read: " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError("malformed rings json " + path + ": " + e.what());
    }
    std::vector<RingBoundary> out;
    const Point origin{j.at("origin").at(0).get<real>(), j.at("origin").at(1).get<real>()};
    for (const auto& r : j.at("rings")) {
        RingBoundary b;
        b.ring_index = r.at("index").get<int>();
        b.radii = r.at("radii").get<std::vector<real>>();
        b.origin = origin;
        if (b.radii.empty()) throw DatasetError("empty ring radii in " + path);
        out.push_back(std::move(b));
    }
    return out;
}

void write_seg_maps(const std::string& stem, const SegMaps& maps) {
    write_png_gray8(stem + ".bg.png", maps.y_bg);
    write_png_gray8(stem + ".bd.png", maps.y_bd);
    write_png_gray8(stem + ".ct.png", maps.y_ct);
}

SegMaps read_seg_maps(const std::string& stem) {
    auto read_gray = [](const std::string& p) {
        PngReader r(p, false);
        ImageRaster out(1, r.height, r.width);
        for (int y = 0; y < r.height; ++y)
            for (int x = 0; x < r.width; ++x)
                out.at(0, y, x) = r.data[(static_cast<size_t>(y) * r.width + x) * r.channels] / 255.0;
        return out;
    };
    return SegMaps{read_gray(stem + ".bg.png"), read_gray(stem + ".bd.png"), read_gray(stem + ".ct.png")};
}

// ---------------------------------------------------------------------------

Config Config::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IOError("cannot read config: " + path);
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const size_t eq = line.find('=');
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r\n");
            return s.substr(b, e - b + 1);
        };
        if (eq == std::string::npos) {
            if (!trim(line).empty())
                throw ConfigInvalid(path + ":" + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigInvalid(path + ":" + std::to_string(lineno) + ": empty key");
        cfg.values[key] = val;
    }
    return cfg;
}

real Config::get_real(const std::string& key, real def) const {
    auto it = values.find(key);
    if (it == values.end()) return def;
    try {
        size_t pos = 0;
        const real v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw ConfigInvalid("config key '" + key + "': not a number: " + it->second);
    }
}

int Config::get_int(const std::string& key, int def) const {
    const real v = get_real(key, def);
    const int i = static_cast<int>(std::lround(v));
    if (std::abs(v - i) > 1e-9) throw ConfigInvalid("config key '" + key + "': expected an integer");
    return i;
}

uint64_t Config::get_u64(const std::string& key, uint64_t def) const {
    auto it = values.find(key);
    if (it == values.end()) return def;
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        throw ConfigInvalid("config key '" + key + "': not an unsigned integer: " + it->second);
    }
}

std::string Config::get_str(const std::string& key, const std::string& def) const {
    auto it = values.find(key);
    return it == values.end() ? def : it->second;
}

// ---------------------------------------------------------------------------

uint64_t fnv1a_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IOError("cannot hash: " + path);
    uint64_t h = 14695981039346656037ull;
    char buf[4096];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        for (std::streamsize i = 0; i < is.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (is.eof()) break;
    }
    return h;
}

void RunManifest::write(const std::string& path) const {
    nlohmann::json j;
    j["command"] = command;
    j["config"] = config_snapshot;
    j["inputs"] = input_hashes;
    j["outputs"] = output_paths;
    j["seed"] = seed;
    j["wall_clock_sec"] = wall_clock_sec;
    j["library_version"] = INBD_VERSION;
    std::ofstream os(path);
    if (!os) throw IOError("cannot write manifest: " + path);
    os << j.dump(2) << "\n";
}

ImageRaster make_overlay(const ImageRaster& image, const InstanceLabelMap& labels) {
    static const real palette[8][3] = {{0.90, 0.10, 0.10}, {0.10, 0.60, 0.90}, {0.15, 0.80, 0.25},
                                       {0.95, 0.75, 0.10}, {0.70, 0.25, 0.85}, {0.95, 0.45, 0.10},
                                       {0.20, 0.85, 0.75}, {0.90, 0.35, 0.60}};
    ImageRaster out(4, image.height, image.width);
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x) {
            const int32_t l = labels.at(y, x);
            for (int c = 0; c < 3; ++c) {
                real v = image.at(std::min(c, image.channels - 1), y, x);
                if (l > 0) v = 0.55 * v + 0.45 * palette[(l - 1) % 8][c];
                out.at(c, y, x) = v;
            }
            out.at(3, y, x) = 1.0;
        }
    return out;
}

}  // namespace inbd
