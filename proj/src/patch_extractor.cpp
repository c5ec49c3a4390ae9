#include "mcuq/patch_extractor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mcuq {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failure: " + path.string());
    return std::move(buf).str();
}

bool is_tissue(const std::uint8_t* px, const TissueThresholds& t) {
    const int r = px[0], g = px[1], b = px[2];
    const double luma = 0.299 * r + 0.587 * g + 0.114 * b;
    const int chroma = std::max({r, g, b}) - std::min({r, g, b});
    return luma <= static_cast<double>(t.luma_max) && chroma >= t.chroma_min;
}

// PNM header token reader: skips whitespace and '#' comments.
std::size_t next_pnm_int(const std::string& data, std::size_t& pos, const char* what) {
    while (pos < data.size()) {
        if (std::isspace(static_cast<unsigned char>(data[pos]))) {
            ++pos;
        } else if (data[pos] == '#') {
            while (pos < data.size() && data[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    std::size_t value = 0;
    bool any = false;
    while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) {
        value = value * 10 + static_cast<std::size_t>(data[pos] - '0');
        ++pos;
        any = true;
    }
    if (!any) throw FormatError(std::string("PPM header: missing ") + what);
    return value;
}

SlideImage load_ppm(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    if (data.size() < 2 || data[0] != 'P' || data[1] != '6')
        throw FormatError("not a P6 PPM file: " + path.string());
    std::size_t pos = 2;
    const std::size_t width = next_pnm_int(data, pos, "width");
    const std::size_t height = next_pnm_int(data, pos, "height");
    const std::size_t maxval = next_pnm_int(data, pos, "maxval");
    if (maxval != 255)
        throw FormatError("unsupported PPM maxval " + std::to_string(maxval) +
                          " (only 8-bit supported)");
    if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos])))
        throw FormatError("PPM header: missing whitespace before pixel data");
    ++pos;  // exactly one whitespace byte separates header and payload
    const std::size_t expected = width * height * 3;
    if (data.size() - pos != expected)
        throw FormatError("PPM payload is " + std::to_string(data.size() - pos) +
                          " bytes, expected " + std::to_string(expected));
    return SlideImage(width, height,
                      std::vector<std::uint8_t>(data.begin() + static_cast<std::ptrdiff_t>(pos),
                                                data.end()));
}

SlideImage load_rgb8(const std::filesystem::path& path) {
    std::filesystem::path sidecar = path;
    sidecar.replace_extension(".json");
    if (!std::filesystem::exists(sidecar))
        throw IoError("missing sidecar " + sidecar.string() + " for " + path.string());
    std::size_t width = 0, height = 0;
    try {
        auto j = nlohmann::json::parse(read_file(sidecar));
        width = j.at("width").get<std::size_t>();
        height = j.at("height").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad sidecar JSON " + sidecar.string() + ": " + e.what());
    }
    const std::string data = read_file(path);
    if (data.size() != width * height * 3)
        throw FormatError("raw payload is " + std::to_string(data.size()) +
                          " bytes, expected " + std::to_string(width * height * 3));
    return SlideImage(width, height, std::vector<std::uint8_t>(data.begin(), data.end()));
}

}  // namespace

SlideImage::SlideImage(std::size_t w, std::size_t h, std::vector<std::uint8_t> px)
    : width(w), height(h), pixels(std::move(px)) {
    if (width < 1 || height < 1) throw ValidationError("image dimensions must be >= 1");
    if (pixels.size() != width * height * 3)
        throw ValidationError("pixel buffer is " + std::to_string(pixels.size()) +
                              " bytes, expected " + std::to_string(width * height * 3));
}

std::vector<PatchRecord> tile_grid(const SlideImage& image, std::size_t size,
                                   const std::string& slide_id) {
    if (size < 1) throw ValidationError("patch size must be >= 1");
    const std::size_t cols = image.width / size;
    const std::size_t rows = image.height / size;
    std::vector<PatchRecord> records;
    records.reserve(cols * rows);
    for (std::size_t gy = 0; gy < rows; ++gy) {
        for (std::size_t gx = 0; gx < cols; ++gx) {
            PatchRecord r;
            r.slide_id = slide_id;
            r.grid_x = gx;
            r.grid_y = gy;
            r.pixel_x = gx * size;
            r.pixel_y = gy * size;
            r.size = size;
            records.push_back(std::move(r));
        }
    }
    return records;
}

double tissue_fraction(const SlideImage& image, const PatchRecord& geometry,
                       const TissueThresholds& thresholds) {
    if (geometry.size < 1) throw ValidationError("patch size must be >= 1");
    if (geometry.pixel_x + geometry.size > image.width ||
        geometry.pixel_y + geometry.size > image.height)
        throw ValidationError("patch outside image bounds");
    std::size_t tissue = 0;
    for (std::size_t dy = 0; dy < geometry.size; ++dy)
        for (std::size_t dx = 0; dx < geometry.size; ++dx)
            if (is_tissue(image.pixel(geometry.pixel_x + dx, geometry.pixel_y + dy), thresholds))
                ++tissue;
    return static_cast<double>(tissue) / static_cast<double>(geometry.size * geometry.size);
}

ExtractResult extract(const SlideImage& image, std::size_t size, double keep_threshold,
                      const TissueThresholds& thresholds, const std::string& slide_id) {
    if (!(keep_threshold >= 0.0 && keep_threshold <= 1.0))
        throw ValidationError("keep_threshold must be in [0,1]");
    ExtractResult result;
    result.manifest = tile_grid(image, size, slide_id);
    for (auto& record : result.manifest) {
        record.tissue_fraction = tissue_fraction(image, record, thresholds);
        record.kept = record.tissue_fraction >= keep_threshold;
        if (!record.kept) continue;
        std::vector<std::uint8_t> px(size * size * 3);
        for (std::size_t dy = 0; dy < size; ++dy) {
            const std::uint8_t* src = image.pixel(record.pixel_x, record.pixel_y + dy);
            std::copy(src, src + size * 3, px.begin() + static_cast<std::ptrdiff_t>(dy * size * 3));
        }
        result.kept.emplace_back(size, size, std::move(px));
    }
    return result;
}

SlideImage load_slide(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
    const auto ext = path.extension().string();
    if (ext == ".ppm") return load_ppm(path);
    if (ext == ".rgb8") return load_rgb8(path);
    throw FormatError("unsupported slide format '" + ext + "' (expected .ppm or .rgb8)");
}

void save_ppm(const SlideImage& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw IoError("write failure: " + path.string());
}

std::string manifest_csv(std::span<const PatchRecord> records) {
    std::string out = "slide_id,grid_x,grid_y,pixel_x,pixel_y,size,tissue_fraction,kept\n";
    char fraction[16];
    for (const auto& r : records) {
        std::snprintf(fraction, sizeof(fraction), "%.6f", r.tissue_fraction);
        out += r.slide_id;
        out += ',' + std::to_string(r.grid_x) + ',' + std::to_string(r.grid_y) + ',' +
               std::to_string(r.pixel_x) + ',' + std::to_string(r.pixel_y) + ',' +
               std::to_string(r.size) + ',';
        out += fraction;
        out += r.kept ? ",1\n" : ",0\n";
    }
    return out;
}

}  // namespace mcuq
