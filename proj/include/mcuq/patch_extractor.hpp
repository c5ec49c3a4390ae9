#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mcuq/errors.hpp"

namespace mcuq {

/// 8-bit RGB image, row-major, no padding.
struct SlideImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;

    SlideImage() = default;
    SlideImage(std::size_t w, std::size_t h, std::vector<std::uint8_t> px);

    const std::uint8_t* pixel(std::size_t x, std::size_t y) const {
        return pixels.data() + (y * width + x) * 3;
    }
};

struct PatchRecord {
    std::string slide_id;
    std::size_t grid_x = 0;
    std::size_t grid_y = 0;
    std::size_t pixel_x = 0;  // grid_x * size
    std::size_t pixel_y = 0;  // grid_y * size
    std::size_t size = 0;
    double tissue_fraction = 0;
    bool kept = false;
};

/// A pixel counts as tissue iff its luma (0.299R + 0.587G + 0.114B) is at
/// most luma_max AND its chroma (max channel - min channel) is at least
/// chroma_min. The defaults exclude white background and neutral scanner
/// gray while passing both H&E pink-purple and MGG blue-violet.
struct TissueThresholds {
    int luma_max = 220;
    int chroma_min = 15;
};

/// floor(W/size) x floor(H/size) full tiles in row-major grid order
/// ((grid_y, grid_x) ascending); partial edge tiles are dropped. A size
/// exceeding either dimension yields an empty sequence.
std::vector<PatchRecord> tile_grid(const SlideImage& image, std::size_t size,
                                   const std::string& slide_id = {});

/// Fraction of the patch's pixels passing the tissue test.
double tissue_fraction(const SlideImage& image, const PatchRecord& geometry,
                       const TissueThresholds& thresholds = {});

struct ExtractResult {
    std::vector<SlideImage> kept;        // in manifest order
    std::vector<PatchRecord> manifest;   // every grid cell, kept or not
};

/// kept <=> tissue_fraction >= keep_threshold.
ExtractResult extract(const SlideImage& image, std::size_t size, double keep_threshold,
                      const TissueThresholds& thresholds = {},
                      const std::string& slide_id = {});

/// Reads .ppm (P6, maxval 255) or .rgb8 raw bytes with a JSON sidecar
/// (same path, extension replaced by .json) carrying {"width":..,"height":..}.
SlideImage load_slide(const std::filesystem::path& path);

void save_ppm(const SlideImage& image, const std::filesystem::path& path);

/// "slide_id,grid_x,grid_y,pixel_x,pixel_y,size,tissue_fraction,kept" with
/// 6-decimal fractions and kept as 1/0.
std::string manifest_csv(std::span<const PatchRecord> records);

}  // namespace mcuq
