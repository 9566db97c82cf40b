#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace rrn {

/// Row-major grayscale grid. Intensities are nominally in [0, 1].
struct image {
    int height = 0;
    int width = 0;
    std::vector<double> pixels;

    image() = default;
    image(int h, int w, double fill = 0.0)
        : height(h), width(w), pixels(static_cast<std::size_t>(h) * w, fill) {}

    double& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
    double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }

    std::size_t size() const { return pixels.size(); }
    bool operator==(const image&) const = default;
};

/// Binary PGM (P5, maxval 255); intensities are clipped to [0,1] and rounded.
void write_pgm(const std::filesystem::path& path, const image& img);
image read_pgm(const std::filesystem::path& path);

/// Lays images out on a grid, row-major, with `pad` pixels of `pad_value`
/// between tiles. All tiles must share one shape.
image tile_images(std::span<const image> tiles, int columns, int pad = 1, double pad_value = 0.5);

/// Linear map of [lo, hi] onto [0, 1], for heatmaps of signed data.
image normalize_to_unit(const image& img, double lo, double hi);

double mean_squared_error(const image& a, const image& b);

} // namespace rrn
