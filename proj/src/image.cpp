#include "rrn/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "rrn/error.hpp"

namespace rrn {

void write_pgm(const std::filesystem::path& path, const image& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    std::string bytes(img.size(), '\0');
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double v = std::clamp(img.pixels[i], 0.0, 1.0);
        bytes[i] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + path.string());
}

image read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw format_error("cannot open " + path.string());
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (magic != "P5" || w <= 0 || h <= 0 || maxval != 255)
        throw format_error(path.string() + ": not a P5 maxval-255 PGM");
    in.get();
    std::string bytes(static_cast<std::size_t>(w) * h, '\0');
    in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
        throw format_error(path.string() + ": truncated PGM payload");
    image img(h, w);
    for (std::size_t i = 0; i < bytes.size(); ++i)
        img.pixels[i] = static_cast<unsigned char>(bytes[i]) / 255.0;
    return img;
}

image tile_images(std::span<const image> tiles, int columns, int pad, double pad_value) {
    if (tiles.empty()) return {};
    if (columns <= 0) throw argument_error("tile_images: columns must be positive");
    const int th = tiles.front().height, tw = tiles.front().width;
    const int n = static_cast<int>(tiles.size());
    const int cols = std::min(columns, n);
    const int rows = (n + cols - 1) / cols;
    image out(rows * th + (rows - 1) * pad, cols * tw + (cols - 1) * pad, pad_value);
    for (int t = 0; t < n; ++t) {
        const image& tile = tiles[static_cast<std::size_t>(t)];
        if (tile.height != th || tile.width != tw)
            throw argument_error("tile_images: tiles differ in shape");
        const int r0 = (t / cols) * (th + pad), c0 = (t % cols) * (tw + pad);
        for (int r = 0; r < th; ++r)
            for (int c = 0; c < tw; ++c) out.at(r0 + r, c0 + c) = tile.at(r, c);
    }
    return out;
}

image normalize_to_unit(const image& img, double lo, double hi) {
    image out = img;
    const double span = hi - lo;
    for (double& v : out.pixels) v = span > 0.0 ? std::clamp((v - lo) / span, 0.0, 1.0) : 0.5;
    return out;
}

double mean_squared_error(const image& a, const image& b) {
    if (a.size() != b.size()) throw argument_error("mean_squared_error: shape mismatch");
    if (a.size() == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.pixels[i] - b.pixels[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

} // namespace rrn
