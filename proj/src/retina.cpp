#include "rrn/retina.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>

#include "rrn/error.hpp"

namespace rrn {

namespace {

constexpr std::uint32_t idx_images_magic = 0x00000803;
constexpr std::uint32_t idx_labels_magic = 0x00000801;

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw format_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset) {
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                       static_cast<char>(v >> 8), static_cast<char>(v)};
    out.write(b, 4);
}

double bilinear(const image& src, double row, double col) {
    const double r0f = std::floor(row), c0f = std::floor(col);
    const int r0 = static_cast<int>(r0f), c0 = static_cast<int>(c0f);
    const double fr = row - r0f, fc = col - c0f;
    auto px = [&](int r, int c) {
        return (r < 0 || c < 0 || r >= src.height || c >= src.width) ? 0.0 : src.at(r, c);
    };
    return (1.0 - fr) * ((1.0 - fc) * px(r0, c0) + fc * px(r0, c0 + 1)) +
           fr * ((1.0 - fc) * px(r0 + 1, c0) + fc * px(r0 + 1, c0 + 1));
}

// Exact values at multiples of 90 degrees so that symmetric inputs render
// symmetrically without trigonometric round-off.
std::pair<double, double> cos_sin_degrees(double deg) {
    const double quarter = deg / 90.0;
    if (quarter == std::round(quarter)) {
        static constexpr std::array<std::pair<double, double>, 4> exact = {
            {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}}};
        const long q = ((static_cast<long>(std::round(quarter)) % 4) + 4) % 4;
        return exact[static_cast<std::size_t>(q)];
    }
    const double rad = deg * std::numbers::pi / 180.0;
    return {std::cos(rad), std::sin(rad)};
}

// Fraction of a pixel's 4x4 sub-samples for which `inside` holds.
template <class Pred>
double coverage(int row, int col, Pred inside) {
    int hits = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (inside(row - 0.375 + 0.25 * i, col - 0.375 + 0.25 * j)) ++hits;
    return hits / 16.0;
}

double segment_distance(double row, double col, double r0, double c0, double r1, double c1) {
    const double dr = r1 - r0, dc = c1 - c0;
    const double t = std::clamp(((row - r0) * dr + (col - c0) * dc) / (dr * dr + dc * dc), 0.0, 1.0);
    const double pr = r0 + t * dr - row, pc = c0 + t * dc - col;
    return std::sqrt(pr * pr + pc * pc);
}

int glyph_size_for(const digit_corpus& corpus) {
    return corpus.empty() ? default_glyph_size : corpus.images.front().width;
}

image squeeze_half_width(const image& img) {
    image out(img.height, img.width / 2);
    for (int r = 0; r < out.height; ++r)
        for (int c = 0; c < out.width; ++c)
            out.at(r, c) = 0.5 * (img.at(r, 2 * c) + img.at(r, 2 * c + 1));
    return out;
}

} // namespace

std::string_view property_name(property p) {
    switch (p) {
    case property::x: return "x";
    case property::y: return "y";
    case property::s: return "s";
    case property::r: return "r";
    }
    return "?";
}

property parse_property(std::string_view tag) {
    for (property p : all_properties)
        if (property_name(p) == tag) return p;
    throw argument_error("unknown property tag '" + std::string(tag) + "'");
}

std::string_view novel_kind_name(novel_kind k) {
    switch (k) {
    case novel_kind::solid_square: return "solid_square";
    case novel_kind::solid_triangle: return "solid_triangle";
    case novel_kind::mirrored_digit: return "mirrored_digit";
    case novel_kind::double_digit: return "double_digit";
    case novel_kind::symbol_x: return "symbol_x";
    }
    return "?";
}

novel_kind parse_novel_kind(std::string_view tag) {
    for (auto k : {novel_kind::solid_square, novel_kind::solid_triangle, novel_kind::mirrored_digit,
                   novel_kind::double_digit, novel_kind::symbol_x})
        if (novel_kind_name(k) == tag) return k;
    throw argument_error("unknown novel shape kind '" + std::string(tag) + "'");
}

void digit_corpus::validate() const {
    if (images.size() != labels.size())
        throw consistency_error(source + ": " + std::to_string(images.size()) + " images but " +
                                std::to_string(labels.size()) + " labels");
    for (int label : labels)
        if (label < 0 || label > 9)
            throw consistency_error(source + ": label " + std::to_string(label) + " outside 0..9");
    for (const image& img : images)
        for (double v : img.pixels)
            if (!(v >= 0.0 && v <= 1.0)) throw consistency_error(source + ": intensity outside [0,1]");
}

digit_corpus digit_corpus::head(std::size_t n) const { return slice(0, n); }

digit_corpus digit_corpus::slice(std::size_t first, std::size_t n) const {
    digit_corpus out;
    out.source = source;
    const std::size_t begin = std::min(first, size());
    const std::size_t end = std::min(size(), begin + n);
    out.images.assign(images.begin() + static_cast<std::ptrdiff_t>(begin),
                      images.begin() + static_cast<std::ptrdiff_t>(end));
    out.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(begin),
                      labels.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

double stimulus_props::get(property p) const {
    switch (p) {
    case property::x: return x;
    case property::y: return y;
    case property::s: return s;
    case property::r: return r;
    }
    return 0.0;
}

void stimulus_props::set(property p, double value) {
    switch (p) {
    case property::x: x = value; break;
    case property::y: y = value; break;
    case property::s: s = value; break;
    case property::r: r = value; break;
    }
}

double property_ranges::lo(property p) const {
    switch (p) {
    case property::x: return x_min;
    case property::y: return y_min;
    case property::s: return s_min;
    case property::r: return -r_max;
    }
    return 0.0;
}

double property_ranges::hi(property p) const {
    switch (p) {
    case property::x: return x_max;
    case property::y: return y_max;
    case property::s: return s_max;
    case property::r: return r_max;
    }
    return 0.0;
}

void property_ranges::validate() const {
    if (!(x_min <= x_max && y_min <= y_max)) throw argument_error("position range is not ordered");
    if (x_min < -0.2 || x_max > 0.2 || y_min < -0.2 || y_max > 0.2)
        throw argument_error("position range exceeds [-0.2, 0.2]");
    if (!(s_min > 0.0 && s_min <= s_max)) throw argument_error("scale range must satisfy 0 < s_min <= s_max");
    if (!(r_max >= 0.0)) throw argument_error("rotation range must be non-negative");
}

void property_ranges::check(const stimulus_props& p) const {
    constexpr double slack = 1e-12;
    for (property prop : all_properties) {
        const double v = p.get(prop);
        if (!(v >= lo(prop) - slack && v <= hi(prop) + slack))
            throw argument_error("stimulus property " + std::string(property_name(prop)) + " = " +
                                 std::to_string(v) + " outside its configured range");
    }
}

stimulus_props property_ranges::sample(rng& gen) const {
    stimulus_props p;
    p.x = gen.uniform(x_min, x_max);
    p.y = gen.uniform(y_min, y_max);
    p.s = gen.uniform(s_min, s_max);
    p.r = gen.uniform(-r_max, r_max);
    return p;
}

digit_corpus load_idx(const std::filesystem::path& images_path,
                      const std::filesystem::path& labels_path) {
    const auto img_bytes = read_file(images_path);
    const auto lbl_bytes = read_file(labels_path);

    if (img_bytes.size() < 16 || read_be32(img_bytes, 0) != idx_images_magic)
        throw format_error(images_path.string() + ": bad IDX image magic (expected 0x00000803)");
    if (lbl_bytes.size() < 8 || read_be32(lbl_bytes, 0) != idx_labels_magic)
        throw format_error(labels_path.string() + ": bad IDX label magic (expected 0x00000801)");

    const std::size_t n_images = read_be32(img_bytes, 4);
    const int rows = static_cast<int>(read_be32(img_bytes, 8));
    const int cols = static_cast<int>(read_be32(img_bytes, 12));
    const std::size_t n_labels = read_be32(lbl_bytes, 4);
    const std::size_t per_image = static_cast<std::size_t>(rows) * cols;

    if (img_bytes.size() != 16 + n_images * per_image)
        throw format_error(images_path.string() + ": payload size does not match header");
    if (lbl_bytes.size() != 8 + n_labels)
        throw format_error(labels_path.string() + ": payload size does not match header");
    if (n_images != n_labels)
        throw consistency_error(images_path.string() + " holds " + std::to_string(n_images) +
                                " images but " + labels_path.string() + " holds " +
                                std::to_string(n_labels) + " labels");

    digit_corpus corpus;
    corpus.source = images_path.string();
    corpus.images.reserve(n_images);
    corpus.labels.reserve(n_images);
    for (std::size_t i = 0; i < n_images; ++i) {
        image img(rows, cols);
        const unsigned char* px = img_bytes.data() + 16 + i * per_image;
        for (std::size_t k = 0; k < per_image; ++k) img.pixels[k] = px[k] / 255.0;
        corpus.images.push_back(std::move(img));
        corpus.labels.push_back(lbl_bytes[8 + i]);
    }
    corpus.validate();
    return corpus;
}

void save_idx(const digit_corpus& corpus, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path) {
    corpus.validate();
    const int rows = corpus.empty() ? 0 : corpus.images.front().height;
    const int cols = corpus.empty() ? 0 : corpus.images.front().width;
    std::ofstream img_out(images_path, std::ios::binary);
    std::ofstream lbl_out(labels_path, std::ios::binary);
    if (!img_out || !lbl_out) throw std::runtime_error("cannot open IDX output files");
    write_be32(img_out, idx_images_magic);
    write_be32(img_out, static_cast<std::uint32_t>(corpus.size()));
    write_be32(img_out, static_cast<std::uint32_t>(rows));
    write_be32(img_out, static_cast<std::uint32_t>(cols));
    write_be32(lbl_out, idx_labels_magic);
    write_be32(lbl_out, static_cast<std::uint32_t>(corpus.size()));
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const image& img = corpus.images[i];
        if (img.height != rows || img.width != cols)
            throw consistency_error("save_idx: images differ in shape");
        for (double v : img.pixels) img_out.put(static_cast<char>(std::lround(v * 255.0)));
        lbl_out.put(static_cast<char>(corpus.labels[i]));
    }
}

retina_image render_stimulus(const image& digit, const stimulus_props& props, int retina_width,
                             const property_ranges& ranges) {
    if (retina_width <= 0) throw argument_error("retina width must be positive");
    ranges.check(props);
    const double extent = props.s * std::max(digit.height, digit.width);
    if (extent > retina_width)
        throw render_error("glyph of extent " + std::to_string(extent) +
                           " px does not fit a retina of width " + std::to_string(retina_width));

    const double W = retina_width;
    const double centre = (W - 1.0) / 2.0;
    const double place_col = centre + props.x * W;
    const double place_row = centre + props.y * W;
    const double glyph_col = (digit.width - 1) / 2.0;
    const double glyph_row = (digit.height - 1) / 2.0;
    const auto [c, s] = cos_sin_degrees(props.r);
    const double inv_scale = 1.0 / props.s;

    retina_image out{image(retina_width, retina_width), props};
    for (int v = 0; v < retina_width; ++v) {
        const double dv = v - place_row;
        for (int u = 0; u < retina_width; ++u) {
            const double du = u - place_col;
            const double a = (du * c - dv * s) * inv_scale;
            const double b = (du * s + dv * c) * inv_scale;
            out.pixels.at(v, u) = std::clamp(bilinear(digit, glyph_row + b, glyph_col + a), 0.0, 1.0);
        }
    }
    return out;
}

trial_set sample_trial_set(const digit_corpus& corpus, std::string_view swept_tag,
                           std::size_t n_trials, const stimulus_props& fixed, std::uint64_t seed,
                           const trial_options& options) {
    std::optional<property> swept;
    if (swept_tag != "none") swept = parse_property(swept_tag);
    return sample_trial_set(corpus, swept, n_trials, fixed, seed, options);
}

trial_set sample_trial_set(const digit_corpus& corpus, std::optional<property> swept,
                           std::size_t n_trials, const stimulus_props& fixed, std::uint64_t seed,
                           const trial_options& options) {
    if (n_trials < 2) throw argument_error("a trial set needs at least 2 trials");
    if (corpus.empty()) throw argument_error("cannot sample trials from an empty corpus");
    if (options.pinned_index && *options.pinned_index >= corpus.size())
        throw argument_error("pinned corpus index out of range");

    rng gen(seed);
    trial_set set;
    set.swept = swept;
    set.stimuli.reserve(n_trials);
    set.property_values.reserve(n_trials);
    for (std::size_t t = 0; t < n_trials; ++t) {
        const std::size_t idx = options.pinned_index ? *options.pinned_index : gen.index(corpus.size());
        stimulus_props props = fixed;
        props.identity = corpus.labels[idx];
        double value = 0.0;
        if (swept) {
            value = gen.uniform(options.ranges.lo(*swept), options.ranges.hi(*swept));
            props.set(*swept, value);
        }
        set.stimuli.push_back(render_stimulus(corpus.images[idx], props, options.retina_width, options.ranges));
        set.property_values.push_back(value);
    }
    return set;
}

trial_set sample_mixed_trials(const digit_corpus& corpus, std::size_t n_trials, std::uint64_t seed,
                              const trial_options& options) {
    if (n_trials < 2) throw argument_error("a trial set needs at least 2 trials");
    if (corpus.empty()) throw argument_error("cannot sample trials from an empty corpus");
    rng gen(seed);
    trial_set set;
    set.stimuli.reserve(n_trials);
    for (std::size_t t = 0; t < n_trials; ++t) {
        const std::size_t idx = gen.index(corpus.size());
        stimulus_props props = options.ranges.sample(gen);
        props.identity = corpus.labels[idx];
        set.stimuli.push_back(render_stimulus(corpus.images[idx], props, options.retina_width, options.ranges));
        set.property_values.push_back(0.0);
    }
    return set;
}

image mirror_horizontal(const image& img) {
    image out(img.height, img.width);
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c) out.at(r, c) = img.at(r, img.width - 1 - c);
    return out;
}

image novel_glyph(novel_kind kind, const digit_corpus& corpus, std::uint64_t seed, int glyph_size) {
    const int n = glyph_size;
    const double mid = (n - 1) / 2.0;
    image glyph(n, n);
    rng gen(seed);

    switch (kind) {
    case novel_kind::solid_square: {
        const int side = n / 2;
        const int lo = (n - side) / 2;
        for (int r = lo; r < lo + side; ++r)
            for (int c = lo; c < lo + side; ++c) glyph.at(r, c) = 1.0;
        break;
    }
    case novel_kind::solid_triangle: {
        // apex at the top, base near the bottom of the glyph box
        const double top = 0.18 * n, bottom = 0.8 * n, half_base = 0.32 * n;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                glyph.at(r, c) = coverage(r, c, [&](double y, double x) {
                    if (y < top || y > bottom) return false;
                    const double half = half_base * (y - top) / (bottom - top);
                    return std::abs(x - mid) <= half;
                });
        break;
    }
    case novel_kind::symbol_x: {
        const double lo = 0.18 * n, hi = (n - 1) - 0.18 * n, half_width = 1.5;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                const double d = std::min(segment_distance(r, c, lo, lo, hi, hi),
                                          segment_distance(r, c, lo, hi, hi, lo));
                glyph.at(r, c) = std::clamp(half_width + 0.5 - d, 0.0, 1.0);
            }
        break;
    }
    case novel_kind::mirrored_digit: {
        if (corpus.empty()) throw argument_error("mirrored_digit needs a non-empty corpus");
        glyph = mirror_horizontal(corpus.images[gen.index(corpus.size())]);
        break;
    }
    case novel_kind::double_digit: {
        if (corpus.empty()) throw argument_error("double_digit needs a non-empty corpus");
        const image left = squeeze_half_width(corpus.images[gen.index(corpus.size())]);
        const image right = squeeze_half_width(corpus.images[gen.index(corpus.size())]);
        glyph = image(left.height, 2 * left.width);
        for (int r = 0; r < left.height; ++r)
            for (int c = 0; c < left.width; ++c) {
                glyph.at(r, c) = left.at(r, c);
                glyph.at(r, left.width + c) = right.at(r, c);
            }
        break;
    }
    }
    return glyph;
}

retina_image generate_novel(novel_kind kind, const stimulus_props& props, const digit_corpus& corpus,
                            std::uint64_t seed, int retina_width, const property_ranges& ranges) {
    const image glyph = novel_glyph(kind, corpus, seed, glyph_size_for(corpus));
    stimulus_props p = props;
    p.identity = novel_identity(kind);
    return render_stimulus(glyph, p, retina_width, ranges);
}

retina_image generate_novel(std::string_view kind_tag, const stimulus_props& props,
                            const digit_corpus& corpus, std::uint64_t seed, int retina_width,
                            const property_ranges& ranges) {
    return generate_novel(parse_novel_kind(kind_tag), props, corpus, seed, retina_width, ranges);
}

} // namespace rrn
