#pragma once

// Digit corpus ingestion and stimulus rendering onto the synthetic retina.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rrn/image.hpp"
#include "rrn/rng.hpp"

namespace rrn {

/// The four generative stimulus properties.
enum class property { x, y, s, r };

inline constexpr property all_properties[] = {property::x, property::y, property::s, property::r};

std::string_view property_name(property p);
/// Accepts "x", "y", "s", "r"; anything else throws argument_error.
property parse_property(std::string_view tag);

/// Procedurally generated shapes that are not digits.
enum class novel_kind { solid_square, solid_triangle, mirrored_digit, double_digit, symbol_x };

std::string_view novel_kind_name(novel_kind k);
novel_kind parse_novel_kind(std::string_view tag);

/// Identity codes 0..9 are digits; novel shapes use 10 + kind index.
inline constexpr int novel_identity(novel_kind k) { return 10 + static_cast<int>(k); }

struct digit_corpus {
    std::vector<image> images;
    std::vector<int> labels;
    std::string source;

    std::size_t size() const { return images.size(); }
    bool empty() const { return images.empty(); }
    /// Throws consistency_error on length mismatch, out-of-range label or intensity.
    void validate() const;
    /// First `n` entries (or all when n >= size()).
    digit_corpus head(std::size_t n) const;
    /// Entries [first, first + n).
    digit_corpus slice(std::size_t first, std::size_t n) const;
};

struct stimulus_props {
    double x = 0.0; // fraction of retina width; positive moves right
    double y = 0.0; // fraction of retina height; positive moves down
    double s = 1.0; // scale multiplier
    double r = 0.0; // degrees; positive rotates counter-clockwise on screen
    int identity = -1;

    bool operator==(const stimulus_props&) const = default;
    double get(property p) const;
    void set(property p, double value);
};

struct property_ranges {
    double x_min = -0.2, x_max = 0.2;
    double y_min = -0.2, y_max = 0.2;
    double s_min = 0.7, s_max = 1.3;
    double r_max = 45.0;

    double lo(property p) const;
    double hi(property p) const;
    /// Throws argument_error unless every range is well ordered and inside
    /// the admissible envelope (|x|,|y| <= 0.2, 0 < s_min).
    void validate() const;
    /// Throws argument_error when `props` fall outside the configured ranges.
    void check(const stimulus_props& props) const;
    stimulus_props sample(rng& gen) const;
};

/// The canonical placement: centred, unit scale, upright.
inline stimulus_props canonical_props(int identity = -1) { return {0.0, 0.0, 1.0, 0.0, identity}; }

struct retina_image {
    image pixels;
    stimulus_props props;
};

struct trial_set {
    std::vector<retina_image> stimuli;
    std::optional<property> swept; // nullopt means "none"
    std::vector<double> property_values;

    std::size_t size() const { return stimuli.size(); }
};

/// Reads an IDX image file (magic 0x00000803) and its label file
/// (magic 0x00000801). Bytes are rescaled to [0,1].
digit_corpus load_idx(const std::filesystem::path& images_path,
                      const std::filesystem::path& labels_path);

/// Writes a corpus back out as an IDX pair; intensities are quantized to bytes.
void save_idx(const digit_corpus& corpus, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path);

/// Scales `digit` by s and rotates it by r about the centre of its grid, then
/// places that centre at the retina centre + (x*W, y*W). Inverse mapping with
/// bilinear sampling; samples outside the glyph read as 0.
retina_image render_stimulus(const image& digit, const stimulus_props& props, int retina_width,
                             const property_ranges& ranges = {});

struct trial_options {
    property_ranges ranges{};
    int retina_width = 64;
    /// When set, every trial uses this corpus index instead of a random one.
    std::optional<std::size_t> pinned_index;
};

/// Draws `n_trials` stimuli with the swept property uniform over its range
/// and every other property held at `fixed`. The digit instance is random
/// unless pinned. Deterministic in `seed`.
trial_set sample_trial_set(const digit_corpus& corpus, std::string_view swept_tag,
                           std::size_t n_trials, const stimulus_props& fixed,
                           std::uint64_t seed, const trial_options& options = {});
trial_set sample_trial_set(const digit_corpus& corpus, std::optional<property> swept,
                           std::size_t n_trials, const stimulus_props& fixed,
                           std::uint64_t seed, const trial_options& options = {});

/// All four properties drawn independently, as during training.
trial_set sample_mixed_trials(const digit_corpus& corpus, std::size_t n_trials,
                              std::uint64_t seed, const trial_options& options = {});

/// Glyph box size used for procedural shapes when no corpus is available.
inline constexpr int default_glyph_size = 28;

/// Raster of a novel shape before placement on the retina.
image novel_glyph(novel_kind kind, const digit_corpus& corpus, std::uint64_t seed,
                  int glyph_size = default_glyph_size);

retina_image generate_novel(novel_kind kind, const stimulus_props& props,
                            const digit_corpus& corpus, std::uint64_t seed,
                            int retina_width = 64, const property_ranges& ranges = {});
retina_image generate_novel(std::string_view kind_tag, const stimulus_props& props,
                            const digit_corpus& corpus, std::uint64_t seed,
                            int retina_width = 64, const property_ranges& ranges = {});

image mirror_horizontal(const image& img);

} // namespace rrn
