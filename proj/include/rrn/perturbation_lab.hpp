#pragma once

// Causal probes of single encoding units: modulation sweeps, lesions and
// the position-invariance check on reconstructions.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "rrn/network.hpp"
#include "rrn/retina.hpp"

namespace rrn {

/// `n` values evenly spaced on [0, 1].
std::vector<double> unit_grid(int n = 11);

struct modulation_sweep {
    int neuron = 0;
    std::vector<double> values;
    std::vector<image> stimuli;
    std::vector<std::vector<image>> reconstructions; // [stimulus][value]
    std::vector<double> optimal;                     // the unit's own activity per stimulus
    std::vector<image> baseline;                     // unmodified reconstructions
};

/// Encodes each stimulus, overwrites one unit with every grid value and
/// decodes. Values must lie in [0, 1].
modulation_sweep modulate(const network_params& params, std::span<const image> stimuli, int neuron,
                          std::span<const double> values);

/// Stimuli tiled one row per stimulus, one column per value.
image sweep_mosaic(const modulation_sweep& sweep);
void write_sweep_csv(const std::filesystem::path& path, const modulation_sweep& sweep);

struct lesion_report {
    std::vector<int> neurons;
    std::vector<int> identities;
    std::vector<double> baseline_mse;
    std::vector<double> lesioned_mse;
    std::vector<double> damage;
    std::map<int, double> identity_damage; // mean damage per identity

    /// Mean damage over stimuli whose identity is (or is not) `identity`.
    double mean_damage(int identity, bool matching) const;
};

/// Clamps the listed units to 0 before decoding; damage is measured against
/// the stimulus itself.
lesion_report lesion(const network_params& params, std::span<const retina_image> stimuli,
                     std::span<const int> neurons);
lesion_report lesion(const network_params& params, std::span<const retina_image> stimuli, int neuron);

struct point2 {
    double x = 0.0; // column
    double y = 0.0; // row
};

/// Intensity-weighted mean pixel coordinates. Throws undefined_centroid_error
/// when the image has no positive mass.
point2 centroid(const image& img);

/// Largest observed ratio ||decode(a) - decode(b)|| / ||a - b|| over random
/// pairs around the given encodings, with perturbations of norm `radius`.
double lipschitz_estimate(const network_params& params, const Eigen::MatrixXd& encodings, int n_pairs,
                          std::uint64_t seed, double radius = 0.01);

struct invariance_result {
    int neuron = 0;
    double max_shift = 0.0;                   // pixels
    std::vector<std::vector<double>> shifts;  // [stimulus][value], signed
};

/// Horizontal centroid displacement of modulated reconstructions relative
/// to the unmodified reconstruction.
invariance_result position_invariance_check(const network_params& params, std::span<const image> stimuli,
                                            int neuron, std::span<const double> values);

/// Mean horizontal centroid displacement of reconstructions when the input
/// glyph actually moves by `dx` (fraction of retina width).
double input_translation_shift(const network_params& params, const digit_corpus& digits, double dx,
                               const trial_options& options = {});

} // namespace rrn
