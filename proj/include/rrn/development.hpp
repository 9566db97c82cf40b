#pragma once

// Developmental observables captured during training: synapse sign census,
// firing sparsity, probe reconstructions, and candidate critical time points.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rrn/network.hpp"
#include "rrn/retina.hpp"

namespace rrn {

inline constexpr double default_firing_threshold = 0.6;
inline constexpr double default_ctp_sensitivity = 3.0;

struct synapse_census {
    std::size_t n_excitatory = 0;
    std::size_t n_inhibitory = 0;
    double mean_abs_excitatory = 0.0;
    double mean_abs_inhibitory = 0.0;
    /// +infinity when there are no inhibitory weights.
    double ei_ratio = std::numeric_limits<double>::infinity();
};

/// Exact zeros are counted in neither class.
synapse_census synapse_stats(const Eigen::MatrixXd& weights);

struct layer_firing {
    std::string layer;
    Eigen::VectorXd unit_means;
    double mean_activity = 0.0;
    double active_fraction = 0.0; // units whose mean activity exceeds theta
};

struct firing_stats {
    double theta = default_firing_threshold;
    /// One entry per non-input activity (V1 .. retina').
    std::vector<layer_firing> layers;
};

firing_stats compute_firing_stats(const network_params& params, std::span<const image> probe,
                                  double theta = default_firing_threshold);

/// 64 fixed stimuli on an x(4) x y(4) x s(2) x r(2) grid of bin midpoints;
/// stimulus i shows digit i % 10, instance chosen under `seed`.
std::vector<retina_image> build_probe_set(const digit_corpus& corpus, std::uint64_t seed,
                                          const trial_options& options = {});

struct development_snapshot {
    int step = 0;
    std::vector<synapse_census> synapses; // per weight layer
    firing_stats firing;
    std::vector<image> inputs;
    std::vector<image> reconstructions;
    double probe_mse = 0.0;
};

development_snapshot capture_snapshot(int step, const network_params& params, std::span<const image> probe,
                                      double theta = default_firing_threshold);

/// Inputs and reconstructions in alternating rows of up to 16 tiles.
image snapshot_mosaic(const development_snapshot& snap);

/// One row per (snapshot, weight layer); the active fraction is that of the
/// layer the weights feed into.
void write_snapshot_csv(const std::filesystem::path& path, const network_params& params,
                        std::span<const development_snapshot> snapshots);

struct metric_series {
    std::string name;
    std::vector<int> steps;
    std::vector<double> values;
};

/// ei_ratio, mean |w| and active fraction per layer, plus probe MSE.
std::vector<metric_series> snapshot_series(const network_params& params,
                                           std::span<const development_snapshot> snapshots);

struct ctp_candidate {
    int step = 0;
    std::string series;
    std::string trigger;
};

/// Flags steps where a series' smoothed slope changes sign, or where its
/// slope departs from the trailing mean by more than sensitivity trailing
/// standard deviations. Needs at least three points per series; series
/// holding non-finite values are skipped.
std::vector<ctp_candidate> detect_ctp_candidates(std::span<const metric_series> series,
                                                 double sensitivity = default_ctp_sensitivity);

} // namespace rrn
