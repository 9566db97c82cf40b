#pragma once

// Learning and forgetting: sequential training phases on novel and known
// stimuli, evaluation on fixed sets, and synaptic plasticity comparisons.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rrn/network.hpp"
#include "rrn/retina.hpp"
#include "rrn/stats.hpp"

namespace rrn {

struct curriculum_phase {
    std::string name;
    std::string source = "digits_only"; // novel_only, digits_only or mixed
    int n_steps = 0;
};

struct eval_set {
    std::string name;
    std::vector<image> images;
};

struct curriculum_settings {
    train_config training;     // total_steps and snapshot_schedule are ignored
    int eval_every = 500;
    /// Extra evaluations every `dense_every` steps over the first `dense_steps` of each phase.
    int dense_every = 0;
    int dense_steps = 0;
    std::uint64_t seed = 0;
    novel_kind novel = novel_kind::symbol_x;
    double mixed_novel_fraction = 0.5;
    trial_options stimuli;
};

struct curriculum_eval {
    int step = 0;  // global step
    int phase = 0;
    std::vector<double> mse; // per eval set
};

struct curriculum_log {
    std::vector<std::string> eval_names;
    std::vector<std::string> phase_names;
    std::vector<curriculum_eval> evals;
    /// Global step at the start of every phase, then the final step.
    std::vector<int> boundaries;
    /// Params at every entry of `boundaries`.
    std::vector<network_params> boundary_params;
    bool diverged = false;
    std::string failure;
};

struct curriculum_result {
    network_params params;
    curriculum_log log;
};

/// Runs the phases back to back. Each phase starts a fresh optimizer.
/// Divergence stops the run; the log and the last boundary snapshot survive
/// and `log.diverged` is set.
curriculum_result run_curriculum(network_params params, std::span<const curriculum_phase> phases,
                                 std::span<const eval_set> evals, const digit_corpus& digits,
                                 const curriculum_settings& settings);

void write_curriculum_csv(const std::filesystem::path& path, const curriculum_log& log);

struct plasticity_report {
    std::size_t layer = 0;
    std::string layer_name;
    std::vector<double> delta_a; // |dw| per synapse
    std::vector<double> delta_b;
    double mean_a = 0.0;
    double mean_b = 0.0;
    /// mean_a / mean_b; +infinity (and degenerate) when mean_b is 0.
    double ratio = std::numeric_limits<double>::infinity();
    bool degenerate = false;
    welch_result test;
};

plasticity_report plasticity_from_deltas(std::vector<double> delta_a, std::vector<double> delta_b);

/// |dw| of phase A against phase B on one weight layer (default retina->V1).
/// Throws shape_error when the four parameter sets disagree in shape.
plasticity_report plasticity_compare(const network_params& before_a, const network_params& after_a,
                                     const network_params& before_b, const network_params& after_b,
                                     std::size_t layer = 0);

std::vector<plasticity_report> compare_weight_deltas(const network_params& before_a, const network_params& after_a,
                                                     const network_params& before_b, const network_params& after_b);

void write_plasticity_csv(const std::filesystem::path& path, std::span<const plasticity_report> reports);

/// |dw| of the first `n_units` target units, one tile per unit (reshaped to
/// a square when the fan-in is square), scaled by `scale` (max when 0).
image weight_delta_heatmap(const network_params& before, const network_params& after, std::size_t layer,
                           int n_units = 64, double scale = 0.0);

struct forgetting_entry {
    std::string eval_set;
    std::vector<double> boundary_mse; // at every log boundary
    double min_mse = 0.0;
    int min_step = 0;
    double final_mse = 0.0;
    std::vector<double> final_minus_boundary;
    /// Relative change of MSE across each phase: (end - start) / start.
    std::vector<double> phase_change;
};

/// Needs a log spanning at least two phases.
std::vector<forgetting_entry> forgetting_summary(const curriculum_log& log);

} // namespace rrn
