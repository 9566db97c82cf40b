#pragma once

// Command-line front end. Every command is also callable in-process.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rrn/curriculum.hpp"
#include "rrn/network.hpp"
#include "rrn/retina.hpp"

namespace rrn {

enum exit_code : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_usage = 2,
    exit_artifact = 3,
    exit_numeric = 4,
};

struct run_config {
    // [run]
    std::uint64_t seed = 0;
    std::filesystem::path out = "rrn_out";
    int workers = 1;
    std::filesystem::path checkpoint;

    // [data]
    std::filesystem::path images;
    std::filesystem::path labels;
    std::string corpus = "mnist"; // mnist or tiny10
    std::size_t train_count = 1000;
    std::size_t eval_offset = 4000;
    std::size_t eval_count = 1000;

    // [retina]
    int retina_width = 64;
    property_ranges ranges;

    // [network]
    layer_spec spec = layer_spec::desk(64);

    // [train]
    train_config training;
    std::uint64_t probe_seed = 0;

    // [analysis]
    double alpha = 0.01;
    std::size_t swept_trials = 512;
    std::size_t mixed_trials = 2000;
    std::size_t identity_count = 1000;
    std::size_t tsne_points = 1000;
    double perplexity = 30.0;
    int tsne_iterations = 1000;
    double logistic_l2 = 1e-4;
    double ridge = 0.0;

    // [perturb]
    std::string role = "x";
    int grid_values = 11;
    int sweep_positions = 9;
    std::size_t lesion_count = 500;

    // [curriculum]
    std::vector<curriculum_phase> phases;
    int control_steps = 10000;
    int eval_every = 500;
    int dense_every = 10;
    int dense_steps = 500;
    novel_kind novel = novel_kind::symbol_x;
    std::size_t curriculum_eval_count = 128;
    bool plasticity_all_layers = false;

    // [render]
    std::string render_kind = "digit";
    std::size_t render_index = 0;
    stimulus_props render_props;

    trial_options trials() const { return {ranges, retina_width, std::nullopt}; }
};

/// Raw key/value settings, keyed by bare key name.
using setting_map = std::map<std::string, std::string>;

/// Keys accepted in config files and as `--key` flags, with their sections.
const std::vector<std::pair<std::string, std::string>>& config_keys();

/// Reads an INI file; unknown sections or keys throw config_error.
setting_map read_config_file(const std::filesystem::path& path);

/// Builds and validates a run_config; `command` decides which paths must
/// exist. Throws config_error naming the offending key.
run_config resolve_config(const setting_map& settings, const std::string& command);

/// Canonical INI rendering of the resolved settings.
std::string render_config(const setting_map& settings);

int cmd_train(const run_config& config, std::ostream& log);
int cmd_analyze(const run_config& config, std::ostream& log);
int cmd_perturb(const run_config& config, std::ostream& log);
int cmd_curriculum(const run_config& config, std::ostream& log);
int cmd_render(const run_config& config, std::ostream& log);

/// Writes manifest.json in `dir`: every other regular file with its SHA-256.
void write_manifest(const std::filesystem::path& dir);

/// Full command-line entry point; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace rrn
