#pragma once

// Population structure of the encoding layer: similarity matrices over
// property x identity grids, tSNE embeddings, most responsive units.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rrn/network.hpp"
#include "rrn/retina.hpp"

namespace rrn {

inline constexpr int grid_blocks = 10;
inline constexpr int grid_digits = 10;

struct stimulus_grid {
    property prop = property::x;
    int n_blocks = grid_blocks;
    int digits_per_block = grid_digits;
    std::vector<double> levels;        // one per block
    std::vector<retina_image> stimuli; // block-major, identities 0..9 inside a block
    std::vector<std::size_t> corpus_index;

    std::size_t size() const { return stimuli.size(); }
    int block_of(std::size_t i) const { return static_cast<int>(i) / digits_per_block; }
    int identity_of(std::size_t i) const { return static_cast<int>(i) % digits_per_block; }
    std::vector<image> images() const;
};

/// Ten equally spaced levels of `prop` over its configured range, one
/// randomly chosen instance per digit per level. Throws corpus_error when a
/// digit class is missing.
stimulus_grid build_stimulus_grid(property prop, const digit_corpus& corpus, const stimulus_props& fixed,
                                  std::uint64_t seed, const trial_options& options = {});

struct similarity_result {
    Eigen::MatrixXd values;
    /// Rows whose encoding has zero variance; they correlate 0 with every partner.
    std::vector<bool> degenerate;
};

/// Pearson correlation between every pair of rows.
similarity_result similarity_from_encodings(const Eigen::MatrixXd& encodings);
similarity_result similarity_matrix(const stimulus_grid& grid, const network_params& params);

struct paradiagonal {
    double stripe_strength = 0.0;
    double background = 0.0;
    double contrast() const { return stripe_strength - background; }
};

/// Same-digit entries across different blocks versus entries differing in
/// both digit and block.
paradiagonal paradiagonal_score(const Eigen::MatrixXd& matrix, int digits_per_block = grid_digits);

struct tsne_options {
    double perplexity = 30.0;
    int n_iter = 1000;
    double learning_rate = 200.0;
    double exaggeration = 12.0;
    int exaggeration_iters = 250;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
};

struct embedding {
    Eigen::MatrixXd coords; // N x 2
    std::vector<stimulus_props> meta;
    /// KL(P || Q) after every iteration, against the unexaggerated P.
    std::vector<double> kl_trace;
    double kl() const { return kl_trace.empty() ? 0.0 : kl_trace.back(); }
};

/// Exact O(N^2) tSNE. Throws argument_error unless 3 * perplexity <= N <= 5000.
embedding tsne_embed(const Eigen::MatrixXd& points, std::uint64_t seed, const tsne_options& options = {});

/// Indices of the k largest entries of every row, ties to the lower index.
std::vector<std::vector<int>> top_responsive(const Eigen::MatrixXd& encodings, int k);

struct favorites {
    std::vector<std::size_t> ranking; // top-k stimulus indices, most active first
    std::vector<image> top;
    image mean_image; // pixelwise mean over the top `n_mean`
};

favorites favorite_images(std::span<const image> stimuli, const Eigen::MatrixXd& encodings, int neuron, int k,
                          int n_mean = 20);

/// Bin index in [0, n_bins) of each value over [lo, hi].
std::vector<int> bin_values(std::span<const double> values, int n_bins, double lo, double hi);

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
/// Maps [-1, 1] to black..white.
image correlation_heatmap(const Eigen::MatrixXd& m);
void write_embedding_csv(const std::filesystem::path& path, const embedding& emb);

} // namespace rrn
