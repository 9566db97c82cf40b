#pragma once

// What the encoding neurons carry: per-neuron property correlations,
// neuron categories, linear property decoders and the identity readout.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rrn/network.hpp"
#include "rrn/retina.hpp"

namespace rrn {

inline constexpr double default_alpha = 0.01;

struct correlation_result {
    int neuron = 0;
    std::string layer; // activity name, e.g. "V4"
    property prop = property::x;
    double r = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    bool degenerate = false;
};

/// Activities (N x width) of one layer for every image. `activity_index`
/// follows activation_record numbering; 0 is the retina.
Eigen::MatrixXd layer_activities(const network_params& params, std::span<const image> images,
                                 std::size_t activity_index);

/// Pearson r and two-sided t-test p of every unit of a layer against the
/// swept property. Defaults to the encoding layer.
std::vector<correlation_result> correlate(const trial_set& trials, const network_params& params,
                                          std::optional<std::size_t> activity_index = std::nullopt);

/// Same, from precomputed activities (N x units).
std::vector<correlation_result> correlate_activities(const Eigen::MatrixXd& activities,
                                                     std::span<const double> values, property prop,
                                                     const std::string& layer_name);

/// Unit with the smallest p-value (largest |r| on ties) for `prop`.
int top_neuron(std::span<const correlation_result> results, property prop);

struct neuron_category_map {
    double alpha = default_alpha;
    /// membership[neuron][property index] is true when p < alpha.
    std::vector<std::array<bool, 4>> membership;

    std::size_t size() const { return membership.size(); }
    bool non_specific(std::size_t neuron) const;
    double fraction(property p) const;
    double non_specific_fraction() const;
    std::size_t count(property p) const;
};

/// Requires one result for every (neuron, property) pair over `n_neurons`
/// neurons; throws completeness_error otherwise. Overlaps are allowed.
neuron_category_map categorize(std::span<const correlation_result> results, double alpha = default_alpha,
                               std::size_t n_neurons = encoding_width);

struct linear_decoder {
    Eigen::VectorXd weights;
    double intercept = 0.0;
    std::string target;

    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& encoding) const;
};

struct decoder_fit {
    linear_decoder decoder;
    double test_r2 = 0.0;
    double test_mse = 0.0;
    double train_r2 = 0.0;
    double train_mse = 0.0;
    /// Ratio of extreme singular values of the training design matrix.
    double condition_number = 0.0;
    bool rank_deficient = false;
};

struct decoder_options {
    double train_fraction = 0.8;
    /// 0 selects ordinary least squares (minimum-norm when rank deficient).
    double ridge = 0.0;
};

/// Least squares with intercept on a seeded 80/20 split; R^2 and MSE are
/// reported on the held-out part. Needs N >= 50.
decoder_fit fit_linear_decoder(const Eigen::MatrixXd& encodings, std::span<const double> targets,
                               std::uint64_t split_seed, const decoder_options& options = {});

struct identity_classifier {
    Eigen::MatrixXd weights;     // 10 x features
    Eigen::VectorXd intercepts;  // 10

    Eigen::VectorXd probabilities(const Eigen::Ref<const Eigen::RowVectorXd>& encoding) const;
    int predict(const Eigen::Ref<const Eigen::RowVectorXd>& encoding) const;
};

struct logistic_options {
    double l2 = 1e-4;
    double tolerance = 1e-6;
    int max_iterations = 10000;
    double test_fraction = 0.2;
    /// Fit on z-scored features (training-split statistics) instead of raw activities.
    bool standardize = false;
};

struct classifier_fit {
    identity_classifier model;
    double test_accuracy = 0.0;
    double train_accuracy = 0.0;
    int iterations = 0;
    double gradient_norm = 0.0;
};

/// Multinomial logistic regression on a stratified 80/20 split, fitted by
/// accelerated gradient descent until the gradient norm drops below the
/// tolerance or the iteration cap is hit.
classifier_fit fit_identity_classifier(const Eigen::MatrixXd& encodings, std::span<const int> labels,
                                       std::uint64_t split_seed, const logistic_options& options = {});

double classifier_accuracy(const identity_classifier& model, const Eigen::MatrixXd& encodings,
                           std::span<const int> labels);

/// One evaluation condition: `prop` pushed a fraction `level` of the way
/// from its canonical value toward the range extremes (alternating sides
/// across stimuli). No property means the unperturbed baseline.
struct perturbation_condition {
    std::string name;
    std::optional<property> prop;
    double level = 1.0;
};

/// "none", or "<property>" / "<property>:<level>".
perturbation_condition parse_perturbation_condition(std::string_view spec);

struct condition_accuracy {
    std::string name;
    double accuracy = 0.0;
    std::size_t n = 0;
};

std::vector<condition_accuracy> perturbation_robustness(const network_params& params,
                                                        const identity_classifier& classifier,
                                                        const digit_corpus& eval_digits,
                                                        std::span<const perturbation_condition> conditions,
                                                        const trial_options& options = {});

struct identity_correlation {
    Eigen::MatrixXd r;        // neurons x 10
    Eigen::MatrixXd p_value;  // neurons x 10
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> significant;
    std::vector<bool> degenerate; // per neuron
};

/// Point-biserial correlation of each neuron against each one-vs-rest digit
/// indicator. Requires all ten digits to be present.
identity_correlation identity_correlation_matrix(const Eigen::MatrixXd& encodings, std::span<const int> labels,
                                                 double alpha = default_alpha);

} // namespace rrn
