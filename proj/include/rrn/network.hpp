#pragma once

// Dense recognition-reconstruction autoencoder: a sigmoid MLP whose
// encoder (V1..V4) narrows the retina to a 32-unit code and whose decoder
// (V3'..V1', retina') mirrors it back out.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rrn/error.hpp"
#include "rrn/image.hpp"

namespace rrn {

inline constexpr int encoding_width = 32;

enum class activation { sigmoid };

std::string_view activation_name(activation a);
activation parse_activation(std::string_view tag);

struct layer_spec {
    std::vector<int> widths;
    activation act = activation::sigmoid;

    /// [4096, 1024, 256, 64, 32, 64, 256, 1024, 4096]
    static layer_spec standard(int retina_width = 64);
    /// [W*W, 256, 128, 64, 32, 64, 128, 256, W*W]; the taper used for
    /// desk-scale runs on a single core.
    static layer_spec desk(int retina_width = 64);

    /// Throws argument_error unless first == last == W*W for an integer W,
    /// the middle width is 32 and the widths are palindromic.
    void validate() const;

    int retina_width() const;
    std::size_t weight_layers() const { return widths.size() - 1; }
    /// Index into activation_record::activities of the encoding layer.
    std::size_t encoding_index() const { return widths.size() / 2; }
    /// "retina", "V1".."V4", "V3'".."V1'", "retina'"
    std::string activity_name(std::size_t activity_index) const;
    /// "retina->V1" style name of weight layer `layer` (0-based).
    std::string weight_layer_name(std::size_t layer) const;

    bool operator==(const layer_spec&) const = default;
};

/// One fully connected layer. Weights are fan_in x fan_out so that the
/// pre-activation of a column input x is weights^T x + bias.
struct dense_layer {
    Eigen::MatrixXd weights;
    Eigen::VectorXd bias;
};

struct network_params {
    layer_spec spec;
    std::vector<dense_layer> layers;

    bool all_finite() const;
    std::size_t parameter_count() const;
    /// Bitwise comparison of every weight and bias.
    bool identical_to(const network_params& other) const;
};

/// Same shape as network_params; holds d(loss)/d(parameter).
struct gradients {
    std::vector<dense_layer> layers;

    static gradients zeros_like(const network_params& params);
    void set_zero();
};

/// Post-nonlinearity activity of every layer for one input.
/// activities[0] is the retina input, activities.back() the reconstruction.
struct activation_record {
    std::vector<Eigen::VectorXd> activities;
    std::size_t encoding_layer = 0;

    const Eigen::VectorXd& encoding() const { return activities[encoding_layer]; }
    const Eigen::VectorXd& output() const { return activities.back(); }
    image reconstruction() const;
};

inline constexpr double hidden_init_gain = 3.0;

/// Weights uniform in +-gain/sqrt(fan_in) with gain = hidden_init_gain for
/// every layer but the output one (gain 1); biases zero.
network_params init_params(const layer_spec& spec, std::uint64_t seed);

activation_record forward(const network_params& params, const image& input);

/// Encoder half only: retina -> 32-unit code.
Eigen::VectorXd encode(const network_params& params, const image& input);

/// Decoder half only. Throws argument_error when encoding.size() != 32.
image decode_from_encoding(const network_params& params, std::span<const double> encoding);
image decode_from_encoding(const network_params& params, const Eigen::VectorXd& encoding);

/// Mean squared error over all pixels of the reconstruction.
double reconstruction_loss(const activation_record& record, const image& target);

/// Gradient of reconstruction_loss for a single sample.
gradients backward(const network_params& params, const activation_record& record,
                   const image& target);

// Batched variants; one sample per column.

/// Returns activities per layer, each (width x batch).
std::vector<Eigen::MatrixXd> forward_batch(const network_params& params,
                                           const Eigen::MatrixXd& inputs);
/// Runs forward_batch from the encoding layer on; returns the reconstruction.
Eigen::MatrixXd decode_batch(const network_params& params, const Eigen::MatrixXd& encodings);
/// Accumulates d(mean over batch of per-sample MSE)/d(params) into `grads`
/// (overwriting them). Returns the batch mean loss.
double backward_batch(const network_params& params, const std::vector<Eigen::MatrixXd>& acts,
                      const Eigen::MatrixXd& targets, gradients& grads);

/// Stacks images as columns.
Eigen::MatrixXd images_to_columns(std::span<const image> images);
image column_to_image(const Eigen::Ref<const Eigen::VectorXd>& column, int width);

/// N x 32 encodings, evaluated in fixed-size chunks so the result does not
/// depend on the worker count.
Eigen::MatrixXd encode_all(const network_params& params, std::span<const image> images);
std::vector<image> reconstruct_all(const network_params& params, std::span<const image> images);
/// Mean of per-image reconstruction MSE (input is also the target).
double mean_reconstruction_mse(const network_params& params, std::span<const image> images);

// ---------------------------------------------------------------------------
// Optimization

struct train_config {
    int total_steps = 0;
    int batch_size = 32;
    double learning_rate = 2e-4;
    std::string optimizer = "adam"; // "adam" or "sgd"
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    std::vector<int> snapshot_schedule;

    void validate() const;
};

class optimizer {
public:
    virtual ~optimizer() = default;
    virtual void apply(network_params& params, const gradients& grads) = 0;
};

std::unique_ptr<optimizer> make_optimizer(const train_config& config, const network_params& params);

/// Anything that yields training stimuli. Implementations own their RNG.
class stimulus_source {
public:
    virtual ~stimulus_source() = default;
    virtual image next() = 0;
};

/// Cycles through a fixed list of images in a seeded random order.
class fixed_image_source final : public stimulus_source {
public:
    fixed_image_source(std::vector<image> images, std::uint64_t seed);
    image next() override;

private:
    std::vector<image> images_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
    std::uint64_t seed_;
    std::uint64_t epoch_ = 0;
};

struct step_loss {
    int step = 0;
    double batch_mse = 0.0;
};

struct metric_log {
    std::vector<step_loss> losses;

    bool empty() const { return losses.empty(); }
    /// Mean batch MSE over entries [first, first + count).
    double window_mean(std::size_t first, std::size_t count) const;
};

/// Observers run at each snapshot step with read-only access to params.
/// Step s means "after s updates"; step 0 fires before training starts.
struct train_hooks {
    std::vector<std::function<void(int step, const network_params&)>> on_snapshot;
};

struct train_result {
    network_params params;
    metric_log log;
};

/// Raised when a loss or activation goes non-finite during train().
struct training_diverged : numeric_error {
    training_diverged(const std::string& what, int failed_step, int last_snapshot, metric_log log)
        : numeric_error(what, -1), step(failed_step), last_good_step(last_snapshot),
          partial_log(std::move(log)) {}
    int step;
    /// Most recent snapshot step whose hooks ran on finite params; -1 if none.
    int last_good_step;
    metric_log partial_log;
};

/// Runs config.total_steps mini-batch updates. Input and target are the
/// same stimulus. Single-threaded and bit-reproducible.
train_result train(network_params params, const train_config& config, stimulus_source& sampler,
                   const train_hooks& hooks = {});

/// Steps 0, 1, 2, 5, 10, 20, 50, ... up to and including total_steps.
std::vector<int> geometric_schedule(int total_steps);

} // namespace rrn
