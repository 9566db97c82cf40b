#include "rrn/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <set>

#include "rrn/parallel.hpp"
#include "rrn/rng.hpp"

namespace rrn {

namespace {

// Chunk width for batched evaluation. Fixed so that the floating point
// results of encode_all and friends are independent of the worker count.
constexpr std::size_t eval_chunk = 64;

Eigen::MatrixXd apply_layer(const dense_layer& layer, const Eigen::MatrixXd& input, std::size_t index) {
    Eigen::MatrixXd z = layer.weights.transpose() * input;
    z.colwise() += layer.bias;
    Eigen::MatrixXd a = (1.0 / (1.0 + (-z.array()).exp())).matrix();
    if (!a.allFinite())
        throw numeric_error("non-finite activity in layer " + std::to_string(index + 1), static_cast<int>(index + 1));
    return a;
}

// Activities of layers first+1 .. last, starting from `input` at layer first.
std::vector<Eigen::MatrixXd> run_layers(const network_params& params, const Eigen::MatrixXd& input,
                                        std::size_t first, std::size_t last) {
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(last - first + 1);
    acts.push_back(input);
    for (std::size_t l = first; l < last; ++l) acts.push_back(apply_layer(params.layers[l], acts.back(), l));
    return acts;
}

void check_input(const network_params& params, const Eigen::MatrixXd& inputs) {
    if (inputs.rows() != params.spec.widths.front())
        throw argument_error("input has " + std::to_string(inputs.rows()) + " pixels, network expects " +
                             std::to_string(params.spec.widths.front()));
    if (!inputs.allFinite()) throw numeric_error("non-finite value in network input", 0);
}

template <class Fn>
void for_each_chunk(std::size_t n, Fn&& fn) {
    const std::size_t chunks = (n + eval_chunk - 1) / eval_chunk;
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t first = c * eval_chunk;
        fn(first, std::min(eval_chunk, n - first));
    });
}

} // namespace

std::string_view activation_name(activation a) {
    switch (a) {
    case activation::sigmoid: return "sigmoid";
    }
    return "?";
}

activation parse_activation(std::string_view tag) {
    if (tag == "sigmoid") return activation::sigmoid;
    throw argument_error("unknown activation '" + std::string(tag) + "'");
}

layer_spec layer_spec::standard(int w) { return {{w * w, 1024, 256, 64, 32, 64, 256, 1024, w * w}}; }

layer_spec layer_spec::desk(int w) { return {{w * w, 256, 128, 64, 32, 64, 128, 256, w * w}}; }

void layer_spec::validate() const {
    if (widths.size() < 3 || widths.size() % 2 == 0)
        throw argument_error("layer widths must have odd length >= 3");
    for (int w : widths)
        if (w <= 0) throw argument_error("layer widths must be positive");
    if (widths.front() != widths.back()) throw argument_error("first and last widths differ");
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(widths.front()))));
    if (side * side != widths.front()) throw argument_error("retina width is not a perfect square");
    if (widths[encoding_index()] != encoding_width)
        throw argument_error("encoding layer must have " + std::to_string(encoding_width) + " units");
    for (std::size_t i = 0; i < widths.size(); ++i)
        if (widths[i] != widths[widths.size() - 1 - i]) throw argument_error("widths are not symmetric");
}

int layer_spec::retina_width() const {
    return static_cast<int>(std::lround(std::sqrt(static_cast<double>(widths.front()))));
}

std::string layer_spec::activity_name(std::size_t i) const {
    const std::size_t n = widths.size();
    if (i == 0) return "retina";
    if (i == n - 1) return "retina'";
    if (i <= n / 2) return "V" + std::to_string(i);
    return "V" + std::to_string(n - 1 - i) + "'";
}

std::string layer_spec::weight_layer_name(std::size_t layer) const {
    return activity_name(layer) + "->" + activity_name(layer + 1);
}

bool network_params::all_finite() const {
    return std::all_of(layers.begin(), layers.end(),
                       [](const dense_layer& l) { return l.weights.allFinite() && l.bias.allFinite(); });
}

std::size_t network_params::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
}

bool network_params::identical_to(const network_params& other) const {
    if (!(spec == other.spec) || layers.size() != other.layers.size()) return false;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& a = layers[l];
        const auto& b = other.layers[l];
        if (a.weights.rows() != b.weights.rows() || a.weights.cols() != b.weights.cols() ||
            a.bias.size() != b.bias.size())
            return false;
        if (std::memcmp(a.weights.data(), b.weights.data(), sizeof(double) * a.weights.size()) != 0 ||
            std::memcmp(a.bias.data(), b.bias.data(), sizeof(double) * a.bias.size()) != 0)
            return false;
    }
    return true;
}

gradients gradients::zeros_like(const network_params& params) {
    gradients g;
    for (const auto& l : params.layers)
        g.layers.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                            Eigen::VectorXd::Zero(l.bias.size())});
    return g;
}

void gradients::set_zero() {
    for (auto& l : layers) {
        l.weights.setZero();
        l.bias.setZero();
    }
}

image activation_record::reconstruction() const {
    const int w = static_cast<int>(std::lround(std::sqrt(static_cast<double>(output().size()))));
    return column_to_image(output(), w);
}

network_params init_params(const layer_spec& spec, std::uint64_t seed) {
    spec.validate();
    network_params params;
    params.spec = spec;
    rng gen(seed);
    for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
        const int fan_in = spec.widths[l], fan_out = spec.widths[l + 1];
        // the sigmoid has slope 1/4 at the origin, so gain 1 shrinks the signal
        // layer by layer until the code is flat. Gain 3 keeps some of it without
        // the fresh code already sorting digits the way gain 4 does. The output
        // layer stays small so a fresh network predicts roughly 0.5 everywhere.
        const double gain = l + 2 < spec.widths.size() ? hidden_init_gain : 1.0;
        const double bound = gain / std::sqrt(static_cast<double>(fan_in));
        dense_layer layer{Eigen::MatrixXd(fan_in, fan_out), Eigen::VectorXd::Zero(fan_out)};
        for (int i = 0; i < fan_in; ++i)
            for (int j = 0; j < fan_out; ++j) layer.weights(i, j) = gen.uniform(-bound, bound);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

Eigen::MatrixXd images_to_columns(std::span<const image> images) {
    if (images.empty()) return {};
    const auto rows = static_cast<Eigen::Index>(images.front().size());
    Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(images.size()));
    for (std::size_t c = 0; c < images.size(); ++c) {
        if (static_cast<Eigen::Index>(images[c].size()) != rows)
            throw argument_error("images_to_columns: images differ in size");
        m.col(static_cast<Eigen::Index>(c)) =
            Eigen::Map<const Eigen::VectorXd>(images[c].pixels.data(), rows);
    }
    return m;
}

image column_to_image(const Eigen::Ref<const Eigen::VectorXd>& column, int width) {
    image img(width, width);
    if (column.size() != static_cast<Eigen::Index>(img.size()))
        throw argument_error("column_to_image: size is not width^2");
    Eigen::Map<Eigen::VectorXd>(img.pixels.data(), column.size()) = column;
    return img;
}

std::vector<Eigen::MatrixXd> forward_batch(const network_params& params, const Eigen::MatrixXd& inputs) {
    check_input(params, inputs);
    const std::size_t enc = params.spec.encoding_index();
    auto acts = run_layers(params, inputs, 0, enc);
    auto tail = run_layers(params, acts.back(), enc, params.layers.size());
    acts.insert(acts.end(), std::make_move_iterator(tail.begin() + 1), std::make_move_iterator(tail.end()));
    return acts;
}

Eigen::MatrixXd decode_batch(const network_params& params, const Eigen::MatrixXd& encodings) {
    if (encodings.rows() != encoding_width)
        throw argument_error("encoding must have " + std::to_string(encoding_width) + " entries, got " +
                             std::to_string(encodings.rows()));
    auto acts = run_layers(params, encodings, params.spec.encoding_index(), params.layers.size());
    return std::move(acts.back());
}

activation_record forward(const network_params& params, const image& input) {
    const Eigen::MatrixXd x = images_to_columns(std::span<const image>(&input, 1));
    auto acts = forward_batch(params, x);
    activation_record rec;
    rec.encoding_layer = params.spec.encoding_index();
    rec.activities.reserve(acts.size());
    for (auto& a : acts) rec.activities.emplace_back(a.col(0));
    return rec;
}

Eigen::VectorXd encode(const network_params& params, const image& input) {
    const Eigen::MatrixXd x = images_to_columns(std::span<const image>(&input, 1));
    check_input(params, x);
    auto acts = run_layers(params, x, 0, params.spec.encoding_index());
    return acts.back().col(0);
}

image decode_from_encoding(const network_params& params, std::span<const double> encoding) {
    if (encoding.size() != static_cast<std::size_t>(encoding_width))
        throw argument_error("encoding must have " + std::to_string(encoding_width) + " entries, got " +
                             std::to_string(encoding.size()));
    const Eigen::MatrixXd e = Eigen::Map<const Eigen::VectorXd>(encoding.data(), encoding_width);
    return column_to_image(decode_batch(params, e).col(0), params.spec.retina_width());
}

image decode_from_encoding(const network_params& params, const Eigen::VectorXd& encoding) {
    return decode_from_encoding(params, std::span<const double>(encoding.data(), static_cast<std::size_t>(encoding.size())));
}

double reconstruction_loss(const activation_record& record, const image& target) {
    const auto& out = record.output();
    if (out.size() != static_cast<Eigen::Index>(target.size()))
        throw argument_error("reconstruction and target differ in size");
    const Eigen::Map<const Eigen::VectorXd> t(target.pixels.data(), out.size());
    return (out - t).squaredNorm() / static_cast<double>(out.size());
}

double backward_batch(const network_params& params, const std::vector<Eigen::MatrixXd>& acts,
                      const Eigen::MatrixXd& targets, gradients& grads) {
    const Eigen::MatrixXd& out = acts.back();
    if (out.rows() != targets.rows() || out.cols() != targets.cols())
        throw argument_error("backward: target shape does not match reconstruction");
    const double denom = static_cast<double>(out.rows()) * static_cast<double>(out.cols());
    const Eigen::MatrixXd diff = out - targets;
    const double loss = diff.squaredNorm() / denom;

    if (grads.layers.size() != params.layers.size()) grads = gradients::zeros_like(params);
    // dL/dz at the output: 2 (a - t) / (P B) * a (1 - a)
    Eigen::MatrixXd delta = ((2.0 / denom) * diff.array() * out.array() * (1.0 - out.array())).matrix();
    for (std::size_t l = params.layers.size(); l-- > 0;) {
        grads.layers[l].weights.noalias() = acts[l] * delta.transpose();
        grads.layers[l].bias = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd back = params.layers[l].weights * delta;
            delta = (back.array() * acts[l].array() * (1.0 - acts[l].array())).matrix();
        }
    }
    return loss;
}

gradients backward(const network_params& params, const activation_record& record, const image& target) {
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(record.activities.size());
    for (const auto& a : record.activities) acts.emplace_back(a);
    const Eigen::MatrixXd t = images_to_columns(std::span<const image>(&target, 1));
    gradients g = gradients::zeros_like(params);
    backward_batch(params, acts, t, g);
    return g;
}

Eigen::MatrixXd encode_all(const network_params& params, std::span<const image> images) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(images.size()), encoding_width);
    for_each_chunk(images.size(), [&](std::size_t first, std::size_t count) {
        const Eigen::MatrixXd x = images_to_columns(images.subspan(first, count));
        check_input(params, x);
        auto acts = run_layers(params, x, 0, params.spec.encoding_index());
        out.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count)) = acts.back().transpose();
    });
    return out;
}

std::vector<image> reconstruct_all(const network_params& params, std::span<const image> images) {
    std::vector<image> out(images.size());
    const int w = params.spec.retina_width();
    for_each_chunk(images.size(), [&](std::size_t first, std::size_t count) {
        const auto acts = forward_batch(params, images_to_columns(images.subspan(first, count)));
        for (std::size_t i = 0; i < count; ++i)
            out[first + i] = column_to_image(acts.back().col(static_cast<Eigen::Index>(i)), w);
    });
    return out;
}

double mean_reconstruction_mse(const network_params& params, std::span<const image> images) {
    if (images.empty()) return 0.0;
    std::vector<double> per_image(images.size());
    for_each_chunk(images.size(), [&](std::size_t first, std::size_t count) {
        const Eigen::MatrixXd x = images_to_columns(images.subspan(first, count));
        const auto acts = forward_batch(params, x);
        const Eigen::VectorXd sq = (acts.back() - x).colwise().squaredNorm().transpose();
        for (std::size_t i = 0; i < count; ++i)
            per_image[first + i] = sq(static_cast<Eigen::Index>(i)) / static_cast<double>(x.rows());
    });
    double acc = 0.0;
    for (double v : per_image) acc += v;
    return acc / static_cast<double>(per_image.size());
}

// ---------------------------------------------------------------------------

void train_config::validate() const {
    if (total_steps < 0) throw argument_error("total_steps must be non-negative");
    if (batch_size < 1) throw argument_error("batch_size must be at least 1");
    if (!(learning_rate > 0.0)) throw argument_error("learning_rate must be positive");
    if (optimizer != "adam" && optimizer != "sgd")
        throw argument_error("unknown optimizer '" + optimizer + "'");
}

namespace {

class sgd_optimizer final : public optimizer {
public:
    explicit sgd_optimizer(double lr) : lr_(lr) {}
    void apply(network_params& params, const gradients& grads) override {
        for (std::size_t l = 0; l < params.layers.size(); ++l) {
            params.layers[l].weights.noalias() -= lr_ * grads.layers[l].weights;
            params.layers[l].bias.noalias() -= lr_ * grads.layers[l].bias;
        }
    }

private:
    double lr_;
};

class adam_optimizer final : public optimizer {
public:
    adam_optimizer(const train_config& c, const network_params& params)
        : lr_(c.learning_rate), b1_(c.beta1), b2_(c.beta2), eps_(c.epsilon),
          m_(gradients::zeros_like(params)), v_(gradients::zeros_like(params)) {}

    void apply(network_params& params, const gradients& grads) override {
        ++t_;
        const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
        for (std::size_t l = 0; l < params.layers.size(); ++l) {
            auto& w = params.layers[l].weights;
            auto& b = params.layers[l].bias;
            update(w.data(), grads.layers[l].weights.data(), m_.layers[l].weights.data(),
                   v_.layers[l].weights.data(), w.size(), c1, c2);
            update(b.data(), grads.layers[l].bias.data(), m_.layers[l].bias.data(), v_.layers[l].bias.data(),
                   b.size(), c1, c2);
        }
    }

private:
    // single fused pass; the update is memory bound
    void update(double* p, const double* g, double* m, double* v, Eigen::Index n, double c1, double c2) const {
        const double step = lr_ / c1, inv_c2 = 1.0 / c2;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double mi = b1_ * m[i] + (1.0 - b1_) * g[i];
            const double vi = b2_ * v[i] + (1.0 - b2_) * g[i] * g[i];
            m[i] = mi;
            v[i] = vi;
            p[i] -= step * mi / (std::sqrt(vi * inv_c2) + eps_);
        }
    }

    double lr_, b1_, b2_, eps_;
    gradients m_, v_;
    long t_ = 0;
};

} // namespace

std::unique_ptr<optimizer> make_optimizer(const train_config& config, const network_params& params) {
    config.validate();
    if (config.optimizer == "sgd") return std::make_unique<sgd_optimizer>(config.learning_rate);
    return std::make_unique<adam_optimizer>(config, params);
}

fixed_image_source::fixed_image_source(std::vector<image> images, std::uint64_t seed)
    : images_(std::move(images)), seed_(seed) {
    if (images_.empty()) throw argument_error("fixed_image_source needs at least one image");
}

image fixed_image_source::next() {
    if (cursor_ == order_.size()) {
        order_.resize(images_.size());
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
        rng gen(seed_ + 0x51ed2701ULL * ++epoch_);
        shuffle(order_, gen);
        cursor_ = 0;
    }
    return images_[order_[cursor_++]];
}

double metric_log::window_mean(std::size_t first, std::size_t count) const {
    const std::size_t end = std::min(losses.size(), first + count);
    if (first >= end) return 0.0;
    double acc = 0.0;
    for (std::size_t i = first; i < end; ++i) acc += losses[i].batch_mse;
    return acc / static_cast<double>(end - first);
}

train_result train(network_params params, const train_config& config, stimulus_source& sampler,
                   const train_hooks& hooks) {
    config.validate();
    params.spec.validate();
    const std::set<int> snapshots(config.snapshot_schedule.begin(), config.snapshot_schedule.end());
    int last_good = -1;
    auto fire = [&](int step) {
        if (!snapshots.contains(step)) return;
        for (const auto& hook : hooks.on_snapshot) hook(step, params);
        last_good = step;
    };

    metric_log log;
    fire(0);
    if (config.total_steps == 0) return {std::move(params), std::move(log)};

    log.losses.reserve(static_cast<std::size_t>(config.total_steps));
    auto opt = make_optimizer(config, params);
    gradients grads = gradients::zeros_like(params);
    std::vector<image> batch(static_cast<std::size_t>(config.batch_size));

    for (int step = 1; step <= config.total_steps; ++step) {
        for (auto& img : batch) img = sampler.next();
        const Eigen::MatrixXd x = images_to_columns(batch);
        double loss = 0.0;
        try {
            const auto acts = forward_batch(params, x);
            loss = backward_batch(params, acts, x, grads);
        } catch (const numeric_error& e) {
            throw training_diverged(std::string(e.what()) + " at step " + std::to_string(step), step,
                                    last_good, std::move(log));
        }
        if (!std::isfinite(loss))
            throw training_diverged("non-finite loss at step " + std::to_string(step), step, last_good,
                                    std::move(log));
        opt->apply(params, grads);
        log.losses.push_back({step, loss});
        if (snapshots.contains(step) && !params.all_finite())
            throw training_diverged("non-finite parameters after step " + std::to_string(step), step,
                                    last_good, std::move(log));
        fire(step);
    }
    return {std::move(params), std::move(log)};
}

std::vector<int> geometric_schedule(int total_steps) {
    std::vector<int> out{0};
    for (long decade = 1; decade <= total_steps; decade *= 10)
        for (long m : {1L, 2L, 5L})
            if (decade * m <= total_steps) out.push_back(static_cast<int>(decade * m));
    if (out.back() != total_steps) out.push_back(total_steps);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace rrn
