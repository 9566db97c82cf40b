#include "rrn/property_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "rrn/error.hpp"
#include "rrn/parallel.hpp"
#include "rrn/rng.hpp"
#include "rrn/stats.hpp"

namespace rrn {

Eigen::MatrixXd layer_activities(const network_params& params, std::span<const image> images,
                                 std::size_t activity_index) {
    if (activity_index >= params.spec.widths.size()) throw argument_error("layer index out of range");
    if (activity_index == params.spec.encoding_index()) return encode_all(params, images);
    constexpr std::size_t chunk = 64;
    Eigen::MatrixXd out(static_cast<Eigen::Index>(images.size()), params.spec.widths[activity_index]);
    parallel_for((images.size() + chunk - 1) / chunk, [&](std::size_t c) {
        const std::size_t first = c * chunk, count = std::min(chunk, images.size() - first);
        const auto acts = forward_batch(params, images_to_columns(images.subspan(first, count)));
        out.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count)) =
            acts[activity_index].transpose();
    });
    return out;
}

std::vector<correlation_result> correlate_activities(const Eigen::MatrixXd& activities,
                                                     std::span<const double> values, property prop,
                                                     const std::string& layer_name) {
    const auto n = static_cast<std::size_t>(activities.rows());
    if (n != values.size()) throw argument_error("correlate: activity rows do not match property values");
    if (n < 3) throw argument_error("correlate needs at least 3 trials");
    std::vector<correlation_result> out;
    out.reserve(static_cast<std::size_t>(activities.cols()));
    std::vector<double> unit(n);
    for (Eigen::Index k = 0; k < activities.cols(); ++k) {
        for (std::size_t i = 0; i < n; ++i) unit[i] = activities(static_cast<Eigen::Index>(i), k);
        const auto pr = pearson(unit, values);
        correlation_result res;
        res.neuron = static_cast<int>(k);
        res.layer = layer_name;
        res.prop = prop;
        res.r = pr.r;
        res.degenerate = pr.degenerate;
        res.p_value = pr.degenerate ? 1.0 : pearson_p_value(pr.r, n);
        res.n = n;
        out.push_back(std::move(res));
    }
    return out;
}

std::vector<correlation_result> correlate(const trial_set& trials, const network_params& params,
                                          std::optional<std::size_t> activity_index) {
    if (!trials.swept) throw argument_error("correlate needs a trial set with a swept property");
    if (trials.size() < 3) throw argument_error("correlate needs at least 3 trials");
    const std::size_t layer = activity_index.value_or(params.spec.encoding_index());
    std::vector<image> images;
    images.reserve(trials.size());
    for (const auto& s : trials.stimuli) images.push_back(s.pixels);
    return correlate_activities(layer_activities(params, images, layer), trials.property_values, *trials.swept,
                                params.spec.activity_name(layer));
}

int top_neuron(std::span<const correlation_result> results, property prop) {
    const correlation_result* best = nullptr;
    for (const auto& r : results) {
        if (r.prop != prop) continue;
        if (!best || r.p_value < best->p_value ||
            (r.p_value == best->p_value && std::abs(r.r) > std::abs(best->r)))
            best = &r;
    }
    if (!best) throw argument_error("no correlation results for property " + std::string(property_name(prop)));
    return best->neuron;
}

bool neuron_category_map::non_specific(std::size_t neuron) const {
    const auto& m = membership.at(neuron);
    return std::none_of(m.begin(), m.end(), [](bool b) { return b; });
}

std::size_t neuron_category_map::count(property p) const {
    const auto k = static_cast<std::size_t>(p);
    return static_cast<std::size_t>(
        std::count_if(membership.begin(), membership.end(), [k](const auto& m) { return m[k]; }));
}

double neuron_category_map::fraction(property p) const {
    return membership.empty() ? 0.0 : static_cast<double>(count(p)) / static_cast<double>(membership.size());
}

double neuron_category_map::non_specific_fraction() const {
    if (membership.empty()) return 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < membership.size(); ++i) n += non_specific(i) ? 1 : 0;
    return static_cast<double>(n) / static_cast<double>(membership.size());
}

neuron_category_map categorize(std::span<const correlation_result> results, double alpha, std::size_t n_neurons) {
    std::vector<std::array<int, 4>> seen(n_neurons, {0, 0, 0, 0});
    neuron_category_map map;
    map.alpha = alpha;
    map.membership.assign(n_neurons, {false, false, false, false});
    for (const auto& r : results) {
        if (r.neuron < 0 || static_cast<std::size_t>(r.neuron) >= n_neurons)
            throw completeness_error("correlation result for neuron " + std::to_string(r.neuron) + " out of range");
        const auto k = static_cast<std::size_t>(r.prop);
        ++seen[static_cast<std::size_t>(r.neuron)][k];
        if (!r.degenerate && r.p_value < alpha) map.membership[static_cast<std::size_t>(r.neuron)][k] = true;
    }
    for (std::size_t i = 0; i < n_neurons; ++i)
        for (property p : all_properties)
            if (seen[i][static_cast<std::size_t>(p)] == 0)
                throw completeness_error("missing correlation for neuron " + std::to_string(i) + ", property " +
                                         std::string(property_name(p)));
    return map;
}

// ---------------------------------------------------------------------------

double linear_decoder::predict(const Eigen::Ref<const Eigen::RowVectorXd>& encoding) const {
    return encoding.dot(weights) + intercept;
}

namespace {

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> random_split(std::size_t n, double train_fraction,
                                                                         std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng gen(seed);
    shuffle(idx, gen);
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
    return {{idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train)},
            {idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end()}};
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

} // namespace

decoder_fit fit_linear_decoder(const Eigen::MatrixXd& encodings, std::span<const double> targets,
                               std::uint64_t split_seed, const decoder_options& options) {
    const auto n = static_cast<std::size_t>(encodings.rows());
    if (n != targets.size()) throw argument_error("fit_linear_decoder: rows do not match targets");
    if (n < 50) throw argument_error("fit_linear_decoder needs at least 50 samples");
    if (!(options.ridge >= 0.0)) throw argument_error("ridge penalty must be non-negative");

    const auto [train_idx, test_idx] = random_split(n, options.train_fraction, split_seed);
    const Eigen::Index d = encodings.cols();
    Eigen::MatrixXd design(static_cast<Eigen::Index>(train_idx.size()), d + 1);
    design.leftCols(d) = take_rows(encodings, train_idx);
    design.col(d).setOnes();
    Eigen::VectorXd y(static_cast<Eigen::Index>(train_idx.size()));
    for (std::size_t i = 0; i < train_idx.size(); ++i) y(static_cast<Eigen::Index>(i)) = targets[train_idx[i]];

    decoder_fit fit;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design);
    const auto& sv = svd.singularValues();
    fit.condition_number = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();

    Eigen::VectorXd beta;
    if (options.ridge > 0.0) {
        Eigen::MatrixXd gram = design.transpose() * design;
        gram.diagonal().head(d).array() += options.ridge * static_cast<double>(train_idx.size());
        beta = gram.ldlt().solve(design.transpose() * y);
    } else {
        const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
        fit.rank_deficient = cod.rank() < design.cols();
        beta = cod.solve(y);
    }
    fit.decoder.weights = beta.head(d);
    fit.decoder.intercept = beta(d);

    auto evaluate = [&](std::span<const std::size_t> rows, double& r2, double& mse) {
        std::vector<double> actual, predicted;
        for (std::size_t i : rows) {
            actual.push_back(targets[i]);
            predicted.push_back(fit.decoder.predict(encodings.row(static_cast<Eigen::Index>(i))));
        }
        r2 = r_squared(actual, predicted);
        mse = mean_squared_difference(actual, predicted);
    };
    evaluate(train_idx, fit.train_r2, fit.train_mse);
    evaluate(test_idx, fit.test_r2, fit.test_mse);
    return fit;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd identity_classifier::probabilities(const Eigen::Ref<const Eigen::RowVectorXd>& encoding) const {
    Eigen::VectorXd z = weights * encoding.transpose() + intercepts;
    z.array() -= z.maxCoeff();
    z = z.array().exp().matrix();
    return z / z.sum();
}

int identity_classifier::predict(const Eigen::Ref<const Eigen::RowVectorXd>& encoding) const {
    Eigen::Index best;
    (weights * encoding.transpose() + intercepts).maxCoeff(&best);
    return static_cast<int>(best);
}

double classifier_accuracy(const identity_classifier& model, const Eigen::MatrixXd& encodings,
                           std::span<const int> labels) {
    if (static_cast<std::size_t>(encodings.rows()) != labels.size())
        throw argument_error("classifier_accuracy: rows do not match labels");
    if (labels.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        hits += model.predict(encodings.row(static_cast<Eigen::Index>(i))) == labels[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

namespace {

constexpr int n_classes = 10;

// Row-wise softmax of logits, numerically shifted.
Eigen::MatrixXd softmax_rows(Eigen::MatrixXd logits) {
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        logits.row(i).array() -= logits.row(i).maxCoeff();
        logits.row(i) = logits.row(i).array().exp().matrix();
        logits.row(i) /= logits.row(i).sum();
    }
    return logits;
}

} // namespace

classifier_fit fit_identity_classifier(const Eigen::MatrixXd& encodings, std::span<const int> labels,
                                       std::uint64_t split_seed, const logistic_options& options) {
    const auto n = static_cast<std::size_t>(encodings.rows());
    if (n != labels.size()) throw argument_error("fit_identity_classifier: rows do not match labels");
    if (n < 200) throw argument_error("fit_identity_classifier needs at least 200 samples");
    for (int l : labels)
        if (l < 0 || l >= n_classes) throw argument_error("labels must lie in 0..9");

    // stratified split: floor(test_fraction * n_c) of every class is held out
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
    rng gen(split_seed);
    std::vector<std::size_t> train_idx, test_idx;
    for (int c = 0; c < n_classes; ++c) {
        auto it = by_class.find(c);
        if (it == by_class.end()) throw stratification_error("digit " + std::to_string(c) + " absent from the training split");
        auto members = it->second;
        shuffle(members, gen);
        const auto n_test = static_cast<std::size_t>(std::floor(options.test_fraction * static_cast<double>(members.size())));
        if (members.size() - n_test == 0)
            throw stratification_error("digit " + std::to_string(c) + " absent from the training split");
        test_idx.insert(test_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
        train_idx.insert(train_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    const Eigen::MatrixXd x_train = take_rows(encodings, train_idx);
    const Eigen::Index d = x_train.cols();
    const auto m = static_cast<double>(train_idx.size());

    // optional z-scoring on the training split; the fit runs in that space
    Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(d), sd = Eigen::RowVectorXd::Ones(d);
    if (options.standardize) {
        mu = x_train.colwise().mean();
        sd = ((x_train.rowwise() - mu).array().square().colwise().sum() / m).sqrt();
        for (Eigen::Index j = 0; j < d; ++j)
            if (!(sd(j) > 1e-12)) sd(j) = 1.0;
    }
    const Eigen::MatrixXd z = (x_train.rowwise() - mu).array().rowwise() / sd.array();

    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(z.rows(), n_classes);
    for (std::size_t i = 0; i < train_idx.size(); ++i) y(static_cast<Eigen::Index>(i), labels[train_idx[i]]) = 1.0;

    // Lipschitz bound of the gradient: 0.5 * lambda_max([z 1]^T [z 1] / m) + l2
    Eigen::MatrixXd aug(z.rows(), d + 1);
    aug << z, Eigen::VectorXd::Ones(z.rows());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(aug.transpose() * aug / m, Eigen::EigenvaluesOnly);
    const double lipschitz = 0.5 * eig.eigenvalues().maxCoeff() + options.l2;
    const double step = 1.0 / lipschitz;

    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, n_classes);
    Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(n_classes);
    Eigen::MatrixXd b_look = b;
    Eigen::RowVectorXd c_look = c;
    double t = 1.0;

    classifier_fit fit;
    for (fit.iterations = 0; fit.iterations < options.max_iterations; ++fit.iterations) {
        const Eigen::MatrixXd g_logits = softmax_rows((z * b_look).rowwise() + c_look) - y;
        const Eigen::MatrixXd gb = z.transpose() * g_logits / m + options.l2 * b_look;
        const Eigen::RowVectorXd gc = g_logits.colwise().sum() / m;
        fit.gradient_norm = std::sqrt(gb.squaredNorm() + gc.squaredNorm());
        if (fit.gradient_norm < options.tolerance) {
            b = b_look;
            c = c_look;
            break;
        }
        const Eigen::MatrixXd b_next = b_look - step * gb;
        const Eigen::RowVectorXd c_next = c_look - step * gc;
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        // restart momentum when it points uphill
        const double uphill = (gb.array() * (b_next - b).array()).sum() + gc.dot(c_next - c);
        const double beta = uphill > 0.0 ? 0.0 : (t - 1.0) / t_next;
        b_look = b_next + beta * (b_next - b);
        c_look = c_next + beta * (c_next - c);
        t = uphill > 0.0 ? 1.0 : t_next;
        b = b_next;
        c = c_next;
    }

    fit.model.weights = (b.array().colwise() / sd.transpose().array()).matrix().transpose();
    fit.model.intercepts = (c - mu * (b.array().colwise() / sd.transpose().array()).matrix()).transpose();

    std::vector<int> train_labels, test_labels;
    for (std::size_t i : train_idx) train_labels.push_back(labels[i]);
    for (std::size_t i : test_idx) test_labels.push_back(labels[i]);
    fit.train_accuracy = classifier_accuracy(fit.model, x_train, train_labels);
    fit.test_accuracy = classifier_accuracy(fit.model, take_rows(encodings, test_idx), test_labels);
    return fit;
}

// ---------------------------------------------------------------------------

perturbation_condition parse_perturbation_condition(std::string_view spec) {
    if (spec == "none") return {"none", std::nullopt, 0.0};
    const auto colon = spec.find(':');
    perturbation_condition cond;
    cond.prop = parse_property(spec.substr(0, colon));
    if (colon != std::string_view::npos) {
        try {
            cond.level = std::stod(std::string(spec.substr(colon + 1)));
        } catch (const std::exception&) {
            throw argument_error("bad perturbation level in '" + std::string(spec) + "'");
        }
    }
    if (!(cond.level >= 0.0 && cond.level <= 1.0)) throw argument_error("perturbation level must lie in [0,1]");
    cond.name = std::string(spec);
    return cond;
}

std::vector<condition_accuracy> perturbation_robustness(const network_params& params,
                                                        const identity_classifier& classifier,
                                                        const digit_corpus& eval_digits,
                                                        std::span<const perturbation_condition> conditions,
                                                        const trial_options& options) {
    if (eval_digits.empty()) throw argument_error("perturbation_robustness needs evaluation digits");
    const stimulus_props canonical = canonical_props();
    std::vector<condition_accuracy> out;
    for (const auto& cond : conditions) {
        std::vector<image> images;
        images.reserve(eval_digits.size());
        for (std::size_t i = 0; i < eval_digits.size(); ++i) {
            stimulus_props props = canonical_props(eval_digits.labels[i]);
            if (cond.prop) {
                const property p = *cond.prop;
                const double c0 = canonical.get(p);
                const double v = i % 2 == 0 ? c0 + cond.level * (options.ranges.hi(p) - c0)
                                            : c0 - cond.level * (c0 - options.ranges.lo(p));
                props.set(p, v);
            }
            images.push_back(render_stimulus(eval_digits.images[i], props, options.retina_width, options.ranges).pixels);
        }
        const Eigen::MatrixXd enc = encode_all(params, images);
        out.push_back({cond.name, classifier_accuracy(classifier, enc, eval_digits.labels), images.size()});
    }
    return out;
}

identity_correlation identity_correlation_matrix(const Eigen::MatrixXd& encodings, std::span<const int> labels,
                                                 double alpha) {
    const auto n = static_cast<std::size_t>(encodings.rows());
    if (n != labels.size()) throw argument_error("identity_correlation_matrix: rows do not match labels");
    std::array<bool, n_classes> present{};
    for (int l : labels) {
        if (l < 0 || l >= n_classes) throw argument_error("labels must lie in 0..9");
        present[static_cast<std::size_t>(l)] = true;
    }
    if (!std::all_of(present.begin(), present.end(), [](bool b) { return b; }))
        throw argument_error("identity_correlation_matrix needs all ten digits");

    const Eigen::Index k = encodings.cols();
    identity_correlation out;
    out.r = Eigen::MatrixXd::Zero(k, n_classes);
    out.p_value = Eigen::MatrixXd::Ones(k, n_classes);
    out.significant = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(k, n_classes, false);
    out.degenerate.assign(static_cast<std::size_t>(k), false);

    std::vector<double> unit(n), indicator(n);
    for (Eigen::Index j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < n; ++i) unit[i] = encodings(static_cast<Eigen::Index>(i), j);
        for (int d = 0; d < n_classes; ++d) {
            for (std::size_t i = 0; i < n; ++i) indicator[i] = labels[i] == d ? 1.0 : 0.0;
            const auto pr = pearson(unit, indicator);
            if (pr.degenerate) {
                out.degenerate[static_cast<std::size_t>(j)] = true;
                break;
            }
            out.r(j, d) = pr.r;
            out.p_value(j, d) = pearson_p_value(pr.r, n);
            out.significant(j, d) = out.p_value(j, d) < alpha;
        }
        if (out.degenerate[static_cast<std::size_t>(j)]) {
            out.r.row(j).setZero();
            out.p_value.row(j).setOnes();
            out.significant.row(j).setConstant(false);
        }
    }
    return out;
}

} // namespace rrn
