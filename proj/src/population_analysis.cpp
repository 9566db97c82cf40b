#include "rrn/population_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>

#include "rrn/error.hpp"
#include "rrn/parallel.hpp"
#include "rrn/rng.hpp"

namespace rrn {

std::vector<image> stimulus_grid::images() const {
    std::vector<image> out;
    out.reserve(stimuli.size());
    for (const auto& s : stimuli) out.push_back(s.pixels);
    return out;
}

stimulus_grid build_stimulus_grid(property prop, const digit_corpus& corpus, const stimulus_props& fixed,
                                  std::uint64_t seed, const trial_options& options) {
    options.ranges.validate();
    std::vector<std::vector<std::size_t>> by_digit(grid_digits);
    for (std::size_t i = 0; i < corpus.size(); ++i)
        if (corpus.labels[i] >= 0 && corpus.labels[i] < grid_digits)
            by_digit[static_cast<std::size_t>(corpus.labels[i])].push_back(i);
    for (int d = 0; d < grid_digits; ++d)
        if (by_digit[static_cast<std::size_t>(d)].empty())
            throw corpus_error("corpus has no instance of digit " + std::to_string(d));

    stimulus_grid grid;
    grid.prop = prop;
    const double lo = options.ranges.lo(prop), hi = options.ranges.hi(prop);
    for (int b = 0; b < grid_blocks; ++b)
        grid.levels.push_back(lo + (hi - lo) * b / (grid_blocks - 1));

    rng gen(seed);
    for (int b = 0; b < grid_blocks; ++b) {
        for (int d = 0; d < grid_digits; ++d) {
            const auto& members = by_digit[static_cast<std::size_t>(d)];
            const std::size_t idx = members[gen.index(members.size())];
            stimulus_props props = fixed;
            props.identity = d;
            props.set(prop, grid.levels[static_cast<std::size_t>(b)]);
            grid.stimuli.push_back(render_stimulus(corpus.images[idx], props, options.retina_width, options.ranges));
            grid.corpus_index.push_back(idx);
        }
    }
    return grid;
}

similarity_result similarity_from_encodings(const Eigen::MatrixXd& encodings) {
    const Eigen::Index n = encodings.rows();
    similarity_result out;
    out.degenerate.assign(static_cast<std::size_t>(n), false);
    Eigen::MatrixXd z = encodings.colwise() - encodings.rowwise().mean();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = z.row(i).norm();
        if (norm > 0.0) {
            z.row(i) /= norm;
        } else {
            z.row(i).setZero();
            out.degenerate[static_cast<std::size_t>(i)] = true;
        }
    }
    out.values = Eigen::MatrixXd::Zero(n, n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ui) {
        const auto i = static_cast<Eigen::Index>(ui);
        for (Eigen::Index j = i + 1; j < n; ++j) out.values(i, j) = std::clamp(z.row(i).dot(z.row(j)), -1.0, 1.0);
    });
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) out.values(i, j) = out.values(j, i);
    }
    return out;
}

similarity_result similarity_matrix(const stimulus_grid& grid, const network_params& params) {
    if (grid.size() != static_cast<std::size_t>(grid.n_blocks * grid.digits_per_block))
        throw argument_error("stimulus grid is incomplete");
    const auto imgs = grid.images();
    return similarity_from_encodings(encode_all(params, imgs));
}

paradiagonal paradiagonal_score(const Eigen::MatrixXd& matrix, int digits_per_block) {
    if (matrix.rows() != matrix.cols() || digits_per_block <= 0 || matrix.rows() % digits_per_block != 0)
        throw argument_error("paradiagonal_score needs a square block matrix");
    double stripe = 0.0, back = 0.0;
    std::size_t n_stripe = 0, n_back = 0;
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
            if (i == j) continue;
            const bool same_digit = i % digits_per_block == j % digits_per_block;
            const bool same_block = i / digits_per_block == j / digits_per_block;
            if (same_digit) {
                stripe += matrix(i, j);
                ++n_stripe;
            } else if (!same_block) {
                back += matrix(i, j);
                ++n_back;
            }
        }
    }
    return {n_stripe ? stripe / static_cast<double>(n_stripe) : 0.0, n_back ? back / static_cast<double>(n_back) : 0.0};
}

namespace {

// Conditional affinities of row i at precision beta; returns the entropy (nats).
double row_affinities(const Eigen::MatrixXd& d2, Eigen::Index i, double beta, Eigen::VectorXd& p) {
    const Eigen::Index n = d2.rows();
    double min_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j)
        if (j != i) min_d = std::min(min_d, d2(i, j));
    double sum = 0.0, weighted = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) {
            p(j) = 0.0;
            continue;
        }
        p(j) = std::exp(-beta * (d2(i, j) - min_d));
        sum += p(j);
        weighted += (d2(i, j) - min_d) * p(j);
    }
    p /= sum;
    return std::log(sum) + beta * weighted / sum;
}

Eigen::MatrixXd joint_affinities(const Eigen::MatrixXd& points, double perplexity) {
    const Eigen::Index n = points.rows();
    const Eigen::VectorXd sq = points.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = (-2.0 * points * points.transpose()).colwise() + sq;
    d2.rowwise() += sq.transpose();
    d2 = d2.cwiseMax(0.0);

    const double target = std::log(perplexity);
    Eigen::MatrixXd cond(n, n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ui) {
        const auto i = static_cast<Eigen::Index>(ui);
        Eigen::VectorXd p(n);
        double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 200; ++it) {
            const double h = row_affinities(d2, i, beta, p);
            if (std::abs(h - target) < 1e-5) break;
            if (h > target) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
            } else {
                hi = beta;
                beta = 0.5 * (beta + lo);
            }
        }
        cond.row(i) = p.transpose();
    });
    Eigen::MatrixXd joint = (cond + cond.transpose()) / (2.0 * static_cast<double>(n));
    return joint.cwiseMax(1e-12);
}

} // namespace

embedding tsne_embed(const Eigen::MatrixXd& points, std::uint64_t seed, const tsne_options& options) {
    const Eigen::Index n = points.rows();
    if (!(options.perplexity > 0.0) || 3.0 * options.perplexity > static_cast<double>(n))
        throw argument_error("perplexity " + std::to_string(options.perplexity) + " infeasible for " +
                             std::to_string(n) + " points");
    if (n > 5000) throw argument_error("exact tSNE is limited to 5000 points");
    if (options.n_iter < 1) throw argument_error("tSNE needs at least one iteration");

    const Eigen::MatrixXd p = joint_affinities(points, options.perplexity);
    // constant part of KL(P||Q)
    const double p_entropy = (p.array() * p.array().log()).sum() - (p.diagonal().array() * p.diagonal().array().log()).sum();

    rng gen(seed);
    Eigen::MatrixXd y(n, 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int c = 0; c < 2; ++c) y(i, c) = 1e-4 * gen.normal();
    Eigen::MatrixXd update = Eigen::MatrixXd::Zero(n, 2);
    Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
    Eigen::MatrixXd num(n, n), grad(n, 2);

    embedding out;
    out.kl_trace.reserve(static_cast<std::size_t>(options.n_iter));
    for (int it = 0; it < options.n_iter; ++it) {
        const bool early = it < options.exaggeration_iters;
        const double exag = early ? options.exaggeration : 1.0;
        const double momentum = early ? options.initial_momentum : options.final_momentum;

        const Eigen::VectorXd sq = y.rowwise().squaredNorm();
        num = (-2.0 * y * y.transpose()).colwise() + sq;
        num.rowwise() += sq.transpose();
        num = (1.0 + num.array().max(0.0)).inverse().matrix();
        num.diagonal().setZero();
        const double z = num.sum();

        parallel_for(static_cast<std::size_t>(n), [&](std::size_t ui) {
            const auto i = static_cast<Eigen::Index>(ui);
            double g0 = 0.0, g1 = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                const double m = (exag * p(i, j) - num(i, j) / z) * num(i, j);
                g0 += m * (y(i, 0) - y(j, 0));
                g1 += m * (y(i, 1) - y(j, 1));
            }
            grad(i, 0) = 4.0 * g0;
            grad(i, 1) = 4.0 * g1;
        });

        for (Eigen::Index i = 0; i < n; ++i) {
            for (int c = 0; c < 2; ++c) {
                double& g = gains(i, c);
                g = (grad(i, c) > 0.0) != (update(i, c) > 0.0) ? g + 0.2 : g * 0.8;
                g = std::max(g, 0.01);
                update(i, c) = momentum * update(i, c) - options.learning_rate * g * grad(i, c);
            }
        }
        y += update;
        y.rowwise() -= y.colwise().mean();

        // KL of the updated layout against the plain affinities
        const Eigen::VectorXd sq2 = y.rowwise().squaredNorm();
        num = (-2.0 * y * y.transpose()).colwise() + sq2;
        num.rowwise() += sq2.transpose();
        num = (1.0 + num.array().max(0.0)).inverse().matrix();
        num.diagonal().setZero();
        const double z2 = num.sum();
        double cross = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                if (i != j) cross += p(i, j) * std::log(std::max(num(i, j) / z2, 1e-300));
        out.kl_trace.push_back(std::max(0.0, p_entropy - cross));
    }
    out.coords = y;
    return out;
}

std::vector<std::vector<int>> top_responsive(const Eigen::MatrixXd& encodings, int k) {
    if (k < 1 || k > encodings.cols()) throw argument_error("top_responsive: k out of range");
    std::vector<std::vector<int>> out(static_cast<std::size_t>(encodings.rows()));
    std::vector<int> order(static_cast<std::size_t>(encodings.cols()));
    for (Eigen::Index i = 0; i < encodings.rows(); ++i) {
        std::iota(order.begin(), order.end(), 0);
        std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
            const double va = encodings(i, a), vb = encodings(i, b);
            return va > vb || (va == vb && a < b);
        });
        out[static_cast<std::size_t>(i)].assign(order.begin(), order.begin() + k);
    }
    return out;
}

favorites favorite_images(std::span<const image> stimuli, const Eigen::MatrixXd& encodings, int neuron, int k,
                          int n_mean) {
    const auto n = stimuli.size();
    if (static_cast<std::size_t>(encodings.rows()) != n) throw argument_error("favorite_images: rows do not match stimuli");
    if (n < static_cast<std::size_t>(n_mean)) throw argument_error("favorite_images needs at least " + std::to_string(n_mean) + " stimuli");
    if (neuron < 0 || neuron >= encodings.cols()) throw argument_error("favorite_images: neuron out of range");
    if (k < 1 || static_cast<std::size_t>(k) > n) throw argument_error("favorite_images: k out of range");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return encodings(static_cast<Eigen::Index>(a), neuron) > encodings(static_cast<Eigen::Index>(b), neuron);
    });
    favorites out;
    out.ranking.assign(order.begin(), order.begin() + k);
    for (std::size_t idx : out.ranking) out.top.push_back(stimuli[idx]);
    out.mean_image = image(stimuli[order[0]].height, stimuli[order[0]].width, 0.0);
    // running mean, so identical stimuli average to themselves exactly
    for (int t = 0; t < n_mean; ++t) {
        const image& s = stimuli[order[static_cast<std::size_t>(t)]];
        for (std::size_t p = 0; p < s.size(); ++p)
            out.mean_image.pixels[p] += (s.pixels[p] - out.mean_image.pixels[p]) / (t + 1);
    }
    return out;
}

std::vector<int> bin_values(std::span<const double> values, int n_bins, double lo, double hi) {
    if (n_bins < 1 || !(hi > lo)) throw argument_error("bin_values: bad bin layout");
    std::vector<int> out;
    out.reserve(values.size());
    for (double v : values) {
        const int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * n_bins));
        out.push_back(std::clamp(b, 0, n_bins - 1));
    }
    return out;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
        out << '\n';
    }
}

image correlation_heatmap(const Eigen::MatrixXd& m) {
    image img(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c) img.at(r, c) = std::clamp(0.5 * (m(r, c) + 1.0), 0.0, 1.0);
    return img;
}

void write_embedding_csv(const std::filesystem::path& path, const embedding& emb) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << std::setprecision(17) << "id,cx,cy,identity,x,y,s,r\n";
    for (Eigen::Index i = 0; i < emb.coords.rows(); ++i) {
        const stimulus_props p = static_cast<std::size_t>(i) < emb.meta.size() ? emb.meta[static_cast<std::size_t>(i)]
                                                                               : stimulus_props{};
        out << i << ',' << emb.coords(i, 0) << ',' << emb.coords(i, 1) << ',' << p.identity << ',' << p.x << ','
            << p.y << ',' << p.s << ',' << p.r << '\n';
    }
}

} // namespace rrn
