#include "rrn/perturbation_lab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "rrn/error.hpp"
#include "rrn/parallel.hpp"
#include "rrn/rng.hpp"

namespace rrn {

std::vector<double> unit_grid(int n) {
    if (n < 1) throw argument_error("unit_grid needs at least one value");
    if (n == 1) return {0.5};
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(static_cast<double>(i) / (n - 1));
    return out;
}

namespace {

void check_neuron(const network_params& params, int neuron) {
    const int width = params.spec.widths[params.spec.encoding_index()];
    if (neuron < 0 || neuron >= width)
        throw argument_error("neuron " + std::to_string(neuron) + " outside 0.." + std::to_string(width - 1));
}

} // namespace

modulation_sweep modulate(const network_params& params, std::span<const image> stimuli, int neuron,
                          std::span<const double> values) {
    check_neuron(params, neuron);
    for (double v : values)
        if (!(v >= 0.0 && v <= 1.0)) throw argument_error("modulation values must lie in [0,1]");
    modulation_sweep out;
    out.neuron = neuron;
    out.values.assign(values.begin(), values.end());
    out.stimuli.assign(stimuli.begin(), stimuli.end());
    out.reconstructions.resize(stimuli.size());
    out.optimal.resize(stimuli.size());
    out.baseline.resize(stimuli.size());
    parallel_for(stimuli.size(), [&](std::size_t i) {
        const Eigen::VectorXd code = encode(params, stimuli[i]);
        out.optimal[i] = code(neuron);
        out.baseline[i] = decode_from_encoding(params, code);
        auto& row = out.reconstructions[i];
        row.reserve(values.size());
        Eigen::VectorXd modified = code;
        for (double v : values) {
            modified(neuron) = v;
            row.push_back(decode_from_encoding(params, modified));
        }
    });
    return out;
}

image sweep_mosaic(const modulation_sweep& sweep) {
    std::vector<image> tiles;
    for (const auto& row : sweep.reconstructions) tiles.insert(tiles.end(), row.begin(), row.end());
    return tile_images(tiles, static_cast<int>(std::max<std::size_t>(1, sweep.values.size())));
}

void write_sweep_csv(const std::filesystem::path& path, const modulation_sweep& sweep) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << std::setprecision(17) << "stimulus,value,mse,centroid_x,centroid_y\n";
    for (std::size_t i = 0; i < sweep.reconstructions.size(); ++i) {
        for (std::size_t v = 0; v < sweep.values.size(); ++v) {
            const image& rec = sweep.reconstructions[i][v];
            const point2 c = centroid(rec);
            out << i << ',' << sweep.values[v] << ',' << mean_squared_error(rec, sweep.stimuli[i]) << ',' << c.x << ','
                << c.y << '\n';
        }
    }
}

double lesion_report::mean_damage(int identity, bool matching) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < damage.size(); ++i) {
        if ((identities[i] == identity) != matching) continue;
        sum += damage[i];
        ++n;
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

lesion_report lesion(const network_params& params, std::span<const retina_image> stimuli,
                     std::span<const int> neurons) {
    for (int n : neurons) check_neuron(params, n);
    lesion_report out;
    out.neurons.assign(neurons.begin(), neurons.end());
    const std::size_t n = stimuli.size();
    out.identities.resize(n);
    out.baseline_mse.resize(n);
    out.lesioned_mse.resize(n);
    out.damage.resize(n);
    parallel_for(n, [&](std::size_t i) {
        const image& target = stimuli[i].pixels;
        Eigen::VectorXd code = encode(params, target);
        out.baseline_mse[i] = mean_squared_error(decode_from_encoding(params, code), target);
        for (int k : neurons) code(k) = 0.0;
        out.lesioned_mse[i] = mean_squared_error(decode_from_encoding(params, code), target);
        out.damage[i] = out.lesioned_mse[i] - out.baseline_mse[i];
        out.identities[i] = stimuli[i].props.identity;
    });
    std::map<int, std::pair<double, std::size_t>> acc;
    for (std::size_t i = 0; i < n; ++i) {
        auto& [sum, count] = acc[out.identities[i]];
        sum += out.damage[i];
        ++count;
    }
    for (const auto& [id, sc] : acc) out.identity_damage[id] = sc.first / static_cast<double>(sc.second);
    return out;
}

lesion_report lesion(const network_params& params, std::span<const retina_image> stimuli, int neuron) {
    const int one[] = {neuron};
    return lesion(params, stimuli, one);
}

point2 centroid(const image& img) {
    // extended accumulators keep symmetric images on their exact centre
    long double mass = 0.0L, sx = 0.0L, sy = 0.0L;
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            const long double v = img.at(r, c);
            mass += v;
            sx += v * c;
            sy += v * r;
        }
    }
    if (!(mass > 0.0L)) throw undefined_centroid_error("centroid of an image with no intensity");
    return {static_cast<double>(sx / mass), static_cast<double>(sy / mass)};
}

double lipschitz_estimate(const network_params& params, const Eigen::MatrixXd& encodings, int n_pairs,
                          std::uint64_t seed, double radius) {
    if (encodings.rows() == 0 || n_pairs < 1) throw argument_error("lipschitz_estimate needs encodings and pairs");
    rng gen(seed);
    Eigen::MatrixXd a(encodings.cols(), n_pairs), b(encodings.cols(), n_pairs);
    for (int k = 0; k < n_pairs; ++k) {
        const auto row = static_cast<Eigen::Index>(gen.index(static_cast<std::size_t>(encodings.rows())));
        Eigen::VectorXd dir(encodings.cols());
        for (Eigen::Index j = 0; j < dir.size(); ++j) dir(j) = gen.normal();
        dir *= radius / dir.norm();
        a.col(k) = encodings.row(row).transpose();
        b.col(k) = (a.col(k) + dir).cwiseMax(0.0).cwiseMin(1.0);
    }
    const Eigen::MatrixXd da = decode_batch(params, a), db = decode_batch(params, b);
    double best = 0.0;
    for (int k = 0; k < n_pairs; ++k) {
        const double in = (a.col(k) - b.col(k)).norm();
        if (in > 0.0) best = std::max(best, (da.col(k) - db.col(k)).norm() / in);
    }
    return best;
}

invariance_result position_invariance_check(const network_params& params, std::span<const image> stimuli,
                                            int neuron, std::span<const double> values) {
    const modulation_sweep sweep = modulate(params, stimuli, neuron, values);
    invariance_result out;
    out.neuron = neuron;
    out.shifts.resize(stimuli.size());
    for (std::size_t i = 0; i < stimuli.size(); ++i) {
        const double base = centroid(sweep.baseline[i]).x;
        for (const image& rec : sweep.reconstructions[i]) {
            const double shift = centroid(rec).x - base;
            out.shifts[i].push_back(shift);
            out.max_shift = std::max(out.max_shift, std::abs(shift));
        }
    }
    return out;
}

double input_translation_shift(const network_params& params, const digit_corpus& digits, double dx,
                               const trial_options& options) {
    if (digits.empty()) throw argument_error("input_translation_shift needs digits");
    std::vector<image> centred, moved;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        stimulus_props p = canonical_props(digits.labels[i]);
        centred.push_back(render_stimulus(digits.images[i], p, options.retina_width, options.ranges).pixels);
        p.x = dx;
        moved.push_back(render_stimulus(digits.images[i], p, options.retina_width, options.ranges).pixels);
    }
    const auto rc = reconstruct_all(params, centred), rm = reconstruct_all(params, moved);
    double sum = 0.0;
    for (std::size_t i = 0; i < rc.size(); ++i) sum += centroid(rm[i]).x - centroid(rc[i]).x;
    return std::abs(sum / static_cast<double>(rc.size()));
}

} // namespace rrn
