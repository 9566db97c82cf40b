#include "rrn/development.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>

#include "rrn/error.hpp"
#include "rrn/rng.hpp"
#include "rrn/stats.hpp"

namespace rrn {

synapse_census synapse_stats(const Eigen::MatrixXd& weights) {
    synapse_census out;
    double sum_exc = 0.0, sum_inh = 0.0;
    const double* p = weights.data();
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (p[i] > 0.0) {
            ++out.n_excitatory;
            sum_exc += p[i];
        } else if (p[i] < 0.0) {
            ++out.n_inhibitory;
            sum_inh -= p[i];
        }
    }
    if (out.n_excitatory) out.mean_abs_excitatory = sum_exc / static_cast<double>(out.n_excitatory);
    if (out.n_inhibitory) {
        out.mean_abs_inhibitory = sum_inh / static_cast<double>(out.n_inhibitory);
        out.ei_ratio = static_cast<double>(out.n_excitatory) / static_cast<double>(out.n_inhibitory);
    }
    return out;
}

firing_stats compute_firing_stats(const network_params& params, std::span<const image> probe, double theta) {
    if (probe.empty()) throw argument_error("firing statistics need a non-empty probe");
    const auto acts = forward_batch(params, images_to_columns(probe));
    firing_stats out;
    out.theta = theta;
    for (std::size_t l = 1; l < acts.size(); ++l) {
        layer_firing lf;
        lf.layer = params.spec.activity_name(l);
        lf.unit_means = acts[l].rowwise().mean();
        lf.mean_activity = lf.unit_means.mean();
        lf.active_fraction = (lf.unit_means.array() > theta).cast<double>().mean();
        out.layers.push_back(std::move(lf));
    }
    return out;
}

std::vector<retina_image> build_probe_set(const digit_corpus& corpus, std::uint64_t seed,
                                          const trial_options& options) {
    std::vector<std::vector<std::size_t>> by_digit(10);
    for (std::size_t i = 0; i < corpus.size(); ++i)
        if (corpus.labels[i] >= 0 && corpus.labels[i] < 10) by_digit[static_cast<std::size_t>(corpus.labels[i])].push_back(i);
    for (int d = 0; d < 10; ++d)
        if (by_digit[static_cast<std::size_t>(d)].empty())
            throw corpus_error("probe set needs every digit; missing " + std::to_string(d));

    const auto& rg = options.ranges;
    auto mid = [](double lo, double hi, int k, int n) { return lo + (hi - lo) * (k + 0.5) / n; };
    rng gen(seed);
    std::vector<retina_image> out;
    int i = 0;
    for (int xi = 0; xi < 4; ++xi)
        for (int yi = 0; yi < 4; ++yi)
            for (int si = 0; si < 2; ++si)
                for (int ri = 0; ri < 2; ++ri, ++i) {
                    const int digit = i % 10;
                    const auto& members = by_digit[static_cast<std::size_t>(digit)];
                    const std::size_t idx = members[gen.index(members.size())];
                    stimulus_props p{mid(rg.x_min, rg.x_max, xi, 4), mid(rg.y_min, rg.y_max, yi, 4),
                                     mid(rg.s_min, rg.s_max, si, 2), mid(-rg.r_max, rg.r_max, ri, 2), digit};
                    out.push_back(render_stimulus(corpus.images[idx], p, options.retina_width, rg));
                }
    return out;
}

development_snapshot capture_snapshot(int step, const network_params& params, std::span<const image> probe,
                                      double theta) {
    development_snapshot snap;
    snap.step = step;
    for (const auto& layer : params.layers) snap.synapses.push_back(synapse_stats(layer.weights));
    snap.firing = compute_firing_stats(params, probe, theta);
    snap.inputs.assign(probe.begin(), probe.end());
    snap.reconstructions = reconstruct_all(params, probe);
    double sum = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) sum += mean_squared_error(snap.reconstructions[i], probe[i]);
    snap.probe_mse = sum / static_cast<double>(probe.size());
    return snap;
}

image snapshot_mosaic(const development_snapshot& snap) {
    constexpr std::size_t per_row = 16;
    std::vector<image> tiles;
    for (std::size_t first = 0; first < snap.inputs.size(); first += per_row) {
        const std::size_t last = std::min(first + per_row, snap.inputs.size());
        const image blank(snap.inputs[first].height, snap.inputs[first].width, 0.0);
        for (std::size_t i = first; i < first + per_row; ++i) tiles.push_back(i < last ? snap.inputs[i] : blank);
        for (std::size_t i = first; i < first + per_row; ++i) tiles.push_back(i < last ? snap.reconstructions[i] : blank);
    }
    return tile_images(tiles, static_cast<int>(std::min(per_row, snap.inputs.size())));
}

void write_snapshot_csv(const std::filesystem::path& path, const network_params& params,
                        std::span<const development_snapshot> snapshots) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << std::setprecision(17) << "step,layer,n_exc,n_inh,mean_abs_exc,mean_abs_inh,active_frac,probe_mse\n";
    for (const auto& snap : snapshots) {
        for (std::size_t l = 0; l < snap.synapses.size(); ++l) {
            const auto& s = snap.synapses[l];
            out << snap.step << ',' << params.spec.weight_layer_name(l) << ',' << s.n_excitatory << ','
                << s.n_inhibitory << ',' << s.mean_abs_excitatory << ',' << s.mean_abs_inhibitory << ','
                << snap.firing.layers.at(l).active_fraction << ',' << snap.probe_mse << '\n';
        }
    }
}

std::vector<metric_series> snapshot_series(const network_params& params,
                                           std::span<const development_snapshot> snapshots) {
    std::vector<metric_series> out;
    auto add = [&](const std::string& name, auto&& value) {
        metric_series s;
        s.name = name;
        for (const auto& snap : snapshots) {
            s.steps.push_back(snap.step);
            s.values.push_back(value(snap));
        }
        out.push_back(std::move(s));
    };
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const std::string w = params.spec.weight_layer_name(l);
        add("ei_ratio " + w, [l](const development_snapshot& s) { return s.synapses[l].ei_ratio; });
        add("mean_abs_exc " + w, [l](const development_snapshot& s) { return s.synapses[l].mean_abs_excitatory; });
        add("mean_abs_inh " + w, [l](const development_snapshot& s) { return s.synapses[l].mean_abs_inhibitory; });
        add("active_frac " + params.spec.activity_name(l + 1),
            [l](const development_snapshot& s) { return s.firing.layers[l].active_fraction; });
    }
    add("probe_mse", [](const development_snapshot& s) { return s.probe_mse; });
    return out;
}

namespace {

constexpr std::size_t trailing_window = 8;
constexpr std::size_t min_trailing = 3;

int sign_of(double v, double eps) { return v > eps ? 1 : (v < -eps ? -1 : 0); }

} // namespace

std::vector<ctp_candidate> detect_ctp_candidates(std::span<const metric_series> series, double sensitivity) {
    if (!(sensitivity > 0.0)) throw argument_error("ctp sensitivity must be positive");
    std::map<std::pair<int, std::string>, std::string> found;
    auto flag = [&](int step, const std::string& name, const std::string& why) {
        auto& t = found[{step, name}];
        t = t.empty() ? why : t + "; " + why;
    };

    for (const auto& s : series) {
        if (s.steps.size() != s.values.size()) throw argument_error("series '" + s.name + "' has mismatched lengths");
        if (s.values.size() < 3) throw argument_error("ctp detection needs at least 3 snapshots");
        if (!std::all_of(s.values.begin(), s.values.end(), [](double v) { return std::isfinite(v); })) continue;

        const std::size_t n = s.values.size();
        std::vector<double> slope(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double dt = static_cast<double>(s.steps[i + 1] - s.steps[i]);
            if (!(dt > 0.0)) throw argument_error("series '" + s.name + "' steps must increase");
            slope[i] = (s.values[i + 1] - s.values[i]) / dt;
        }
        double scale = 0.0;
        for (double v : slope) scale = std::max(scale, std::abs(v));
        const double eps = 1e-9 * scale;

        // slope sign changes of the 3-point moving average
        if (slope.size() >= 4) {
            std::vector<double> smooth(slope.size() - 2);
            for (std::size_t i = 0; i < smooth.size(); ++i) smooth[i] = (slope[i] + slope[i + 1] + slope[i + 2]) / 3.0;
            int prev = 0;
            for (std::size_t i = 0; i < smooth.size(); ++i) {
                const int sg = sign_of(smooth[i], eps);
                if (sg != 0 && prev != 0 && sg != prev)
                    flag(s.steps[i + 1], s.name, prev > 0 ? "slope turns negative (peak)" : "slope turns positive (trough)");
                if (sg != 0) prev = sg;
            }
        }

        // jumps against the trailing mean and standard deviation
        for (std::size_t i = min_trailing; i < slope.size(); ++i) {
            const std::size_t first = i > trailing_window ? i - trailing_window : 0;
            const std::span<const double> window(slope.data() + first, i - first);
            const double centre = mean(window);
            const double spread = std::sqrt(sample_variance(window));
            if (std::abs(slope[i] - centre) > sensitivity * spread + eps)
                flag(s.steps[i + 1], s.name, "jump");
        }
    }

    std::vector<ctp_candidate> out;
    for (const auto& [key, why] : found) out.push_back({key.first, key.second, why});
    return out;
}

} // namespace rrn
