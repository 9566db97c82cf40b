#include "rrn/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <set>

#include "rrn/error.hpp"
#include "rrn/parallel.hpp"
#include "rrn/rng.hpp"
#include "rrn/sources.hpp"

namespace rrn {

namespace {

std::vector<int> phase_schedule(int n_steps, const curriculum_settings& s, bool include_start) {
    std::set<int> steps;
    if (include_start) steps.insert(0);
    for (int t = s.eval_every; t < n_steps; t += s.eval_every) steps.insert(t);
    if (s.dense_every > 0)
        for (int t = s.dense_every; t <= std::min(s.dense_steps, n_steps); t += s.dense_every) steps.insert(t);
    steps.insert(n_steps);
    return {steps.begin(), steps.end()};
}

} // namespace

curriculum_result run_curriculum(network_params params, std::span<const curriculum_phase> phases,
                                 std::span<const eval_set> evals, const digit_corpus& digits,
                                 const curriculum_settings& settings) {
    if (settings.eval_every < 1) throw argument_error("eval_every must be at least 1");
    for (const auto& p : phases) {
        if (p.n_steps < 1) throw argument_error("phase '" + p.name + "' needs at least one step");
        if (p.source != "novel_only" && p.source != "digits_only" && p.source != "mixed")
            throw argument_error("unknown phase source '" + p.source + "'");
    }
    curriculum_result result{std::move(params), {}};
    curriculum_log& log = result.log;
    if (phases.empty()) return result;
    for (const auto& e : evals) log.eval_names.push_back(e.name);

    auto evaluate = [&](int global_step, int phase, const network_params& p) {
        curriculum_eval ev{global_step, phase, std::vector<double>(evals.size())};
        for (std::size_t k = 0; k < evals.size(); ++k) ev.mse[k] = mean_reconstruction_mse(p, evals[k].images);
        log.evals.push_back(std::move(ev));
    };

    rng seeds(settings.seed);
    int offset = 0;
    for (std::size_t k = 0; k < phases.size(); ++k) {
        const auto& phase = phases[k];
        log.phase_names.push_back(phase.name);
        log.boundaries.push_back(offset);
        log.boundary_params.push_back(result.params);

        const std::uint64_t source_seed = seeds.fork_seed(), novel_seed = seeds.fork_seed(), mix_seed = seeds.fork_seed();
        augmented_digit_source digit_src(digits, source_seed, settings.stimuli.retina_width, settings.stimuli.ranges);
        novel_shape_source novel_src(settings.novel, digits, novel_seed, settings.stimuli.retina_width,
                                     settings.stimuli.ranges);
        mixed_source mix_src(novel_src, digit_src, settings.mixed_novel_fraction, mix_seed);
        stimulus_source& sampler = phase.source == "novel_only"    ? static_cast<stimulus_source&>(novel_src)
                                   : phase.source == "digits_only" ? static_cast<stimulus_source&>(digit_src)
                                                                   : static_cast<stimulus_source&>(mix_src);

        train_config cfg = settings.training;
        cfg.total_steps = phase.n_steps;
        cfg.seed = seeds.fork_seed();
        cfg.snapshot_schedule = phase_schedule(phase.n_steps, settings, k == 0);
        train_hooks hooks;
        hooks.on_snapshot.push_back(
            [&, k, offset](int step, const network_params& p) { evaluate(offset + step, static_cast<int>(k), p); });
        try {
            result.params = train(std::move(result.params), cfg, sampler, hooks).params;
        } catch (const training_diverged& e) {
            log.diverged = true;
            log.failure = "phase '" + phase.name + "': " + e.what();
            result.params = log.boundary_params.back();
            return result;
        }
        offset += phase.n_steps;
    }
    log.boundaries.push_back(offset);
    log.boundary_params.push_back(result.params);
    return result;
}

void write_curriculum_csv(const std::filesystem::path& path, const curriculum_log& log) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << std::setprecision(17) << "step,phase,eval_set,mse\n";
    for (const auto& ev : log.evals)
        for (std::size_t k = 0; k < ev.mse.size(); ++k)
            out << ev.step << ',' << log.phase_names.at(static_cast<std::size_t>(ev.phase)) << ',' << log.eval_names[k]
                << ',' << ev.mse[k] << '\n';
}

plasticity_report plasticity_from_deltas(std::vector<double> delta_a, std::vector<double> delta_b) {
    if (delta_a.empty() || delta_b.empty()) throw argument_error("plasticity comparison needs synapses");
    plasticity_report rep;
    rep.mean_a = mean(delta_a);
    rep.mean_b = mean(delta_b);
    rep.degenerate = !(rep.mean_b > 0.0);
    rep.ratio = rep.degenerate ? std::numeric_limits<double>::infinity() : rep.mean_a / rep.mean_b;
    rep.test = welch_t_test(delta_a, delta_b);
    rep.delta_a = std::move(delta_a);
    rep.delta_b = std::move(delta_b);
    return rep;
}

namespace {

void check_same_shape(const network_params& ref, const network_params& other, const char* what) {
    if (ref.spec.widths != other.spec.widths)
        throw shape_error(std::string("plasticity comparison: ") + what + " has a different layer spec");
}

std::vector<double> abs_delta(const Eigen::MatrixXd& before, const Eigen::MatrixXd& after) {
    std::vector<double> out(static_cast<std::size_t>(before.size()));
    const double* b = before.data();
    const double* a = after.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(a[i] - b[i]);
    return out;
}

} // namespace

plasticity_report plasticity_compare(const network_params& before_a, const network_params& after_a,
                                     const network_params& before_b, const network_params& after_b,
                                     std::size_t layer) {
    check_same_shape(before_a, after_a, "phase A end");
    check_same_shape(before_a, before_b, "phase B start");
    check_same_shape(before_a, after_b, "phase B end");
    if (layer >= before_a.layers.size()) throw argument_error("plasticity layer out of range");
    auto rep = plasticity_from_deltas(abs_delta(before_a.layers[layer].weights, after_a.layers[layer].weights),
                                      abs_delta(before_b.layers[layer].weights, after_b.layers[layer].weights));
    rep.layer = layer;
    rep.layer_name = before_a.spec.weight_layer_name(layer);
    return rep;
}

std::vector<plasticity_report> compare_weight_deltas(const network_params& before_a, const network_params& after_a,
                                                     const network_params& before_b, const network_params& after_b) {
    std::vector<plasticity_report> out;
    for (std::size_t l = 0; l < before_a.layers.size(); ++l)
        out.push_back(plasticity_compare(before_a, after_a, before_b, after_b, l));
    return out;
}

void write_plasticity_csv(const std::filesystem::path& path, std::span<const plasticity_report> reports) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << std::setprecision(17) << "layer,n_synapses,mean_abs_delta_a,mean_abs_delta_b,ratio,degenerate,t,dof,p\n";
    for (const auto& r : reports)
        out << r.layer_name << ',' << r.delta_a.size() << ',' << r.mean_a << ',' << r.mean_b << ',' << r.ratio << ','
            << (r.degenerate ? 1 : 0) << ',' << r.test.t << ',' << r.test.dof << ',' << r.test.p << '\n';
}

image weight_delta_heatmap(const network_params& before, const network_params& after, std::size_t layer,
                           int n_units, double scale) {
    check_same_shape(before, after, "heatmap end state");
    if (layer >= before.layers.size()) throw argument_error("heatmap layer out of range");
    const Eigen::MatrixXd delta = (after.layers[layer].weights - before.layers[layer].weights).cwiseAbs();
    const int units = std::min<int>(n_units, static_cast<int>(delta.cols()));
    const double top = scale > 0.0 ? scale : delta.leftCols(units).maxCoeff();
    const auto fan_in = static_cast<int>(delta.rows());
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(fan_in))));
    std::vector<image> tiles;
    for (int u = 0; u < units; ++u) {
        image tile = side * side == fan_in ? image(side, side) : image(fan_in, 1);
        for (int i = 0; i < fan_in; ++i) tile.pixels[static_cast<std::size_t>(i)] = top > 0.0 ? std::min(1.0, delta(i, u) / top) : 0.0;
        tiles.push_back(std::move(tile));
    }
    if (side * side != fan_in) return tile_images(tiles, units, 0);
    return tile_images(tiles, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(units)))));
}

std::vector<forgetting_entry> forgetting_summary(const curriculum_log& log) {
    if (log.phase_names.size() < 2) throw argument_error("forgetting summary needs at least two phases");
    if (log.evals.empty()) throw argument_error("forgetting summary needs evaluations");
    auto at_step = [&](int step, std::size_t k) {
        // the latest evaluation at or before `step`
        const curriculum_eval* best = &log.evals.front();
        for (const auto& ev : log.evals)
            if (ev.step <= step) best = &ev;
        return best->mse[k];
    };
    std::vector<forgetting_entry> out;
    for (std::size_t k = 0; k < log.eval_names.size(); ++k) {
        forgetting_entry e;
        e.eval_set = log.eval_names[k];
        e.min_mse = std::numeric_limits<double>::infinity();
        for (const auto& ev : log.evals) {
            if (ev.mse[k] < e.min_mse) {
                e.min_mse = ev.mse[k];
                e.min_step = ev.step;
            }
        }
        e.final_mse = log.evals.back().mse[k];
        for (int b : log.boundaries) {
            e.boundary_mse.push_back(at_step(b, k));
            e.final_minus_boundary.push_back(e.final_mse - e.boundary_mse.back());
        }
        for (std::size_t p = 0; p + 1 < e.boundary_mse.size(); ++p) {
            const double start = e.boundary_mse[p];
            e.phase_change.push_back(start > 0.0 ? (e.boundary_mse[p + 1] - start) / start : 0.0);
        }
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace rrn
