#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "rrn/checkpoint.hpp"
#include "rrn/cli.hpp"
#include "rrn/curriculum.hpp"
#include "rrn/development.hpp"
#include "rrn/digest.hpp"
#include "rrn/error.hpp"
#include "rrn/parallel.hpp"
#include "rrn/perturbation_lab.hpp"
#include "rrn/population_analysis.hpp"
#include "rrn/property_analysis.hpp"
#include "rrn/sources.hpp"
#include "rrn/stats.hpp"

namespace rrn {

namespace {

namespace fs = std::filesystem;

struct corpora {
    digit_corpus all;
    digit_corpus train;
    digit_corpus eval;
};

corpora load_corpora(const run_config& c) {
    corpora out;
    out.all = load_idx(c.images, c.labels);
    if (c.corpus == "tiny10") {
        out.train = out.all.head(10);
        out.eval = out.train;
        return out;
    }
    if (c.train_count > out.all.size())
        throw config_error("data.train_count: corpus holds only " + std::to_string(out.all.size()) + " images");
    if (c.eval_offset + c.eval_count > out.all.size())
        throw config_error("data.eval_count: evaluation slice runs past the end of the corpus");
    out.train = out.all.head(c.train_count);
    out.eval = out.all.slice(c.eval_offset, c.eval_count);
    return out;
}

std::vector<image> pixels_of(std::span<const retina_image> stimuli) {
    std::vector<image> out;
    out.reserve(stimuli.size());
    for (const auto& s : stimuli) out.push_back(s.pixels);
    return out;
}

std::vector<retina_image> centred_digits(const digit_corpus& digits, std::size_t n, const run_config& c) {
    std::vector<retina_image> out;
    for (std::size_t i = 0; i < std::min(n, digits.size()); ++i)
        out.push_back(render_stimulus(digits.images[i], canonical_props(digits.labels[i]), c.retina_width, c.ranges));
    return out;
}

std::ofstream open_csv(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << std::setprecision(17);
    return out;
}

network_params load_model(const run_config& c) { return load_checkpoint(c.checkpoint, c.spec).params; }

std::vector<int> labels_of(std::span<const retina_image> stimuli) {
    std::vector<int> out;
    for (const auto& s : stimuli) out.push_back(s.props.identity);
    return out;
}

} // namespace

void write_manifest(const fs::path& dir) {
    std::vector<std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string rel = fs::relative(entry.path(), dir).generic_string();
        if (rel != "manifest.json") files.push_back(rel);
    }
    std::sort(files.begin(), files.end());
    nlohmann::json doc;
    doc["artifacts"] = nlohmann::json::array();
    for (const auto& f : files)
        doc["artifacts"].push_back({{"path", f}, {"bytes", fs::file_size(dir / f)}, {"sha256", sha256_file(dir / f)}});
    std::ofstream out(dir / "manifest.json");
    out << doc.dump(2) << '\n';
}

int cmd_train(const run_config& c, std::ostream& log) {
    fs::create_directories(c.out);
    const corpora data = load_corpora(c);
    rng seeds(c.seed);
    network_params params = init_params(c.spec, seeds.fork_seed());
    const std::uint64_t source_seed = seeds.fork_seed();

    std::vector<image> probe;
    std::unique_ptr<stimulus_source> source;
    if (c.corpus == "tiny10") {
        probe = pixels_of(centred_digits(data.train, 10, c));
        source = std::make_unique<fixed_image_source>(probe, source_seed);
    } else {
        probe = pixels_of(build_probe_set(data.eval, c.probe_seed, c.trials()));
        source = std::make_unique<augmented_digit_source>(data.train, source_seed, c.retina_width, c.ranges);
    }

    std::vector<development_snapshot> snapshots;
    train_hooks hooks;
    hooks.on_snapshot.push_back([&](int step, const network_params& p) {
        snapshots.push_back(capture_snapshot(step, p, probe));
        write_pgm(c.out / ("snapshot_" + std::to_string(step) + ".pgm"), snapshot_mosaic(snapshots.back()));
        log << "step " << step << " probe_mse " << snapshots.back().probe_mse << '\n';
    });

    auto write_logs = [&](const metric_log& losses) {
        auto out = open_csv(c.out / "loss.csv");
        out << "step,batch_mse\n";
        for (const auto& l : losses.losses) out << l.step << ',' << l.batch_mse << '\n';
        write_snapshot_csv(c.out / "development.csv", params, snapshots);
        if (snapshots.size() >= 3) {
            const auto series = snapshot_series(params, snapshots);
            auto ctp = open_csv(c.out / "ctp_candidates.csv");
            ctp << "step,series,trigger\n";
            for (const auto& cand : detect_ctp_candidates(series)) ctp << cand.step << ',' << cand.series << ',' << cand.trigger << '\n';
        }
    };

    train_result result;
    try {
        result = train(params, c.training, *source, hooks);
    } catch (const training_diverged& e) {
        write_logs(e.partial_log);
        write_manifest(c.out);
        throw;
    }
    write_logs(result.log);
    nlohmann::json meta = {{"seed", c.seed}, {"corpus", c.corpus}, {"learning_rate", c.training.learning_rate}};
    save_checkpoint(c.out / "model.ck", result.params, c.training.total_steps, meta);
    write_manifest(c.out);
    return exit_ok;
}

int cmd_analyze(const run_config& c, std::ostream& log) {
    fs::create_directories(c.out);
    const network_params params = load_model(c);
    const corpora data = load_corpora(c);
    const trial_options opts = c.trials();
    rng seeds(c.seed);

    // single-property sweeps
    std::vector<correlation_result> all;
    {
        auto out = open_csv(c.out / "correlations.csv");
        out << "neuron,layer,property,r,p_value,n,degenerate\n";
        for (property p : all_properties) {
            const auto trials = sample_trial_set(data.eval, p, c.swept_trials, canonical_props(), seeds.fork_seed(), opts);
            for (const auto& r : correlate(trials, params)) {
                out << r.neuron << ',' << r.layer << ',' << property_name(r.prop) << ',' << r.r << ',' << r.p_value << ','
                    << r.n << ',' << (r.degenerate ? 1 : 0) << '\n';
                all.push_back(r);
            }
        }
    }
    {
        const auto cats = categorize(all, c.alpha);
        auto out = open_csv(c.out / "categories.csv");
        out << "neuron,x,y,s,r,non_specific\n";
        for (std::size_t n = 0; n < cats.size(); ++n) {
            out << n;
            for (bool b : cats.membership[n]) out << ',' << (b ? 1 : 0);
            out << ',' << (cats.non_specific(n) ? 1 : 0) << '\n';
        }
        log << "x-neurons " << cats.count(property::x) << " y-neurons " << cats.count(property::y) << '\n';
    }

    // linear decoders on jointly varied stimuli
    const auto mixed = sample_mixed_trials(data.eval, c.mixed_trials, seeds.fork_seed(), opts);
    const auto mixed_images = pixels_of(mixed.stimuli);
    const Eigen::MatrixXd mixed_enc = encode_all(params, mixed_images);
    {
        auto out = open_csv(c.out / "decoders.csv");
        out << "property,test_r2,test_mse,train_r2,train_mse,condition_number,rank_deficient\n";
        const std::uint64_t split = seeds.fork_seed();
        for (property p : all_properties) {
            std::vector<double> target;
            for (const auto& s : mixed.stimuli) target.push_back(s.props.get(p));
            const auto fit = fit_linear_decoder(mixed_enc, target, split, {0.8, c.ridge});
            out << property_name(p) << ',' << fit.test_r2 << ',' << fit.test_mse << ',' << fit.train_r2 << ','
                << fit.train_mse << ',' << fit.condition_number << ',' << (fit.rank_deficient ? 1 : 0) << '\n';
            log << "R2(" << property_name(p) << ") " << fit.test_r2 << '\n';
        }
    }

    // identity readout on centred digits
    const auto centred = centred_digits(data.eval, c.identity_count, c);
    const auto centred_images = pixels_of(centred);
    const auto labels = labels_of(centred);
    const Eigen::MatrixXd centred_enc = encode_all(params, centred_images);
    logistic_options lopts;
    lopts.l2 = c.logistic_l2;
    const std::uint64_t split = seeds.fork_seed();
    const auto fit = fit_identity_classifier(centred_enc, labels, split, lopts);
    std::vector<int> shuffled = labels;
    rng shuffler(seeds.fork_seed());
    shuffle(shuffled, shuffler);
    const auto control = fit_identity_classifier(centred_enc, shuffled, split, lopts);
    {
        auto out = open_csv(c.out / "identity.csv");
        out << "readout,test_accuracy,train_accuracy,iterations,gradient_norm\n";
        out << "labels," << fit.test_accuracy << ',' << fit.train_accuracy << ',' << fit.iterations << ','
            << fit.gradient_norm << '\n';
        out << "shuffled," << control.test_accuracy << ',' << control.train_accuracy << ',' << control.iterations << ','
            << control.gradient_norm << '\n';
        log << "identity accuracy " << fit.test_accuracy << " (shuffled " << control.test_accuracy << ")\n";
    }
    {
        std::vector<perturbation_condition> conds{parse_perturbation_condition("none")};
        for (property p : all_properties) conds.push_back(parse_perturbation_condition(property_name(p)));
        const auto acc = perturbation_robustness(params, fit.model, data.eval.head(c.identity_count), conds, opts);
        auto out = open_csv(c.out / "robustness.csv");
        out << "condition,accuracy,n\n";
        for (const auto& a : acc) out << a.name << ',' << a.accuracy << ',' << a.n << '\n';
    }
    {
        const auto ic = identity_correlation_matrix(centred_enc, labels, c.alpha);
        auto out = open_csv(c.out / "identity_correlation.csv");
        out << "neuron,digit,r,p_value,significant\n";
        for (Eigen::Index n = 0; n < ic.r.rows(); ++n)
            for (Eigen::Index d = 0; d < ic.r.cols(); ++d)
                out << n << ',' << d << ',' << ic.r(n, d) << ',' << ic.p_value(n, d) << ',' << (ic.significant(n, d) ? 1 : 0)
                    << '\n';
    }

    // similarity structure
    {
        auto out = open_csv(c.out / "paradiagonal.csv");
        out << "property,stripe_strength,background,contrast\n";
        for (property p : all_properties) {
            const auto grid = build_stimulus_grid(p, data.eval, canonical_props(), seeds.fork_seed(), opts);
            const auto sim = similarity_matrix(grid, params);
            const std::string name(property_name(p));
            write_matrix_csv(c.out / ("similarity_" + name + ".csv"), sim.values);
            write_pgm(c.out / ("similarity_" + name + ".pgm"), correlation_heatmap(sim.values));
            const auto score = paradiagonal_score(sim.values);
            out << name << ',' << score.stripe_strength << ',' << score.background << ',' << score.contrast() << '\n';
            if (p == property::x) {
                const auto grid_enc = encode_all(params, grid.images());
                const auto top = top_responsive(grid_enc, 3);
                auto tr = open_csv(c.out / "top_responsive.csv");
                tr << "stimulus,identity,level,first,second,third\n";
                for (std::size_t i = 0; i < top.size(); ++i)
                    tr << i << ',' << grid.identity_of(i) << ',' << grid.levels[static_cast<std::size_t>(grid.block_of(i))]
                       << ',' << top[i][0] << ',' << top[i][1] << ',' << top[i][2] << '\n';
            }
        }
    }

    // embedding of jointly varied stimuli
    {
        const std::size_t n = std::min(c.tsne_points, mixed.size());
        const Eigen::MatrixXd pts = mixed_enc.topRows(static_cast<Eigen::Index>(n));
        tsne_options topts;
        topts.perplexity = c.perplexity;
        topts.n_iter = c.tsne_iterations;
        auto emb = tsne_embed(pts, seeds.fork_seed(), topts);
        for (std::size_t i = 0; i < n; ++i) emb.meta.push_back(mixed.stimuli[i].props);
        write_embedding_csv(c.out / "tsne.csv", emb);
        std::vector<double> flat(2 * n), xs, ys;
        std::vector<int> ids;
        for (std::size_t i = 0; i < n; ++i) {
            flat[2 * i] = emb.coords(static_cast<Eigen::Index>(i), 0);
            flat[2 * i + 1] = emb.coords(static_cast<Eigen::Index>(i), 1);
            xs.push_back(emb.meta[i].x);
            ys.push_back(emb.meta[i].y);
            ids.push_back(emb.meta[i].identity);
        }
        auto out = open_csv(c.out / "silhouette.csv");
        out << "grouping,silhouette\n";
        out << "identity," << silhouette_score(flat, 2, ids) << '\n';
        out << "x_bin," << silhouette_score(flat, 2, bin_values(xs, 5, c.ranges.x_min, c.ranges.x_max)) << '\n';
        out << "y_bin," << silhouette_score(flat, 2, bin_values(ys, 5, c.ranges.y_min, c.ranges.y_max)) << '\n';
        out << "final_kl," << emb.kl() << '\n';
    }

    // favourite stimuli per unit
    {
        std::vector<image> tiles;
        auto out = open_csv(c.out / "favorites.csv");
        out << "neuron,rank,stimulus,activity\n";
        for (int k = 0; k < mixed_enc.cols(); ++k) {
            const auto fav = favorite_images(mixed_images, mixed_enc, k, 5);
            for (std::size_t r = 0; r < fav.ranking.size(); ++r)
                out << k << ',' << r << ',' << fav.ranking[r] << ','
                    << mixed_enc(static_cast<Eigen::Index>(fav.ranking[r]), k) << '\n';
            tiles.insert(tiles.end(), fav.top.begin(), fav.top.end());
            tiles.push_back(fav.mean_image);
        }
        write_pgm(c.out / "favorites.pgm", tile_images(tiles, 6));
    }
    write_manifest(c.out);
    return exit_ok;
}

int cmd_perturb(const run_config& c, std::ostream& log) {
    const network_params params = load_model(c);
    const corpora data = load_corpora(c);
    const trial_options opts = c.trials();
    rng seeds(c.seed);

    int neuron = -1;
    const std::uint64_t role_seed = seeds.fork_seed();
    if (c.role.size() > 1 && c.role[0] == 'n') {
        try {
            std::size_t used = 0;
            neuron = std::stoi(c.role.substr(1), &used);
            if (used != c.role.size() - 1) throw std::invalid_argument(c.role);
        } catch (const std::exception&) {
            throw config_error("perturb.role: unknown role '" + c.role + "'");
        }
        if (neuron < 0 || neuron >= encoding_width) throw config_error("perturb.role: neuron out of range");
    } else {
        property p{};
        try {
            p = parse_property(c.role);
        } catch (const argument_error&) {
            throw config_error("perturb.role: unknown role '" + c.role + "' (expected x, y, s, r or n<index>)");
        }
        const auto trials = sample_trial_set(data.eval, p, c.swept_trials, canonical_props(), role_seed, opts);
        neuron = top_neuron(correlate(trials, params), p);
    }
    fs::create_directories(c.out);
    log << "neuron " << neuron << '\n';

    // one digit at evenly spaced horizontal positions
    std::vector<image> sweep_stimuli;
    for (int i = 0; i < c.sweep_positions; ++i) {
        stimulus_props props = canonical_props(data.eval.labels[0]);
        props.x = c.sweep_positions == 1 ? 0.0
                                         : c.ranges.x_min + (c.ranges.x_max - c.ranges.x_min) * i / (c.sweep_positions - 1);
        sweep_stimuli.push_back(render_stimulus(data.eval.images[0], props, c.retina_width, c.ranges).pixels);
    }
    const auto values = unit_grid(c.grid_values);
    const auto sweep = modulate(params, sweep_stimuli, neuron, values);
    write_pgm(c.out / "modulation.pgm", sweep_mosaic(sweep));
    write_sweep_csv(c.out / "modulation.csv", sweep);

    const auto lesion_set = centred_digits(data.eval, c.lesion_count, c);
    const auto report = lesion(params, lesion_set, neuron);
    {
        auto out = open_csv(c.out / "lesion.csv");
        out << "stimulus,identity,baseline_mse,lesioned_mse,damage\n";
        for (std::size_t i = 0; i < report.damage.size(); ++i)
            out << i << ',' << report.identities[i] << ',' << report.baseline_mse[i] << ',' << report.lesioned_mse[i] << ','
                << report.damage[i] << '\n';
        auto per = open_csv(c.out / "lesion_identity.csv");
        per << "identity,mean_damage\n";
        for (const auto& [id, d] : report.identity_damage) per << id << ',' << d << '\n';
    }
    {
        const auto inv = position_invariance_check(params, sweep_stimuli, neuron, values);
        const double input_shift = input_translation_shift(params, data.eval.head(100), 0.1, opts);
        const auto codes = encode_all(params, pixels_of(lesion_set));
        const double lip = lipschitz_estimate(params, codes, 256, seeds.fork_seed());
        auto out = open_csv(c.out / "invariance.csv");
        out << "neuron,max_modulation_shift,input_translation_shift,ratio,lipschitz\n";
        out << neuron << ',' << inv.max_shift << ',' << input_shift << ','
            << (input_shift > 0.0 ? inv.max_shift / input_shift : std::numeric_limits<double>::infinity()) << ',' << lip
            << '\n';
        log << "max modulation shift " << inv.max_shift << " px, input shift " << input_shift << " px\n";
    }
    write_manifest(c.out);
    return exit_ok;
}

int cmd_curriculum(const run_config& c, std::ostream& log) {
    fs::create_directories(c.out);
    const auto ck = load_checkpoint(c.checkpoint, c.spec);
    const corpora data = load_corpora(c);
    const trial_options opts = c.trials();
    rng seeds(c.seed);

    std::vector<eval_set> evals(2);
    evals[0].name = "digits";
    evals[0].images = pixels_of(sample_mixed_trials(data.eval, c.curriculum_eval_count, seeds.fork_seed(), opts).stimuli);
    evals[1].name = std::string(novel_kind_name(c.novel));
    {
        rng gen(seeds.fork_seed());
        for (std::size_t i = 0; i < c.curriculum_eval_count; ++i) {
            stimulus_props props = c.ranges.sample(gen);
            props.identity = novel_identity(c.novel);
            evals[1].images.push_back(generate_novel(c.novel, props, data.eval, gen.fork_seed(), c.retina_width, c.ranges).pixels);
        }
    }

    curriculum_settings settings;
    settings.training = c.training;
    settings.eval_every = c.eval_every;
    settings.dense_every = c.dense_every;
    settings.dense_steps = c.dense_steps;
    settings.seed = seeds.fork_seed();
    settings.novel = c.novel;
    settings.stimuli = opts;

    const auto run = run_curriculum(ck.params, c.phases, evals, data.train, settings);
    write_curriculum_csv(c.out / "curriculum.csv", run.log);
    for (std::size_t k = 0; k < run.log.boundary_params.size(); ++k)
        save_checkpoint(c.out / ("boundary_" + std::to_string(k) + ".ck"), run.log.boundary_params[k],
                        ck.step + run.log.boundaries[k]);
    if (run.log.diverged) {
        write_manifest(c.out);
        throw numeric_error(run.log.failure, -1);
    }
    save_checkpoint(c.out / "final.ck", run.params, ck.step + (run.log.boundaries.empty() ? 0 : run.log.boundaries.back()),
                    ck.metadata);

    if (run.log.phase_names.size() >= 2) {
        auto out = open_csv(c.out / "forgetting.csv");
        out << "eval_set,boundary,boundary_step,boundary_mse,final_minus_boundary,min_mse,min_step,final_mse\n";
        for (const auto& e : forgetting_summary(run.log))
            for (std::size_t b = 0; b < e.boundary_mse.size(); ++b)
                out << e.eval_set << ',' << b << ',' << run.log.boundaries[b] << ',' << e.boundary_mse[b] << ','
                    << e.final_minus_boundary[b] << ',' << e.min_mse << ',' << e.min_step << ',' << e.final_mse << '\n';
    }

    if (!c.phases.empty() && c.control_steps > 0) {
        // known-structure control from the same starting point
        const curriculum_phase control{"control", "digits_only", c.control_steps};
        const auto ctrl = run_curriculum(ck.params, std::span(&control, 1), {}, data.train, settings);
        if (ctrl.log.diverged) throw numeric_error(ctrl.log.failure, -1);
        const auto& a0 = run.log.boundary_params[0];
        const auto& a1 = run.log.boundary_params[1];
        std::vector<plasticity_report> reports;
        if (c.plasticity_all_layers)
            reports = compare_weight_deltas(a0, a1, ck.params, ctrl.params);
        else
            reports.push_back(plasticity_compare(a0, a1, ck.params, ctrl.params, 0));
        write_plasticity_csv(c.out / "plasticity.csv", reports);
        const double scale = std::max((a1.layers[0].weights - a0.layers[0].weights).cwiseAbs().maxCoeff(),
                                      (ctrl.params.layers[0].weights - ck.params.layers[0].weights).cwiseAbs().maxCoeff());
        write_pgm(c.out / "plasticity_phase1.pgm", weight_delta_heatmap(a0, a1, 0, 64, scale));
        write_pgm(c.out / "plasticity_control.pgm", weight_delta_heatmap(ck.params, ctrl.params, 0, 64, scale));
        log << "plasticity ratio " << reports.front().ratio << " p " << reports.front().test.p << '\n';
    }
    write_manifest(c.out);
    return exit_ok;
}

int cmd_render(const run_config& c, std::ostream& log) {
    fs::create_directories(c.out);
    stimulus_props props = c.render_props;
    retina_image img;
    if (c.render_kind == "digit") {
        const auto corpus = load_idx(c.images, c.labels);
        if (c.render_index >= corpus.size()) throw config_error("render.render_index: beyond the corpus");
        props.identity = corpus.labels[c.render_index];
        img = render_stimulus(corpus.images[c.render_index], props, c.retina_width, c.ranges);
    } else {
        novel_kind kind{};
        try {
            kind = parse_novel_kind(c.render_kind);
        } catch (const argument_error& e) {
            throw config_error(std::string("render.render_kind: ") + e.what());
        }
        const bool needs_digits = kind == novel_kind::mirrored_digit || kind == novel_kind::double_digit;
        const digit_corpus corpus = needs_digits ? load_idx(c.images, c.labels) : digit_corpus{};
        props.identity = novel_identity(kind);
        img = generate_novel(kind, props, corpus, c.seed, c.retina_width, c.ranges);
    }
    write_pgm(c.out / "render.pgm", img.pixels);
    log << "wrote " << (c.out / "render.pgm").string() << '\n';
    write_manifest(c.out);
    return exit_ok;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Recognition-reconstruction network toolkit", "rrn"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "INI configuration file");
    std::map<std::string, std::string> flags;
    for (const auto& [section, key] : config_keys())
        app.add_option("--" + key, flags[key], section + "." + key);

    const std::vector<std::string> names{"train", "analyze", "perturb", "curriculum", "render"};
    for (const auto& n : names) app.add_subcommand(n);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_usage;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        setting_map settings = config_path.empty() ? setting_map{} : read_config_file(config_path);
        for (const auto& [section, key] : config_keys())
            if (app.count("--" + key) > 0) settings[key] = flags[key];
        const run_config config = resolve_config(settings, command);
        set_workers(config.workers);
        auto echo_config = [&] {
            fs::create_directories(config.out);
            std::ofstream(config.out / "config.ini") << render_config(settings);
        };
        if (command == "train") return echo_config(), cmd_train(config, out);
        if (command == "analyze") return echo_config(), cmd_analyze(config, out);
        if (command == "perturb") return echo_config(), cmd_perturb(config, out);
        if (command == "curriculum") return echo_config(), cmd_curriculum(config, out);
        return echo_config(), cmd_render(config, out);
    } catch (const config_error& e) {
        err << "config error: " << e.what() << '\n';
        return exit_usage;
    } catch (const argument_error& e) {
        err << "argument error: " << e.what() << '\n';
        return exit_usage;
    } catch (const numeric_error& e) {
        err << "numeric failure: " << e.what() << '\n';
        return exit_numeric;
    } catch (const checkpoint_error& e) {
        err << "checkpoint error: " << e.what() << '\n';
        return exit_artifact;
    } catch (const format_error& e) {
        err << "format error: " << e.what() << '\n';
        return exit_artifact;
    } catch (const consistency_error& e) {
        err << "consistency error: " << e.what() << '\n';
        return exit_artifact;
    } catch (const corpus_error& e) {
        err << "corpus error: " << e.what() << '\n';
        return exit_artifact;
    } catch (const stratification_error& e) {
        err << "stratification error: " << e.what() << '\n';
        return exit_artifact;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
}

} // namespace rrn
