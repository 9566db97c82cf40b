#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "rrn/cli.hpp"
#include "rrn/error.hpp"

#ifndef RRN_DEFAULT_DATA_DIR
#define RRN_DEFAULT_DATA_DIR "data"
#endif

namespace rrn {

namespace {

struct key_def {
    std::string section;
    std::string key;
    std::optional<std::string> fallback; // nullopt: mandatory
};

const std::vector<key_def>& key_table() {
    static const std::vector<key_def> table = {
        {"run", "seed", std::nullopt},
        {"run", "out", "rrn_out"},
        {"run", "workers", "1"},
        {"run", "checkpoint", ""},
        {"data", "images", std::string(RRN_DEFAULT_DATA_DIR) + "/mnist5k-images-idx3-ubyte"},
        {"data", "labels", std::string(RRN_DEFAULT_DATA_DIR) + "/mnist5k-labels-idx1-ubyte"},
        {"data", "corpus", "mnist"},
        {"data", "train_count", "1000"},
        {"data", "eval_offset", "4000"},
        {"data", "eval_count", "1000"},
        {"retina", "width", "64"},
        {"retina", "x_min", "-0.2"},
        {"retina", "x_max", "0.2"},
        {"retina", "y_min", "-0.2"},
        {"retina", "y_max", "0.2"},
        {"retina", "s_min", "0.7"},
        {"retina", "s_max", "1.3"},
        {"retina", "r_max", "45"},
        {"network", "widths", "desk"},
        {"train", "steps", "50000"},
        {"train", "batch_size", "32"},
        {"train", "learning_rate", "2e-4"},
        {"train", "optimizer", "adam"},
        {"train", "beta1", "0.9"},
        {"train", "beta2", "0.999"},
        {"train", "epsilon", "1e-8"},
        {"train", "snapshots", "geometric"},
        {"train", "probe_seed", "64"},
        {"analysis", "alpha", "0.01"},
        {"analysis", "swept_trials", "512"},
        {"analysis", "mixed_trials", "2000"},
        {"analysis", "identity_count", "1000"},
        {"analysis", "tsne_points", "1000"},
        {"analysis", "perplexity", "30"},
        {"analysis", "tsne_iterations", "1000"},
        {"analysis", "logistic_l2", "1e-4"},
        {"analysis", "ridge", "0"},
        {"perturb", "role", "x"},
        {"perturb", "grid_values", "11"},
        {"perturb", "sweep_positions", "9"},
        {"perturb", "lesion_count", "500"},
        {"curriculum", "phases", "novel:novel_only:10000,digits:digits_only:10000"},
        {"curriculum", "control_steps", "10000"},
        {"curriculum", "eval_every", "500"},
        {"curriculum", "dense_every", "10"},
        {"curriculum", "dense_steps", "500"},
        {"curriculum", "novel", "symbol_x"},
        {"curriculum", "curriculum_eval_count", "128"},
        {"curriculum", "plasticity_layers", "first"},
        {"render", "render_kind", "digit"},
        {"render", "render_index", "0"},
        {"render", "render_x", "0"},
        {"render", "render_y", "0"},
        {"render", "render_s", "1"},
        {"render", "render_r", "0"},
    };
    return table;
}

const key_def* find_key(const std::string& key) {
    for (const auto& k : key_table())
        if (k.key == key) return &k;
    return nullptr;
}

class reader {
public:
    explicit reader(const setting_map& s) : settings_(s) {}

    std::string text(const std::string& key) const {
        const key_def* def = find_key(key);
        if (!def) throw config_error("internal: unknown key " + key);
        if (auto it = settings_.find(key); it != settings_.end()) return it->second;
        if (!def->fallback) throw config_error(def->section + "." + key + ": required setting is missing");
        return *def->fallback;
    }

    template <class T>
    T number(const std::string& key) const {
        const std::string v = trim(text(key));
        T out{};
        const auto* end = v.data() + v.size();
        const auto [ptr, ec] = std::from_chars(v.data(), end, out);
        if (ec != std::errc() || ptr != end || v.empty()) fail(key, "expected a number, got '" + v + "'");
        return out;
    }

    double real(const std::string& key) const {
        const std::string v = trim(text(key));
        try {
            std::size_t used = 0;
            const double d = std::stod(v, &used);
            if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            fail(key, "expected a real number, got '" + v + "'");
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& why) const {
        const key_def* def = find_key(key);
        throw config_error((def ? def->section + "." : std::string()) + key + ": " + why);
    }

    static std::string trim(std::string s) {
        const auto not_space = [](unsigned char c) { return !std::isspace(c); };
        s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
        s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
        return s;
    }

private:
    const setting_map& settings_;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream in(s);
    for (std::string part; std::getline(in, part, sep);) {
        part = reader::trim(part);
        if (!part.empty()) out.push_back(part);
    }
    return out;
}

} // namespace

const std::vector<std::pair<std::string, std::string>>& config_keys() {
    static const auto keys = [] {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& k : key_table()) out.emplace_back(k.section, k.key);
        return out;
    }();
    return keys;
}

setting_map read_config_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw config_error("config file not found: " + path.string());
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw config_error(path.string() + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    setting_map out;
    for (const auto& [section, body] : tree) {
        const bool known_section = std::any_of(key_table().begin(), key_table().end(),
                                               [&](const key_def& k) { return k.section == section; });
        if (body.empty() && known_section) continue;
        if (body.empty()) {
            // key outside any section
            if (!find_key(section)) throw config_error(path.string() + ": unknown key '" + section + "'");
            out[section] = body.data();
            continue;
        }
        for (const auto& [key, value] : body) {
            const key_def* def = find_key(key);
            if (!def || def->section != section)
                throw config_error(path.string() + ": unknown key '" + section + "." + key + "'");
            out[key] = value.data();
        }
    }
    return out;
}

std::string render_config(const setting_map& settings) {
    std::ostringstream out;
    std::string section;
    for (const auto& k : key_table()) {
        // locations differ between otherwise identical runs
        if (k.key == "out" || k.key == "checkpoint") continue;
        const auto it = settings.find(k.key);
        if (it == settings.end() && !k.fallback) continue;
        if (k.section != section) {
            out << (section.empty() ? "" : "\n") << '[' << k.section << "]\n";
            section = k.section;
        }
        out << k.key << " = " << (it != settings.end() ? it->second : *k.fallback) << '\n';
    }
    return out.str();
}

run_config resolve_config(const setting_map& settings, const std::string& command) {
    for (const auto& [key, value] : settings)
        if (!find_key(key)) throw config_error("unknown setting '" + key + "'");
    const reader r(settings);
    run_config c;

    c.seed = r.number<std::uint64_t>("seed");
    c.out = r.text("out");
    if (c.out.empty()) r.fail("out", "output directory must not be empty");
    c.workers = r.number<int>("workers");
    if (c.workers < 1) r.fail("workers", "must be at least 1");
    c.checkpoint = r.text("checkpoint");

    c.images = r.text("images");
    c.labels = r.text("labels");
    c.corpus = r.text("corpus");
    if (c.corpus != "mnist" && c.corpus != "tiny10") r.fail("corpus", "expected mnist or tiny10, got '" + c.corpus + "'");
    c.train_count = r.number<std::size_t>("train_count");
    c.eval_offset = r.number<std::size_t>("eval_offset");
    c.eval_count = r.number<std::size_t>("eval_count");
    if (c.train_count == 0) r.fail("train_count", "must be positive");

    c.retina_width = r.number<int>("width");
    if (c.retina_width < 8) r.fail("width", "retina must be at least 8 pixels wide");
    c.ranges.x_min = r.real("x_min");
    c.ranges.x_max = r.real("x_max");
    c.ranges.y_min = r.real("y_min");
    c.ranges.y_max = r.real("y_max");
    c.ranges.s_min = r.real("s_min");
    c.ranges.s_max = r.real("s_max");
    c.ranges.r_max = r.real("r_max");
    try {
        c.ranges.validate();
    } catch (const argument_error& e) {
        throw config_error(std::string("retina: ") + e.what());
    }

    const std::string widths = reader::trim(r.text("widths"));
    if (widths == "desk") {
        c.spec = layer_spec::desk(c.retina_width);
    } else if (widths == "standard") {
        c.spec = layer_spec::standard(c.retina_width);
    } else {
        c.spec.widths.clear();
        for (const auto& w : split(widths, ',')) {
            int v = 0;
            const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
            if (ec != std::errc() || ptr != w.data() + w.size() || v < 1) r.fail("widths", "bad width '" + w + "'");
            c.spec.widths.push_back(v);
        }
    }
    try {
        c.spec.validate();
    } catch (const argument_error& e) {
        r.fail("widths", e.what());
    }
    if (c.spec.retina_width() != c.retina_width) r.fail("widths", "end widths do not match the retina width");

    c.training.total_steps = r.number<int>("steps");
    if (c.training.total_steps < 0) r.fail("steps", "must be non-negative");
    c.training.batch_size = r.number<int>("batch_size");
    c.training.learning_rate = r.real("learning_rate");
    c.training.optimizer = r.text("optimizer");
    c.training.beta1 = r.real("beta1");
    c.training.beta2 = r.real("beta2");
    c.training.epsilon = r.real("epsilon");
    c.training.seed = c.seed;
    const std::string snaps = reader::trim(r.text("snapshots"));
    if (snaps == "geometric") {
        c.training.snapshot_schedule = geometric_schedule(c.training.total_steps);
    } else {
        for (const auto& s : split(snaps, ',')) {
            int v = 0;
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || ptr != s.data() + s.size() || v < 0 || v > c.training.total_steps)
                r.fail("snapshots", "bad snapshot step '" + s + "'");
            c.training.snapshot_schedule.push_back(v);
        }
        std::sort(c.training.snapshot_schedule.begin(), c.training.snapshot_schedule.end());
    }
    try {
        c.training.validate();
    } catch (const argument_error& e) {
        throw config_error(std::string("train: ") + e.what());
    }
    c.probe_seed = r.number<std::uint64_t>("probe_seed");

    c.alpha = r.real("alpha");
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) r.fail("alpha", "must lie in (0, 1)");
    c.swept_trials = r.number<std::size_t>("swept_trials");
    c.mixed_trials = r.number<std::size_t>("mixed_trials");
    c.identity_count = r.number<std::size_t>("identity_count");
    c.tsne_points = r.number<std::size_t>("tsne_points");
    c.perplexity = r.real("perplexity");
    c.tsne_iterations = r.number<int>("tsne_iterations");
    c.logistic_l2 = r.real("logistic_l2");
    c.ridge = r.real("ridge");
    if (c.swept_trials < 3) r.fail("swept_trials", "needs at least 3 trials");
    if (c.mixed_trials < 50) r.fail("mixed_trials", "needs at least 50 trials");
    if (c.identity_count < 200) r.fail("identity_count", "needs at least 200 stimuli");
    if (!(3.0 * c.perplexity <= static_cast<double>(c.tsne_points)))
        r.fail("perplexity", "needs tsne_points >= 3 * perplexity");

    c.role = reader::trim(r.text("role"));
    c.grid_values = r.number<int>("grid_values");
    c.sweep_positions = r.number<int>("sweep_positions");
    c.lesion_count = r.number<std::size_t>("lesion_count");
    if (c.grid_values < 1) r.fail("grid_values", "must be positive");
    if (c.sweep_positions < 1) r.fail("sweep_positions", "must be positive");

    for (const auto& p : split(r.text("phases"), ',')) {
        const auto parts = split(p, ':');
        if (parts.size() != 3) r.fail("phases", "expected name:source:steps, got '" + p + "'");
        curriculum_phase phase{parts[0], parts[1], 0};
        if (phase.source != "novel_only" && phase.source != "digits_only" && phase.source != "mixed")
            r.fail("phases", "unknown source '" + phase.source + "'");
        const auto [ptr, ec] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), phase.n_steps);
        if (ec != std::errc() || ptr != parts[2].data() + parts[2].size() || phase.n_steps < 1)
            r.fail("phases", "bad step count in '" + p + "'");
        c.phases.push_back(phase);
    }
    c.control_steps = r.number<int>("control_steps");
    c.eval_every = r.number<int>("eval_every");
    c.dense_every = r.number<int>("dense_every");
    c.dense_steps = r.number<int>("dense_steps");
    if (c.eval_every < 1) r.fail("eval_every", "must be positive");
    try {
        c.novel = parse_novel_kind(reader::trim(r.text("novel")));
    } catch (const argument_error& e) {
        r.fail("novel", e.what());
    }
    c.curriculum_eval_count = r.number<std::size_t>("curriculum_eval_count");
    const std::string layers = reader::trim(r.text("plasticity_layers"));
    if (layers != "first" && layers != "all") r.fail("plasticity_layers", "expected first or all");
    c.plasticity_all_layers = layers == "all";

    c.render_kind = reader::trim(r.text("render_kind"));
    c.render_index = r.number<std::size_t>("render_index");
    c.render_props = {r.real("render_x"), r.real("render_y"), r.real("render_s"), r.real("render_r"), -1};

    // path checks
    const bool needs_data = command != "render" || c.render_kind == "digit" || c.render_kind == "mirrored_digit" ||
                            c.render_kind == "double_digit";
    if (needs_data) {
        if (!std::filesystem::exists(c.images)) r.fail("images", "file not found: " + c.images.string());
        if (!std::filesystem::exists(c.labels)) r.fail("labels", "file not found: " + c.labels.string());
    }
    if (command == "analyze" || command == "perturb" || command == "curriculum") {
        if (c.checkpoint.empty()) r.fail("checkpoint", "required for " + command);
        if (!std::filesystem::exists(c.checkpoint)) r.fail("checkpoint", "file not found: " + c.checkpoint.string());
    }
    return c;
}

} // namespace rrn
