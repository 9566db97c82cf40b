#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "helpers.hpp"
#include "rrn/development.hpp"
#include "rrn/error.hpp"
#include "rrn/sources.hpp"

using namespace rrn;

namespace {

network_params zero_params(const layer_spec& spec) {
    network_params p = init_params(spec, 1);
    for (auto& l : p.layers) l.weights.setZero();
    return p;
}

std::vector<image> probe_images(std::uint64_t seed = 64) {
    std::vector<image> out;
    for (const auto& s : build_probe_set(testing::mnist5k().head(200), seed)) out.push_back(s.pixels);
    return out;
}

metric_series series_of(const std::vector<double>& values, const std::string& name = "s") {
    metric_series s;
    s.name = name;
    s.values = values;
    for (std::size_t i = 0; i < values.size(); ++i) s.steps.push_back(static_cast<int>(10 * (i + 1)));
    return s;
}

} // namespace

TEST_CASE("sign census") {
    Eigen::MatrixXd m(2, 2);
    m << 1, -2, 0, 3;
    const auto s = synapse_stats(m);
    CHECK(s.n_excitatory == 2);
    CHECK(s.n_inhibitory == 1);
    CHECK(s.mean_abs_excitatory == 2.0);
    CHECK(s.mean_abs_inhibitory == 2.0);
    CHECK(s.ei_ratio == 2.0);

    const auto pos = synapse_stats(Eigen::MatrixXd::Constant(3, 3, 0.1));
    CHECK(pos.n_inhibitory == 0);
    CHECK(std::isinf(pos.ei_ratio));
    CHECK(pos.ei_ratio > 0);
}

TEST_CASE("sign census matches a per-element loop") {
    std::mt19937_64 gen(1);
    Eigen::MatrixXd m = testing::random_matrix(1024, 4096, gen);
    for (int k = 0; k < 1000; ++k) m(static_cast<Eigen::Index>(gen() % 1024), static_cast<Eigen::Index>(gen() % 4096)) = 0.0;
    std::size_t ne = 0, ni = 0, zeros = 0;
    double se = 0, si = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const double w = m(i, j);
            if (w > 0) {
                ++ne;
                se += w;
            } else if (w < 0) {
                ++ni;
                si -= w;
            } else {
                ++zeros;
            }
        }
    const auto s = synapse_stats(m);
    CHECK(s.n_excitatory == ne);
    CHECK(s.n_inhibitory == ni);
    CHECK(s.n_excitatory + s.n_inhibitory + zeros == static_cast<std::size_t>(m.size()));
    CHECK(std::abs(s.mean_abs_excitatory - se / static_cast<double>(ne)) < 1e-12);
    CHECK(std::abs(s.mean_abs_inhibitory - si / static_cast<double>(ni)) < 1e-12);
    CHECK(s.ei_ratio == static_cast<double>(ne) / static_cast<double>(ni));
}

TEST_CASE("probe set") {
    const auto corpus = testing::mnist5k().head(200);
    const auto probe = build_probe_set(corpus, 64);
    REQUIRE(probe.size() == 64);
    for (std::size_t i = 0; i < probe.size(); ++i) CHECK(probe[i].props.identity == static_cast<int>(i % 10));
    const auto again = build_probe_set(corpus, 64);
    for (std::size_t i = 0; i < probe.size(); ++i) CHECK(again[i].pixels == probe[i].pixels);
}

TEST_CASE("firing statistics") {
    const auto probe = probe_images();
    SUBCASE("zero weights and biases give 0.5 everywhere") {
        const auto f = compute_firing_stats(zero_params(layer_spec::desk()), probe);
        REQUIRE(f.layers.size() == 8);
        for (const auto& l : f.layers) {
            CHECK((l.unit_means.array() == 0.5).all());
            CHECK(l.active_fraction == 0.0);
        }
    }
    SUBCASE("threshold zero makes every unit active") {
        const auto f = compute_firing_stats(init_params(layer_spec::desk(), 2), probe, 0.0);
        for (const auto& l : f.layers) CHECK(l.active_fraction == 1.0);
    }
    SUBCASE("matches a recomputation from activation records") {
        auto params = init_params(layer_spec::desk(), 3);
        std::mt19937_64 gen(4);
        for (auto& l : params.layers) l.bias = testing::random_matrix(l.bias.size(), 1, gen, -1.0, 1.0);
        const auto f = compute_firing_stats(params, probe);
        std::vector<Eigen::VectorXd> sums;
        for (const auto& img : probe) {
            const auto rec = forward(params, img);
            if (sums.empty())
                for (std::size_t l = 1; l < rec.activities.size(); ++l) sums.push_back(Eigen::VectorXd::Zero(rec.activities[l].size()));
            for (std::size_t l = 1; l < rec.activities.size(); ++l) sums[l - 1] += rec.activities[l];
        }
        for (std::size_t l = 0; l < sums.size(); ++l) {
            const Eigen::VectorXd means = sums[l] / static_cast<double>(probe.size());
            CHECK((means - f.layers[l].unit_means).cwiseAbs().maxCoeff() < 1e-12);
            const double active = (means.array() > 0.6).cast<double>().mean();
            CHECK(std::abs(active - f.layers[l].active_fraction) < 1e-12);
            CHECK(f.layers[l].active_fraction >= 0.0);
            CHECK(f.layers[l].active_fraction <= 1.0);
        }
    }
}

TEST_CASE("snapshots are pure and start near the constant predictor") {
    const auto probe = probe_images();
    const auto params = init_params(layer_spec::desk(), 5);
    const auto copy = params;
    const auto a = capture_snapshot(0, params, probe);
    const auto b = capture_snapshot(0, params, probe);
    CHECK(params.identical_to(copy));
    CHECK(a.probe_mse == b.probe_mse);
    CHECK(a.step == 0);
    REQUIRE(a.synapses.size() == b.synapses.size());
    for (std::size_t l = 0; l < a.synapses.size(); ++l) {
        CHECK(a.synapses[l].n_excitatory == b.synapses[l].n_excitatory);
        CHECK(a.synapses[l].mean_abs_excitatory == b.synapses[l].mean_abs_excitatory);
    }
    double constant = 0.0;
    for (const auto& img : probe) constant += mean_squared_error(image(64, 64, 0.5), img);
    constant /= static_cast<double>(probe.size());
    CHECK(std::abs(a.probe_mse - constant) <= 0.05 * constant);
    CHECK(a.inputs.size() == 64);
    CHECK(a.reconstructions.size() == 64);
    const auto mosaic = snapshot_mosaic(a);
    CHECK(mosaic.width > 0);
}

TEST_CASE("probe error falls across a desk-scale run and the series replay exactly") {
    const auto corpus = testing::mnist5k().head(1000);
    const auto probe = probe_images();
    auto run = [&] {
        augmented_digit_source src(corpus, 11);
        train_config cfg;
        cfg.total_steps = 5000;
        cfg.learning_rate = 1e-3;
        cfg.seed = 11;
        cfg.snapshot_schedule = {0, 1000, 2000, 5000};
        std::vector<development_snapshot> snaps;
        train_hooks hooks;
        hooks.on_snapshot.push_back([&](int step, const network_params& p) { snaps.push_back(capture_snapshot(step, p, probe)); });
        const auto res = train(init_params(layer_spec::desk(), 11), cfg, src, hooks);
        return std::pair(res.params, snaps);
    };
    const auto [params, snaps] = run();
    REQUIRE(snaps.size() == 4);
    for (std::size_t k = 1; k < snaps.size(); ++k) CHECK(snaps[k].probe_mse < 1.05 * snaps[k - 1].probe_mse);
    CHECK(snaps.back().probe_mse < snaps.front().probe_mse);

    const auto series = snapshot_series(params, snaps);
    const auto [params2, snaps2] = run();
    const auto series2 = snapshot_series(params2, snaps2);
    REQUIRE(series.size() == series2.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        CHECK(series[i].name == series2[i].name);
        CHECK(series[i].values == series2[i].values);
    }

    const auto dir = testing::scratch_dir("development_csv");
    write_snapshot_csv(dir / "d.csv", params, snaps);
    std::ifstream in(dir / "d.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "step,layer,n_exc,n_inh,mean_abs_exc,mean_abs_inh,active_frac,probe_mse");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 4 * 8);
}

TEST_CASE("ctp detection") {
    SUBCASE("linear series") {
        std::vector<double> v;
        for (int i = 0; i < 20; ++i) v.push_back(0.3 * i - 2.0);
        const std::vector<metric_series> s{series_of(v)};
        CHECK(detect_ctp_candidates(s).empty());
    }
    SUBCASE("clean step discontinuity") {
        std::vector<double> v;
        for (int i = 0; i < 20; ++i) v.push_back(i + (i >= 12 ? 10.0 : 0.0));
        const std::vector<metric_series> s{series_of(v)};
        for (double sens : {0.5, 1.0, 2.0, 3.0, 4.0, 5.0}) {
            const auto c = detect_ctp_candidates(s, sens);
            REQUIRE(c.size() == 1);
            CHECK(c[0].step == 130);
            CHECK(c[0].series == "s");
        }
    }
    SUBCASE("ten sigma jump over jittered slopes") {
        // slopes alternate 1 +- sigma, then one step of 10 sigma
        const double sigma = 0.1;
        std::vector<double> v{0.0};
        for (int i = 1; i < 24; ++i) v.push_back(v.back() + 1.0 + (i % 2 ? sigma : -sigma) + (i == 14 ? 10 * sigma : 0.0));
        const std::vector<metric_series> s{series_of(v)};
        for (double sens : {2.0, 3.0, 4.0, 5.0}) {
            const auto c = detect_ctp_candidates(s, sens);
            REQUIRE(c.size() == 1);
            CHECK(c[0].step == 150);
            CHECK(c[0].trigger == "jump");
        }
    }
    SUBCASE("peak") {
        std::vector<double> v;
        for (int i = 0; i < 20; ++i) v.push_back(-(i - 10.0) * (i - 10.0));
        const std::vector<metric_series> s{series_of(v, "mean_abs_exc retina->V1")};
        const auto c = detect_ctp_candidates(s);
        REQUIRE_FALSE(c.empty());
        CHECK(c[0].trigger.find("peak") != std::string::npos);
        CHECK(c[0].series == "mean_abs_exc retina->V1");
    }
    SUBCASE("too short") {
        const std::vector<metric_series> s{series_of({1.0, 2.0})};
        CHECK_THROWS_AS(detect_ctp_candidates(s), argument_error);
    }
}
