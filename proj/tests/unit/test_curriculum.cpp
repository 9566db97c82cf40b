#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "helpers.hpp"
#include "rrn/checkpoint.hpp"
#include "rrn/curriculum.hpp"
#include "rrn/error.hpp"

using namespace rrn;

namespace {

std::vector<eval_set> small_evals(const digit_corpus& corpus) {
    eval_set digits{"digits", {}}, novel{"novel", {}};
    const auto trials = sample_mixed_trials(corpus, 16, 21);
    for (const auto& s : trials.stimuli) digits.images.push_back(s.pixels);
    rng gen(22);
    const property_ranges ranges;
    for (int i = 0; i < 16; ++i) novel.images.push_back(generate_novel(novel_kind::symbol_x, ranges.sample(gen), corpus, gen.fork_seed(), 64).pixels);
    return {digits, novel};
}

curriculum_settings quick_settings() {
    curriculum_settings s;
    s.training.learning_rate = 1e-3;
    s.eval_every = 50;
    s.dense_every = 10;
    s.dense_steps = 30;
    s.seed = 5;
    return s;
}

std::vector<double> scaled_abs_normals(std::mt19937_64& gen, std::size_t n, double scale) {
    std::normal_distribution<double> g;
    std::vector<double> v(n);
    for (double& x : v) x = std::abs(scale * g(gen));
    return v;
}

} // namespace

TEST_CASE("an empty curriculum is a no-op") {
    const auto corpus = testing::mnist5k().head(100);
    const auto params = init_params(layer_spec::desk(), 1);
    const auto res = run_curriculum(params, {}, small_evals(corpus), corpus, quick_settings());
    CHECK(res.params.identical_to(params));
    CHECK(res.log.evals.empty());
    CHECK(res.log.boundaries.empty());
}

TEST_CASE("two short phases: log layout, boundaries and determinism") {
    const auto corpus = testing::mnist5k().head(300);
    const auto evals = small_evals(corpus);
    const auto params = init_params(layer_spec::desk(), 2);
    const std::vector<curriculum_phase> phases{{"novel", "novel_only", 100}, {"digits", "digits_only", 100}};
    const auto res = run_curriculum(params, phases, evals, corpus, quick_settings());
    const auto& log = res.log;
    CHECK_FALSE(log.diverged);
    CHECK(log.boundaries == std::vector<int>{0, 100, 200});
    REQUIRE(log.boundary_params.size() == 3);
    CHECK(log.boundary_params[0].identical_to(params));
    CHECK(log.boundary_params[2].identical_to(res.params));

    std::vector<int> steps;
    for (const auto& ev : log.evals) {
        steps.push_back(ev.step);
        for (double m : ev.mse) CHECK(m >= 0.0);
    }
    CHECK(steps == std::vector<int>{0, 10, 20, 30, 50, 100, 110, 120, 130, 150, 200});
    for (std::size_t i = 1; i < steps.size(); ++i) CHECK(steps[i] > steps[i - 1]);

    // evaluations do not touch the weights: the step-0 eval equals a fresh one
    CHECK(log.evals[0].mse[0] == mean_reconstruction_mse(params, evals[0].images));

    const auto again = run_curriculum(params, phases, evals, corpus, quick_settings());
    CHECK(again.params.identical_to(res.params));

    const auto dir = testing::scratch_dir("curriculum");
    for (std::size_t k = 0; k < log.boundary_params.size(); ++k) {
        const auto path = dir / ("b" + std::to_string(k) + ".ck");
        save_checkpoint(path, log.boundary_params[k], log.boundaries[k]);
        CHECK(load_checkpoint(path).params.identical_to(log.boundary_params[k]));
    }
    write_curriculum_csv(dir / "c.csv", log);
    std::ifstream in(dir / "c.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,phase,eval_set,mse");
    std::getline(in, line);
    CHECK(line.rfind("0,novel,digits,", 0) == 0);

    const auto summary = forgetting_summary(log);
    REQUIRE(summary.size() == 2);
    CHECK(summary[0].boundary_mse.size() == 3);
}

TEST_CASE("divergence keeps the log and restores the last boundary") {
    auto corpus = testing::mnist5k().head(100);
    const auto evals = small_evals(corpus);
    for (auto& img : corpus.images) img.pixels[14 * 28 + 14] = std::nan("");
    const auto params = init_params(layer_spec::desk(), 3);
    const std::vector<curriculum_phase> phases{{"novel", "novel_only", 60}, {"digits", "digits_only", 60}};
    const auto res = run_curriculum(params, phases, evals, corpus, quick_settings());
    CHECK(res.log.diverged);
    CHECK(res.log.failure.find("digits") != std::string::npos);
    REQUIRE(res.log.boundary_params.size() == 2);
    CHECK(res.params.identical_to(res.log.boundary_params[1]));
    CHECK(res.log.evals.back().step == 60);
}

TEST_CASE("phase validation") {
    const auto corpus = testing::mnist5k().head(100);
    const auto params = init_params(testing::tiny_spec(), 1);
    const std::vector<curriculum_phase> bad_source{{"p", "pictures", 10}};
    CHECK_THROWS_AS(run_curriculum(params, bad_source, {}, corpus, quick_settings()), argument_error);
    const std::vector<curriculum_phase> no_steps{{"p", "mixed", 0}};
    CHECK_THROWS_AS(run_curriculum(params, no_steps, {}, corpus, quick_settings()), argument_error);
}

TEST_CASE("plasticity of constructed distributions") {
    std::mt19937_64 gen(7);
    SUBCASE("a 2.5x scale is recovered") {
        const auto rep = plasticity_from_deltas(scaled_abs_normals(gen, 1000000, 2.5), scaled_abs_normals(gen, 1000000, 1.0));
        CHECK(rep.ratio >= 2.4);
        CHECK(rep.ratio <= 2.6);
        CHECK(rep.test.p < 1e-40);
        CHECK_FALSE(rep.degenerate);
    }
    SUBCASE("identical checkpoints") {
        auto before = init_params(layer_spec::desk(), 1);
        auto after = before;
        std::mt19937_64 g2(8);
        after.layers[0].weights += testing::random_matrix(after.layers[0].weights.rows(), after.layers[0].weights.cols(), g2, -0.01, 0.01);
        const auto rep = plasticity_compare(before, after, before, after);
        CHECK(rep.ratio == 1.0);
        CHECK(rep.test.p == doctest::Approx(1.0));
        CHECK(rep.layer_name == "retina->V1");
    }
    SUBCASE("no change in phase B") {
        const auto p = init_params(layer_spec::desk(), 1);
        auto q = p;
        q.layers[0].weights(0, 0) += 0.5;
        const auto rep = plasticity_compare(p, q, p, p);
        CHECK(rep.degenerate);
        CHECK(std::isinf(rep.ratio));
    }
    SUBCASE("swapping phases inverts the ratio") {
        const auto p = init_params(layer_spec::desk(), 2);
        auto a = p, b = p;
        std::mt19937_64 g3(9);
        a.layers[0].weights += testing::random_matrix(a.layers[0].weights.rows(), a.layers[0].weights.cols(), g3, -0.02, 0.02);
        b.layers[0].weights += testing::random_matrix(b.layers[0].weights.rows(), b.layers[0].weights.cols(), g3, -0.01, 0.01);
        const auto ab = plasticity_compare(p, a, p, b);
        const auto ba = plasticity_compare(p, b, p, a);
        CHECK(ab.ratio * ba.ratio == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(ab.test.p == doctest::Approx(ba.test.p).epsilon(1e-12));
        for (double d : ab.delta_a) CHECK(d >= 0.0);
    }
    SUBCASE("shape mismatch") {
        const auto p = init_params(layer_spec::desk(), 1);
        const auto other = init_params(layer_spec::desk(32), 1);
        CHECK_THROWS_AS(plasticity_compare(p, p, other, other), shape_error);
    }
}

TEST_CASE("forgetting summary on constructed logs") {
    curriculum_log log;
    log.eval_names = {"novel"};
    log.phase_names = {"a", "b"};
    log.boundaries = {0, 40, 80};
    SUBCASE("monotone") {
        for (int s = 0; s <= 80; s += 20) log.evals.push_back({s, s < 40 ? 0 : 1, {1.0 - s / 100.0}});
        const auto f = forgetting_summary(log);
        REQUIRE(f.size() == 1);
        CHECK(f[0].min_step == 80);
        CHECK(f[0].min_mse == doctest::Approx(0.2));
        CHECK(f[0].final_mse == doctest::Approx(0.2));
        REQUIRE(f[0].boundary_mse.size() == 3);
        CHECK(f[0].boundary_mse[0] == 1.0);
        CHECK(f[0].boundary_mse[1] == doctest::Approx(0.6));
        CHECK(f[0].boundary_mse[2] == doctest::Approx(0.2));
        CHECK(f[0].final_minus_boundary[0] == doctest::Approx(-0.8));
        CHECK(f[0].final_minus_boundary[1] == doctest::Approx(-0.4));
        CHECK(f[0].phase_change[0] == doctest::Approx(-0.4));
        CHECK(f[0].phase_change[1] == doctest::Approx(-0.4 / 0.6));
    }
    SUBCASE("v-shaped") {
        const std::vector<double> v{0.9, 0.5, 0.1, 0.5, 0.9};
        for (int k = 0; k < 5; ++k) log.evals.push_back({20 * k, k < 2 ? 0 : 1, {v[static_cast<std::size_t>(k)]}});
        const auto f = forgetting_summary(log);
        CHECK(f[0].min_step == 40);
        CHECK(f[0].min_mse == 0.1);
    }
    SUBCASE("one phase is not enough") {
        log.phase_names = {"a"};
        log.boundaries = {0, 40};
        log.evals.push_back({0, 0, {0.5}});
        CHECK_THROWS_AS(forgetting_summary(log), argument_error);
    }
}

TEST_CASE("weight delta heatmap") {
    const auto p = init_params(layer_spec::desk(), 1);
    auto q = p;
    q.layers[0].weights(0, 0) += 0.5;
    const auto img = weight_delta_heatmap(p, q, 0, 64);
    CHECK(img.width > 0);
    CHECK(img.at(0, 0) == 1.0);
}
