#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "rrn/error.hpp"
#include "rrn/property_analysis.hpp"
#include "rrn/stats.hpp"

using namespace rrn;

namespace {

std::vector<double> normals(std::mt19937_64& gen, std::size_t n) {
    std::normal_distribution<double> g;
    std::vector<double> v(n);
    for (double& x : v) x = g(gen);
    return v;
}

std::vector<correlation_result> full_table(double p_all) {
    std::vector<correlation_result> out;
    for (int n = 0; n < 32; ++n)
        for (property p : {property::x, property::y, property::s, property::r}) {
            correlation_result c;
            c.neuron = n;
            c.prop = p;
            c.p_value = p_all;
            c.n = 128;
            out.push_back(c);
        }
    return out;
}

void set_p(std::vector<correlation_result>& table, int neuron, property p, double value) {
    for (auto& c : table)
        if (c.neuron == neuron && c.prop == p) c.p_value = value;
}

// Ten well separated clusters in `dim` dimensions.
std::pair<Eigen::MatrixXd, std::vector<int>> clusters(std::mt19937_64& gen, int per_class, int dim, double spread) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd centers = testing::random_matrix(10, dim, gen, -1.0, 1.0) * 5.0;
    Eigen::MatrixXd x(10 * per_class, dim);
    std::vector<int> labels;
    for (int c = 0; c < 10; ++c)
        for (int i = 0; i < per_class; ++i) {
            const int row = c * per_class + i;
            for (int d = 0; d < dim; ++d) x(row, d) = centers(c, d) + spread * g(gen);
            labels.push_back(c);
        }
    return {x, labels};
}

} // namespace

TEST_CASE("activity equal to the property value correlates perfectly") {
    std::mt19937_64 gen(1);
    const auto v = normals(gen, 64);
    Eigen::MatrixXd act(64, 1);
    for (int i = 0; i < 64; ++i) act(i, 0) = v[static_cast<std::size_t>(i)];
    const auto res = correlate_activities(act, v, property::x, "V4");
    REQUIRE(res.size() == 1);
    CHECK(res[0].r == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(res[0].p_value < 1e-12);
    CHECK(res[0].n == 64);
}

TEST_CASE("independent activity rarely correlates and p is close to uniform") {
    std::mt19937_64 gen(2);
    const int reps = 2000;
    int small = 0, below_tenth = 0;
    for (int k = 0; k < reps; ++k) {
        const auto v = normals(gen, 128);
        Eigen::MatrixXd act(128, 1);
        for (int i = 0; i < 128; ++i) act(i, 0) = normals(gen, 1)[0];
        const auto res = correlate_activities(act, v, property::y, "V4");
        if (std::abs(res[0].r) < 0.3) ++small;
        if (res[0].p_value < 0.1) ++below_tenth;
    }
    CHECK(small / static_cast<double>(reps) > 0.99);
    CHECK(below_tenth / static_cast<double>(reps) > 0.08);
    CHECK(below_tenth / static_cast<double>(reps) < 0.12);
}

TEST_CASE("constant units are degenerate and never significant") {
    const std::vector<double> v{0.1, 0.2, 0.3, 0.4, 0.5};
    const Eigen::MatrixXd act = Eigen::MatrixXd::Constant(5, 2, 0.5);
    for (const auto& c : correlate_activities(act, v, property::s, "V4")) {
        CHECK(c.degenerate);
        CHECK(c.r == 0.0);
        CHECK(c.p_value == 1.0);
    }
    CHECK_THROWS_AS(correlate_activities(act.topRows(2), std::vector<double>{0.1, 0.2}, property::s, "V4"),
                    argument_error);
}

TEST_CASE("correlate on a model matches a naive oracle over forward passes") {
    const auto corpus = testing::mnist5k().head(200);
    const auto trials = sample_trial_set(corpus, "x", 40, canonical_props(), 5);
    const auto params = init_params(layer_spec::desk(), 3);
    const auto res = correlate(trials, params);
    REQUIRE(res.size() == 32);
    for (int n = 0; n < 32; ++n) {
        std::vector<double> act;
        for (const auto& s : trials.stimuli) act.push_back(forward(params, s.pixels).encoding()(n));
        const double r = pearson(act, trials.property_values).r;
        CHECK(std::abs(res[static_cast<std::size_t>(n)].r - r) < 1e-12);
        CHECK(res[static_cast<std::size_t>(n)].layer == "V4");
        CHECK(std::abs(res[static_cast<std::size_t>(n)].r) <= 1.0);
        CHECK(res[static_cast<std::size_t>(n)].p_value >= 0.0);
        CHECK(res[static_cast<std::size_t>(n)].p_value <= 1.0);
    }
    const auto v1 = correlate(trials, params, 1);
    CHECK(v1.size() == 256);
    CHECK(v1[0].layer == "V1");

    const auto none = sample_trial_set(corpus, "none", 40, canonical_props(), 5);
    CHECK_THROWS_AS(correlate(none, params), argument_error);
}

TEST_CASE("top neuron prefers small p then large |r|") {
    std::vector<correlation_result> rs(3);
    for (int i = 0; i < 3; ++i) rs[static_cast<std::size_t>(i)].neuron = i;
    rs[0].p_value = 1e-3;
    rs[0].r = 0.4;
    rs[1].p_value = 1e-5;
    rs[1].r = 0.5;
    rs[2].p_value = 1e-5;
    rs[2].r = -0.7;
    CHECK(top_neuron(rs, property::x) == 2);
}

TEST_CASE("categorize") {
    SUBCASE("vacuous significance") {
        const auto map = categorize(full_table(1.0));
        CHECK(map.non_specific_fraction() == 1.0);
        for (property p : {property::x, property::y, property::s, property::r}) CHECK(map.fraction(p) == 0.0);
    }
    SUBCASE("five x-neurons out of 32") {
        auto t = full_table(0.5);
        for (int n : {1, 4, 9, 20, 31}) set_p(t, n, property::x, 0.001);
        const auto map = categorize(t, 0.01);
        CHECK(map.count(property::x) == 5);
        // 5 of 32 encoding units, reported as 15.6%
        CHECK(std::round(map.fraction(property::x) * 1000.0) / 10.0 == 15.6);
        CHECK(map.non_specific_fraction() == doctest::Approx(27.0 / 32.0));
    }
    SUBCASE("overlaps are allowed") {
        auto t = full_table(0.5);
        for (int n = 0; n < 32; ++n) {
            set_p(t, n, property::x, 0.001);
            set_p(t, n, property::y, 0.001);
        }
        const auto map = categorize(t);
        CHECK(map.fraction(property::x) + map.fraction(property::y) == 2.0);
        CHECK(map.non_specific_fraction() == 0.0);
    }
    SUBCASE("missing pairs") {
        auto t = full_table(0.5);
        t.pop_back();
        CHECK_THROWS_AS(categorize(t), completeness_error);
    }
}

TEST_CASE("linear decoder") {
    std::mt19937_64 gen(3);
    SUBCASE("realizable target") {
        const Eigen::MatrixXd enc = testing::random_matrix(400, 32, gen, 0.0, 1.0);
        const Eigen::VectorXd w = testing::random_matrix(32, 1, gen);
        std::vector<double> y(400);
        for (int i = 0; i < 400; ++i) y[static_cast<std::size_t>(i)] = enc.row(i).dot(w) + 0.7;
        const auto fit = fit_linear_decoder(enc, y, 1);
        CHECK(fit.test_r2 > 0.999);
        CHECK(fit.decoder.intercept == doctest::Approx(0.7).epsilon(1e-8));
        CHECK_FALSE(fit.rank_deficient);
        CHECK(fit.decoder.weights.allFinite());
    }
    SUBCASE("noise targets") {
        double total = 0.0;
        const int reps = 30;
        for (int k = 0; k < reps; ++k) {
            const Eigen::MatrixXd enc = testing::random_matrix(500, 32, gen, 0.0, 1.0);
            total += fit_linear_decoder(enc, normals(gen, 500), static_cast<std::uint64_t>(k)).test_r2;
        }
        CHECK(total / reps <= 0.1);
    }
    SUBCASE("constant targets") {
        const Eigen::MatrixXd enc = testing::random_matrix(100, 32, gen, 0.0, 1.0);
        const auto fit = fit_linear_decoder(enc, std::vector<double>(100, 0.25), 2);
        CHECK(fit.test_r2 == 0.0);
        CHECK(fit.train_mse < 1e-20);
    }
    SUBCASE("rank deficient design") {
        Eigen::MatrixXd enc = testing::random_matrix(200, 32, gen, 0.0, 1.0);
        enc.col(5) = enc.col(4);
        std::vector<double> y(200);
        for (int i = 0; i < 200; ++i) y[static_cast<std::size_t>(i)] = enc(i, 4) - enc(i, 0);
        const auto fit = fit_linear_decoder(enc, y, 3);
        CHECK(fit.rank_deficient);
        CHECK(fit.condition_number > 1e10);
        CHECK(fit.test_r2 > 0.999);
        CHECK(fit.decoder.weights(4) == doctest::Approx(fit.decoder.weights(5)));
    }
    SUBCASE("test R2 does not beat train R2 beyond noise") {
        const Eigen::MatrixXd enc = testing::random_matrix(300, 32, gen, 0.0, 1.0);
        std::vector<double> y(300);
        const auto noise = normals(gen, 300);
        for (int i = 0; i < 300; ++i) y[static_cast<std::size_t>(i)] = enc(i, 0) + enc(i, 1) + 0.3 * noise[static_cast<std::size_t>(i)];
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto fit = fit_linear_decoder(enc, y, s);
            CHECK(fit.test_r2 <= fit.train_r2 + 0.05);
        }
    }
    SUBCASE("ridge shrinks the weights") {
        const Eigen::MatrixXd enc = testing::random_matrix(200, 32, gen, 0.0, 1.0);
        const auto y = normals(gen, 200);
        const auto ols = fit_linear_decoder(enc, y, 4);
        const auto ridge = fit_linear_decoder(enc, y, 4, {0.8, 1.0});
        CHECK(ridge.decoder.weights.norm() < ols.decoder.weights.norm());
    }
    CHECK_THROWS_AS(fit_linear_decoder(Eigen::MatrixXd::Zero(49, 32), std::vector<double>(49, 0.0), 1),
                    argument_error);
}

TEST_CASE("identity classifier") {
    std::mt19937_64 gen(4);
    SUBCASE("separable clusters") {
        const auto [x, labels] = clusters(gen, 40, 32, 0.3);
        const auto fit = fit_identity_classifier(x, labels, 1);
        CHECK(fit.test_accuracy > 0.95);
        CHECK(fit.model.weights.rows() == 10);
        CHECK(fit.model.weights.cols() == 32);
        CHECK(fit.model.weights.allFinite());
        for (int i = 0; i < 20; ++i) CHECK(std::abs(fit.model.probabilities(x.row(i)).sum() - 1.0) < 1e-9);
    }
    SUBCASE("standardized fits ignore the feature scale") {
        auto [x, labels] = clusters(gen, 40, 32, 0.3);
        const Eigen::MatrixXd tiny = (x * 1e-4).array() + 0.5;
        logistic_options z;
        z.standardize = true;
        const auto a = fit_identity_classifier(tiny, labels, 1, z);
        const auto b = fit_identity_classifier(x, labels, 1, z);
        CHECK(a.test_accuracy > 0.95);
        CHECK(a.test_accuracy == b.test_accuracy);
        // predictions are made on the caller's scale
        CHECK(classifier_accuracy(a.model, tiny, labels) > 0.95);
    }
    SUBCASE("shuffled labels sit in the chance band") {
        const Eigen::MatrixXd x = testing::random_matrix(1000, 32, gen, 0.0, 1.0);
        std::vector<int> labels(1000);
        for (int i = 0; i < 1000; ++i) labels[static_cast<std::size_t>(i)] = i % 10;
        std::shuffle(labels.begin(), labels.end(), gen);
        const auto fit = fit_identity_classifier(x, labels, 2);
        CHECK(fit.test_accuracy >= 0.05);
        CHECK(fit.test_accuracy <= 0.2);
    }
    SUBCASE("degenerate labels") {
        const Eigen::MatrixXd x = testing::random_matrix(300, 32, gen);
        CHECK_THROWS_AS(fit_identity_classifier(x, std::vector<int>(300, 3), 1), stratification_error);
        std::vector<int> bad(300, 0);
        bad[0] = 10;
        CHECK_THROWS_AS(fit_identity_classifier(x, bad, 1), argument_error);
        CHECK_THROWS_AS(fit_identity_classifier(x.topRows(199), std::vector<int>(199, 0), 1), argument_error);
    }
    SUBCASE("converges to a small gradient") {
        const auto [x, labels] = clusters(gen, 30, 8, 2.0);
        const auto fit = fit_identity_classifier(x, labels, 3);
        CHECK(fit.gradient_norm < 1e-6);
        CHECK(fit.iterations < 10000);
    }
}

TEST_CASE("perturbation conditions") {
    CHECK(parse_perturbation_condition("none").prop == std::nullopt);
    const auto y = parse_perturbation_condition("y");
    CHECK(y.prop == property::y);
    CHECK(y.level == 1.0);
    CHECK(parse_perturbation_condition("s:0.5").level == 0.5);
    CHECK_THROWS_AS(parse_perturbation_condition("q"), argument_error);
    CHECK_THROWS_AS(parse_perturbation_condition("x:1.5"), argument_error);
}

TEST_CASE("the none condition reproduces the baseline evaluation") {
    const auto corpus = testing::mnist5k();
    const auto params = init_params(layer_spec::desk(), 4);
    const auto train_set = corpus.head(300);
    std::vector<image> imgs;
    for (std::size_t i = 0; i < train_set.size(); ++i)
        imgs.push_back(render_stimulus(train_set.images[i], canonical_props(), 64).pixels);
    const auto fit = fit_identity_classifier(encode_all(params, imgs), train_set.labels, 1);

    const auto eval = corpus.slice(4000, 200);
    std::vector<image> eval_imgs;
    for (std::size_t i = 0; i < eval.size(); ++i)
        eval_imgs.push_back(render_stimulus(eval.images[i], canonical_props(), 64).pixels);
    const double baseline = classifier_accuracy(fit.model, encode_all(params, eval_imgs), eval.labels);
    const std::vector<perturbation_condition> conds{parse_perturbation_condition("none"),
                                                    parse_perturbation_condition("y")};
    const auto res = perturbation_robustness(params, fit.model, eval, conds);
    REQUIRE(res.size() == 2);
    CHECK(res[0].accuracy == baseline);
    CHECK(res[0].n == 200);
}

TEST_CASE("identity correlation matrix") {
    std::vector<int> labels(500);
    for (int i = 0; i < 500; ++i) labels[static_cast<std::size_t>(i)] = i % 10;
    SUBCASE("indicator neuron and constant neuron") {
        Eigen::MatrixXd enc = Eigen::MatrixXd::Zero(500, 2);
        for (int i = 0; i < 500; ++i) enc(i, 0) = labels[static_cast<std::size_t>(i)] == 7 ? 1.0 : 0.0;
        enc.col(1).setConstant(0.5);
        const auto m = identity_correlation_matrix(enc, labels);
        CHECK(m.r(0, 7) == doctest::Approx(1.0));
        for (int d = 0; d < 10; ++d)
            if (d != 7) CHECK(m.r(0, d) < 0.0);
        CHECK(m.degenerate[1]);
        CHECK(m.r.row(1).isZero(0.0));
        CHECK_FALSE(m.significant.row(1).any());
    }
    SUBCASE("null encodings are significant at about alpha") {
        std::mt19937_64 gen(5);
        std::vector<int> lab(1000);
        for (int i = 0; i < 1000; ++i) lab[static_cast<std::size_t>(i)] = i % 10;
        double frac = 0.0;
        const int reps = 20;
        for (int k = 0; k < reps; ++k) {
            const Eigen::MatrixXd enc = testing::random_matrix(1000, 32, gen, 0.0, 1.0);
            frac += identity_correlation_matrix(enc, lab).significant.cast<double>().mean();
        }
        frac /= reps;
        CHECK(frac > 0.004);
        CHECK(frac < 0.02);
    }
    SUBCASE("all digits required") {
        std::vector<int> short_labels(500, 1);
        CHECK_THROWS_AS(identity_correlation_matrix(Eigen::MatrixXd::Zero(500, 3), short_labels), argument_error);
    }
}
