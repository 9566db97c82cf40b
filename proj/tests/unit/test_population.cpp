#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "rrn/error.hpp"
#include "rrn/population_analysis.hpp"
#include "rrn/stats.hpp"

using namespace rrn;

namespace {

double naive_row_pearson(const Eigen::MatrixXd& m, Eigen::Index i, Eigen::Index j) {
    std::vector<double> a, b;
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
        a.push_back(m(i, k));
        b.push_back(m(j, k));
    }
    double ma = 0, mb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        ma += a[k];
        mb += b[k];
    }
    ma /= static_cast<double>(a.size());
    mb /= static_cast<double>(a.size());
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sab += (a[k] - ma) * (b[k] - mb);
        saa += (a[k] - ma) * (a[k] - ma);
        sbb += (b[k] - mb) * (b[k] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

void check_similarity_invariants(const Eigen::MatrixXd& s) {
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        CHECK(s(i, i) == 1.0);
        for (Eigen::Index j = 0; j < s.cols(); ++j) {
            CHECK(std::abs(s(i, j) - s(j, i)) <= 1e-12);
            CHECK(s(i, j) >= -1.0);
            CHECK(s(i, j) <= 1.0);
        }
    }
}

} // namespace

TEST_CASE("stimulus grid layout") {
    const auto corpus = testing::mnist5k().head(500);
    const auto grid = build_stimulus_grid(property::x, corpus, canonical_props(), 7);
    REQUIRE(grid.size() == 100);
    REQUIRE(grid.levels.size() == 10);
    // ten levels spanning -0.2 .. +0.2
    CHECK(grid.levels.front() == doctest::Approx(-0.2));
    CHECK(grid.levels.back() == doctest::Approx(0.2));
    for (std::size_t b = 1; b < 10; ++b) CHECK(grid.levels[b] - grid.levels[b - 1] == doctest::Approx(0.4 / 9));
    CHECK(grid.block_of(23) == 2);
    CHECK(grid.identity_of(23) == 3);
    CHECK(grid.stimuli[23].props.x == grid.levels[2]);
    CHECK(grid.stimuli[23].props.identity == 3);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(corpus.labels[grid.corpus_index[i]] == grid.identity_of(i));
        CHECK(grid.stimuli[i].props.y == 0.0);
    }
    const auto again = build_stimulus_grid(property::x, corpus, canonical_props(), 7);
    CHECK(again.corpus_index == grid.corpus_index);
    CHECK(again.images() == grid.images());

    digit_corpus missing = corpus;
    for (auto& l : missing.labels)
        if (l == 4) l = 5;
    CHECK_THROWS_AS(build_stimulus_grid(property::s, missing, canonical_props(), 1), corpus_error);
}

TEST_CASE("similarity from random encodings matches a pairwise oracle") {
    std::mt19937_64 gen(1);
    const Eigen::MatrixXd enc = testing::random_matrix(60, 32, gen, 0.0, 1.0);
    const auto sim = similarity_from_encodings(enc);
    check_similarity_invariants(sim.values);
    for (Eigen::Index i = 0; i < 60; ++i)
        for (Eigen::Index j = 0; j < 60; ++j)
            if (i != j) CHECK(std::abs(sim.values(i, j) - naive_row_pearson(enc, i, j)) < 1e-12);
}

TEST_CASE("duplicated and constant encodings") {
    std::mt19937_64 gen(2);
    Eigen::MatrixXd enc = testing::random_matrix(5, 32, gen, 0.0, 1.0);
    enc.row(3) = enc.row(1);
    enc.row(4).setConstant(0.5);
    const auto sim = similarity_from_encodings(enc);
    CHECK(sim.values(1, 3) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sim.degenerate[4]);
    CHECK(sim.values(4, 4) == 1.0);
    for (int j = 0; j < 4; ++j) CHECK(sim.values(4, j) == 0.0);
}

TEST_CASE("similarity matrix of a real grid") {
    const auto corpus = testing::mnist5k().head(500);
    const auto grid = build_stimulus_grid(property::s, corpus, canonical_props(), 3);
    const auto sim = similarity_matrix(grid, init_params(layer_spec::desk(), 1));
    CHECK(sim.values.rows() == 100);
    check_similarity_invariants(sim.values);
}

TEST_CASE("paradiagonal score") {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(100, 100);
    CHECK(paradiagonal_score(eye).stripe_strength == 0.0);
    CHECK(paradiagonal_score(eye).background == 0.0);
    const auto ones = paradiagonal_score(Eigen::MatrixXd::Ones(100, 100));
    CHECK(ones.stripe_strength == 1.0);
    CHECK(ones.background == 1.0);
    Eigen::MatrixXd m(100, 100);
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 100; ++j) m(i, j) = i % 10 == j % 10 ? 0.9 : 0.1;
    const auto score = paradiagonal_score(m);
    CHECK(std::abs(score.stripe_strength - 0.9) < 1e-12);
    CHECK(std::abs(score.background - 0.1) < 1e-12);
    CHECK(score.contrast() == doctest::Approx(0.8));
}

TEST_CASE("tsne") {
    SUBCASE("three equidistant points stay equidistant") {
        Eigen::MatrixXd pts = Eigen::MatrixXd::Identity(3, 3);
        tsne_options opt;
        opt.perplexity = 1.0;
        const auto emb = tsne_embed(pts, 4, opt);
        const double d01 = (emb.coords.row(0) - emb.coords.row(1)).norm();
        const double d02 = (emb.coords.row(0) - emb.coords.row(2)).norm();
        const double d12 = (emb.coords.row(1) - emb.coords.row(2)).norm();
        const double hi = std::max({d01, d02, d12}), lo = std::min({d01, d02, d12});
        CHECK(hi <= 1.05 * lo);
    }
    SUBCASE("separated clusters, KL trend and purity") {
        std::mt19937_64 gen(5);
        std::normal_distribution<double> g;
        Eigen::MatrixXd pts(100, 32);
        std::vector<int> labels;
        for (int i = 0; i < 100; ++i) {
            labels.push_back(i < 50 ? 0 : 1);
            for (int d = 0; d < 32; ++d) pts(i, d) = g(gen) + (i < 50 ? 0.0 : 8.0);
        }
        const auto emb = tsne_embed(pts, 6);
        CHECK(emb.coords.allFinite());
        std::vector<double> flat;
        for (int i = 0; i < 100; ++i) {
            flat.push_back(emb.coords(i, 0));
            flat.push_back(emb.coords(i, 1));
        }
        CHECK(silhouette_score(flat, 2, labels) > 0.5);
        REQUIRE(emb.kl_trace.size() == 1000);
        CHECK(emb.kl() >= 0.0);
        CHECK(emb.kl_trace[999] <= 1.01 * emb.kl_trace[299]);

        const auto again = tsne_embed(pts, 6);
        CHECK(again.coords == emb.coords);
    }
    CHECK_THROWS_AS(tsne_embed(Eigen::MatrixXd::Zero(50, 4), 1), argument_error);
}

TEST_CASE("top responsive agrees with a full sort") {
    Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 32, 0.2);
    one(0, 5) = 0.9;
    CHECK(top_responsive(one, 3)[0][0] == 5);
    const auto flat = top_responsive(Eigen::MatrixXd::Constant(1, 32, 0.4), 4);
    CHECK(flat[0] == std::vector<int>{0, 1, 2, 3});

    std::mt19937_64 gen(7);
    Eigen::MatrixXd enc = testing::random_matrix(200, 32, gen, 0.0, 1.0);
    // coarse values so ties actually happen
    enc = (enc * 8.0).array().floor().matrix() / 8.0;
    const auto got = top_responsive(enc, 5);
    for (int i = 0; i < 200; ++i) {
        std::vector<int> idx(32);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return enc(i, a) > enc(i, b); });
        idx.resize(5);
        CHECK(got[static_cast<std::size_t>(i)] == idx);
    }
}

TEST_CASE("favorite images") {
    std::mt19937_64 gen(8);
    std::vector<image> stimuli;
    for (int i = 0; i < 30; ++i) stimuli.push_back(testing::random_image(8, 8, gen));
    Eigen::MatrixXd enc = testing::random_matrix(30, 32, gen, 0.0, 1.0);
    std::vector<double> score(30);
    for (int i = 0; i < 30; ++i) score[static_cast<std::size_t>(i)] = std::sin(i * 1.7);
    for (int i = 0; i < 30; ++i) enc(i, 9) = score[static_cast<std::size_t>(i)];
    std::vector<std::size_t> order(30);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });

    const auto fav = favorite_images(stimuli, enc, 9, 5);
    CHECK(fav.ranking == std::vector<std::size_t>(order.begin(), order.begin() + 5));
    CHECK(fav.top[0] == stimuli[order[0]]);
    image mean(8, 8);
    for (std::size_t k = 0; k < 20; ++k)
        for (std::size_t p = 0; p < 64; ++p) mean.pixels[p] += stimuli[order[k]].pixels[p] / 20.0;
    for (std::size_t p = 0; p < 64; ++p) CHECK(std::abs(fav.mean_image.pixels[p] - mean.pixels[p]) < 1e-12);

    CHECK(favorite_images(stimuli, enc, 9, 1).ranking == std::vector<std::size_t>{order[0]});

    const std::vector<image> same(20, stimuli[0]);
    CHECK(favorite_images(same, enc.topRows(20), 0, 3).mean_image == stimuli[0]);
}

TEST_CASE("binning and outputs") {
    const std::vector<double> v{-0.2, -0.19, 0.0, 0.2};
    CHECK(bin_values(v, 4, -0.2, 0.2) == std::vector<int>{0, 0, 2, 3});

    const auto dir = testing::scratch_dir("population_io");
    Eigen::MatrixXd m(2, 2);
    m << 1, -0.5, -0.5, 1;
    write_matrix_csv(dir / "m.csv", m);
    std::ifstream in(dir / "m.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line.find("-0.5") != std::string::npos);
    const auto heat = correlation_heatmap(m);
    CHECK(heat.at(0, 0) == 1.0);
    CHECK(heat.at(0, 1) == 0.25);
}
