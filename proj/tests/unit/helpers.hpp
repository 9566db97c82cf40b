#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <random>
#include <string>

#include "rrn/image.hpp"
#include "rrn/network.hpp"
#include "rrn/retina.hpp"

namespace testing {

inline std::filesystem::path data_dir() { return RRN_TEST_DATA_DIR; }

inline rrn::digit_corpus mnist5k() {
    return rrn::load_idx(data_dir() / "mnist5k-images-idx3-ubyte", data_dir() / "mnist5k-labels-idx1-ubyte");
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("rrn_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline rrn::image random_image(int h, int w, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    rrn::image img(h, w);
    for (double& v : img.pixels) v = u(gen);
    return img;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen, double lo = -1.0,
                                     double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(gen);
    return m;
}

/// Small but valid spec for fast tests: 16x16 retina.
inline rrn::layer_spec tiny_spec() { return rrn::layer_spec{{256, 64, 32, 64, 256}}; }

/// Glyph with a Gaussian blob centred on its grid.
inline rrn::image blob(int size, double sigma) {
    rrn::image img(size, size);
    const double c = (size - 1) / 2.0;
    for (int r = 0; r < size; ++r)
        for (int col = 0; col < size; ++col)
            img.at(r, col) = std::exp(-((r - c) * (r - c) + (col - c) * (col - c)) / (2 * sigma * sigma));
    return img;
}

} // namespace testing
