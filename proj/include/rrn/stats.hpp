#pragma once

// Small statistics kernels shared by the analysis modules.

#include <cstddef>
#include <span>
#include <vector>

namespace rrn {

double mean(std::span<const double> v);
/// Unbiased (n - 1) sample variance; 0 for fewer than two values.
double sample_variance(std::span<const double> v);

struct pearson_result {
    double r = 0.0;
    /// Either series has zero variance; r is reported as 0.
    bool degenerate = false;
};

/// Two-pass Pearson correlation.
pearson_result pearson(std::span<const double> a, std::span<const double> b);

/// Two-sided p-value of Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

/// Significance of a Pearson r over n pairs via t = r sqrt((n-2)/(1-r^2)).
/// |r| = 1 gives p = 0.
double pearson_p_value(double r, std::size_t n);

struct welch_result {
    double t = 0.0;
    double dof = 0.0;
    double p = 1.0;
};

/// Welch's unequal-variance two-sample t-test, two-sided.
welch_result welch_t_test(std::span<const double> a, std::span<const double> b);

/// Coefficient of determination of `predicted` against `actual`.
/// Defined as 0 when `actual` has zero variance.
double r_squared(std::span<const double> actual, std::span<const double> predicted);

double mean_squared_difference(std::span<const double> a, std::span<const double> b);

/// Mean silhouette coefficient of `points` (row-major n x dim) under `labels`,
/// Euclidean distance. Singleton clusters score 0.
double silhouette_score(std::span<const double> points, std::size_t dim, std::span<const int> labels);

} // namespace rrn
