#include "rrn/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "rrn/error.hpp"

namespace rrn {

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size() - 1);
}

pearson_result pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw argument_error("pearson: series differ in length");
    if (a.size() < 2) return {0.0, true};
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return {0.0, true};
    const double r = sab / std::sqrt(saa * sbb);
    return {std::clamp(r, -1.0, 1.0), false};
}

double student_t_two_sided_p(double t, double dof) {
    if (std::isnan(t)) return 1.0;
    if (std::isinf(t)) return 0.0;
    if (!(dof > 0.0)) throw argument_error("t distribution needs positive degrees of freedom");
    const boost::math::students_t dist(dof);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

double pearson_p_value(double r, std::size_t n) {
    if (n < 3) return 1.0;
    const double dof = static_cast<double>(n - 2);
    const double denom = 1.0 - r * r;
    if (denom <= 0.0) return 0.0;
    return student_t_two_sided_p(r * std::sqrt(dof / denom), dof);
}

welch_result welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw argument_error("welch_t_test needs two samples of size >= 2");
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    for (double v : b) scale = std::max(scale, std::abs(v));
    if (!std::isfinite(scale)) throw numeric_error("welch_t_test on non-finite samples", 0);
    if (scale > 1e150) {
        // the statistic is scale free; shrink huge samples before squaring them
        std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
        for (double& v : sa) v /= scale;
        for (double& v : sb) v /= scale;
        return welch_t_test(sa, sb);
    }
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double ma = mean(a), mb = mean(b);
    const double va = sample_variance(a) / na, vb = sample_variance(b) / nb;
    const double se2 = va + vb;
    welch_result out;
    if (se2 == 0.0) {
        // both samples constant
        out.t = ma == mb ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), ma - mb);
        out.dof = na + nb - 2.0;
        out.p = ma == mb ? 1.0 : 0.0;
        return out;
    }
    out.t = (ma - mb) / std::sqrt(se2);
    const double denom = (va * va) / (na - 1.0) + (vb * vb) / (nb - 1.0);
    out.dof = denom > 0.0 ? se2 * se2 / denom : na + nb - 2.0;
    out.p = student_t_two_sided_p(out.t, out.dof);
    return out;
}

double r_squared(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) throw argument_error("r_squared: series differ in length");
    const double m = mean(actual);
    double ss_tot = 0.0, ss_res = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        ss_tot += (actual[i] - m) * (actual[i] - m);
        ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    }
    if (ss_tot == 0.0) return 0.0;
    return 1.0 - ss_res / ss_tot;
}

double mean_squared_difference(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw argument_error("mean_squared_difference: length mismatch");
    if (a.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return acc / static_cast<double>(a.size());
}

double silhouette_score(std::span<const double> points, std::size_t dim, std::span<const int> labels) {
    const std::size_t n = labels.size();
    if (dim == 0 || points.size() != n * dim) throw argument_error("silhouette_score: shape mismatch");
    std::map<int, std::size_t> counts;
    for (int l : labels) ++counts[l];
    if (counts.size() < 2) throw argument_error("silhouette_score needs at least two clusters");

    auto dist = [&](std::size_t i, std::size_t j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            const double d = points[i * dim + k] - points[j * dim + k];
            acc += d * d;
        }
        return std::sqrt(acc);
    };

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (counts[labels[i]] == 1) continue;
        std::map<int, double> sums;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) sums[labels[j]] += dist(i, j);
        const double a = sums[labels[i]] / static_cast<double>(counts[labels[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [label, sum] : sums)
            if (label != labels[i]) b = std::min(b, sum / static_cast<double>(counts[label]));
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(n);
}

} // namespace rrn
