#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

namespace zrp {

double normal_cdf(double z);
double normal_sf(double z);

// Upper tail of the chi-square law via Boost.Math.
double chi2_sf(double x, double dof);

// Upper tail of Student's t via Boost.Math.
double student_t_sf(double t, double dof);

// Kolmogorov distribution survival function Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}.
double kolmogorov_sf(double lambda);

struct GofResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double dof = 0.0;
    std::size_t classes = 0;
};

// Chi-square goodness of fit of observed counts against reference class
// probabilities probs[k] (k indexes the same classes as counts; any leftover
// probability mass is treated as an implicit tail class).  Classes are pooled
// left to right until each pooled class has expected count >= min_expected;
// dof = pooled classes - 1.  Fewer than two pooled classes yields p = 1.
GofResult chi_square_gof(const std::vector<std::uint64_t>& counts, const std::vector<double>& probs,
                         double min_expected = 5.0);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

// One-sample Kolmogorov-Smirnov against Exp(rate); p-value uses the Stephens
// small-sample adjustment of the asymptotic Kolmogorov law.
KsResult ks_exponential(std::vector<double> samples, double rate);

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

MeanSe mean_se(const std::vector<double>& xs);

// Total variation distance between the empirical law of `counts` (counts[k] =
// occurrences of value k) and the geometric law with the given ratio,
// including the tail mass beyond the last observed value.
double tv_distance_to_geometric(const std::vector<std::uint64_t>& counts, double ratio);

struct SpearmanResult {
    double rho = 0.0;
    // One-sided p-value for a decreasing trend (small means y falls with x).
    double p_decreasing = 1.0;
    std::size_t n = 0;
};

SpearmanResult spearman_trend(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace zrp
