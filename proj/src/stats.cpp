#include "zrp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "zrp/errors.hpp"

namespace zrp {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double chi2_sf(double x, double dof) {
    if (x <= 0.0) return 1.0;
    boost::math::chi_squared dist(dof);
    return boost::math::cdf(boost::math::complement(dist, x));
}

double student_t_sf(double t, double dof) {
    boost::math::students_t dist(dof);
    return boost::math::cdf(boost::math::complement(dist, t));
}

double kolmogorov_sf(double lambda) {
    if (lambda <= 0.18) return 1.0;  // series is slow there and the value is 1 to 1e-10
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

GofResult chi_square_gof(const std::vector<std::uint64_t>& counts, const std::vector<double>& probs,
                         double min_expected) {
    const double n = static_cast<double>(
        std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
    GofResult out;
    if (n == 0.0) return out;

    const std::size_t k_max = std::max(counts.size(), probs.size());
    double tail_prob = 1.0;
    for (double p : probs) tail_prob -= p;
    tail_prob = std::max(tail_prob, 0.0);

    // Pool adjacent classes left to right; the implicit tail joins the last class.
    std::vector<double> obs_pooled, exp_pooled;
    double obs_acc = 0.0, exp_acc = 0.0;
    for (std::size_t k = 0; k < k_max; ++k) {
        obs_acc += k < counts.size() ? static_cast<double>(counts[k]) : 0.0;
        exp_acc += n * (k < probs.size() ? probs[k] : 0.0);
        if (exp_acc >= min_expected) {
            obs_pooled.push_back(obs_acc);
            exp_pooled.push_back(exp_acc);
            obs_acc = 0.0;
            exp_acc = 0.0;
        }
    }
    obs_acc += 0.0;
    exp_acc += n * tail_prob;
    if (!exp_pooled.empty() || exp_acc >= min_expected) {
        if (exp_pooled.empty()) {
            obs_pooled.push_back(obs_acc);
            exp_pooled.push_back(exp_acc);
        } else {
            obs_pooled.back() += obs_acc;
            exp_pooled.back() += exp_acc;
        }
    }

    out.classes = exp_pooled.size();
    if (out.classes < 2) return out;  // degenerate reference; nothing to test

    double stat = 0.0;
    for (std::size_t i = 0; i < exp_pooled.size(); ++i) {
        const double d = obs_pooled[i] - exp_pooled[i];
        stat += d * d / exp_pooled[i];
    }
    out.statistic = stat;
    out.dof = static_cast<double>(out.classes - 1);
    out.p_value = chi2_sf(stat, out.dof);
    return out;
}

KsResult ks_exponential(std::vector<double> samples, double rate) {
    KsResult out;
    out.n = samples.size();
    if (samples.empty()) return out;
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = 1.0 - std::exp(-rate * samples[i]);
        const double hi = (static_cast<double>(i) + 1.0) / n - f;
        const double lo = f - static_cast<double>(i) / n;
        d = std::max({d, hi, lo});
    }
    out.statistic = d;
    const double sqrt_n = std::sqrt(n);
    out.p_value = kolmogorov_sf((sqrt_n + 0.12 + 0.11 / sqrt_n) * d);
    return out;
}

MeanSe mean_se(const std::vector<double>& xs) {
    MeanSe out;
    out.n = xs.size();
    if (xs.empty()) return out;
    const double n = static_cast<double>(xs.size());
    out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() < 2) return out;
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / (n - 1.0) / n);
    return out;
}

double tv_distance_to_geometric(const std::vector<std::uint64_t>& counts, double ratio) {
    if (!(ratio >= 0.0) || !(ratio < 1.0))
        throw FugacityTooHigh("geometric ratio must lie in [0, 1), got " + std::to_string(ratio));
    const double n = static_cast<double>(
        std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
    if (n == 0.0) return 1.0;
    double sum = 0.0;
    double q = 1.0 - ratio;  // reference mass at k
    double tail = 1.0;       // reference mass at >= k
    for (std::size_t k = 0; k < counts.size(); ++k) {
        sum += std::abs(static_cast<double>(counts[k]) / n - q);
        tail -= q;
        q *= ratio;
    }
    sum += std::max(tail, 0.0);  // reference tail where the empirical law has none
    return 0.5 * sum;
}

namespace {

std::vector<double> ranks_with_ties(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> rank(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[idx[j + 1]] == xs[idx[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = avg;
        i = j + 1;
    }
    return rank;
}

}  // namespace

SpearmanResult spearman_trend(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw TooFewSamples("trend inputs must have equal length");
    SpearmanResult out;
    out.n = x.size();
    if (out.n < 4) return out;  // too short to call a trend; p stays 1

    const std::vector<double> rx = ranks_with_ties(x);
    const std::vector<double> ry = ranks_with_ties(y);
    const double n = static_cast<double>(out.n);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < out.n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < out.n; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return out;  // constant input; no trend
    out.rho = sxy / std::sqrt(sxx * syy);
    const double r = std::clamp(out.rho, -0.999999999, 0.999999999);
    const double t = r * std::sqrt((n - 2.0) / (1.0 - r * r));
    // Decreasing trend shows as rho < 0, i.e. t in the lower tail.
    out.p_decreasing = student_t_sf(-t, n - 2.0);
    return out;
}

}  // namespace zrp
