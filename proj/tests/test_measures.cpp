#include <doctest.h>

#include <cmath>
#include <vector>

#include "zrp/errors.hpp"
#include "zrp/measures.hpp"
#include "zrp/stats.hpp"

using namespace zrp;

TEST_CASE("single-site marginal pmf and mean") {
    // Ratio r = v/p gives P(k) = (1-r) r^k and mean v/(p-v).
    CHECK(marginal_pmf(1.0, 0.5, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(marginal_pmf(1.0, 0.5, 3) == doctest::Approx(0.0625).epsilon(1e-14));
    CHECK(marginal_pmf(0.8, 0.4, 1) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(marginal_pmf(1.0, 0.5, -1) == 0.0);
    CHECK(marginal_pmf(1.0, 0.0, 0) == 1.0);
    CHECK(marginal_pmf(1.0, 0.0, 2) == 0.0);
    CHECK(marginal_mean(1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(marginal_mean(0.75, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(marginal_pmf(0.5, 0.5, 0), FugacityTooHigh);
    CHECK_THROWS_AS(marginal_mean(0.5, 0.6), FugacityTooHigh);

    double total = 0.0;
    for (std::int64_t k = 0; k < 200; ++k) total += marginal_pmf(0.9, 0.6, k);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("product measure rejects fugacities at or above the slowest rate") {
    const Environment env = build_env({1.0, 0.7}, 0.5);
    CHECK_THROWS_AS(ProductGeometric(env, 0.7), FugacityTooHigh);
    CHECK_THROWS_AS(ProductGeometric(env, -0.2), FugacityTooHigh);
    CHECK_NOTHROW(ProductGeometric(env, 0.69));
    CHECK_NOTHROW(ProductGeometric(env, 0.0));
}

TEST_CASE("configuration sampling is deterministic in the seed") {
    const Environment env = build_env({1.0, 0.8, 0.9, 0.7}, 0.5);
    const ProductGeometric mu(env, 0.4);
    CHECK(sample_configuration(mu, 11) == sample_configuration(mu, 11));
    CHECK(sample_configuration(mu, 11) != sample_configuration(mu, 12));
    CHECK(sample_configuration(ProductGeometric(env, 0.0), 3).total() == 0);
}

TEST_CASE("sampled marginals pass a chi-square test against the pmf") {
    const Environment env = build_env({1.0, 0.8, 0.9, 0.7, 0.95, 0.85}, 0.5);
    const ProductGeometric mu(env, 0.55);
    const std::size_t n = env.size();
    const int replicas = 20000;

    std::vector<std::vector<std::uint64_t>> counts(n);
    std::vector<double> means(n, 0.0);
    for (int r = 0; r < replicas; ++r) {
        const Configuration cfg = sample_configuration(mu, 1000 + static_cast<std::uint64_t>(r));
        for (std::size_t i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(cfg.occupancies()[i]);
            if (counts[i].size() <= k) counts[i].resize(k + 1, 0);
            ++counts[i][k];
            means[i] += static_cast<double>(k);
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double p = env.rates()[i];
        std::vector<double> probs(counts[i].size());
        for (std::size_t k = 0; k < probs.size(); ++k)
            probs[k] = marginal_pmf(p, mu.v, static_cast<std::int64_t>(k));
        const GofResult gof = chi_square_gof(counts[i], probs);
        CHECK(gof.p_value > 1e-4);

        const double mean = means[i] / replicas;
        const double r = mu.v / p;
        const double sd = std::sqrt(r) / (1.0 - r);
        CHECK(std::abs(mean - marginal_mean(p, mu.v)) < 4.0 * sd / std::sqrt(double(replicas)));
    }
}

TEST_CASE("ordered pairs are pointwise ordered on every draw") {
    const Environment env = build_env(std::vector<double>(50, 0.9), 0.5);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto [eta, xi] = sample_ordered_pair(env, 0.3, 0.6, seed);
        for (Site x = env.x_lo(); x <= env.x_hi(); ++x) CHECK(eta.at(x) <= xi.at(x));
    }
}

TEST_CASE("ordered pair marginals coincide with single-measure samples") {
    // Both draws consume the same per-site uniform, so each leg reproduces a
    // plain sample at its own fugacity bit for bit.
    const Environment env = build_env({1.0, 0.8, 0.9, 0.7}, 0.5);
    const auto [eta, xi] = sample_ordered_pair(env, 0.3, 0.6, 77);
    CHECK(eta == sample_configuration(ProductGeometric(env, 0.3), 77));
    CHECK(xi == sample_configuration(ProductGeometric(env, 0.6), 77));

    const auto [same_a, same_b] = sample_ordered_pair(env, 0.4, 0.4, 5);
    CHECK(same_a == same_b);

    CHECK_THROWS_AS(sample_ordered_pair(env, 0.6, 0.3, 1), FugacityTooHigh);
    CHECK_THROWS_AS(sample_ordered_pair(env, 0.1, 0.7, 1), FugacityTooHigh);
}
