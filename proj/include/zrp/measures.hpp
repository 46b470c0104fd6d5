#pragma once

#include <cstdint>
#include <utility>

#include "zrp/configuration.hpp"
#include "zrp/environment.hpp"

namespace zrp {

// Product measure with geometric marginals: site x holds k particles with
// probability (1 - v/p_x) (v/p_x)^k.  Requires 0 <= v < every window rate.
struct ProductGeometric {
    Environment env;
    double v;

    ProductGeometric(Environment env_, double v_);
};

// P(k) under the single-site marginal with service rate p and fugacity v.
double marginal_pmf(double p, double v, std::int64_t k);

// Mean v / (p - v) of the single-site marginal.
double marginal_mean(double p, double v);

// One exact draw from the product measure; deterministic given (measure, seed).
Configuration sample_configuration(const ProductGeometric& mu, std::uint64_t seed);

// Draws (eta, xi) with eta ~ product(u), xi ~ product(w), u <= w, coupled
// through one shared uniform per site so that eta <= xi pointwise on every
// call; u == w yields identical configurations.
std::pair<Configuration, Configuration> sample_ordered_pair(const Environment& env, double u,
                                                            double w, std::uint64_t seed);

}  // namespace zrp
