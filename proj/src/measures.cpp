#include "zrp/measures.hpp"

#include <cmath>
#include <string>

#include "zrp/rng.hpp"

namespace zrp {

namespace {

void require_fugacity(const Environment& env, double v) {
    if (!(v >= 0.0) || !(v < env.min_rate()))
        throw FugacityTooHigh("fugacity " + std::to_string(v) +
                              " must lie in [0, min rate); min rate is " +
                              std::to_string(env.min_rate()));
}

}  // namespace

ProductGeometric::ProductGeometric(Environment env_, double v_) : env(std::move(env_)), v(v_) {
    require_fugacity(env, v);
}

double marginal_pmf(double p, double v, std::int64_t k) {
    if (!(p > 0.0) || !(v >= 0.0) || !(v < p))
        throw FugacityTooHigh("marginal requires 0 <= v < p");
    if (k < 0) return 0.0;
    const double r = v / p;
    if (r == 0.0) return k == 0 ? 1.0 : 0.0;
    return (1.0 - r) * std::pow(r, static_cast<double>(k));
}

double marginal_mean(double p, double v) {
    if (!(p > 0.0) || !(v >= 0.0) || !(v < p))
        throw FugacityTooHigh("marginal requires 0 <= v < p");
    return v / (p - v);
}

Configuration sample_configuration(const ProductGeometric& mu, std::uint64_t seed) {
    const Environment& env = mu.env;
    std::vector<std::int64_t> occ;
    occ.reserve(env.size());
    for (Site x = env.x_lo(); x <= env.x_hi(); ++x) {
        RandomStream rs(derive_seed(seed, StreamKind::initial_draw, x));
        occ.push_back(geometric_icdf(rs.u01_pos(), mu.v / env.rate(x)));
    }
    return Configuration(env.x_lo(), std::move(occ));
}

std::pair<Configuration, Configuration> sample_ordered_pair(const Environment& env, double u,
                                                            double w, std::uint64_t seed) {
    require_fugacity(env, u);
    require_fugacity(env, w);
    if (u > w) throw FugacityTooHigh("ordered pair requires u <= w");
    std::vector<std::int64_t> lo_occ, hi_occ;
    lo_occ.reserve(env.size());
    hi_occ.reserve(env.size());
    for (Site x = env.x_lo(); x <= env.x_hi(); ++x) {
        RandomStream rs(derive_seed(seed, StreamKind::initial_draw, x));
        const double q = rs.u01_pos();
        const double p = env.rate(x);
        // geometric_icdf is monotone in the ratio for a fixed uniform, so the
        // pointwise order holds surely, not just in distribution.
        lo_occ.push_back(geometric_icdf(q, u / p));
        hi_occ.push_back(geometric_icdf(q, w / p));
    }
    return {Configuration(env.x_lo(), std::move(lo_occ)),
            Configuration(env.x_lo(), std::move(hi_occ))};
}

}  // namespace zrp
