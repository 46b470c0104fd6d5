#pragma once

#include <cstdint>
#include <vector>

#include "zrp/configuration.hpp"
#include "zrp/errors.hpp"

namespace zrp {

// Per-site service rates on a finite window, together with the declared
// infimum floor_c of the (conceptually infinite) rate environment.  Window
// rates may exceed the floor everywhere; they may touch it but never go
// below it, and rates live in (0, 1].
class Environment {
public:
    Environment(Site x_lo, std::vector<double> rates, double floor_c);

    Site x_lo() const { return x_lo_; }
    Site x_hi() const { return x_lo_ + static_cast<Site>(rates_.size()) - 1; }
    std::size_t size() const { return rates_.size(); }
    bool contains(Site x) const { return x >= x_lo() && x <= x_hi(); }

    double rate(Site x) const;
    const std::vector<double>& rates() const { return rates_; }
    double floor_c() const { return floor_c_; }
    double min_rate() const { return min_rate_; }
    Site argmin_site() const { return argmin_; }  // leftmost site attaining min_rate

    bool operator==(const Environment&) const = default;

private:
    Site x_lo_ = 0;
    std::vector<double> rates_;
    double floor_c_ = 0.0;
    double min_rate_ = 0.0;
    Site argmin_ = 0;
};

Environment build_env(const std::vector<double>& rates, double floor_c, Site x_lo = 0);

// Marginal law of one iid environment draw on [floor_c, hi].
struct EnvDist {
    enum class Kind { point, uniform, triangular_above_floor };
    Kind kind = Kind::point;
    double lo = 1.0;     // point value, or support lower edge (== floor)
    double hi = 1.0;     // support upper edge
    double alpha = 1.0;  // triangular_above_floor exponent (> 0)

    static EnvDist point(double p);
    static EnvDist uniform(double lo, double hi);
    // Density alpha * (p - lo)^(alpha-1) / (hi - lo)^alpha on [lo, hi];
    // alpha == 2 is the linear-ramp (triangular) special case.
    static EnvDist triangular_above_floor(double lo, double hi, double alpha);

    void validate() const;
    double icdf(double u) const;  // u in [0, 1]
    double support_lo() const { return kind == Kind::point ? lo : lo; }
    double support_hi() const { return kind == Kind::point ? lo : hi; }
};

// Source of environments: an explicit rate table or an iid marginal law.
struct EnvSpec {
    enum class Kind { deterministic, iid };
    Kind kind = Kind::deterministic;
    // deterministic:
    std::vector<double> rates;
    Site x_lo = 0;
    double floor_c = 0.0;
    // iid:
    EnvDist dist;

    static EnvSpec deterministic(std::vector<double> rates, double floor_c, Site x_lo = 0);
    static EnvSpec iid(EnvDist dist);
};

// Draw rates independently per site from spec.dist.  Deterministic given
// (spec, window, seed); per-site draws depend only on the absolute site
// index, so enlarging the window never changes shared sites.
Environment sample_iid_env(const EnvSpec& spec, Site x_lo, Site x_hi, std::uint64_t seed);

// Window-averaged mean occupancy at fugacity v:  avg_x v / (p_x - v).
// Requires 0 <= v < min rate.
double expected_density(const Environment& env, double v);

// d/dv of expected_density:  avg_x p_x / (p_x - v)^2.
double density_slope(const Environment& env, double v);

// Long-run velocity of an isolated defect particle: 1 / density_slope.
double second_class_velocity(const Environment& env, double v);

// Finite value or a structural "infinite" state -- never an IEEE infinity.
class CriticalDensity {
public:
    static CriticalDensity finite(double value) { return CriticalDensity(true, value); }
    static CriticalDensity infinite() { return CriticalDensity(false, 0.0); }

    bool is_finite() const { return finite_; }
    double value() const {
        if (!finite_) throw InfiniteCritical("critical density is infinite");
        return value_;
    }

    bool operator==(const CriticalDensity&) const = default;

private:
    CriticalDensity(bool f, double v) : finite_(f), value_(v) {}
    bool finite_;
    double value_;
};

// Window critical density: avg_x floor_c / (p_x - floor_c), infinite when
// some window rate touches the floor (or when floor_c == 0 the density is 0,
// still reported finite).
CriticalDensity critical_density(const Environment& env);

// Inverse of expected_density by bisection; |rho(v_out) - rho| is driven
// below 1e-10 * (1 + rho).  Throws DensityAboveCritical when rho is not
// reachable below the floor.
double fugacity_for_density(const Environment& env, double rho);

// Distribution-level counterparts for iid specs, via closed forms where easy
// and Gauss-Legendre quadrature in the quantile variable otherwise.
double spec_expected_density(const EnvSpec& spec, double v);
CriticalDensity spec_critical_density(const EnvSpec& spec);

}  // namespace zrp
