#include "zrp/environment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "zrp/rng.hpp"

namespace zrp {

Environment::Environment(Site x_lo, std::vector<double> rates, double floor_c)
    : x_lo_(x_lo), rates_(std::move(rates)), floor_c_(floor_c) {
    if (rates_.empty()) throw WindowTooSmall("environment window must contain a site");
    if (!(floor_c_ >= 0.0) || !(floor_c_ <= 1.0))
        throw RateOutOfRange("floor must lie in [0, 1], got " + std::to_string(floor_c_));
    min_rate_ = rates_[0];
    argmin_ = x_lo_;
    for (std::size_t i = 0; i < rates_.size(); ++i) {
        const double p = rates_[i];
        const Site x = x_lo_ + static_cast<Site>(i);
        if (!(p > 0.0) || !(p <= 1.0))
            throw RateOutOfRange("rate at site " + std::to_string(x) + " must lie in (0, 1], got " +
                                 std::to_string(p));
        if (p < floor_c_)
            throw RateOutOfRange("rate " + std::to_string(p) + " at site " + std::to_string(x) +
                                 " lies below the declared floor " + std::to_string(floor_c_));
        if (p < min_rate_) {
            min_rate_ = p;
            argmin_ = x;
        }
    }
}

double Environment::rate(Site x) const {
    if (!contains(x))
        throw SiteOutOfWindow("site " + std::to_string(x) + " outside window [" +
                              std::to_string(x_lo()) + ", " + std::to_string(x_hi()) + "]");
    return rates_[static_cast<std::size_t>(x - x_lo_)];
}

Environment build_env(const std::vector<double>& rates, double floor_c, Site x_lo) {
    return Environment(x_lo, rates, floor_c);
}

EnvDist EnvDist::point(double p) {
    EnvDist d;
    d.kind = Kind::point;
    d.lo = p;
    d.hi = p;
    d.validate();
    return d;
}

EnvDist EnvDist::uniform(double lo, double hi) {
    EnvDist d;
    d.kind = Kind::uniform;
    d.lo = lo;
    d.hi = hi;
    d.validate();
    return d;
}

EnvDist EnvDist::triangular_above_floor(double lo, double hi, double alpha) {
    EnvDist d;
    d.kind = Kind::triangular_above_floor;
    d.lo = lo;
    d.hi = hi;
    d.alpha = alpha;
    d.validate();
    return d;
}

void EnvDist::validate() const {
    if (kind == Kind::point) {
        if (!(lo > 0.0) || !(lo <= 1.0))
            throw RateOutOfRange("point rate must lie in (0, 1], got " + std::to_string(lo));
        return;
    }
    if (!(lo >= 0.0) || !(hi <= 1.0) || !(lo < hi))
        throw RateOutOfRange("distribution support [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "] must satisfy 0 <= lo < hi <= 1");
    if (kind == Kind::triangular_above_floor && !(alpha > 0.0))
        throw RateOutOfRange("exponent must be positive, got " + std::to_string(alpha));
}

double EnvDist::icdf(double u) const {
    switch (kind) {
        case Kind::point:
            return lo;
        case Kind::uniform:
            return lo + (hi - lo) * u;
        case Kind::triangular_above_floor:
            return lo + (hi - lo) * std::pow(u, 1.0 / alpha);
    }
    return lo;  // unreachable
}

EnvSpec EnvSpec::deterministic(std::vector<double> rates, double floor_c, Site x_lo) {
    EnvSpec s;
    s.kind = Kind::deterministic;
    s.rates = std::move(rates);
    s.floor_c = floor_c;
    s.x_lo = x_lo;
    // Constructing the environment runs the full validation.
    (void)build_env(s.rates, s.floor_c, s.x_lo);
    return s;
}

EnvSpec EnvSpec::iid(EnvDist dist) {
    dist.validate();
    EnvSpec s;
    s.kind = Kind::iid;
    s.dist = dist;
    s.floor_c = dist.support_lo();
    return s;
}

Environment sample_iid_env(const EnvSpec& spec, Site x_lo, Site x_hi, std::uint64_t seed) {
    if (spec.kind != EnvSpec::Kind::iid)
        throw SpecMismatch("sample_iid_env requires an iid environment spec");
    if (x_hi < x_lo) throw WindowTooSmall("environment window must contain a site");
    std::vector<double> rates;
    rates.reserve(static_cast<std::size_t>(x_hi - x_lo + 1));
    for (Site x = x_lo; x <= x_hi; ++x) {
        RandomStream rs(derive_seed(seed, StreamKind::env_draw, x));
        rates.push_back(spec.dist.icdf(rs.u01()));
    }
    return Environment(x_lo, std::move(rates), spec.dist.support_lo());
}

namespace {

void require_fugacity(const Environment& env, double v) {
    if (!(v >= 0.0) || !(v < env.min_rate()))
        throw FugacityTooHigh("fugacity " + std::to_string(v) +
                              " must lie in [0, min rate); min rate is " +
                              std::to_string(env.min_rate()));
}

}  // namespace

double expected_density(const Environment& env, double v) {
    require_fugacity(env, v);
    double sum = 0.0;
    for (double p : env.rates()) sum += v / (p - v);
    return sum / static_cast<double>(env.size());
}

double density_slope(const Environment& env, double v) {
    require_fugacity(env, v);
    double sum = 0.0;
    for (double p : env.rates()) {
        const double d = p - v;
        sum += p / (d * d);
    }
    return sum / static_cast<double>(env.size());
}

double second_class_velocity(const Environment& env, double v) {
    return 1.0 / density_slope(env, v);
}

CriticalDensity critical_density(const Environment& env) {
    const double c = env.floor_c();
    if (c == 0.0) return CriticalDensity::finite(0.0);
    if (env.min_rate() <= c) return CriticalDensity::infinite();
    double sum = 0.0;
    for (double p : env.rates()) sum += c / (p - c);
    return CriticalDensity::finite(sum / static_cast<double>(env.size()));
}

double fugacity_for_density(const Environment& env, double rho) {
    if (!(rho >= 0.0)) throw DensityAboveCritical("density must be non-negative");
    const CriticalDensity crit = critical_density(env);
    if (crit.is_finite() && rho >= crit.value() && rho > 0.0)
        throw DensityAboveCritical("density " + std::to_string(rho) +
                                   " is not below the window critical density " +
                                   std::to_string(crit.value()));
    if (rho == 0.0) return 0.0;

    const double tol = 1e-10 * (1.0 + rho);
    // expected_density is strictly increasing on [0, floor); the root sits
    // strictly inside because rho is below the (possibly infinite) value at
    // the floor.  Bisection never evaluates at the upper bracket itself.
    double lo = 0.0, hi = std::min(env.floor_c(), env.min_rate());
    if (hi <= 0.0) throw DensityAboveCritical("floor is zero; only the empty density is reachable");
    double v = 0.0;
    for (int it = 0; it < 200; ++it) {
        v = 0.5 * (lo + hi);
        const double r = expected_density(env, v);
        if (std::abs(r - rho) <= tol) return v;
        if (r < rho)
            lo = v;
        else
            hi = v;
    }
    return v;
}

namespace {

// 64-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; mirror for
// the negative half).  Used for quantile-variable quadrature.
constexpr int kGlHalf = 32;
constexpr std::array<double, kGlHalf> kGlNode = {
    0.0243502926634244, 0.0729931217877990, 0.1214628192961206, 0.1696444204239928,
    0.2174236437400071, 0.2646871622087674, 0.3113228719902110, 0.3572201583376681,
    0.4022701579639916, 0.4463660172534641, 0.4894031457070530, 0.5312794640198946,
    0.5718956462026340, 0.6111553551723933, 0.6489654712546573, 0.6852363130542333,
    0.7198818501716109, 0.7528199072605319, 0.7839723589433414, 0.8132653151227975,
    0.8406292962525803, 0.8659993981540928, 0.8893154459951141, 0.9105221370785028,
    0.9295691721319396, 0.9464113748584028, 0.9610087996520538, 0.9733268277899110,
    0.9833362538846260, 0.9910133714767443, 0.9963401167719553, 0.9993050417357722};
constexpr std::array<double, kGlHalf> kGlWeight = {
    0.0486909570091397, 0.0485754674415034, 0.0483447622348030, 0.0479993885964583,
    0.0475401657148303, 0.0469681828162100, 0.0462847965813144, 0.0454916279274181,
    0.0445905581637566, 0.0435837245293235, 0.0424735151236536, 0.0412625632426235,
    0.0399537411327203, 0.0385501531786156, 0.0370551285402400, 0.0354722132568824,
    0.0338051618371416, 0.0320579283548516, 0.0302346570724025, 0.0283396726142595,
    0.0263774697150547, 0.0243527025687109, 0.0222701738083833, 0.0201348231535302,
    0.0179517157756973, 0.0157260304760247, 0.0134630478967186, 0.0111681394601311,
    0.0088467598263639, 0.0065044579689784, 0.0041470332605625, 0.0017832807216964};

// Integrate f over [a, b] with 64-point Gauss-Legendre.
template <class F>
double integrate_gl(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < kGlHalf; ++i) {
        const double dx = half * kGlNode[static_cast<std::size_t>(i)];
        sum += kGlWeight[static_cast<std::size_t>(i)] * (f(mid + dx) + f(mid - dx));
    }
    return half * sum;
}

// Integrate y^(alpha-1) * g(y) over [0, 1].  The substitution y = u^m with
// m = ceil(2/alpha) turns the integrand into m * u^(m*alpha - 1) * g(u^m)
// whose exponent is >= 1, so the endpoint behaviour is at worst C^1; panel
// compositing then drives the Gauss-Legendre error far below 1e-10.
template <class G>
double integrate_power_weight(G&& g, double alpha) {
    const double m = std::max(1.0, std::ceil(2.0 / alpha));
    const auto h = [&](double u) {
        return m * std::pow(u, m * alpha - 1.0) * g(std::pow(u, m));
    };
    constexpr int kPanels = 32;
    double sum = 0.0;
    for (int i = 0; i < kPanels; ++i)
        sum += integrate_gl(h, static_cast<double>(i) / kPanels,
                            static_cast<double>(i + 1) / kPanels);
    return sum;
}

}  // namespace

double spec_expected_density(const EnvSpec& spec, double v) {
    if (spec.kind == EnvSpec::Kind::deterministic)
        return expected_density(build_env(spec.rates, spec.floor_c, spec.x_lo), v);
    const EnvDist& d = spec.dist;
    if (!(v >= 0.0) || !(v < d.support_lo()))
        throw FugacityTooHigh("fugacity " + std::to_string(v) +
                              " must lie in [0, support infimum); infimum is " +
                              std::to_string(d.support_lo()));
    if (v == 0.0) return 0.0;
    switch (d.kind) {
        case EnvDist::Kind::point:
            return v / (d.lo - v);
        case EnvDist::Kind::uniform:
            return v * std::log((d.hi - v) / (d.lo - v)) / (d.hi - d.lo);
        case EnvDist::Kind::triangular_above_floor:
            // avg of v/(p - v) under density alpha (p-lo)^(alpha-1)/(hi-lo)^alpha,
            // rewritten over the normalized offset y = (p - lo)/(hi - lo).
            return d.alpha * v *
                   integrate_power_weight(
                       [&](double y) { return 1.0 / (d.lo - v + (d.hi - d.lo) * y); }, d.alpha);
    }
    return 0.0;  // unreachable
}

CriticalDensity spec_critical_density(const EnvSpec& spec) {
    if (spec.kind == EnvSpec::Kind::deterministic)
        return critical_density(build_env(spec.rates, spec.floor_c, spec.x_lo));
    const EnvDist& d = spec.dist;
    const double c = d.support_lo();
    if (c == 0.0) return CriticalDensity::finite(0.0);
    switch (d.kind) {
        case EnvDist::Kind::point:
            return CriticalDensity::infinite();  // rates sit at the floor itself
        case EnvDist::Kind::uniform:
            // avg of c/(p-c) over uniform [c, hi]: c/(hi-c) * log((hi-c)/(p-c)) diverges.
            return CriticalDensity::infinite();
        case EnvDist::Kind::triangular_above_floor: {
            if (d.alpha <= 1.0) return CriticalDensity::infinite();
            const double val = c * d.alpha / ((d.alpha - 1.0) * (d.hi - c));
            return CriticalDensity::finite(val);
        }
    }
    return CriticalDensity::infinite();  // unreachable
}

}  // namespace zrp
