#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zrp/configuration.hpp"
#include "zrp/dynamics.hpp"
#include "zrp/environment.hpp"
#include "zrp/stats.hpp"

namespace zrp {

// One statistical verdict against a declared threshold.
struct StatReport {
    std::string label;
    double statistic = 0.0;
    double p_value = 1.0;
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    bool pass = false;
};

// Average occupancy of the n rightmost window sites -- the ambient density
// seen from the right edge of the truncated lattice.
double estimate_left_density(const Configuration& config, std::size_t n);

// Kolmogorov-Smirnov check that post-window_start interdeparture gaps are
// Exponential(v); estimate is the departure rate count/duration over the
// observation window.  Throws TooFewSamples below 100 post-window events.
StatReport burke_test(const std::vector<double>& departures, double v, double window_start,
                      double alpha = 0.01);

// Per-site chi-square of the time-t occupancy histogram (across replicas of
// an inject(v)/absorb run started from its exact stationary product measure)
// against the product-geometric marginal.
std::vector<StatReport> stationarity_test(const Environment& env, double v, double t,
                                          std::size_t replicas, std::uint64_t seed,
                                          int parallelism = 1, double significance = 1e-3);

// Departure-process study over many independent stationary runs: per-run KS
// verdicts on interdeparture gaps plus a pooled rate estimate over the fixed
// observation window [burn_in, t_max].
struct BurkeReport {
    std::vector<StatReport> per_seed;
    double v = 0.0;
    double window_start = 0.0;
    double t_max = 0.0;
    double pooled_rate = 0.0;
    double pooled_se = 0.0;
    double ks_pass_fraction = 0.0;
    bool rate_ok = false;
    bool ks_ok = false;
    bool pass = false;
};

BurkeReport burke_experiment(const Environment& env, double v, double t_max, double burn_in,
                             std::size_t replicas, std::uint64_t seed, int parallelism = 1,
                             double alpha = 0.01, double rate_tolerance = 0.02,
                             double min_pass_fraction = 0.95);

// Defect-speed measurement: a tagged defect rides a stationary background of
// fugacity v (injected at rate v on the left so the background law is frozen
// in time); the estimate is mean displacement / t across replicas.
struct SpeedReport {
    StatReport report;
    bool homogeneous = false;   // all window rates equal
    double target = 0.0;        // predicted velocity (homogeneous case)
    double t = 0.0;
    Site start = 0;
    std::size_t exits = 0;      // replicas whose defect left through the right edge
    std::vector<Site> final_positions;  // per replica, frozen at the edge on exit
};

// Pass rule: homogeneous env -> |estimate - predicted velocity| < tolerance;
// inhomogeneous env -> estimate positive at 99% one-sided confidence.
// Throws ExcessiveExits when more than exit_fraction of replicas leave.
SpeedReport speed_experiment(const Environment& env, double v, Site start, double t,
                             std::size_t replicas, std::uint64_t seed, int parallelism = 1,
                             double tolerance = 0.02, double exit_fraction = 0.01);

// Supercritical drain study tracking relaxation of the rightmost `probe`
// sites toward the maximal product measure with fugacity c_hat = min window
// rate, current saturation at the probe block entry, and trapping of the
// remaining mass at the slowest sites.
struct ConvergenceOptions {
    double current_tolerance = 0.05;  // plateau: entry current within 5% of c_hat
    double tv_threshold = 0.1;
    double trend_alpha = 0.05;
    double trapped_threshold = 0.5;
    double decile = 0.1;    // "slowest sites" = this fraction of the window
    double burn_in = -1.0;  // < 0 -> 10 mean service times of the slowest site
    int parallelism = 1;
};

struct ConvergenceReport {
    double c_hat = 0.0;
    double rho_star = 0.0;  // window critical density
    std::size_t replicas = 0;
    std::vector<double> times;
    std::vector<Site> probe_sites;
    // Geometric reference ratio c_hat / p_x per probe site; a probe site
    // whose rate equals c_hat has no proper reference (ratio 1) and is
    // excluded from distances and domination checks.
    std::vector<double> reference_ratio;
    // histograms[i][j][k]: replicas with occupancy k at time i, probe site j.
    std::vector<std::vector<std::vector<std::uint64_t>>> histograms;
    std::vector<std::vector<double>> tv;         // [time][probe site]; NaN where excluded
    std::vector<std::vector<double>> site_mean;  // [time][probe site]
    std::vector<std::vector<double>> site_se;    // [time][probe site]
    std::vector<double> entry_current;   // mean bond current into the probe block per interval
    std::vector<char> in_plateau;        // per grid time
    bool has_plateau = false;
    std::size_t plateau_begin = 0;       // indices into times of the longest plateau run
    std::size_t plateau_end = 0;         // inclusive
    std::vector<double> trapped_fraction;  // [time] mass share of the slowest-decile sites
    std::vector<double> trapped_profile;   // mass fraction by rate rank (slowest first) at plateau end
    double spearman_rho = 0.0;
    double spearman_p = 1.0;
    bool pass_tv = false;
    bool pass_trend = false;
    bool pass_trapped = false;
    bool pass_domination = false;
    std::string note;
};

ConvergenceReport convergence_experiment(const Environment& env, double rho0,
                                         const std::vector<double>& t_grid, std::size_t probe,
                                         std::size_t replicas, std::uint64_t seed,
                                         const ConvergenceOptions& options = {});

// Per-site check that time-t_eval occupancy means stay below the maximal
// product-measure means marginal_mean(p_x, c_hat) + 3 SE at the rightmost
// `probe` sites.  Sites whose rate equals c_hat are excluded (no finite
// reference mean).
struct DominationReport {
    double c_hat = 0.0;
    double t_eval = 0.0;
    double entry_current = 0.0;  // into the probe block over [t_eval/2, t_eval]
    std::vector<StatReport> sites;
    bool pass = false;
};

DominationReport domination_experiment(const Environment& env, const Configuration& init,
                                       const BoundarySpec& boundary, const RateFunctionSpec& g,
                                       double t_eval, std::size_t probe, std::size_t replicas,
                                       std::uint64_t seed, int parallelism = 1);

}  // namespace zrp
