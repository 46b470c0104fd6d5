#include "zrp/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "zrp/coupling.hpp"
#include "zrp/measures.hpp"
#include "zrp/replicas.hpp"
#include "zrp/rng.hpp"

namespace zrp {

namespace {

constexpr double kZ99 = 2.3263478740408408;  // one-sided 99% normal quantile

std::uint64_t replica_seed(std::uint64_t master, std::size_t r) {
    return derive_seed(master, StreamKind::replica, static_cast<std::int64_t>(r));
}

}  // namespace

double estimate_left_density(const Configuration& config, std::size_t n) {
    if (n == 0 || n > config.size())
        throw WindowTooSmall("density window " + std::to_string(n) + " must lie in [1, " +
                             std::to_string(config.size()) + "]");
    const auto& occ = config.occupancies();
    std::int64_t sum = 0;
    for (std::size_t i = occ.size() - n; i < occ.size(); ++i) sum += occ[i];
    return static_cast<double>(sum) / static_cast<double>(n);
}

StatReport burke_test(const std::vector<double>& departures, double v, double window_start,
                      double alpha) {
    if (!(v > 0.0)) throw FugacityTooHigh("departure rate under test must be positive");
    std::vector<double> kept;
    kept.reserve(departures.size());
    for (double d : departures)
        if (d >= window_start) kept.push_back(d);
    if (kept.size() < 100)
        throw TooFewSamples("burke test needs >= 100 post-window departures, got " +
                            std::to_string(kept.size()));
    std::sort(kept.begin(), kept.end());

    std::vector<double> gaps;
    gaps.reserve(kept.size() - 1);
    for (std::size_t i = 1; i < kept.size(); ++i) gaps.push_back(kept[i] - kept[i - 1]);

    const KsResult ks = ks_exponential(gaps, v);
    StatReport rep;
    rep.label = "departure gaps vs Exp(" + std::to_string(v) + ")";
    rep.statistic = ks.statistic;
    rep.p_value = ks.p_value;
    const double duration = kept.back() - window_start;
    rep.estimate = duration > 0.0 ? static_cast<double>(kept.size()) / duration : 0.0;
    rep.std_error = duration > 0.0 ? std::sqrt(static_cast<double>(kept.size())) / duration : 0.0;
    rep.n = gaps.size();
    rep.pass = ks.p_value > alpha;
    return rep;
}

BurkeReport burke_experiment(const Environment& env, double v, double t_max, double burn_in,
                             std::size_t replicas, std::uint64_t seed, int parallelism,
                             double alpha, double rate_tolerance, double min_pass_fraction) {
    if (!(v > 0.0) || !(v < env.min_rate()))
        throw FugacityTooHigh("injection rate " + std::to_string(v) +
                              " must lie in (0, min rate)");
    if (replicas == 0) throw TooFewSamples("burke experiment needs replicas");
    if (!(burn_in >= 0.0) || !(burn_in < t_max))
        throw InvalidSnapshotTimes("burn-in must lie in [0, t_max)");

    const BoundarySpec boundary = BoundarySpec::inject_absorb(v);
    const RateFunctionSpec g = RateFunctionSpec::indicator();
    const ProductGeometric mu(env, v);

    BurkeReport out;
    out.v = v;
    out.window_start = burn_in;
    out.t_max = t_max;
    out.per_seed.resize(replicas);
    std::vector<std::uint64_t> window_counts(replicas, 0);

    run_replicas(replicas, parallelism, [&](std::size_t r) {
        const std::uint64_t sr = replica_seed(seed, r);
        const Configuration init = sample_configuration(mu, sr);
        const SimResult res = simulate(env, init, boundary, g, t_max, sr);
        StatReport rep = burke_test(res.departures, v, burn_in, alpha);
        rep.label = "seed " + std::to_string(r) + ": " + rep.label;
        out.per_seed[r] = std::move(rep);
        std::uint64_t cnt = 0;
        for (double d : res.departures)
            if (d >= burn_in) ++cnt;
        window_counts[r] = cnt;
    });

    std::size_t ks_passes = 0;
    std::uint64_t total = 0;
    for (std::size_t r = 0; r < replicas; ++r) {
        if (out.per_seed[r].pass) ++ks_passes;
        total += window_counts[r];
    }
    const double window = (t_max - burn_in) * static_cast<double>(replicas);
    out.pooled_rate = static_cast<double>(total) / window;
    out.pooled_se = std::sqrt(static_cast<double>(total)) / window;
    out.ks_pass_fraction = static_cast<double>(ks_passes) / static_cast<double>(replicas);
    out.ks_ok = out.ks_pass_fraction >= min_pass_fraction;
    out.rate_ok = std::abs(out.pooled_rate - v) <= rate_tolerance * v;
    out.pass = out.ks_ok && out.rate_ok;
    return out;
}

std::vector<StatReport> stationarity_test(const Environment& env, double v, double t,
                                          std::size_t replicas, std::uint64_t seed,
                                          int parallelism, double significance) {
    if (!(v >= 0.0) || !(v < env.min_rate()))
        throw FugacityTooHigh("fugacity " + std::to_string(v) + " must lie in [0, min rate)");
    if (replicas == 0) throw TooFewSamples("stationarity test needs replicas");
    const std::size_t n = env.size();
    const BoundarySpec boundary =
        v > 0.0 ? BoundarySpec::inject_absorb(v) : BoundarySpec::closed_absorb();
    const RateFunctionSpec g = RateFunctionSpec::indicator();
    const ProductGeometric mu(env, v);

    std::vector<std::vector<std::int64_t>> final_occ(replicas);
    run_replicas(replicas, parallelism, [&](std::size_t r) {
        const std::uint64_t sr = replica_seed(seed, r);
        const Configuration init = sample_configuration(mu, sr);
        SimResult res = simulate(env, init, boundary, g, t, sr);
        final_occ[r] = res.final_state.occupancies();
    });

    std::vector<StatReport> reports;
    reports.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::int64_t max_occ = 0;
        for (std::size_t r = 0; r < replicas; ++r) max_occ = std::max(max_occ, final_occ[r][i]);
        std::vector<std::uint64_t> counts(static_cast<std::size_t>(max_occ) + 1, 0);
        double mean = 0.0;
        for (std::size_t r = 0; r < replicas; ++r) {
            ++counts[static_cast<std::size_t>(final_occ[r][i])];
            mean += static_cast<double>(final_occ[r][i]);
        }
        mean /= static_cast<double>(replicas);
        double ss = 0.0;
        for (std::size_t r = 0; r < replicas; ++r) {
            const double d = static_cast<double>(final_occ[r][i]) - mean;
            ss += d * d;
        }
        const double se =
            replicas > 1
                ? std::sqrt(ss / static_cast<double>(replicas - 1) / static_cast<double>(replicas))
                : 0.0;

        const double p = env.rates()[i];
        std::vector<double> probs(counts.size());
        for (std::size_t k = 0; k < counts.size(); ++k)
            probs[k] = marginal_pmf(p, v, static_cast<std::int64_t>(k));

        const GofResult gof = chi_square_gof(counts, probs);
        StatReport rep;
        rep.label = "site " + std::to_string(env.x_lo() + static_cast<Site>(i));
        rep.statistic = gof.statistic;
        rep.p_value = gof.p_value;
        rep.estimate = mean;
        rep.std_error = se;
        rep.n = replicas;
        rep.pass = gof.p_value >= significance;
        reports.push_back(std::move(rep));
    }
    return reports;
}

SpeedReport speed_experiment(const Environment& env, double v, Site start, double t,
                             std::size_t replicas, std::uint64_t seed, int parallelism,
                             double tolerance, double exit_fraction) {
    if (!(v >= 0.0) || !(v < env.min_rate()))
        throw FugacityTooHigh("fugacity " + std::to_string(v) + " must lie in [0, min rate)");
    if (!env.contains(start))
        throw SiteOutOfWindow("start site " + std::to_string(start) + " not in window");
    if (replicas < 2) throw TooFewSamples("speed experiment needs at least 2 replicas");
    if (!(t > 0.0)) throw InvalidSnapshotTimes("t must be positive");

    const BoundarySpec boundary =
        v > 0.0 ? BoundarySpec::inject_absorb(v) : BoundarySpec::closed_absorb();
    const RateFunctionSpec g = RateFunctionSpec::indicator();
    const ProductGeometric mu(env, v);

    SpeedReport out;
    out.t = t;
    out.start = start;
    out.final_positions.assign(replicas, start);
    std::vector<char> exited(replicas, 0);

    run_replicas(replicas, parallelism, [&](std::size_t r) {
        const std::uint64_t sr = replica_seed(seed, r);
        const Configuration base = sample_configuration(mu, sr);
        const TagPath path = track_second_class(env, base, start, boundary, g, t, sr);
        out.final_positions[r] = path.final_position();
        exited[r] = path.exited_right ? 1 : 0;
    });

    out.exits = static_cast<std::size_t>(std::count(exited.begin(), exited.end(), char{1}));
    if (static_cast<double>(out.exits) > exit_fraction * static_cast<double>(replicas))
        throw ExcessiveExits(std::to_string(out.exits) + " of " + std::to_string(replicas) +
                             " defects left the window; enlarge it or shorten t");

    std::vector<double> speeds(replicas);
    for (std::size_t r = 0; r < replicas; ++r)
        speeds[r] = static_cast<double>(out.final_positions[r] - start) / t;
    const MeanSe ms = mean_se(speeds);

    const auto [pmin, pmax] = std::minmax_element(env.rates().begin(), env.rates().end());
    out.homogeneous = *pmin == *pmax;

    StatReport rep;
    rep.estimate = ms.mean;
    rep.std_error = ms.se;
    rep.n = replicas;
    if (out.homogeneous) {
        out.target = second_class_velocity(env, v);
        rep.label = "defect speed vs predicted " + std::to_string(out.target);
        rep.statistic = ms.se > 0.0 ? (ms.mean - out.target) / ms.se : 0.0;
        rep.p_value = 2.0 * normal_sf(std::abs(rep.statistic));
        rep.pass = std::abs(ms.mean - out.target) < tolerance;
    } else {
        out.target = std::numeric_limits<double>::quiet_NaN();
        rep.label = "defect speed positive";
        rep.statistic = ms.se > 0.0 ? ms.mean / ms.se : 0.0;
        rep.p_value = normal_sf(rep.statistic);
        rep.pass = ms.mean > kZ99 * ms.se;
    }
    out.report = std::move(rep);
    return out;
}

ConvergenceReport convergence_experiment(const Environment& env, double rho0,
                                         const std::vector<double>& t_grid, std::size_t probe,
                                         std::size_t replicas, std::uint64_t seed,
                                         const ConvergenceOptions& options) {
    const std::size_t n = env.size();
    if (t_grid.empty()) throw InvalidSnapshotTimes("t_grid must be non-empty");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0.0)) throw InvalidSnapshotTimes("grid times must be positive");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
            throw InvalidSnapshotTimes("grid times must be strictly increasing");
    }
    if (probe == 0 || probe > n)
        throw WindowTooSmall("probe block " + std::to_string(probe) + " must lie in [1, " +
                             std::to_string(n) + "]");
    if (replicas < 2) throw TooFewSamples("convergence experiment needs at least 2 replicas");

    const CriticalDensity crit = critical_density(env);
    if (!crit.is_finite())
        throw InfiniteCritical("window critical density is infinite; nothing to exceed");
    if (!(rho0 > crit.value()))
        throw SubcriticalStart("initial density " + std::to_string(rho0) +
                               " does not exceed the window critical density " +
                               std::to_string(crit.value()));

    ConvergenceReport rep;
    rep.c_hat = env.min_rate();
    rep.rho_star = crit.value();
    rep.replicas = replicas;
    rep.times = t_grid;
    const double burn_in = options.burn_in < 0.0 ? 10.0 / rep.c_hat : options.burn_in;

    const Site probe_lo = env.x_hi() - static_cast<Site>(probe) + 1;
    for (Site x = probe_lo; x <= env.x_hi(); ++x) {
        rep.probe_sites.push_back(x);
        rep.reference_ratio.push_back(rep.c_hat / env.rate(x));
    }
    // Bond feeding the probe block; for probe == n this is the (always idle)
    // left-edge bond and no plateau can be detected.
    const std::size_t entry_slot = static_cast<std::size_t>(probe_lo - 1 - (env.x_lo() - 1));

    const Configuration init =
        Configuration::constant(env.x_lo(), n, static_cast<std::int64_t>(std::llround(rho0)));
    const BoundarySpec boundary = BoundarySpec::closed_absorb();
    const RateFunctionSpec g = RateFunctionSpec::indicator();

    const std::size_t nt = t_grid.size();
    struct ReplicaTrace {
        std::vector<std::int32_t> probe_occ;   // [time * probe + j]
        std::vector<std::uint64_t> entry_cum;  // [time]
        std::vector<std::int32_t> site_occ;    // [time * n + i]
    };
    std::vector<ReplicaTrace> traces(replicas);

    run_replicas(replicas, options.parallelism, [&](std::size_t r) {
        const std::uint64_t sr = replica_seed(seed, r);
        const SimResult res = simulate(env, init, boundary, g, t_grid.back(), sr, t_grid);
        ReplicaTrace& tr = traces[r];
        tr.probe_occ.resize(nt * probe);
        tr.entry_cum.resize(nt);
        tr.site_occ.resize(nt * n);
        for (std::size_t i = 0; i < nt; ++i) {
            const Snapshot& snap = res.snapshots[i];
            const auto& occ = snap.state.occupancies();
            tr.entry_cum[i] = snap.bond_counts[entry_slot];
            for (std::size_t j = 0; j < probe; ++j)
                tr.probe_occ[i * probe + j] =
                    static_cast<std::int32_t>(occ[n - probe + j]);
            for (std::size_t s = 0; s < n; ++s)
                tr.site_occ[i * n + s] = static_cast<std::int32_t>(occ[s]);
        }
    });

    // Rate ranking: slowest first, ties by site index.
    std::vector<std::size_t> rank(n);
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
        return env.rates()[a] < env.rates()[b];
    });
    const std::size_t n_slow = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(options.decile * static_cast<double>(n))));

    rep.histograms.resize(nt);
    rep.tv.assign(nt, std::vector<double>(probe, 0.0));
    rep.site_mean.assign(nt, std::vector<double>(probe, 0.0));
    rep.site_se.assign(nt, std::vector<double>(probe, 0.0));
    rep.entry_current.assign(nt, 0.0);
    rep.in_plateau.assign(nt, 0);
    rep.trapped_fraction.assign(nt, 0.0);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> mean_tv_per_time(nt, 0.0);

    for (std::size_t i = 0; i < nt; ++i) {
        rep.histograms[i].resize(probe);
        for (std::size_t j = 0; j < probe; ++j) {
            std::int32_t max_occ = 0;
            for (std::size_t r = 0; r < replicas; ++r)
                max_occ = std::max(max_occ, traces[r].probe_occ[i * probe + j]);
            std::vector<std::uint64_t> counts(static_cast<std::size_t>(max_occ) + 1, 0);
            double mean = 0.0;
            for (std::size_t r = 0; r < replicas; ++r) {
                const std::int32_t k = traces[r].probe_occ[i * probe + j];
                ++counts[static_cast<std::size_t>(k)];
                mean += static_cast<double>(k);
            }
            mean /= static_cast<double>(replicas);
            double ss = 0.0;
            for (std::size_t r = 0; r < replicas; ++r) {
                const double d = static_cast<double>(traces[r].probe_occ[i * probe + j]) - mean;
                ss += d * d;
            }
            rep.site_mean[i][j] = mean;
            rep.site_se[i][j] = std::sqrt(ss / static_cast<double>(replicas - 1) /
                                          static_cast<double>(replicas));
            rep.tv[i][j] = rep.reference_ratio[j] < 1.0
                               ? tv_distance_to_geometric(counts, rep.reference_ratio[j])
                               : nan;
            rep.histograms[i][j] = std::move(counts);
        }

        double cur = 0.0;
        const double t_prev = i == 0 ? 0.0 : t_grid[i - 1];
        for (std::size_t r = 0; r < replicas; ++r) {
            const std::uint64_t prev = i == 0 ? 0 : traces[r].entry_cum[i - 1];
            cur += static_cast<double>(traces[r].entry_cum[i] - prev);
        }
        rep.entry_current[i] =
            cur / static_cast<double>(replicas) / (t_grid[i] - t_prev);
        rep.in_plateau[i] =
            t_grid[i] >= burn_in &&
            std::abs(rep.entry_current[i] - rep.c_hat) <= options.current_tolerance * rep.c_hat;

        std::int64_t slow_mass = 0, total_mass = 0;
        for (std::size_t r = 0; r < replicas; ++r) {
            for (std::size_t s = 0; s < n; ++s) total_mass += traces[r].site_occ[i * n + s];
            for (std::size_t q = 0; q < n_slow; ++q)
                slow_mass += traces[r].site_occ[i * n + rank[q]];
        }
        rep.trapped_fraction[i] =
            total_mass > 0
                ? static_cast<double>(slow_mass) / static_cast<double>(total_mass)
                : 0.0;

        double tv_sum = 0.0;
        std::size_t tv_n = 0;
        for (std::size_t j = 0; j < probe; ++j) {
            if (!std::isnan(rep.tv[i][j])) {
                tv_sum += rep.tv[i][j];
                ++tv_n;
            }
        }
        mean_tv_per_time[i] = tv_n > 0 ? tv_sum / static_cast<double>(tv_n) : nan;
    }

    // Longest consecutive plateau run (first on ties).
    std::size_t best_begin = 0, best_len = 0, cur_begin = 0, cur_len = 0;
    for (std::size_t i = 0; i < nt; ++i) {
        if (rep.in_plateau[i]) {
            if (cur_len == 0) cur_begin = i;
            ++cur_len;
            if (cur_len > best_len) {
                best_len = cur_len;
                best_begin = cur_begin;
            }
        } else {
            cur_len = 0;
        }
    }
    rep.has_plateau = best_len > 0;
    rep.plateau_begin = best_begin;
    rep.plateau_end = best_len > 0 ? best_begin + best_len - 1 : 0;

    if (rep.has_plateau) {
        // Mass profile by rate rank, pooled over replicas, at the plateau end.
        const std::size_t ie = rep.plateau_end;
        std::vector<std::int64_t> mass_by_rank(n, 0);
        std::int64_t total = 0;
        for (std::size_t r = 0; r < replicas; ++r)
            for (std::size_t q = 0; q < n; ++q) {
                mass_by_rank[q] += traces[r].site_occ[ie * n + rank[q]];
                total += traces[r].site_occ[ie * n + rank[q]];
            }
        rep.trapped_profile.resize(n);
        for (std::size_t q = 0; q < n; ++q)
            rep.trapped_profile[q] =
                total > 0 ? static_cast<double>(mass_by_rank[q]) / static_cast<double>(total) : 0.0;

        bool tv_ok = true, dom_ok = true;
        for (std::size_t i = rep.plateau_begin; i <= rep.plateau_end; ++i) {
            for (std::size_t j = 0; j < probe; ++j) {
                if (rep.reference_ratio[j] >= 1.0) continue;  // no proper reference marginal
                if (!(rep.tv[i][j] < options.tv_threshold)) tv_ok = false;
                const double bound =
                    marginal_mean(env.rate(rep.probe_sites[j]), rep.c_hat);
                if (!(rep.site_mean[i][j] <= bound + 3.0 * rep.site_se[i][j])) dom_ok = false;
            }
        }
        rep.pass_tv = tv_ok;
        rep.pass_domination = dom_ok;
        rep.pass_trapped = rep.trapped_fraction[rep.plateau_end] >= options.trapped_threshold;
    } else {
        rep.note = "no plateau: probe-block entry current never settled near c_hat";
    }

    std::vector<double> ts, tvs;
    for (std::size_t i = 0; i < nt; ++i) {
        if (!std::isnan(mean_tv_per_time[i])) {
            ts.push_back(t_grid[i]);
            tvs.push_back(mean_tv_per_time[i]);
        }
    }
    const SpearmanResult sp = spearman_trend(ts, tvs);
    rep.spearman_rho = sp.rho;
    rep.spearman_p = sp.p_decreasing;
    rep.pass_trend = sp.p_decreasing < options.trend_alpha;
    return rep;
}

DominationReport domination_experiment(const Environment& env, const Configuration& init,
                                       const BoundarySpec& boundary, const RateFunctionSpec& g,
                                       double t_eval, std::size_t probe, std::size_t replicas,
                                       std::uint64_t seed, int parallelism) {
    const std::size_t n = env.size();
    if (probe == 0 || probe > n)
        throw WindowTooSmall("probe block " + std::to_string(probe) + " must lie in [1, " +
                             std::to_string(n) + "]");
    if (replicas < 2) throw TooFewSamples("domination experiment needs at least 2 replicas");
    if (!(t_eval > 0.0)) throw InvalidSnapshotTimes("t_eval must be positive");

    DominationReport out;
    out.c_hat = env.min_rate();
    out.t_eval = t_eval;

    const Site probe_lo = env.x_hi() - static_cast<Site>(probe) + 1;
    const bool ring = boundary.topology == BoundarySpec::Topology::ring;
    // Bond feeding the probe block; on a full-window ring probe it wraps.
    const std::size_t entry_slot =
        ring ? (probe == n ? n - 1 : static_cast<std::size_t>(probe_lo - 1 - env.x_lo()))
             : static_cast<std::size_t>(probe_lo - env.x_lo());
    const std::vector<double> snaps = {0.5 * t_eval, t_eval};

    std::vector<std::vector<std::int64_t>> probe_occ(replicas);
    std::vector<std::array<std::uint64_t, 2>> entry_cum(replicas);
    run_replicas(replicas, parallelism, [&](std::size_t r) {
        const std::uint64_t sr = replica_seed(seed, r);
        const SimResult res = simulate(env, init, boundary, g, t_eval, sr, snaps);
        const auto& occ = res.snapshots[1].state.occupancies();
        probe_occ[r].assign(occ.end() - static_cast<std::ptrdiff_t>(probe), occ.end());
        entry_cum[r] = {res.snapshots[0].bond_counts[entry_slot],
                        res.snapshots[1].bond_counts[entry_slot]};
    });

    double cur = 0.0;
    for (std::size_t r = 0; r < replicas; ++r)
        cur += static_cast<double>(entry_cum[r][1] - entry_cum[r][0]);
    out.entry_current = cur / static_cast<double>(replicas) / (0.5 * t_eval);

    out.pass = true;
    for (std::size_t j = 0; j < probe; ++j) {
        const Site x = probe_lo + static_cast<Site>(j);
        const double p = env.rate(x);
        if (!(p > out.c_hat)) continue;  // the slowest site has no finite reference mean
        std::vector<double> vals(replicas);
        for (std::size_t r = 0; r < replicas; ++r)
            vals[r] = static_cast<double>(probe_occ[r][j]);
        const MeanSe ms = mean_se(vals);
        const double bound = marginal_mean(p, out.c_hat);
        StatReport sr;
        sr.label = "site " + std::to_string(x);
        sr.estimate = ms.mean;
        sr.std_error = ms.se;
        sr.statistic = ms.se > 0.0 ? (ms.mean - bound) / ms.se : 0.0;
        sr.p_value = normal_sf(sr.statistic);
        sr.n = replicas;
        sr.pass = ms.mean <= bound + 3.0 * ms.se;
        if (!sr.pass) out.pass = false;
        out.sites.push_back(std::move(sr));
    }
    return out;
}

}  // namespace zrp
