#include "zrp/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "zrp/measures.hpp"

namespace zrp {

CoupledConfiguration::CoupledConfiguration(Configuration eta_, Configuration xi_)
    : eta(std::move(eta_)), xi(std::move(xi_)) {
    if (eta.x_lo() != xi.x_lo() || eta.size() != xi.size())
        throw WindowMismatch("coupled configurations must share one window");
}

std::int64_t DiscrepancyProfile::total() const {
    std::int64_t t = 0;
    for (std::size_t i = 0; i < eta_over_xi.size(); ++i) t += eta_over_xi[i] + xi_over_eta[i];
    return t;
}

DiscrepancyProfile discrepancy_profile(const CoupledConfiguration& pair) {
    DiscrepancyProfile prof;
    prof.x_lo = pair.eta.x_lo();
    const std::size_t n = pair.eta.size();
    prof.eta_over_xi.assign(n, 0);
    prof.xi_over_eta.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t d = pair.eta.occupancies()[i] - pair.xi.occupancies()[i];
        if (d > 0)
            prof.eta_over_xi[i] = d;
        else
            prof.xi_over_eta[i] = -d;
    }
    return prof;
}

namespace {

// Geometry shared by every run on a window.
struct RunGeometry {
    std::size_t n = 0;
    bool ring = false;
    bool absorb = false;
    bool inject = false;
};

RunGeometry geometry_of(const Environment& env, const BoundarySpec& b) {
    RunGeometry g;
    g.n = env.size();
    g.ring = b.topology == BoundarySpec::Topology::ring;
    g.absorb = !g.ring && b.right == BoundarySpec::Right::absorb;
    g.inject = !g.ring && b.left == BoundarySpec::Left::inject;
    return g;
}

// One marginal's evolving state inside a coupled run.
struct MarginalState {
    std::vector<std::int64_t> occ;
    std::int64_t in_system = 0;
    SimResult result;

    void apply_injection(double t) {
        occ[0] += 1;
        ++in_system;
        result.injections.push_back(t);
        ++result.bond_counts[0];
    }

    // Apply a successful attempt at window offset i.
    void apply_move(const RunGeometry& g, std::size_t i, double t) {
        if (i + 1 < g.n) {
            occ[i] -= 1;
            occ[i + 1] += 1;
            ++result.bond_counts[g.ring ? i : i + 1];
        } else if (g.ring) {
            occ[i] -= 1;
            occ[0] += 1;
            ++result.bond_counts[i];
        } else if (g.absorb) {
            occ[i] -= 1;
            --in_system;
            result.departures.push_back(t);
            ++result.bond_counts[g.n];
        }
    }
};

void validate_coupled_inputs(const Environment& env, const Configuration& init,
                             const BoundarySpec& boundary, const RateFunctionSpec& g, double t_max,
                             const std::vector<double>& snapshot_times) {
    boundary.validate();
    g.validate();
    if (init.x_lo() != env.x_lo() || init.size() != env.size())
        throw WindowMismatch("configuration window does not match environment window");
    if (!(t_max > 0.0)) throw InvalidSnapshotTimes("t_max must be positive");
    for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
        const double s = snapshot_times[i];
        if (!(s >= 0.0) || !(s <= t_max))
            throw InvalidSnapshotTimes("snapshot time " + std::to_string(s) +
                                       " outside [0, t_max]");
        if (i > 0 && !(snapshot_times[i] >= snapshot_times[i - 1]))
            throw InvalidSnapshotTimes("snapshot times must be sorted ascending");
    }
}

}  // namespace

CoupledResult simulate_coupled(const Environment& env, const CoupledConfiguration& init,
                               const BoundarySpec& boundary, const RateFunctionSpec& g,
                               double t_max, std::uint64_t seed,
                               const std::vector<double>& snapshot_times) {
    validate_coupled_inputs(env, init.eta, boundary, g, t_max, snapshot_times);
    validate_coupled_inputs(env, init.xi, boundary, g, t_max, snapshot_times);

    const RunGeometry geo = geometry_of(env, boundary);

    CoupledResult out;
    MarginalState a, b;
    for (MarginalState* m : {&a, &b}) {
        m->result.boundary = boundary;
        m->result.t_end = t_max;
        m->result.bond_lo = geo.ring ? env.x_lo() : env.x_lo() - 1;
        m->result.bond_counts.assign(geo.ring ? geo.n : geo.n + 1, 0);
    }
    a.occ = init.eta.occupancies();
    a.in_system = init.eta.total();
    b.occ = init.xi.occupancies();
    b.in_system = init.xi.total();
    const std::int64_t total_a = a.in_system, total_b = b.in_system;

    std::int64_t disc_total = 0;
    for (std::size_t i = 0; i < geo.n; ++i) disc_total += std::abs(a.occ[i] - b.occ[i]);

    EventStream stream(env, boundary, g, seed);
    std::size_t snap_idx = 0;
    auto flush_snapshots_before = [&](double t) {
        while (snap_idx < snapshot_times.size() && snapshot_times[snap_idx] < t) {
            const double s = snapshot_times[snap_idx];
            Configuration ca(env.x_lo(), a.occ), cb(env.x_lo(), b.occ);
            a.result.snapshots.push_back({s, ca, a.result.bond_counts});
            b.result.snapshots.push_back({s, cb, b.result.bond_counts});
            CoupledConfiguration pair(ca, cb);
            out.snapshots.push_back({s, std::move(ca), std::move(cb), discrepancy_profile(pair)});
            ++snap_idx;
        }
    };

    while (true) {
        if (a.in_system == 0 && b.in_system == 0 && !geo.inject) break;

        const EventStream::Event ev = stream.next();
        if (ev.time > t_max) break;
        flush_snapshots_before(ev.time);

        if (ev.injection) {
            a.apply_injection(ev.time);
            b.apply_injection(ev.time);
            continue;  // both marginals gain one particle; discrepancies unchanged
        }

        const std::size_t i = static_cast<std::size_t>(ev.site - env.x_lo());
        const bool move_a = g.moves(a.occ[i], ev.u);
        const bool move_b = g.moves(b.occ[i], ev.u);
        if (!move_a && !move_b) continue;

        const std::size_t tgt = i + 1 < geo.n ? i + 1 : 0;  // ring wrap; unused for edge exits
        const bool has_tgt = i + 1 < geo.n || geo.ring;
        std::int64_t pre = std::abs(a.occ[i] - b.occ[i]);
        if (has_tgt) pre += std::abs(a.occ[tgt] - b.occ[tgt]);

        if (move_a) a.apply_move(geo, i, ev.time);
        if (move_b) b.apply_move(geo, i, ev.time);

        std::int64_t post = std::abs(a.occ[i] - b.occ[i]);
        if (has_tgt) post += std::abs(a.occ[tgt] - b.occ[tgt]);
        disc_total += post - pre;
        if (post > pre) throw std::logic_error("discrepancy count increased");  // impossible
    }
    flush_snapshots_before(std::nextafter(t_max, t_max + 1.0));

    a.result.final_state = Configuration(env.x_lo(), std::move(a.occ));
    b.result.final_state = Configuration(env.x_lo(), std::move(b.occ));
    for (auto [m, tot] : {std::pair{&a, total_a}, std::pair{&b, total_b}}) {
        const std::int64_t balance = tot + static_cast<std::int64_t>(m->result.injections.size()) -
                                     static_cast<std::int64_t>(m->result.departures.size());
        if (balance != m->result.final_state.total())
            throw std::logic_error("particle balance violated");
    }
    (void)disc_total;
    out.eta = std::move(a.result);
    out.xi = std::move(b.result);
    return out;
}

Site TagPath::position_at(double t) const {
    // Last jump at or before t; the path starts at times[0] == 0.
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return positions.front();
    return positions[static_cast<std::size_t>(std::distance(times.begin(), it)) - 1];
}

TagPath track_second_class(const Environment& env, const Configuration& base, Site z,
                           const BoundarySpec& boundary, const RateFunctionSpec& g, double t_max,
                           std::uint64_t seed) {
    validate_coupled_inputs(env, base, boundary, g, t_max, {});
    if (boundary.topology == BoundarySpec::Topology::ring)
        throw InvalidBoundary("a tagged defect needs an oriented segment, not a ring");
    if (!env.contains(z)) throw SiteOutOfWindow("tag start " + std::to_string(z) + " not in window");

    const RunGeometry geo = geometry_of(env, boundary);
    std::vector<std::int64_t> occ = base.occupancies();

    TagPath path;
    path.times.push_back(0.0);
    path.positions.push_back(z);
    Site tag = z;

    EventStream stream(env, boundary, g, seed);
    while (!path.exited_right) {
        // With no particles and no source the background is frozen, but the
        // defect itself still hops through empty sites, so keep consuming
        // events unless the defect is already gone.
        const EventStream::Event ev = stream.next();
        if (ev.time > t_max) break;

        if (ev.injection) {
            occ[0] += 1;
            continue;
        }

        const std::size_t i = static_cast<std::size_t>(ev.site - env.x_lo());
        const std::int64_t k = occ[i];
        const bool base_moves = g.moves(k, ev.u);
        if (ev.site == tag) {
            const bool rich_moves = g.moves(k + 1, ev.u);
            if (rich_moves && !base_moves) {
                if (i + 1 < geo.n) {
                    tag = ev.site + 1;
                    path.times.push_back(ev.time);
                    path.positions.push_back(tag);
                } else if (geo.absorb) {
                    path.exited_right = true;
                    path.exit_time = ev.time;
                }
                // closed right edge: the defect's attempt is discarded too
            }
        }
        if (base_moves) {
            if (i + 1 < geo.n) {
                occ[i] -= 1;
                occ[i + 1] += 1;
            } else if (geo.absorb) {
                occ[i] -= 1;
            }
        }
    }
    return path;
}

SandwichSample sandwich_run(const Environment& env, double u, double w, Site z,
                            const BoundarySpec& boundary, const RateFunctionSpec& g, double t_max,
                            std::uint64_t seed) {
    boundary.validate();
    g.validate();
    if (boundary.topology == BoundarySpec::Topology::ring)
        throw InvalidBoundary("a tagged defect needs an oriented segment, not a ring");
    if (!env.contains(z)) throw SiteOutOfWindow("tag start " + std::to_string(z) + " not in window");
    if (!(t_max > 0.0)) throw InvalidSnapshotTimes("t_max must be positive");

    const RunGeometry geo = geometry_of(env, boundary);
    auto [eta_init, xi_init] = sample_ordered_pair(env, u, w, seed);
    std::vector<std::int64_t> eta = eta_init.occupancies();
    std::vector<std::int64_t> xi = xi_init.occupancies();
    xi[static_cast<std::size_t>(z - env.x_lo())] += 1;  // the middle defect rides the denser copy

    SandwichSample s;
    s.lower_defect = z;   // defect on the denser (fugacity w) background: slowest
    s.middle_defect = z;  // tagged discrepancy of the ordered pair
    s.upper_defect = z;   // defect on the sparser (fugacity u) background: fastest
    s.ordered_throughout = true;
    // Discrepancies of (eta, xi) ranked above the middle defect at its site;
    // the oldest discrepancy at a site moves first and arrivals rank last.
    std::int64_t mid_above = 0;

    EventStream stream(env, boundary, g, seed);
    while (!(s.lower_exited && s.middle_exited && s.upper_exited)) {
        const EventStream::Event ev = stream.next();
        if (ev.time > t_max) break;

        if (ev.injection) {
            eta[0] += 1;
            xi[0] += 1;
            continue;
        }

        const std::size_t i = static_cast<std::size_t>(ev.site - env.x_lo());
        const std::int64_t ke = eta[i], kx = xi[i];
        const bool eta_m = g.moves(ke, ev.u);
        const bool xi_m = g.moves(kx, ev.u);
        if (eta_m && !xi_m) throw std::logic_error("order of coupled copies broke");

        const bool in_window_tgt = i + 1 < geo.n;
        const std::int64_t pair_gap_tgt =
            in_window_tgt ? xi[i + 1] - eta[i + 1] : 0;  // discrepancies already at the target

        // Middle defect: moves when the denser copy jumps and the sparser
        // does not, and no older discrepancy at its site takes the jump.
        if (xi_m && !eta_m && !s.middle_exited && ev.site == s.middle_defect) {
            if (mid_above > 0) {
                --mid_above;
            } else if (in_window_tgt) {
                s.middle_defect = ev.site + 1;
                mid_above = pair_gap_tgt;
            } else if (geo.absorb) {
                s.middle_exited = true;
            }
        }

        // Upper defect rides the sparser background alone.
        if (!s.upper_exited && ev.site == s.upper_defect) {
            if (g.moves(ke + 1, ev.u) && !eta_m) {
                if (in_window_tgt)
                    s.upper_defect = ev.site + 1;
                else if (geo.absorb)
                    s.upper_exited = true;
            }
        }

        // Lower defect rides the denser background alone.
        if (!s.lower_exited && ev.site == s.lower_defect) {
            if (g.moves(kx + 1, ev.u) && !xi_m) {
                if (in_window_tgt)
                    s.lower_defect = ev.site + 1;
                else if (geo.absorb)
                    s.lower_exited = true;
            }
        }

        if (eta_m) {
            if (in_window_tgt) {
                eta[i] -= 1;
                eta[i + 1] += 1;
            } else if (geo.absorb) {
                eta[i] -= 1;
            }
        }
        if (xi_m) {
            if (in_window_tgt) {
                xi[i] -= 1;
                xi[i + 1] += 1;
            } else if (geo.absorb) {
                xi[i] -= 1;
            }
        }

        if (!(s.lower_defect <= s.middle_defect && s.middle_defect <= s.upper_defect))
            s.ordered_throughout = false;
    }
    return s;
}

}  // namespace zrp
