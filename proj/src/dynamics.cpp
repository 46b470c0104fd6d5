#include "zrp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace zrp {

BoundarySpec BoundarySpec::closed_absorb() {
    BoundarySpec b;
    b.left = Left::closed;
    b.right = Right::absorb;
    b.topology = Topology::segment;
    return b;
}

BoundarySpec BoundarySpec::inject_absorb(double rate) {
    BoundarySpec b;
    b.left = Left::inject;
    b.inject_rate = rate;
    b.right = Right::absorb;
    b.topology = Topology::segment;
    b.validate();
    return b;
}

BoundarySpec BoundarySpec::closed_closed() {
    BoundarySpec b;
    b.left = Left::closed;
    b.right = Right::closed;
    b.topology = Topology::segment;
    return b;
}

BoundarySpec BoundarySpec::ring() {
    BoundarySpec b;
    b.left = Left::closed;
    b.right = Right::closed;
    b.topology = Topology::ring;
    return b;
}

void BoundarySpec::validate() const {
    if (topology == Topology::ring) {
        if (left != Left::closed || right != Right::closed)
            throw InvalidBoundary("a ring has no boundary; left/right must be closed");
        return;
    }
    if (left == Left::inject) {
        if (!(inject_rate > 0.0) || !(inject_rate <= 1.0))
            throw InvalidBoundary("injection rate must lie in (0, 1], got " +
                                  std::to_string(inject_rate));
    } else if (inject_rate != 0.0) {
        throw InvalidBoundary("injection rate given without an injecting left boundary");
    }
}

RateFunctionSpec RateFunctionSpec::indicator() {
    RateFunctionSpec g;
    g.kind = Kind::indicator;
    g.cap = 1.0;
    return g;
}

RateFunctionSpec RateFunctionSpec::bounded_monotone(std::vector<double> g, double g_max) {
    RateFunctionSpec spec;
    spec.kind = Kind::table;
    spec.table = std::move(g);
    spec.cap = g_max;
    spec.validate();
    return spec;
}

void RateFunctionSpec::validate() const {
    if (kind == Kind::indicator) return;
    if (table.size() < 2) throw InvalidRateFunction("table must cover occupancies 0 and 1");
    if (table[0] != 0.0) throw InvalidRateFunction("g(0) must be 0");
    for (std::size_t k = 1; k < table.size(); ++k) {
        if (table[k] < table[k - 1]) throw InvalidRateFunction("g must be non-decreasing");
    }
    if (!(table[1] > 0.0)) throw InvalidRateFunction("g(1) must be positive");
    if (!(cap > 0.0)) throw InvalidRateFunction("cap must be positive");
    if (table.back() > cap) throw InvalidRateFunction("cap must bound the table");
}

double RateFunctionSpec::value(std::int64_t k) const {
    if (k <= 0) return 0.0;
    if (kind == Kind::indicator) return 1.0;
    const std::size_t i = std::min(static_cast<std::size_t>(k), table.size() - 1);
    return table[i];
}

EventStream::EventStream(const Environment& env, const BoundarySpec& boundary,
                         const RateFunctionSpec& g, std::uint64_t seed)
    : x_lo_(env.x_lo()), needs_uniform_(g.needs_uniform()) {
    boundary.validate();
    g.validate();
    const std::size_t n = env.size();
    const bool inject = boundary.topology == BoundarySpec::Topology::segment &&
                        boundary.left == BoundarySpec::Left::inject;
    streams_.reserve(n + (inject ? 1 : 0));
    attempt_rates_.reserve(n + (inject ? 1 : 0));
    for (std::size_t i = 0; i < n; ++i) {
        const Site x = x_lo_ + static_cast<Site>(i);
        streams_.emplace_back(derive_seed(seed, StreamKind::site_clock, x));
        attempt_rates_.push_back(env.rates()[i] * g.g_max());
    }
    has_injection_ = inject;
    inject_slot_ = static_cast<std::uint32_t>(n);
    if (inject) {
        streams_.emplace_back(derive_seed(seed, StreamKind::site_clock, injection_site()));
        attempt_rates_.push_back(boundary.inject_rate);
    }
    for (std::uint32_t slot = 0; slot < streams_.size(); ++slot) {
        const Site site = slot == inject_slot_ && has_injection_
                              ? injection_site()
                              : x_lo_ + static_cast<Site>(slot);
        heap_.push({streams_[slot].exp_gap(attempt_rates_[slot]), site, slot});
    }
}

EventStream::Event EventStream::next() {
    const HeapEntry top = heap_.top();
    heap_.pop();
    Event ev;
    ev.time = top.time;
    ev.site = top.site;
    ev.injection = has_injection_ && top.slot == inject_slot_;
    if (needs_uniform_ && !ev.injection) ev.u = streams_[top.slot].u01();
    heap_.push({top.time + streams_[top.slot].exp_gap(attempt_rates_[top.slot]), top.site, top.slot});
    return ev;
}

namespace {

void validate_run_inputs(const Environment& env, const Configuration& init,
                         const BoundarySpec& boundary, const RateFunctionSpec& g, double t_max,
                         const std::vector<double>& snapshot_times) {
    boundary.validate();
    g.validate();
    if (init.x_lo() != env.x_lo() || init.size() != env.size())
        throw WindowMismatch("configuration window [" + std::to_string(init.x_lo()) + ", " +
                             std::to_string(init.x_hi()) + "] does not match environment window [" +
                             std::to_string(env.x_lo()) + ", " + std::to_string(env.x_hi()) + "]");
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

SimResult simulate(const Environment& env, const Configuration& init, const BoundarySpec& boundary,
                   const RateFunctionSpec& g, double t_max, std::uint64_t seed,
                   const std::vector<double>& snapshot_times) {
    validate_run_inputs(env, init, boundary, g, t_max, snapshot_times);

    const std::size_t n = env.size();
    const bool ring = boundary.topology == BoundarySpec::Topology::ring;
    const bool absorb = !ring && boundary.right == BoundarySpec::Right::absorb;
    const bool inject = !ring && boundary.left == BoundarySpec::Left::inject;

    SimResult out;
    out.boundary = boundary;
    out.t_end = t_max;
    out.bond_lo = ring ? env.x_lo() : env.x_lo() - 1;
    out.bond_counts.assign(ring ? n : n + 1, 0);

    std::vector<std::int64_t> occ = init.occupancies();
    std::int64_t in_system = init.total();
    const std::int64_t initial_total = in_system;

    EventStream stream(env, boundary, g, seed);
    std::size_t snap_idx = 0;
    auto flush_snapshots_before = [&](double t) {
        while (snap_idx < snapshot_times.size() && snapshot_times[snap_idx] < t) {
            out.snapshots.push_back(
                {snapshot_times[snap_idx], Configuration(env.x_lo(), occ), out.bond_counts});
            ++snap_idx;
        }
    };

    while (true) {
        // Nothing can ever move again: freeze and fast-forward to t_max.
        if (in_system == 0 && !inject) break;

        const EventStream::Event ev = stream.next();
        if (ev.time > t_max) break;
        flush_snapshots_before(ev.time);

        if (ev.injection) {
            occ[0] += 1;
            ++in_system;
            out.injections.push_back(ev.time);
            ++out.bond_counts[0];
            continue;
        }

        const std::size_t i = static_cast<std::size_t>(ev.site - env.x_lo());
        if (!g.moves(occ[i], ev.u)) continue;

        if (i + 1 < n) {
            occ[i] -= 1;
            occ[i + 1] += 1;
            ++out.bond_counts[ring ? i : i + 1];
        } else if (ring) {
            occ[i] -= 1;
            occ[0] += 1;
            ++out.bond_counts[i];
        } else if (absorb) {
            occ[i] -= 1;
            --in_system;
            out.departures.push_back(ev.time);
            ++out.bond_counts[n];
        }
        // closed right edge: the attempt is discarded.
    }
    flush_snapshots_before(std::nextafter(t_max, t_max + 1.0));

    out.final_state = Configuration(env.x_lo(), std::move(occ));
    const std::int64_t balance = initial_total + static_cast<std::int64_t>(out.injections.size()) -
                                 static_cast<std::int64_t>(out.departures.size());
    if (balance != out.final_state.total())
        throw std::logic_error("particle balance violated");  // internal invariant
    return out;
}

std::uint64_t bond_current(const SimResult& result, Site bond) {
    const Site lo = result.bond_lo;
    const Site hi = lo + static_cast<Site>(result.bond_counts.size()) - 1;
    if (bond < lo || bond > hi)
        throw UnknownBond("bond " + std::to_string(bond) + " outside tracked range [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return result.bond_counts[static_cast<std::size_t>(bond - lo)];
}

const std::vector<double>& departure_times(const SimResult& result) {
    const bool absorb = result.boundary.topology == BoundarySpec::Topology::segment &&
                        result.boundary.right == BoundarySpec::Right::absorb;
    if (!absorb) throw NoAbsorbingBoundary("run had no absorbing boundary");
    return result.departures;
}

}  // namespace zrp
