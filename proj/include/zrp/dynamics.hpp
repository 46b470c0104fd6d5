#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "zrp/configuration.hpp"
#include "zrp/environment.hpp"
#include "zrp/rng.hpp"

namespace zrp {

// Boundary behaviour of the finite window.  Segments may inject fresh
// particles at the left edge (a Poisson source feeding x_lo) and absorb at
// the right (departures leave the system); rings wrap and have no boundary.
struct BoundarySpec {
    enum class Left { closed, inject };
    enum class Right { absorb, closed };
    enum class Topology { segment, ring };

    Left left = Left::closed;
    double inject_rate = 0.0;  // used iff left == inject
    Right right = Right::absorb;
    Topology topology = Topology::segment;

    static BoundarySpec closed_absorb();
    static BoundarySpec inject_absorb(double rate);
    static BoundarySpec closed_closed();
    static BoundarySpec ring();

    void validate() const;
    bool operator==(const BoundarySpec&) const = default;
};

// Service-rate function g(k) of the local occupancy.  The indicator kind is
// g(k) = 1{k > 0}; the table kind is a bounded non-decreasing g given on
// 0..K with g(0) = 0, extended constantly beyond K, with uniformization cap
// g_max >= max g.  Site x attempts at rate p_x * g_max and an attempt on
// occupancy k succeeds with probability g(k) / g_max.
struct RateFunctionSpec {
    enum class Kind { indicator, table };

    Kind kind = Kind::indicator;
    std::vector<double> table;  // table kind only
    double cap = 1.0;           // g_max

    static RateFunctionSpec indicator();
    static RateFunctionSpec bounded_monotone(std::vector<double> g, double g_max);

    void validate() const;
    double value(std::int64_t k) const;
    double g_max() const { return cap; }
    // Indicator decisions need no extra randomness; table decisions thin
    // attempts with one uniform.
    bool needs_uniform() const { return kind == Kind::table; }

    // Does an attempt at pre-move occupancy k succeed?  u is the thinning
    // uniform (ignored by the indicator kind).
    bool moves(std::int64_t k, double u) const {
        if (kind == Kind::indicator) return k > 0;
        return u * cap < value(k);
    }

    bool operator==(const RateFunctionSpec&) const = default;
};

// Merged per-site Poisson attempt clocks (rate p_x * g_max each) plus the
// optional injection clock, delivered in time order with ties broken by the
// smaller site index.  The stream is a deterministic function of (env,
// boundary, g, seed) and is independent of any configuration, which is what
// makes shared-clock coupling exact: coupled runs consume the identical
// stream an uncoupled run would.
class EventStream {
public:
    struct Event {
        double time = 0.0;
        Site site = 0;
        double u = 0.0;  // thinning uniform; drawn only when the rate function needs one
        bool injection = false;
    };

    EventStream(const Environment& env, const BoundarySpec& boundary, const RateFunctionSpec& g,
                std::uint64_t seed);

    Event next();

    // Pseudo-site of injection events; sorts before every window site.
    Site injection_site() const { return x_lo_ - 1; }

private:
    struct HeapEntry {
        double time;
        Site site;
        std::uint32_t slot;
    };
    struct Later {
        bool operator()(const HeapEntry& a, const HeapEntry& b) const {
            if (a.time != b.time) return a.time > b.time;
            return a.site > b.site;
        }
    };

    Site x_lo_ = 0;
    bool needs_uniform_ = false;
    std::uint32_t inject_slot_ = 0;  // == streams_.size() when absent
    bool has_injection_ = false;
    std::vector<RandomStream> streams_;
    std::vector<double> attempt_rates_;
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, Later> heap_;
};

// State plus cumulative flow counters captured at one requested time.
struct Snapshot {
    double time = 0.0;
    Configuration state;
    std::vector<std::uint64_t> bond_counts;

    bool operator==(const Snapshot&) const = default;
};

// Everything a single run produces.  Bond i counts jumps across the bond
// whose left endpoint is site (bond_lo + i); on segments bond_lo = x_lo - 1
// (the injection bond), and the last bond is the exit bond; on rings
// bond_lo = x_lo and the last bond wraps to x_lo.
struct SimResult {
    Configuration final_state;
    double t_end = 0.0;
    BoundarySpec boundary;
    Site bond_lo = 0;
    std::vector<std::uint64_t> bond_counts;
    std::vector<double> departures;  // exit times through the absorbing edge
    std::vector<double> injections;  // arrival times through the left source
    std::vector<Snapshot> snapshots;

    bool operator==(const SimResult&) const = default;
};

// Evolve `init` under the attempt stream for time t_max.  snapshot_times
// must be sorted, within [0, t_max]; each snapshot captures the state the
// process is in at that time (right-continuous paths).
SimResult simulate(const Environment& env, const Configuration& init, const BoundarySpec& boundary,
                   const RateFunctionSpec& g, double t_max, std::uint64_t seed,
                   const std::vector<double>& snapshot_times = {});

// Cumulative jump count across the bond with left endpoint `bond`.
std::uint64_t bond_current(const SimResult& result, Site bond);

// Exit times through the absorbing boundary; throws when the run had none.
const std::vector<double>& departure_times(const SimResult& result);

}  // namespace zrp
