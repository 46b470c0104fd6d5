#pragma once

#include <cstdint>
#include <vector>

#include "zrp/configuration.hpp"
#include "zrp/dynamics.hpp"
#include "zrp/environment.hpp"

namespace zrp {

// Two marginal configurations on one window, evolved under shared clocks.
struct CoupledConfiguration {
    Configuration eta;
    Configuration xi;

    CoupledConfiguration(Configuration eta_, Configuration xi_);

    bool operator==(const CoupledConfiguration&) const = default;
};

// Pointwise positive/negative parts of eta - xi.
struct DiscrepancyProfile {
    Site x_lo = 0;
    std::vector<std::int64_t> eta_over_xi;  // (eta - xi)^+ per site
    std::vector<std::int64_t> xi_over_eta;  // (xi - eta)^+ per site

    std::int64_t total() const;

    bool operator==(const DiscrepancyProfile&) const = default;
};

DiscrepancyProfile discrepancy_profile(const CoupledConfiguration& pair);

struct CoupledSnapshot {
    double time = 0.0;
    Configuration eta;
    Configuration xi;
    DiscrepancyProfile discrepancies;

    bool operator==(const CoupledSnapshot&) const = default;
};

struct CoupledResult {
    SimResult eta;  // exactly what an uncoupled run on the same seed produces
    SimResult xi;
    std::vector<CoupledSnapshot> snapshots;

    bool operator==(const CoupledResult&) const = default;
};

// Evolve both marginals under the same attempt stream.  Each marginal's
// fields coincide exactly (pathwise, not just in law) with `simulate` run on
// the same (env, boundary, g, t_max, seed).
CoupledResult simulate_coupled(const Environment& env, const CoupledConfiguration& init,
                               const BoundarySpec& boundary, const RateFunctionSpec& g,
                               double t_max, std::uint64_t seed,
                               const std::vector<double>& snapshot_times = {});

// Trajectory of one tagged defect particle added on top of `base` at site z.
struct TagPath {
    std::vector<double> times;     // jump times; first entry is 0 at the start site
    std::vector<Site> positions;   // position after each jump
    bool exited_right = false;
    double exit_time = 0.0;        // meaningful iff exited_right

    Site position_at(double t) const;
    Site final_position() const { return positions.back(); }

    bool operator==(const TagPath&) const = default;
};

// Follow the extra particle of the pair (base, base + one particle at z)
// under shared clocks: it hops from x to x+1 exactly when the richer copy
// moves and the poorer one does not.  Exiting through the absorbing edge
// freezes the path at the window's right edge.  Ring topology has no
// rightward orientation for a tagged defect and is rejected.
TagPath track_second_class(const Environment& env, const Configuration& base, Site z,
                           const BoundarySpec& boundary, const RateFunctionSpec& g, double t_max,
                           std::uint64_t seed);

// One sample of the three-process ordering run: lower copy at fugacity u,
// upper copy at fugacity w >= u with one extra particle at z, and the middle
// defect of the upper copy, all under one attempt stream.  Positions are the
// defects' final positions (frozen at the right edge on exit).
struct SandwichSample {
    Site lower_defect = 0;   // defect on the fugacity-w background
    Site middle_defect = 0;  // the added particle of the ordered pair
    Site upper_defect = 0;   // defect on the fugacity-u background
    bool ordered_throughout = false;  // lower <= middle <= upper at every event
    bool lower_exited = false;
    bool middle_exited = false;
    bool upper_exited = false;
};

SandwichSample sandwich_run(const Environment& env, double u, double w, Site z,
                            const BoundarySpec& boundary, const RateFunctionSpec& g, double t_max,
                            std::uint64_t seed);

}  // namespace zrp
