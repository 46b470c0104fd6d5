#include <doctest.h>

#include <cmath>
#include <vector>

#include "zrp/dynamics.hpp"
#include "zrp/errors.hpp"
#include "zrp/measures.hpp"
#include "zrp/rng.hpp"
#include "zrp/stats.hpp"

using namespace zrp;

namespace {

const RateFunctionSpec kIndicator = RateFunctionSpec::indicator();

}  // namespace

TEST_CASE("boundary presets and validation") {
    CHECK_NOTHROW(BoundarySpec::inject_absorb(0.5).validate());
    CHECK_NOTHROW(BoundarySpec::ring().validate());
    CHECK_THROWS_AS(BoundarySpec::inject_absorb(0.0), InvalidBoundary);
    CHECK_THROWS_AS(BoundarySpec::inject_absorb(1.5), InvalidBoundary);

    BoundarySpec bad = BoundarySpec::ring();
    bad.right = BoundarySpec::Right::absorb;
    CHECK_THROWS_AS(bad.validate(), InvalidBoundary);

    BoundarySpec stray = BoundarySpec::closed_absorb();
    stray.inject_rate = 0.3;
    CHECK_THROWS_AS(stray.validate(), InvalidBoundary);
}

TEST_CASE("service-rate tables must be monotone with a cap") {
    const RateFunctionSpec g = RateFunctionSpec::bounded_monotone({0.0, 0.3, 0.7, 1.0}, 1.0);
    CHECK(g.value(0) == 0.0);
    CHECK(g.value(2) == 0.7);
    CHECK(g.value(9) == 1.0);  // constant beyond the table
    CHECK(g.needs_uniform());
    CHECK(!kIndicator.needs_uniform());
    CHECK(kIndicator.value(5) == 1.0);

    CHECK_THROWS_AS(RateFunctionSpec::bounded_monotone({0.0}, 1.0), InvalidRateFunction);
    CHECK_THROWS_AS(RateFunctionSpec::bounded_monotone({0.1, 0.5}, 1.0), InvalidRateFunction);
    CHECK_THROWS_AS(RateFunctionSpec::bounded_monotone({0.0, 0.5, 0.4}, 1.0), InvalidRateFunction);
    CHECK_THROWS_AS(RateFunctionSpec::bounded_monotone({0.0, 0.0}, 1.0), InvalidRateFunction);
    CHECK_THROWS_AS(RateFunctionSpec::bounded_monotone({0.0, 0.5}, 0.4), InvalidRateFunction);
}

TEST_CASE("run input validation") {
    const Environment env = build_env({1.0, 0.9}, 0.5);
    const Configuration good = Configuration::constant(0, 2, 1);
    const Configuration shifted = Configuration::constant(1, 2, 1);
    const Configuration wide = Configuration::constant(0, 3, 1);

    CHECK_THROWS_AS(simulate(env, shifted, BoundarySpec::closed_absorb(), kIndicator, 1.0, 1),
                    WindowMismatch);
    CHECK_THROWS_AS(simulate(env, wide, BoundarySpec::closed_absorb(), kIndicator, 1.0, 1),
                    WindowMismatch);
    CHECK_THROWS_AS(simulate(env, good, BoundarySpec::closed_absorb(), kIndicator, 0.0, 1),
                    InvalidSnapshotTimes);
    CHECK_THROWS_AS(simulate(env, good, BoundarySpec::closed_absorb(), kIndicator, 1.0, 1, {2.0}),
                    InvalidSnapshotTimes);
    CHECK_THROWS_AS(
        simulate(env, good, BoundarySpec::closed_absorb(), kIndicator, 1.0, 1, {0.8, 0.2}),
        InvalidSnapshotTimes);
}

TEST_CASE("a single particle departs at the first clock ring of its site") {
    // One site at rate 0.5: the departure time must equal the first
    // exponential gap of that site's attempt stream, reproduced here from the
    // same seed derivation.
    const Environment env = build_env({0.5}, 0.5);
    const std::uint64_t seed = 314;
    const SimResult res = simulate(env, Configuration::constant(0, 1, 1),
                                   BoundarySpec::closed_absorb(), kIndicator, 1e6, seed);
    RandomStream clock(derive_seed(seed, StreamKind::site_clock, 0));
    const double expected = clock.exp_gap(0.5);
    REQUIRE(res.departures.size() == 1);
    CHECK(res.departures[0] == expected);
    CHECK(res.final_state.total() == 0);
    CHECK(bond_current(res, 0) == 1);   // the exit bond of the one-site window
    CHECK(bond_current(res, -1) == 0);  // the (closed) entry bond never fires
}

TEST_CASE("single-site departure times are exponential") {
    const Environment env = build_env({1.0}, 1.0);
    const int n = 10000;
    std::vector<double> times;
    times.reserve(n);
    for (int r = 0; r < n; ++r) {
        const SimResult res = simulate(env, Configuration::constant(0, 1, 1),
                                       BoundarySpec::closed_absorb(), kIndicator, 1e9,
                                       static_cast<std::uint64_t>(r));
        REQUIRE(res.departures.size() == 1);
        times.push_back(res.departures[0]);
    }
    CHECK(ks_exponential(times, 1.0).p_value > 1e-4);
}

TEST_CASE("closed systems conserve particles at every snapshot") {
    const Environment env = build_env({0.9, 0.7, 1.0, 0.8, 0.6}, 0.5);
    const Configuration init(0, {3, 0, 2, 5, 1});
    const std::vector<double> snaps = {1.0, 5.0, 10.0, 20.0, 40.0};

    for (const BoundarySpec& b : {BoundarySpec::closed_closed(), BoundarySpec::ring()}) {
        const SimResult res = simulate(env, init, b, kIndicator, 40.0, 99, snaps);
        CHECK(res.final_state.total() == init.total());
        for (const Snapshot& s : res.snapshots) CHECK(s.state.total() == init.total());
        CHECK(res.departures.empty());
        CHECK(res.injections.empty());
    }
}

TEST_CASE("segment particle balance: initial + injected = final + departed") {
    const Environment env = build_env({1.0, 0.8, 0.9, 0.7}, 0.5);
    const Configuration init(0, {2, 1, 0, 3});
    const SimResult res = simulate(env, init, BoundarySpec::inject_absorb(0.45), kIndicator,
                                   200.0, 1234);
    CHECK(init.total() + static_cast<std::int64_t>(res.injections.size()) ==
          res.final_state.total() + static_cast<std::int64_t>(res.departures.size()));
    // Flow consistency: the exit bond count equals the departure count and
    // the entry bond count equals the injection count.
    CHECK(bond_current(res, -1) == res.injections.size());
    CHECK(bond_current(res, 3) == res.departures.size());
    CHECK_THROWS_AS(bond_current(res, 4), UnknownBond);
    CHECK_THROWS_AS(bond_current(res, -2), UnknownBond);
}

TEST_CASE("snapshots are right-continuous and cover the endpoints") {
    const Environment env = build_env({1.0, 1.0}, 1.0);
    const Configuration init(0, {1, 1});
    const SimResult res = simulate(env, init, BoundarySpec::closed_closed(), kIndicator, 5.0, 7,
                                   {0.0, 2.5, 5.0});
    REQUIRE(res.snapshots.size() == 3);
    CHECK(res.snapshots[0].time == 0.0);
    CHECK(res.snapshots[0].state == init);  // nothing can have moved at time 0
    CHECK(res.snapshots[2].time == 5.0);
    CHECK(res.snapshots[2].state == res.final_state);
    for (std::size_t b = 0; b < res.bond_counts.size(); ++b)
        CHECK(res.snapshots[2].bond_counts[b] == res.bond_counts[b]);
}

TEST_CASE("early exhaustion fast-forwards without changing snapshots") {
    // Two particles, absorbing edge, huge horizon: once the window is empty
    // the run freezes, and late snapshots see the empty state.
    const Environment env = build_env({1.0, 0.9}, 0.5);
    const SimResult res = simulate(env, Configuration(0, {1, 1}), BoundarySpec::closed_absorb(),
                                   kIndicator, 1e8, 21, {1e7, 1e8});
    CHECK(res.final_state.total() == 0);
    CHECK(res.departures.size() == 2);
    for (const Snapshot& s : res.snapshots) CHECK(s.state.total() == 0);
}

TEST_CASE("a longer horizon replays the same prefix history") {
    const Environment env = build_env({0.9, 0.8, 1.0}, 0.5);
    const Configuration init(0, {2, 2, 2});
    const BoundarySpec b = BoundarySpec::inject_absorb(0.4);
    const SimResult short_run = simulate(env, init, b, kIndicator, 50.0, 5, {25.0, 50.0});
    const SimResult long_run = simulate(env, init, b, kIndicator, 100.0, 5, {25.0, 50.0});
    REQUIRE(long_run.snapshots.size() == 2);
    CHECK(long_run.snapshots[0] == short_run.snapshots[0]);
    CHECK(long_run.snapshots[1].state == short_run.final_state);
    CHECK(long_run.snapshots[1].bond_counts == short_run.bond_counts);
}

TEST_CASE("reruns with one seed are identical; different seeds differ") {
    const Environment env = build_env({1.0, 0.8, 0.9}, 0.5);
    const Configuration init(0, {2, 0, 1});
    const BoundarySpec b = BoundarySpec::inject_absorb(0.5);
    const SimResult a1 = simulate(env, init, b, kIndicator, 80.0, 42, {40.0, 80.0});
    const SimResult a2 = simulate(env, init, b, kIndicator, 80.0, 42, {40.0, 80.0});
    const SimResult a3 = simulate(env, init, b, kIndicator, 80.0, 43, {40.0, 80.0});
    CHECK(a1 == a2);
    CHECK(a1 != a3);
}

TEST_CASE("stationary throughput matches the injection rate") {
    // Tandem segment fed at 0.4 with all service rates 0.8: in equilibrium
    // flow in equals flow out, both near 0.4 per unit time.
    const Environment env = build_env(std::vector<double>(8, 0.8), 0.5);
    const ProductGeometric mu(env, 0.4);
    const Configuration init = sample_configuration(mu, 3);
    const double t = 5000.0;
    const SimResult res =
        simulate(env, init, BoundarySpec::inject_absorb(0.4), kIndicator, t, 3);
    const double in_rate = static_cast<double>(res.injections.size()) / t;
    const double out_rate = static_cast<double>(res.departures.size()) / t;
    CHECK(std::abs(in_rate - 0.4) < 0.05 * 0.4);
    CHECK(std::abs(out_rate - 0.4) < 0.05 * 0.4);
    // Interior bonds carry the same stationary current.
    for (Site bond = 0; bond < 7; ++bond) {
        const double rate = static_cast<double>(bond_current(res, bond)) / t;
        CHECK(std::abs(rate - 0.4) < 0.07 * 0.4);
    }
}

TEST_CASE("occupancy-dependent service follows the birth-death equilibrium") {
    // Single site with table g and a Poisson source is a birth-death chain:
    // pi(k) proportional to prod_{j<=k} lambda/g(j).  Compare the time-t law
    // across replicas with the chain's stationary distribution.
    const double lambda = 0.25;
    const std::vector<double> table = {0.0, 0.3, 0.7, 1.0};
    const RateFunctionSpec g = RateFunctionSpec::bounded_monotone(table, 1.0);
    const Environment env = build_env({1.0}, 0.5);
    const BoundarySpec b = BoundarySpec::inject_absorb(lambda);

    const int replicas = 4000;
    const double t = 200.0;
    std::vector<std::uint64_t> counts;
    for (int r = 0; r < replicas; ++r) {
        const SimResult res = simulate(env, Configuration::constant(0, 1, 0), b, g, t,
                                       derive_seed(555, StreamKind::replica, r));
        const auto k = static_cast<std::size_t>(res.final_state.at(0));
        if (counts.size() <= k) counts.resize(k + 1, 0);
        ++counts[k];
    }

    auto g_of = [&](std::size_t k) { return table[std::min(k, table.size() - 1)]; };
    std::vector<double> pi(counts.size() + 30, 0.0);
    pi[0] = 1.0;
    double z = 1.0;
    for (std::size_t k = 1; k < pi.size(); ++k) {
        pi[k] = pi[k - 1] * lambda / g_of(k);
        z += pi[k];
    }
    for (double& p : pi) p /= z;
    pi.resize(counts.size());

    const GofResult gof = chi_square_gof(counts, pi);
    CHECK(gof.p_value > 1e-3);
}

TEST_CASE("ring currents wrap and conserve mass") {
    const Environment env = build_env({1.0, 0.7, 0.9}, 0.5);
    const Configuration init(0, {2, 2, 2});
    const SimResult res = simulate(env, init, BoundarySpec::ring(), kIndicator, 100.0, 8);
    CHECK(res.final_state.total() == 6);
    CHECK(res.bond_counts.size() == 3);  // bonds 0->1, 1->2, 2->0
    std::uint64_t jumps = 0;
    for (std::uint64_t c : res.bond_counts) jumps += c;
    CHECK(jumps > 0);
    CHECK_THROWS_AS(departure_times(res), NoAbsorbingBoundary);
}

TEST_CASE("closed right edge discards exit attempts") {
    const Environment env = build_env({1.0}, 1.0);
    const SimResult res = simulate(env, Configuration::constant(0, 1, 3),
                                   BoundarySpec::closed_closed(), kIndicator, 50.0, 2);
    CHECK(res.final_state.at(0) == 3);
    CHECK(res.departures.empty());
    CHECK(bond_current(res, 0) == 0);   // the exit bond never fires
    CHECK(bond_current(res, -1) == 0);  // neither does the closed entry bond
}

TEST_CASE("event streams break time ties toward the smaller site") {
    // With continuous clocks ties have probability zero; the contract is
    // structural, so check it on the comparator level via many pops: times
    // must be non-decreasing overall.
    const Environment env = build_env(std::vector<double>(6, 1.0), 1.0);
    EventStream stream(env, BoundarySpec::inject_absorb(0.5), kIndicator, 77);
    double prev = 0.0;
    for (int i = 0; i < 5000; ++i) {
        const EventStream::Event ev = stream.next();
        CHECK(ev.time >= prev);
        prev = ev.time;
        CHECK(ev.site >= -1);
        CHECK(ev.site <= 5);
        if (ev.injection) CHECK(ev.site == stream.injection_site());
    }
}
