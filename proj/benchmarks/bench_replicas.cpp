// Timing comparison between the serial replica loop and the OpenMP fan-out.
// Runs the same batch of independent trajectories both ways, checks that the
// results agree slot for slot, and prints wall-clock times plus the speedup.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "zrp/dynamics.hpp"
#include "zrp/measures.hpp"
#include "zrp/replicas.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t replicas = 64;
    double t_max = 500.0;
    int threads = 4;
    if (argc > 1) replicas = static_cast<std::size_t>(std::stoul(argv[1]));
    if (argc > 2) t_max = std::stod(argv[2]);
    if (argc > 3) threads = std::stoi(argv[3]);

    std::vector<double> rates(64);
    for (std::size_t i = 0; i < rates.size(); ++i)
        rates[i] = 0.6 + 0.4 * static_cast<double>((i * 29) % 17) / 16.0;
    const zrp::Environment env(0, rates, 0.5);
    const zrp::ProductGeometric mu(env, 0.4);
    const zrp::BoundarySpec boundary = zrp::BoundarySpec::inject_absorb(0.4);
    const zrp::RateFunctionSpec g = zrp::RateFunctionSpec::indicator();
    const std::uint64_t master = 20240901;

    auto body = [&](std::size_t r, std::size_t& departures) {
        const std::uint64_t seed = zrp::derive_seed(master, zrp::StreamKind::replica, r);
        const zrp::Configuration init = zrp::sample_configuration(mu, seed);
        const zrp::SimResult res = zrp::simulate(env, init, boundary, g, t_max, seed, {});
        departures = res.departures.size();
    };

    std::vector<std::size_t> serial(replicas, 0);
    const auto t_serial = Clock::now();
    zrp::run_replicas_serial(replicas, [&](std::size_t r) { body(r, serial[r]); });
    const double serial_s = seconds_since(t_serial);

    std::vector<std::size_t> parallel(replicas, 0);
    const auto t_parallel = Clock::now();
    zrp::run_replicas(replicas, threads, [&](std::size_t r) { body(r, parallel[r]); });
    const double parallel_s = seconds_since(t_parallel);

    bool same = true;
    for (std::size_t r = 0; r < replicas; ++r)
        if (serial[r] != parallel[r]) same = false;

    std::printf("replicas=%zu t_max=%.1f threads=%d\n", replicas, t_max, threads);
    std::printf("serial   %.3fs\n", serial_s);
    std::printf("parallel %.3fs\n", parallel_s);
    std::printf("speedup  %.2fx\n", parallel_s > 0 ? serial_s / parallel_s : 0.0);
    std::printf("results identical: %s\n", same ? "yes" : "NO");
    return same ? 0 : 1;
}
