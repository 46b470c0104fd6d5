#include "zrp/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "zrp/io.hpp"
#include "zrp/measures.hpp"

namespace zrp {

namespace {

namespace fs = std::filesystem;

struct FlagSet {
    std::string config;
    std::string env;
    std::int64_t seed = 1;
    std::int64_t replicas = 0;
    std::int64_t parallelism = 1;
    std::string out;
    bool force = false;
    double v = 0.0;

    CLI::Option* o_config = nullptr;
    CLI::Option* o_env = nullptr;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_replicas = nullptr;
    CLI::Option* o_parallelism = nullptr;
    CLI::Option* o_out = nullptr;
    CLI::Option* o_force = nullptr;
    CLI::Option* o_v = nullptr;

    void attach(CLI::App* cmd) {
        o_config = cmd->add_option("--config", config, "JSON run/experiment descriptor");
        o_env = cmd->add_option("--env", env, "environment JSON (overrides config)");
        o_seed = cmd->add_option("--seed", seed, "master seed (overrides config)");
        o_replicas = cmd->add_option("--replicas", replicas, "replica count (overrides config)");
        o_parallelism =
            cmd->add_option("--parallelism", parallelism, "worker threads (overrides config)");
        o_out = cmd->add_option("--out", out, "output directory");
        o_force = cmd->add_flag("--force", force, "overwrite an existing report.json");
        o_v = cmd->add_option("--v", v, "fugacity / injection rate (overrides config)");
    }
};

// Config + flags resolved into one view; flags win on conflict.
struct Run {
    json cfg = json::object();
    fs::path base_dir = ".";
    const FlagSet* flags = nullptr;

    bool flag_given(CLI::Option* o) const { return o != nullptr && o->count() > 0; }

    std::uint64_t seed() const {
        if (flag_given(flags->o_seed)) return static_cast<std::uint64_t>(flags->seed);
        if (cfg.contains("seed")) {
            if (!cfg.at("seed").is_number_integer())
                throw ConfigError("/seed", "expected an integer");
            return cfg.at("seed").get<std::uint64_t>();
        }
        return 1;
    }

    std::size_t replicas(std::size_t fallback) const {
        std::int64_t r = static_cast<std::int64_t>(fallback);
        if (flag_given(flags->o_replicas))
            r = flags->replicas;
        else if (cfg.contains("replicas")) {
            if (!cfg.at("replicas").is_number_integer())
                throw ConfigError("/replicas", "expected an integer");
            r = cfg.at("replicas").get<std::int64_t>();
        }
        if (r < 1) throw ConfigError("/replicas", "must be >= 1");
        return static_cast<std::size_t>(r);
    }

    int parallelism() const {
        std::int64_t p = 1;
        if (flag_given(flags->o_parallelism))
            p = flags->parallelism;
        else if (cfg.contains("parallelism")) {
            if (!cfg.at("parallelism").is_number_integer())
                throw ConfigError("/parallelism", "expected an integer");
            p = cfg.at("parallelism").get<std::int64_t>();
        }
        if (p < 1) throw ConfigError("/parallelism", "must be >= 1");
        return static_cast<int>(p);
    }

    double fugacity() const {
        if (flag_given(flags->o_v)) return flags->v;
        if (cfg.contains("v")) {
            if (!cfg.at("v").is_number()) throw ConfigError("/v", "expected a number");
            return cfg.at("v").get<double>();
        }
        throw ConfigError("/v", "missing fugacity: give \"v\" in the config or --v");
    }

    double number(const char* key) const {
        if (!cfg.contains(key)) throw ConfigError(std::string("/") + key, "missing key");
        if (!cfg.at(key).is_number())
            throw ConfigError(std::string("/") + key, "expected a number");
        return cfg.at(key).get<double>();
    }

    double number_or(const char* key, double fallback) const {
        if (!cfg.contains(key)) return fallback;
        if (!cfg.at(key).is_number())
            throw ConfigError(std::string("/") + key, "expected a number");
        return cfg.at(key).get<double>();
    }

    std::int64_t integer_or(const char* key, std::int64_t fallback) const {
        if (!cfg.contains(key)) return fallback;
        if (!cfg.at(key).is_number_integer())
            throw ConfigError(std::string("/") + key, "expected an integer");
        return cfg.at(key).get<std::int64_t>();
    }

    Environment environment() const {
        if (flag_given(flags->o_env)) {
            const fs::path p(flags->env);
            return environment_from_source(read_json_file(p), p.parent_path(), "--env");
        }
        if (!cfg.contains("environment"))
            throw ConfigError("/environment", "missing environment: give it in the config or --env");
        return environment_from_source(cfg.at("environment"), base_dir, "/environment");
    }

    fs::path out_dir() const {
        if (flag_given(flags->o_out)) return fs::path(flags->out);
        if (cfg.contains("out")) return base_dir / cfg.at("out").get<std::string>();
        if (const char* e = std::getenv("ZRP_OUT_DIR")) return fs::path(e);
        return fs::path("zrp_out");
    }

    bool force() const { return flags->force; }
};

fs::path prepare_out_dir(const Run& run) {
    const fs::path dir = run.out_dir();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

void guard_report(const fs::path& report, bool force) {
    if (!force && fs::exists(report))
        throw Error("refusing to overwrite " + report.string() + " (pass --force)");
}

BoundarySpec boundary_of(const Run& run) {
    if (!run.cfg.contains("boundary")) throw ConfigError("/boundary", "missing key");
    return boundary_from_json(run.cfg.at("boundary"), "/boundary");
}

RateFunctionSpec rate_function_of(const Run& run) {
    if (!run.cfg.contains("g")) return RateFunctionSpec::indicator();
    return rate_function_from_json(run.cfg.at("g"), "/g");
}

std::vector<double> snapshot_times_of(const Run& run) {
    if (!run.cfg.contains("snapshot_times")) return {};
    const json& j = run.cfg.at("snapshot_times");
    if (!j.is_array()) throw ConfigError("/snapshot_times", "expected an array of times");
    std::vector<double> t;
    for (const auto& x : j) {
        if (!x.is_number()) throw ConfigError("/snapshot_times", "expected numbers");
        t.push_back(x.get<double>());
    }
    return t;
}

InitialCondition initial_of(const Run& run, const char* key) {
    if (!run.cfg.contains(key)) throw ConfigError(std::string("/") + key, "missing key");
    return initial_from_json(run.cfg.at(key), run.base_dir, std::string("/") + key);
}

int cmd_simulate(const Run& run, json& summary) {
    const Environment env = run.environment();
    const std::uint64_t seed = run.seed();
    const Configuration init = make_initial(initial_of(run, "init"), env, seed);
    const BoundarySpec boundary = boundary_of(run);
    const RateFunctionSpec g = rate_function_of(run);
    const double t_max = run.number("t_max");
    const std::vector<double> snaps = snapshot_times_of(run);
    const fs::path dir = prepare_out_dir(run);

    const SimResult res = simulate(env, init, boundary, g, t_max, seed, snaps);
    write_snapshots_csv(dir / "snapshots.csv", res);
    write_departures_csv(dir / "departures.csv", res);
    write_currents_csv(dir / "currents.csv", res);

    summary["status"] = "ok";
    summary["seed"] = seed;
    summary["out_dir"] = dir.string();
    summary["t_end"] = res.t_end;
    summary["departures"] = res.departures.size();
    summary["injections"] = res.injections.size();
    summary["final_total"] = res.final_state.total();
    return 0;
}

int cmd_couple(const Run& run, json& summary) {
    const Environment env = run.environment();
    const std::uint64_t seed = run.seed();
    const Configuration first = make_initial(initial_of(run, "init"), env, seed);
    if (!run.cfg.contains("coupled") || !run.cfg.at("coupled").contains("second"))
        throw ConfigError("/coupled/second", "missing second initial condition");
    const Configuration second =
        make_initial(initial_from_json(run.cfg.at("coupled").at("second"), run.base_dir,
                                       "/coupled/second"),
                     env, derive_seed(seed, StreamKind::replica, 1));
    const BoundarySpec boundary = boundary_of(run);
    const RateFunctionSpec g = rate_function_of(run);
    const double t_max = run.number("t_max");
    const std::vector<double> snaps = snapshot_times_of(run);
    const fs::path dir = prepare_out_dir(run);

    const CoupledResult res =
        simulate_coupled(env, CoupledConfiguration(first, second), boundary, g, t_max, seed, snaps);
    write_discrepancies_csv(dir / "discrepancies.csv", res);
    write_snapshots_csv(dir / "snapshots_eta.csv", res.eta);
    write_snapshots_csv(dir / "snapshots_xi.csv", res.xi);
    write_currents_csv(dir / "currents_eta.csv", res.eta);
    write_currents_csv(dir / "currents_xi.csv", res.xi);
    write_departures_csv(dir / "departures_eta.csv", res.eta);
    write_departures_csv(dir / "departures_xi.csv", res.xi);

    const DiscrepancyProfile final_prof = discrepancy_profile(
        CoupledConfiguration(res.eta.final_state, res.xi.final_state));
    summary["status"] = "ok";
    summary["seed"] = seed;
    summary["out_dir"] = dir.string();
    summary["t_end"] = res.eta.t_end;
    summary["final_discrepancies"] = final_prof.total();
    return 0;
}

int cmd_tag(const Run& run, json& summary) {
    const Environment env = run.environment();
    const std::uint64_t seed = run.seed();
    const Configuration base = make_initial(initial_of(run, "init"), env, seed);
    if (!run.cfg.contains("tag") || !run.cfg.at("tag").contains("site"))
        throw ConfigError("/tag/site", "missing tag site");
    if (!run.cfg.at("tag").at("site").is_number_integer())
        throw ConfigError("/tag/site", "expected an integer");
    const Site z = run.cfg.at("tag").at("site").get<Site>();
    const BoundarySpec boundary = boundary_of(run);
    const RateFunctionSpec g = rate_function_of(run);
    const double t_max = run.number("t_max");
    const fs::path dir = prepare_out_dir(run);

    const TagPath path = track_second_class(env, base, z, boundary, g, t_max, seed);
    write_tag_path_csv(dir / "tag_path.csv", path);

    summary["status"] = "ok";
    summary["seed"] = seed;
    summary["out_dir"] = dir.string();
    summary["start"] = z;
    summary["final_position"] = path.final_position();
    summary["jumps"] = path.times.size() - 1;
    summary["exited"] = path.exited_right;
    return 0;
}

int cmd_burke(const Run& run, json& summary) {
    const Environment env = run.environment();
    const double v = run.fugacity();
    const double t_max = run.number("t_max");
    const double burn_in = run.number_or("burn_in", 10.0 / env.min_rate());
    const std::size_t replicas = run.replicas(20);
    const double alpha = run.number_or("alpha", 0.01);
    const double rate_tol = run.number_or("rate_tolerance", 0.02);
    const double min_pass = run.number_or("min_pass_fraction", 0.95);
    const fs::path dir = prepare_out_dir(run);
    guard_report(dir / "report.json", run.force());

    const BurkeReport rep = burke_experiment(env, v, t_max, burn_in, replicas, run.seed(),
                                             run.parallelism(), alpha, rate_tol, min_pass);
    write_json_file(dir / "report.json", burke_report_to_json(rep));

    summary["status"] = "ok";
    summary["out_dir"] = dir.string();
    summary["pooled_rate"] = rep.pooled_rate;
    summary["ks_pass_fraction"] = rep.ks_pass_fraction;
    summary["pass"] = rep.pass;
    return rep.pass ? 0 : 2;
}

int cmd_stationarity(const Run& run, json& summary) {
    const Environment env = run.environment();
    const double v = run.fugacity();
    const double t = run.number("t");
    const std::size_t replicas = run.replicas(500);
    const double significance = run.number_or("significance", 1e-3);
    const double min_pass = run.number_or("min_pass_fraction", 0.9);
    const fs::path dir = prepare_out_dir(run);
    guard_report(dir / "report.json", run.force());

    const std::vector<StatReport> reports =
        stationarity_test(env, v, t, replicas, run.seed(), run.parallelism(), significance);
    std::size_t passed = 0;
    json sites = json::array();
    for (const auto& r : reports) {
        if (r.pass) ++passed;
        sites.push_back(stat_report_to_json(r));
    }
    const double fraction = static_cast<double>(passed) / static_cast<double>(reports.size());
    const bool pass = fraction >= min_pass;
    write_json_file(dir / "report.json", json{{"v", v},
                                              {"t", t},
                                              {"replicas", replicas},
                                              {"significance", significance},
                                              {"pass_fraction", fraction},
                                              {"pass", pass},
                                              {"sites", std::move(sites)}});

    summary["status"] = "ok";
    summary["out_dir"] = dir.string();
    summary["pass_fraction"] = fraction;
    summary["pass"] = pass;
    return pass ? 0 : 2;
}

int cmd_speed(const Run& run, json& summary) {
    const Environment env = run.environment();
    const double v = run.fugacity();
    const double t = run.number("t");
    const Site start = run.integer_or("start", env.x_lo());
    const std::size_t replicas = run.replicas(200);
    const double tolerance = run.number_or("tolerance", 0.02);
    const double exit_fraction = run.number_or("exit_fraction", 0.01);
    const fs::path dir = prepare_out_dir(run);
    guard_report(dir / "report.json", run.force());

    const SpeedReport rep = speed_experiment(env, v, start, t, replicas, run.seed(),
                                             run.parallelism(), tolerance, exit_fraction);
    write_json_file(dir / "report.json", speed_report_to_json(rep));
    write_speed_csv(dir / "speed.csv", rep);

    summary["status"] = "ok";
    summary["out_dir"] = dir.string();
    summary["estimate"] = rep.report.estimate;
    summary["std_error"] = rep.report.std_error;
    summary["pass"] = rep.report.pass;
    return rep.report.pass ? 0 : 2;
}

int cmd_converge(const Run& run, json& summary) {
    const Environment env = run.environment();
    const double rho0 = run.number("rho0");
    if (!run.cfg.contains("t_grid")) throw ConfigError("/t_grid", "missing key");
    const json& grid = run.cfg.at("t_grid");
    if (!grid.is_array() || grid.empty())
        throw ConfigError("/t_grid", "expected a non-empty array of times");
    std::vector<double> t_grid;
    for (const auto& x : grid) {
        if (!x.is_number()) throw ConfigError("/t_grid", "expected numbers");
        t_grid.push_back(x.get<double>());
    }
    const std::size_t probe =
        static_cast<std::size_t>(std::max<std::int64_t>(1, run.integer_or("probe", 16)));
    const std::size_t replicas = run.replicas(200);

    ConvergenceOptions opt;
    opt.current_tolerance = run.number_or("current_tolerance", opt.current_tolerance);
    opt.tv_threshold = run.number_or("tv_threshold", opt.tv_threshold);
    opt.trend_alpha = run.number_or("trend_alpha", opt.trend_alpha);
    opt.trapped_threshold = run.number_or("trapped_threshold", opt.trapped_threshold);
    opt.decile = run.number_or("decile", opt.decile);
    opt.burn_in = run.number_or("burn_in", opt.burn_in);
    opt.parallelism = run.parallelism();

    const fs::path dir = prepare_out_dir(run);
    guard_report(dir / "report.json", run.force());

    const ConvergenceReport rep =
        convergence_experiment(env, rho0, t_grid, probe, replicas, run.seed(), opt);
    write_json_file(dir / "report.json", convergence_report_to_json(rep));
    write_marginals_csv(dir / "marginals.csv", rep);
    write_tv_csv(dir / "tv.csv", rep);
    write_trapped_csv(dir / "trapped.csv", rep);

    const bool pass = rep.pass_tv && rep.pass_trend && rep.pass_trapped;
    summary["status"] = "ok";
    summary["out_dir"] = dir.string();
    summary["has_plateau"] = rep.has_plateau;
    summary["pass_tv"] = rep.pass_tv;
    summary["pass_trend"] = rep.pass_trend;
    summary["pass_trapped"] = rep.pass_trapped;
    summary["pass"] = pass;
    return pass ? 0 : 2;
}

int cmd_analytics(const Run& run, json& summary) {
    const Environment env = run.environment();
    const double v = run.fugacity();
    summary = json::object();
    summary["R"] = expected_density(env, v);
    summary["Rprime"] = density_slope(env, v);
    summary["gamma"] = second_class_velocity(env, v);
    const CriticalDensity crit = critical_density(env);
    if (crit.is_finite())
        summary["rho_star"] = crit.value();
    else
        summary["rho_star"] = "infinite";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"event-driven simulator and statistics lab for site-disordered "
                 "totally asymmetric zero-range dynamics"};
    app.require_subcommand(1);

    const std::vector<std::string> names = {"simulate",     "couple", "tag",      "burke",
                                            "stationarity", "speed",  "converge", "analytics"};
    const std::vector<std::string> descriptions = {
        "run one trajectory and export snapshots/currents/departures",
        "run two copies under shared clocks and export discrepancies",
        "follow a tagged defect particle and export its path",
        "departure-process test against the Poisson law",
        "per-site invariance test of the product measure",
        "defect speed estimate across replicas",
        "supercritical drain study: relaxation, plateau, trapped mass",
        "print closed-form window analytics as JSON"};
    std::vector<FlagSet> flags(names.size());
    std::vector<CLI::App*> cmds(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        cmds[i] = app.add_subcommand(names[i], descriptions[i]);
        flags[i].attach(cmds[i]);
    }

    json summary = json::object();
    int status = 0;
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);

        std::size_t chosen = names.size();
        for (std::size_t i = 0; i < names.size(); ++i)
            if (cmds[i]->parsed()) chosen = i;
        if (chosen == names.size()) throw CLI::RequiredError("subcommand");

        summary["command"] = names[chosen];
        Run run;
        run.flags = &flags[chosen];
        if (flags[chosen].o_config->count() > 0) {
            const fs::path cfg_path(flags[chosen].config);
            run.cfg = read_json_file(cfg_path);
            if (!run.cfg.is_object()) throw ConfigError("/", "config must be a JSON object");
            run.base_dir = cfg_path.parent_path();
        }

        switch (chosen) {
            case 0: status = cmd_simulate(run, summary); break;
            case 1: status = cmd_couple(run, summary); break;
            case 2: status = cmd_tag(run, summary); break;
            case 3: status = cmd_burke(run, summary); break;
            case 4: status = cmd_stationarity(run, summary); break;
            case 5: status = cmd_speed(run, summary); break;
            case 6: status = cmd_converge(run, summary); break;
            case 7: status = cmd_analytics(run, summary); break;
            default: break;
        }
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help() << std::flush;
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        summary["status"] = "usage_error";
        summary["error"] = e.what();
        std::cout << summary.dump() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << e.what() << "\n";
        summary["status"] = "io_error";
        summary["error"] = e.what();
        std::cout << summary.dump() << "\n";
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << e.what() << "\n";
        summary["status"] = "io_error";
        summary["error"] = e.what();
        std::cout << summary.dump() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        summary["status"] = "error";
        summary["error"] = e.what();
        std::cout << summary.dump() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << e.what() << "\n";
        summary["status"] = "error";
        summary["error"] = e.what();
        std::cout << summary.dump() << "\n";
        return 1;
    }

    std::cout << summary.dump() << "\n";
    return status;
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

}  // namespace zrp
