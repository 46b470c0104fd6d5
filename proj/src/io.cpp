#include "zrp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "zrp/measures.hpp"

namespace zrp {

namespace {

const json& need(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(where, std::string("missing key \"") + key + "\"");
    return j.at(key);
}

double need_number(const json& j, const char* key, const std::string& where) {
    const json& v = need(j, key, where);
    if (!v.is_number()) throw ConfigError(where + "/" + key, "expected a number");
    return v.get<double>();
}

std::int64_t need_int(const json& j, const char* key, const std::string& where) {
    const json& v = need(j, key, where);
    if (!v.is_number_integer()) throw ConfigError(where + "/" + key, "expected an integer");
    return v.get<std::int64_t>();
}

std::string need_string(const json& j, const char* key, const std::string& where) {
    const json& v = need(j, key, where);
    if (!v.is_string()) throw ConfigError(where + "/" + key, "expected a string");
    return v.get<std::string>();
}

}  // namespace

json env_to_json(const Environment& env) {
    return json{{"x_lo", env.x_lo()}, {"floor_c", env.floor_c()}, {"rates", env.rates()}};
}

Environment env_from_json(const json& j, const std::string& where) {
    const json& rates = need(j, "rates", where);
    if (!rates.is_array() || rates.empty())
        throw ConfigError(where + "/rates", "expected a non-empty array");
    std::vector<double> r;
    r.reserve(rates.size());
    for (const auto& x : rates) {
        if (!x.is_number()) throw ConfigError(where + "/rates", "expected numbers");
        r.push_back(x.get<double>());
    }
    const double floor_c = need_number(j, "floor_c", where);
    const Site x_lo = j.contains("x_lo") ? need_int(j, "x_lo", where) : 0;
    try {
        return Environment(x_lo, std::move(r), floor_c);
    } catch (const Error& e) {
        throw ConfigError(where, e.what());
    }
}

json config_to_json(const Configuration& config) {
    return json{{"x_lo", config.x_lo()}, {"occ", config.occupancies()}};
}

Configuration config_from_json(const json& j, const std::string& where) {
    const json& occ = need(j, "occ", where);
    if (!occ.is_array() || occ.empty())
        throw ConfigError(where + "/occ", "expected a non-empty array");
    std::vector<std::int64_t> o;
    o.reserve(occ.size());
    for (const auto& x : occ) {
        if (!x.is_number_integer()) throw ConfigError(where + "/occ", "expected integers");
        o.push_back(x.get<std::int64_t>());
    }
    const Site x_lo = j.contains("x_lo") ? need_int(j, "x_lo", where) : 0;
    try {
        return Configuration(x_lo, std::move(o));
    } catch (const Error& e) {
        throw ConfigError(where, e.what());
    }
}

namespace {

json dist_to_json(const EnvDist& d) {
    switch (d.kind) {
        case EnvDist::Kind::point:
            return json{{"kind", "point"}, {"p", d.lo}};
        case EnvDist::Kind::uniform:
            return json{{"kind", "uniform"}, {"lo", d.lo}, {"hi", d.hi}};
        case EnvDist::Kind::triangular_above_floor:
            return json{
                {"kind", "triangular-above-floor"}, {"lo", d.lo}, {"hi", d.hi}, {"alpha", d.alpha}};
    }
    return {};
}

EnvDist dist_from_json(const json& j, const std::string& where) {
    const std::string kind = need_string(j, "kind", where);
    try {
        if (kind == "point") return EnvDist::point(need_number(j, "p", where));
        if (kind == "uniform")
            return EnvDist::uniform(need_number(j, "lo", where), need_number(j, "hi", where));
        if (kind == "triangular-above-floor")
            return EnvDist::triangular_above_floor(need_number(j, "lo", where),
                                                   need_number(j, "hi", where),
                                                   need_number(j, "alpha", where));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(where, e.what());
    }
    throw ConfigError(where + "/kind", "unknown distribution kind \"" + kind + "\"");
}

}  // namespace

json env_spec_to_json(const EnvSpec& spec) {
    if (spec.kind == EnvSpec::Kind::deterministic)
        return json{{"kind", "deterministic"},
                    {"x_lo", spec.x_lo},
                    {"floor_c", spec.floor_c},
                    {"rates", spec.rates}};
    return json{{"kind", "iid"}, {"dist", dist_to_json(spec.dist)}};
}

EnvSpec env_spec_from_json(const json& j, const std::string& where) {
    const std::string kind = need_string(j, "kind", where);
    if (kind == "deterministic") {
        const Environment env = env_from_json(j, where);
        return EnvSpec::deterministic(env.rates(), env.floor_c(), env.x_lo());
    }
    if (kind == "iid") return EnvSpec::iid(dist_from_json(need(j, "dist", where), where + "/dist"));
    throw ConfigError(where + "/kind", "unknown environment spec kind \"" + kind + "\"");
}

Environment environment_from_source(const json& j, const std::filesystem::path& base_dir,
                                    const std::string& where) {
    if (j.is_object() && j.contains("file")) {
        const std::filesystem::path p = base_dir / need_string(j, "file", where);
        return environment_from_source(read_json_file(p), p.parent_path(), where + "/file");
    }
    if (j.is_object() && j.contains("rates") && !j.contains("kind")) return env_from_json(j, where);
    const std::string kind = need_string(j, "kind", where);
    if (kind == "deterministic") return env_from_json(j, where);
    if (kind == "iid") {
        const EnvSpec spec = env_spec_from_json(j, where);
        const json& w = need(j, "window", where);
        if (!w.is_array() || w.size() != 2 || !w[0].is_number_integer() ||
            !w[1].is_number_integer())
            throw ConfigError(where + "/window", "expected [x_lo, x_hi] integers");
        const std::int64_t seed = need_int(j, "env_seed", where);
        try {
            return sample_iid_env(spec, w[0].get<Site>(), w[1].get<Site>(),
                                  static_cast<std::uint64_t>(seed));
        } catch (const Error& e) {
            throw ConfigError(where, e.what());
        }
    }
    throw ConfigError(where + "/kind", "unknown environment kind \"" + kind + "\"");
}

json boundary_to_json(const BoundarySpec& b) {
    if (b.topology == BoundarySpec::Topology::ring) return json{{"topology", "ring"}};
    json left;
    if (b.left == BoundarySpec::Left::inject)
        left = json{{"inject", b.inject_rate}};
    else
        left = "closed";
    return json{{"topology", "segment"},
                {"left", left},
                {"right", b.right == BoundarySpec::Right::absorb ? "absorb" : "closed"}};
}

BoundarySpec boundary_from_json(const json& j, const std::string& where) {
    const std::string topology =
        j.contains("topology") ? need_string(j, "topology", where) : "segment";
    try {
        if (topology == "ring") return BoundarySpec::ring();
        if (topology != "segment")
            throw ConfigError(where + "/topology", "expected \"segment\" or \"ring\"");
        BoundarySpec b;
        b.topology = BoundarySpec::Topology::segment;
        const json& left = need(j, "left", where);
        if (left.is_string() && left.get<std::string>() == "closed") {
            b.left = BoundarySpec::Left::closed;
        } else if (left.is_object() && left.contains("inject")) {
            b.left = BoundarySpec::Left::inject;
            b.inject_rate = need_number(left, "inject", where + "/left");
        } else {
            throw ConfigError(where + "/left", "expected \"closed\" or {\"inject\": rate}");
        }
        const std::string right = need_string(j, "right", where);
        if (right == "absorb")
            b.right = BoundarySpec::Right::absorb;
        else if (right == "closed")
            b.right = BoundarySpec::Right::closed;
        else
            throw ConfigError(where + "/right", "expected \"absorb\" or \"closed\"");
        b.validate();
        return b;
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(where, e.what());
    }
}

json rate_function_to_json(const RateFunctionSpec& g) {
    if (g.kind == RateFunctionSpec::Kind::indicator) return json{{"kind", "indicator"}};
    return json{{"kind", "bounded-monotone"}, {"table", g.table}, {"cap", g.cap}};
}

RateFunctionSpec rate_function_from_json(const json& j, const std::string& where) {
    const std::string kind = need_string(j, "kind", where);
    if (kind == "indicator") return RateFunctionSpec::indicator();
    if (kind == "bounded-monotone") {
        const json& table = need(j, "table", where);
        if (!table.is_array()) throw ConfigError(where + "/table", "expected an array");
        std::vector<double> t;
        for (const auto& x : table) {
            if (!x.is_number()) throw ConfigError(where + "/table", "expected numbers");
            t.push_back(x.get<double>());
        }
        const double cap = need_number(j, "cap", where);
        try {
            return RateFunctionSpec::bounded_monotone(std::move(t), cap);
        } catch (const Error& e) {
            throw ConfigError(where, e.what());
        }
    }
    throw ConfigError(where + "/kind", "unknown rate function kind \"" + kind + "\"");
}

InitialCondition initial_from_json(const json& j, const std::filesystem::path& base_dir,
                                   const std::string& where) {
    InitialCondition init;
    const std::string kind = need_string(j, "kind", where);
    if (kind == "empty") {
        init.kind = InitialCondition::Kind::empty;
    } else if (kind == "constant") {
        init.kind = InitialCondition::Kind::constant;
        init.value = need_int(j, "value", where);
        if (init.value < 0) throw ConfigError(where + "/value", "occupancy must be >= 0");
    } else if (kind == "product") {
        init.kind = InitialCondition::Kind::product;
        init.v = need_number(j, "v", where);
    } else if (kind == "explicit") {
        init.kind = InitialCondition::Kind::explicit_config;
        if (j.contains("file")) {
            const std::filesystem::path p = base_dir / need_string(j, "file", where);
            init.config = config_from_json(read_json_file(p), where + "/file");
        } else {
            init.config = config_from_json(need(j, "config", where), where + "/config");
        }
    } else {
        throw ConfigError(where + "/kind", "unknown initial condition kind \"" + kind + "\"");
    }
    return init;
}

Configuration make_initial(const InitialCondition& init, const Environment& env,
                           std::uint64_t seed) {
    switch (init.kind) {
        case InitialCondition::Kind::empty:
            return Configuration::constant(env.x_lo(), env.size(), 0);
        case InitialCondition::Kind::constant:
            return Configuration::constant(env.x_lo(), env.size(), init.value);
        case InitialCondition::Kind::product:
            return sample_configuration(ProductGeometric(env, init.v), seed);
        case InitialCondition::Kind::explicit_config:
            return *init.config;
    }
    throw std::logic_error("unreachable");
}

json stat_report_to_json(const StatReport& rep) {
    return json{{"label", rep.label},   {"statistic", rep.statistic}, {"p_value", rep.p_value},
                {"estimate", rep.estimate}, {"std_error", rep.std_error}, {"n", rep.n},
                {"pass", rep.pass}};
}

json burke_report_to_json(const BurkeReport& rep) {
    json per_seed = json::array();
    for (const auto& r : rep.per_seed) per_seed.push_back(stat_report_to_json(r));
    return json{{"v", rep.v},
                {"window_start", rep.window_start},
                {"t_max", rep.t_max},
                {"pooled_rate", rep.pooled_rate},
                {"pooled_se", rep.pooled_se},
                {"ks_pass_fraction", rep.ks_pass_fraction},
                {"rate_ok", rep.rate_ok},
                {"ks_ok", rep.ks_ok},
                {"pass", rep.pass},
                {"per_seed", std::move(per_seed)}};
}

json speed_report_to_json(const SpeedReport& rep) {
    json j{{"report", stat_report_to_json(rep.report)},
           {"homogeneous", rep.homogeneous},
           {"t", rep.t},
           {"start", rep.start},
           {"exits", rep.exits},
           {"replicas", rep.final_positions.size()}};
    if (std::isnan(rep.target))
        j["target"] = nullptr;
    else
        j["target"] = rep.target;
    return j;
}

json convergence_report_to_json(const ConvergenceReport& rep) {
    json j{{"c_hat", rep.c_hat},
           {"rho_star", rep.rho_star},
           {"replicas", rep.replicas},
           {"times", rep.times},
           {"probe_sites", rep.probe_sites},
           {"reference_ratio", rep.reference_ratio},
           {"entry_current", rep.entry_current},
           {"trapped_fraction", rep.trapped_fraction},
           {"spearman_rho", rep.spearman_rho},
           {"spearman_p", rep.spearman_p},
           {"has_plateau", rep.has_plateau},
           {"pass_tv", rep.pass_tv},
           {"pass_trend", rep.pass_trend},
           {"pass_trapped", rep.pass_trapped},
           {"pass_domination", rep.pass_domination},
           {"pass", rep.pass_tv && rep.pass_trend && rep.pass_trapped},
           {"note",
            rep.note.empty()
                ? "finite-window surrogate: plateau window emulates the long-time limit"
                : rep.note}};
    json plateau = json::array();
    for (std::size_t i = 0; i < rep.in_plateau.size(); ++i)
        plateau.push_back(static_cast<bool>(rep.in_plateau[i]));
    j["in_plateau"] = std::move(plateau);
    if (rep.has_plateau) {
        j["plateau_begin_time"] = rep.times[rep.plateau_begin];
        j["plateau_end_time"] = rep.times[rep.plateau_end];
    }
    // tv matrix with NaN -> null for valid JSON
    json tv = json::array();
    for (const auto& row : rep.tv) {
        json r = json::array();
        for (double x : row) {
            if (std::isnan(x))
                r.push_back(nullptr);
            else
                r.push_back(x);
        }
        tv.push_back(std::move(r));
    }
    j["tv"] = std::move(tv);
    j["site_mean"] = rep.site_mean;
    j["site_se"] = rep.site_se;
    return j;
}

json domination_report_to_json(const DominationReport& rep) {
    json sites = json::array();
    for (const auto& r : rep.sites) sites.push_back(stat_report_to_json(r));
    return json{{"c_hat", rep.c_hat},
                {"t_eval", rep.t_eval},
                {"entry_current", rep.entry_current},
                {"pass", rep.pass},
                {"sites", std::move(sites)}};
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path.string(), e.what());
    }
    return j;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed for " + path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace {

std::string fmt(double x) { return format_double(x); }

}  // namespace

void write_snapshots_csv(const std::filesystem::path& path, const SimResult& result) {
    std::ostringstream out;
    out << "time,site,occupancy\n";
    for (const Snapshot& s : result.snapshots) {
        for (Site x = s.state.x_lo(); x <= s.state.x_hi(); ++x)
            out << fmt(s.time) << "," << x << "," << s.state.at(x) << "\n";
    }
    write_text_file(path, out.str());
}

void write_departures_csv(const std::filesystem::path& path, const SimResult& result) {
    std::ostringstream out;
    out << "index,time\n";
    for (std::size_t i = 0; i < result.departures.size(); ++i)
        out << i << "," << fmt(result.departures[i]) << "\n";
    write_text_file(path, out.str());
}

void write_currents_csv(const std::filesystem::path& path, const SimResult& result) {
    std::ostringstream out;
    out << "bond,count\n";
    for (std::size_t i = 0; i < result.bond_counts.size(); ++i)
        out << result.bond_lo + static_cast<Site>(i) << "," << result.bond_counts[i] << "\n";
    write_text_file(path, out.str());
}

void write_discrepancies_csv(const std::filesystem::path& path, const CoupledResult& result) {
    std::ostringstream out;
    out << "time,site,pos_count,neg_count\n";
    for (const CoupledSnapshot& s : result.snapshots) {
        const DiscrepancyProfile& d = s.discrepancies;
        for (std::size_t i = 0; i < d.eta_over_xi.size(); ++i)
            out << fmt(s.time) << "," << d.x_lo + static_cast<Site>(i) << "," << d.eta_over_xi[i]
                << "," << d.xi_over_eta[i] << "\n";
    }
    write_text_file(path, out.str());
}

void write_tag_path_csv(const std::filesystem::path& path, const TagPath& path_data) {
    std::ostringstream out;
    out << "time,position\n";
    for (std::size_t i = 0; i < path_data.times.size(); ++i)
        out << fmt(path_data.times[i]) << "," << path_data.positions[i] << "\n";
    write_text_file(path, out.str());
}

void write_marginals_csv(const std::filesystem::path& path, const ConvergenceReport& rep) {
    std::ostringstream out;
    out << "time,site,k,empirical_prob,reference_prob\n";
    const double n = static_cast<double>(rep.replicas);
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        for (std::size_t j = 0; j < rep.probe_sites.size(); ++j) {
            const auto& hist = rep.histograms[i][j];
            const double r = rep.reference_ratio[j];
            double ref = r < 1.0 ? 1.0 - r : std::nan("");
            for (std::size_t k = 0; k < hist.size(); ++k) {
                out << fmt(rep.times[i]) << "," << rep.probe_sites[j] << "," << k << ","
                    << fmt(static_cast<double>(hist[k]) / n) << "," << fmt(ref) << "\n";
                ref *= r;
            }
        }
    }
    write_text_file(path, out.str());
}

void write_tv_csv(const std::filesystem::path& path, const ConvergenceReport& rep) {
    std::ostringstream out;
    out << "time,site,distance\n";
    for (std::size_t i = 0; i < rep.times.size(); ++i)
        for (std::size_t j = 0; j < rep.probe_sites.size(); ++j)
            out << fmt(rep.times[i]) << "," << rep.probe_sites[j] << "," << fmt(rep.tv[i][j])
                << "\n";
    write_text_file(path, out.str());
}

void write_trapped_csv(const std::filesystem::path& path, const ConvergenceReport& rep) {
    std::ostringstream out;
    out << "rate_rank,mass_fraction\n";
    for (std::size_t q = 0; q < rep.trapped_profile.size(); ++q)
        out << q << "," << fmt(rep.trapped_profile[q]) << "\n";
    write_text_file(path, out.str());
}

void write_speed_csv(const std::filesystem::path& path, const SpeedReport& rep) {
    std::ostringstream out;
    out << "replica,X_t,t\n";
    for (std::size_t r = 0; r < rep.final_positions.size(); ++r)
        out << r << "," << rep.final_positions[r] << "," << fmt(rep.t) << "\n";
    write_text_file(path, out.str());
}

}  // namespace zrp
