#include "fcir/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace fcir {

const char* to_string(Command c) noexcept {
    switch (c) {
        case Command::fbm: return "fbm";
        case Command::simulate: return "simulate";
        case Command::ensemble: return "ensemble";
        case Command::hitprob: return "hitprob";
        case Command::sweep: return "sweep";
        case Command::verify: return "verify";
        case Command::conditions: return "conditions";
    }
    return "?";
}

ConfigError::ConfigError(std::string message, std::optional<int> line, std::string key)
    : std::runtime_error(line ? "line " + std::to_string(*line) + ": " + message : message),
      line_(line), key_(std::move(key)) {}

namespace {

struct Schema {
    std::set<std::string, std::less<>> required;
    std::set<std::string, std::less<>> optional;
};

const Schema& schema_for(Command c) {
    static const std::map<Command, Schema> schemas = [] {
        std::map<Command, Schema> m;
        const std::set<std::string, std::less<>> common{"command", "seed", "output"};
        auto make = [&](std::set<std::string, std::less<>> req,
                        std::set<std::string, std::less<>> opt) {
            opt.insert(common.begin(), common.end());
            return Schema{std::move(req), std::move(opt)};
        };
        m[Command::fbm] = make({"hurst", "horizon", "dt"}, {"fbm_method"});
        m[Command::simulate] = make({"hurst", "horizon", "dt", "sigma", "z0", "drift"},
                                    {"fbm_method", "solver", "level", "tol", "max_iter"});
        m[Command::ensemble] =
            make({"hurst", "horizon", "dt", "sigma", "z0", "drift"}, {"fbm_method", "n_paths"});
        m[Command::hitprob] = m[Command::ensemble];
        m[Command::sweep] = make({"hurst", "horizon", "dt", "sigma", "z0", "drift", "ks"},
                                 {"fbm_method", "n_paths", "coupled"});
        m[Command::verify] = make({"hurst", "horizon", "dts", "sigma", "z0", "drift"},
                                  {"fbm_method", "n_paths"});
        m[Command::conditions] = make({"drift", "horizon"}, {"sigma", "t_res", "x_res", "x_max"});
        return m;
    }();
    return schemas.at(c);
}

int line_of(const YAML::Node& node) {
    const auto mark = node.Mark();
    return mark.is_null() ? 0 : mark.line + 1;
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& key, const std::string& msg) {
    const int line = line_of(node);
    throw ConfigError("'" + key + "' " + msg, line > 0 ? std::optional<int>(line) : std::nullopt,
                      key);
}

template <class T>
T scalar_as(const YAML::Node& node, const std::string& key, const char* expected) {
    if (!node.IsScalar()) fail(node, key, std::string("must be ") + expected);
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        fail(node, key, std::string("must be ") + expected);
    }
}

double get_double(const YAML::Node& node, const std::string& key) {
    const double v = scalar_as<double>(node, key, "a number");
    if (!std::isfinite(v)) fail(node, key, "must be finite");
    return v;
}

double get_positive(const YAML::Node& node, const std::string& key) {
    const double v = get_double(node, key);
    if (!(v > 0.0)) fail(node, key, "must be in (0, inf), got " + node.as<std::string>());
    return v;
}

std::vector<double> get_list(const YAML::Node& node, const std::string& key) {
    if (!node.IsSequence() || node.size() == 0) fail(node, key, "must be a non-empty list");
    std::vector<double> out;
    for (const auto& item : node) out.push_back(get_double(item, key));
    return out;
}

std::string get_string(const YAML::Node& node, const std::string& key) {
    return scalar_as<std::string>(node, key, "a string");
}

long long get_integer(const YAML::Node& node, const std::string& key, long long lo) {
    const auto v = scalar_as<long long>(node, key, "an integer");
    if (v < lo) fail(node, key, "must be >= " + std::to_string(lo));
    return v;
}

Command parse_command(const YAML::Node& node) {
    const auto name = get_string(node, "command");
    static const std::map<std::string, Command, std::less<>> names{
        {"fbm", Command::fbm},         {"simulate", Command::simulate},
        {"ensemble", Command::ensemble}, {"hitprob", Command::hitprob},
        {"sweep", Command::sweep},     {"verify", Command::verify},
        {"conditions", Command::conditions}};
    const auto it = names.find(name);
    if (it == names.end())
        fail(node, "command",
             "must be one of fbm|simulate|ensemble|hitprob|sweep|verify|conditions, got '" + name +
                 "'");
    return it->second;
}

DriftConfig parse_drift(const YAML::Node& node) {
    if (!node.IsMap()) fail(node, "drift", "must be a section with at least 'name'");
    DriftConfig drift;
    bool has_name = false;
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        const std::string full = "drift." + key;
        if (key == "name") {
            drift.name = get_string(kv.second, full);
            has_name = true;
        } else if (kv.second.IsSequence()) {
            drift.tables[key] = get_list(kv.second, full);
        } else {
            drift.params[key] = get_double(kv.second, full);
        }
    }
    if (!has_name) fail(node, "drift.name", "is required");
    const auto& names = builtin_names();
    if (std::find(names.begin(), names.end(), drift.name) == names.end())
        fail(node["name"], "drift.name", "names an unknown drift family '" + drift.name + "'");
    return drift;
}

void check_strict_order(const YAML::Node& node, const std::string& key,
                        const std::vector<double>& v, bool increasing) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0)) fail(node, key, "entries must be > 0");
        if (i > 0 && (increasing ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1])))
            fail(node, key, increasing ? "must be strictly increasing" : "must be strictly decreasing");
    }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ConfigError("syntax error: " + e.msg,
                          e.mark.is_null() ? std::nullopt : std::optional<int>(e.mark.line + 1));
    }
    if (!root.IsMap()) throw ConfigError("config must be a mapping of keys to values");

    const auto cmd_node = root["command"];
    if (!cmd_node) throw ConfigError("'command' is required", std::nullopt, "command");

    ExperimentConfig cfg;
    cfg.command = parse_command(cmd_node);
    const auto& schema = schema_for(cfg.command);

    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (!schema.required.contains(key) && !schema.optional.contains(key))
            fail(kv.first, key,
                 std::string("is not a valid key for command '") + to_string(cfg.command) + "'");
    }
    for (const auto& key : schema.required)
        if (!root[key]) throw ConfigError("'" + key + "' is required for command '" +
                                              to_string(cfg.command) + "'",
                                          std::nullopt, key);

    cfg.output = root["output"] ? get_string(root["output"], "output") : to_string(cfg.command);
    if (cfg.output.empty() || cfg.output.find('/') != std::string::npos)
        fail(root["output"], "output", "must be a plain file stem");
    if (const auto n = root["seed"]) cfg.seed = scalar_as<std::uint64_t>(n, "seed", "a u64");
    if (const auto n = root["fbm_method"]) {
        const auto name = get_string(n, "fbm_method");
        if (name != "cholesky" && name != "circulant")
            fail(n, "fbm_method", "must be cholesky|circulant, got '" + name + "'");
        cfg.fbm_method = parse_fbm_method(name);
    }

    if (const auto n = root["hurst"]) {
        if (n.IsSequence()) {
            if (cfg.command != Command::hitprob) fail(n, "hurst", "takes a list only for hitprob");
            cfg.hurst = get_list(n, "hurst");
        } else {
            cfg.hurst = {get_double(n, "hurst")};
        }
        for (double h : cfg.hurst)
            if (!(h > 0.0 && h < 1.0))
                fail(n, "hurst", "must be in (0, 1), got " + n.as<std::string>(""));
    }

    if (const auto n = root["horizon"]) cfg.horizon = get_positive(n, "horizon");
    if (const auto n = root["dt"]) {
        cfg.dt = get_positive(n, "dt");
        try {
            (void)TimeGrid::from_horizon(cfg.horizon, cfg.dt);
        } catch (const std::invalid_argument& e) {
            fail(n, "dt", std::string("must divide horizon: ") + e.what());
        }
    }
    if (const auto n = root["dts"]) {
        cfg.dts = get_list(n, "dts");
        check_strict_order(n, "dts", cfg.dts, false);
        for (double dt : cfg.dts) try {
                (void)TimeGrid::from_horizon(cfg.horizon, dt);
            } catch (const std::invalid_argument& e) {
                fail(n, "dts", std::string("every entry must divide horizon: ") + e.what());
            }
    }
    if (const auto n = root["sigma"]) cfg.sigma = get_positive(n, "sigma");
    if (const auto n = root["z0"]) cfg.z0 = get_positive(n, "z0");
    if (const auto n = root["n_paths"])
        cfg.n_paths = static_cast<std::size_t>(get_integer(n, "n_paths", 1));

    if (const auto n = root["solver"]) {
        cfg.solver = get_string(n, "solver");
        if (cfg.solver != "euler" && cfg.solver != "picard")
            fail(n, "solver", "must be euler|picard, got '" + cfg.solver + "'");
    }
    cfg.level = 0.1 * cfg.z0;
    if (const auto n = root["level"]) {
        cfg.level = get_positive(n, "level");
        if (!(cfg.level < cfg.z0)) fail(n, "level", "must be in (0, z0)");
    }
    if (const auto n = root["tol"]) cfg.tol = get_positive(n, "tol");
    if (const auto n = root["max_iter"])
        cfg.max_iter = static_cast<int>(get_integer(n, "max_iter", 1));

    if (const auto n = root["ks"]) {
        cfg.ks = get_list(n, "ks");
        check_strict_order(n, "ks", cfg.ks, true);
    }
    if (const auto n = root["coupled"]) cfg.coupled = scalar_as<bool>(n, "coupled", "true|false");

    if (const auto n = root["t_res"]) cfg.t_res = static_cast<int>(get_integer(n, "t_res", 16));
    if (const auto n = root["x_res"]) cfg.x_res = static_cast<int>(get_integer(n, "x_res", 16));
    if (const auto n = root["x_max"]) cfg.x_max = get_positive(n, "x_max");

    if (const auto n = root["drift"]) {
        cfg.drift = parse_drift(n);
        if (cfg.command == Command::sweep) {
            if (cfg.drift->name != "level_sequence")
                fail(n["name"], "drift.name", "must be level_sequence for sweep");
            if (cfg.drift->params.contains("k"))
                fail(n["k"], "drift.k", "is set per row by 'ks' in a sweep");
            const auto a = cfg.drift->params.find("a");
            if (a == cfg.drift->params.end() || !(a->second > 0.0))
                fail(n, "drift.a", "is required and must be > 0");
            if (cfg.drift->params.size() != 1 || !cfg.drift->tables.empty())
                fail(n, "drift", "accepts only 'a' besides 'name' in a sweep");
        } else {
            try {
                const auto spec = make_drift(cfg);
                if (cfg.x_max && !(*cfg.x_max > spec.x_star()))
                    fail(root["x_max"], "x_max", "must exceed the drift's x_star");
            } catch (const ConfigError&) {
                throw;
            } catch (const std::invalid_argument& e) {
                fail(n, "drift", e.what());
            }
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

DriftSpec make_drift(const ExperimentConfig& config) {
    if (!config.drift) throw ConfigError("'drift' is required", std::nullopt, "drift");
    const auto& d = *config.drift;
    ParamMap params = d.params;
    if (d.name == "illustration1" || d.name == "illustration2") {
        if (params.contains("sigma"))
            throw std::invalid_argument("sigma is taken from the top-level 'sigma' key");
        if (!(config.sigma > 0.0))
            throw std::invalid_argument("drift '" + d.name + "' needs the top-level 'sigma'");
        params["sigma"] = config.sigma;
    }
    if (d.name == "extended_cir" && !d.tables.empty()) {
        auto curve = [&](const std::string& stem) {
            const auto knots = d.tables.find(stem + "_knots");
            const auto values = d.tables.find(stem + "_values");
            const auto scalar = params.find(stem);
            if (knots != d.tables.end() || values != d.tables.end()) {
                if (knots == d.tables.end() || values == d.tables.end())
                    throw std::invalid_argument(stem + "_knots and " + stem +
                                                "_values must be given together");
                if (scalar != params.end())
                    throw std::invalid_argument("give either " + stem + " or its table, not both");
                return Curve::piecewise_linear(knots->second, values->second);
            }
            if (scalar == params.end())
                throw std::invalid_argument("drift 'extended_cir': missing parameter '" + stem + "'");
            return Curve::constant(scalar->second);
        };
        for (const auto& [key, _] : d.tables)
            if (key != "theta_knots" && key != "theta_values" && key != "mu_knots" &&
                key != "mu_values")
                throw std::invalid_argument("drift 'extended_cir': unknown table '" + key + "'");
        for (const auto& [key, _] : params)
            if (key != "theta" && key != "mu")
                throw std::invalid_argument("drift 'extended_cir': unknown parameter '" + key + "'");
        return extended_cir(curve("theta"), curve("mu"), config.horizon);
    }
    if (!d.tables.empty())
        throw std::invalid_argument("drift '" + d.name + "' takes no list-valued parameters");
    return builtin(d.name, params, config.horizon);
}

}  // namespace fcir
