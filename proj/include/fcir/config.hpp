#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fcir/drift.hpp"
#include "fcir/fbm.hpp"

namespace fcir {

/// Experiment description read from a YAML document of flat keys plus one
/// `drift:` section. Example:
///
///   command: ensemble
///   hurst: 0.6
///   sigma: 0.4
///   z0: 1
///   horizon: 10
///   dt: 0.001
///   n_paths: 1000
///   seed: 41
///   drift:
///     name: illustration1
///     theta: 1
///     c: 2
///
/// Unknown keys are errors. See README for the per-command key tables.
enum class Command { fbm, simulate, ensemble, hitprob, sweep, verify, conditions };

const char* to_string(Command c) noexcept;

/// Syntax or schema problem. line is 1-based when known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string message, std::optional<int> line = std::nullopt,
                std::string key = {});
    const std::optional<int>& line() const noexcept { return line_; }
    const std::string& key() const noexcept { return key_; }

private:
    std::optional<int> line_;
    std::string key_;
};

struct DriftConfig {
    std::string name;
    ParamMap params;
    /// extended_cir tables: theta_knots, theta_values, mu_knots, mu_values.
    std::map<std::string, std::vector<double>, std::less<>> tables;
};

struct ExperimentConfig {
    Command command = Command::fbm;
    std::vector<double> hurst;  // several values only for hitprob
    double sigma = 0.0;
    double z0 = 0.0;
    double horizon = 0.0;
    double dt = 0.0;
    std::size_t n_paths = 1000;
    std::uint64_t seed = 0;
    FbmMethod fbm_method = FbmMethod::circulant;
    std::optional<DriftConfig> drift;
    std::string output;

    // simulate
    std::string solver = "euler";
    double level = 0.0;  // defaults to 0.1 * z0
    double tol = 1e-8;
    int max_iter = 200;

    // sweep
    std::vector<double> ks;
    bool coupled = true;

    // verify
    std::vector<double> dts;

    // conditions
    int t_res = 256;
    int x_res = 256;
    std::optional<double> x_max;  // defaults to 10 * x_star
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Builds the drift named in the config. Families with a sigma parameter
/// take it from the top-level `sigma`.
DriftSpec make_drift(const ExperimentConfig& config);

}  // namespace fcir
