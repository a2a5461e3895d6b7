#include "fcir/runner.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <sstream>

#include "fcir/csv.hpp"
#include "fcir/montecarlo.hpp"
#include "fcir/sde.hpp"
#include "fcir/stratonovich.hpp"

#ifndef FCIR_VERSION
#define FCIR_VERSION "0.0.0"
#endif

namespace fcir {

namespace fs = std::filesystem;
using nlohmann::json;

std::string artifact_version() { return FCIR_VERSION; }

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest init failed");
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0 &&
            EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount())) != 1)
            throw std::runtime_error("sha256: digest update failed");
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
        throw std::runtime_error("sha256: digest final failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    for (unsigned i = 0; i < len; ++i) {
        hex.push_back(kHex[md[i] >> 4]);
        hex.push_back(kHex[md[i] & 0xF]);
    }
    return hex;
}

namespace {

json config_json(const ExperimentConfig& c) {
    json j;
    j["command"] = to_string(c.command);
    j["seed"] = c.seed;
    j["output"] = c.output;
    const auto needs = [&](std::initializer_list<Command> cmds) {
        return std::find(cmds.begin(), cmds.end(), c.command) != cmds.end();
    };
    using enum Command;
    if (needs({fbm, simulate, ensemble, hitprob, sweep, verify})) {
        j["hurst"] = c.hurst.size() == 1 ? json(c.hurst.front()) : json(c.hurst);
        j["fbm_method"] = to_string(c.fbm_method);
    }
    j["horizon"] = c.horizon;
    if (needs({fbm, simulate, ensemble, hitprob, sweep})) j["dt"] = c.dt;
    if (needs({simulate, ensemble, hitprob, sweep, verify})) {
        j["sigma"] = c.sigma;
        j["z0"] = c.z0;
    }
    if (needs({ensemble, hitprob, sweep, verify})) j["n_paths"] = c.n_paths;
    if (c.command == simulate) {
        j["solver"] = c.solver;
        if (c.solver == "picard") {
            j["level"] = c.level;
            j["tol"] = c.tol;
            j["max_iter"] = c.max_iter;
        }
    }
    if (c.command == sweep) {
        j["ks"] = c.ks;
        j["coupled"] = c.coupled;
    }
    if (c.command == verify) j["dts"] = c.dts;
    if (c.command == conditions) {
        if (c.sigma > 0.0) j["sigma"] = c.sigma;
        j["t_res"] = c.t_res;
        j["x_res"] = c.x_res;
        if (c.x_max) j["x_max"] = *c.x_max;
    }
    if (c.drift) {
        json d;
        d["name"] = c.drift->name;
        for (const auto& [k, v] : c.drift->params) d[k] = v;
        for (const auto& [k, v] : c.drift->tables) d[k] = v;
        j["drift"] = d;
    }
    return j;
}

EnsembleConfig ensemble_config(const ExperimentConfig& c, double hurst, const DriftSpec& spec) {
    return EnsembleConfig{c.n_paths, c.seed, TimeGrid::from_horizon(c.horizon, c.dt), spec,
                          c.sigma, c.z0, Hurst(hurst), c.fbm_method};
}

// Tracks files created by one run so a failure can roll them back.
class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
    ~OutputSet() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& f : files_) fs::remove(dir_ / f, ec);
    }

    template <class Fn>
    void write(const std::string& name, Fn&& fn) {
        auto out = csv::open_output(dir_ / name);
        files_.push_back(name);
        fn(out);
        out.flush();
        if (!out) throw std::runtime_error("failed writing " + (dir_ / name).string());
    }

    const std::vector<std::string>& files() const noexcept { return files_; }
    const fs::path& dir() const noexcept { return dir_; }
    void commit() noexcept { committed_ = true; }

private:
    fs::path dir_;
    std::vector<std::string> files_;
    bool committed_ = false;
};

void run_command(const ExperimentConfig& c, OutputSet& out, unsigned workers) {
    const std::string& stem = c.output;
    switch (c.command) {
        case Command::fbm: {
            const FbmSampler sampler(c.fbm_method, TimeGrid::from_horizon(c.horizon, c.dt),
                                     Hurst(c.hurst.front()));
            const auto path = sampler.sample(path_seed(c.seed, 0));
            out.write(stem + ".csv", [&](std::ostream& os) { csv::write_fbm(os, path); });
            break;
        }
        case Command::simulate: {
            const auto spec = make_drift(c);
            const FbmSampler sampler(c.fbm_method, TimeGrid::from_horizon(c.horizon, c.dt),
                                     Hurst(c.hurst.front()));
            auto driver = std::make_shared<const FbmPath>(sampler.sample(path_seed(c.seed, 0)));
            if (c.solver == "picard") {
                const auto res = picard_solve(spec, c.sigma, c.z0, driver, c.level, c.tol, c.max_iter);
                out.write(stem + ".csv", [&](std::ostream& os) { csv::write_sde(os, res.path); });
            } else {
                const auto path = euler_maruyama(spec, c.sigma, c.z0, driver);
                out.write(stem + ".csv", [&](std::ostream& os) { csv::write_sde(os, path); });
            }
            break;
        }
        case Command::ensemble: {
            const auto spec = make_drift(c);
            const auto stats = run_ensemble(ensemble_config(c, c.hurst.front(), spec), workers);
            out.write(stem + "_stats.csv", [&](std::ostream& os) { csv::write_stats(os, stats); });
            const std::vector<csv::HitProbRow> rows{
                {c.hurst.front(), {stats.n_paths, stats.hit_count, stats.p_hat, stats.ci95}}};
            out.write(stem + "_hitprob.csv", [&](std::ostream& os) { csv::write_hitprob(os, rows); });
            break;
        }
        case Command::hitprob: {
            const auto spec = make_drift(c);
            std::vector<csv::HitProbRow> rows;
            for (double h : c.hurst)
                rows.push_back({h, hitting_probability(ensemble_config(c, h, spec), workers)});
            out.write(stem + "_hitprob.csv", [&](std::ostream& os) { csv::write_hitprob(os, rows); });
            break;
        }
        case Command::sweep: {
            const double a = c.drift->params.at("a");
            // The base drift only carries the grid/noise setup; each row swaps in f_k.
            const auto base_spec = builtin("level_sequence", {{"k", c.ks.front()}, {"a", a}});
            const auto result = drift_sweep(ensemble_config(c, c.hurst.front(), base_spec), c.ks, a,
                                            c.coupled, workers);
            std::vector<csv::HitProbRow> rows;
            for (const auto& r : result.rows) rows.push_back({r.k, r.estimate});
            out.write(stem + "_hitprob.csv", [&](std::ostream& os) { csv::write_hitprob(os, rows); });
            break;
        }
        case Command::verify: {
            const auto spec = make_drift(c);
            EnsembleConfig base{c.n_paths,
                                c.seed,
                                TimeGrid::from_horizon(c.horizon, c.dts.front()),
                                spec,
                                c.sigma,
                                c.z0,
                                Hurst(c.hurst.front()),
                                c.fbm_method};
            const auto study = convergence_study(base, c.dts, c.n_paths, workers);
            std::vector<csv::ResidualRow> rows;
            for (std::size_t j = 0; j < study.rows.size(); ++j)
                for (std::size_t i = 0; i < study.reports[j].size(); ++i)
                    if (const auto& r = study.reports[j][i])
                        rows.push_back({c.hurst.front(), study.rows[j].dt, i, *r});
            out.write(stem + "_residuals.csv",
                      [&](std::ostream& os) { csv::write_residuals(os, rows); });
            out.write(stem + "_convergence.csv", [&](std::ostream& os) {
                csv::Writer w(os);
                w.header({"h", "dt", "median_sup_residual", "n_used", "diagnostic"});
                for (const auto& r : study.rows)
                    w.field(c.hurst.front())
                        .field(r.dt)
                        .field(r.median_sup_residual)
                        .field(r.n_used)
                        .field(r.diagnostic ? std::string_view("true") : std::string_view("false"))
                        .end_row();
            });
            break;
        }
        case Command::conditions: {
            const auto spec = make_drift(c);
            const double x_max = c.x_max.value_or(10.0 * spec.x_star());
            const auto report = check_conditions(spec, c.horizon, c.t_res, c.x_res, x_max);
            out.write(stem + "_conditions.csv",
                      [&](std::ostream& os) { csv::write_conditions(os, spec, report); });
            break;
        }
    }
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config) { return config_json(config).dump(2); }

RunManifest run(const ExperimentConfig& config, const fs::path& out_dir, unsigned workers) {
    const auto start = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);
    OutputSet out(out_dir);

    run_command(config, out, workers);

    RunManifest manifest;
    manifest.version = artifact_version();
    manifest.resolved_config = config_to_json(config);
    manifest.workers = resolve_workers(workers);
    for (const auto& f : out.files()) {
        const auto p = out_dir / f;
        if (!fs::exists(p) || fs::file_size(p) == 0)
            throw std::runtime_error("output " + p.string() + " missing or empty");
        manifest.outputs.push_back({f, sha256_file(p)});
    }
    manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json j;
    j["artifact"] = "gfcir";
    j["version"] = manifest.version;
    j["config"] = config_json(config);
    j["workers"] = manifest.workers;
    j["wall_clock_seconds"] = manifest.wall_clock_seconds;
    j["outputs"] = json::array();
    for (const auto& o : manifest.outputs) j["outputs"].push_back({{"file", o.file}, {"sha256", o.sha256}});

    const std::string manifest_name = config.output + ".manifest.json";
    out.write(manifest_name, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    manifest.manifest_path = out_dir / manifest_name;
    out.commit();
    return manifest;
}

ManifestCheck verify_manifest(const fs::path& manifest_path) {
    ManifestCheck check;
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) {
        check.ok = false;
        check.problems.push_back("cannot read manifest " + manifest_path.string());
        return check;
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        check.ok = false;
        check.problems.push_back(std::string("malformed manifest: ") + e.what());
        return check;
    }
    const auto dir = manifest_path.parent_path();
    for (const auto& o : j.value("outputs", json::array())) {
        const auto file = o.at("file").get<std::string>();
        const auto expected = o.at("sha256").get<std::string>();
        const auto p = dir / file;
        if (!fs::exists(p)) {
            check.ok = false;
            check.problems.push_back(file + ": missing");
            continue;
        }
        const auto actual = sha256_file(p);
        if (actual != expected) {
            check.ok = false;
            check.problems.push_back(file + ": digest " + actual + " != recorded " + expected);
        }
    }
    return check;
}

}  // namespace fcir
