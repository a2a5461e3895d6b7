#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>
#include <string>

#include "fcir/config.hpp"
#include "fcir/runner.hpp"

using namespace fcir;
namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;

namespace {

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("fcir-test-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig small_ensemble() {
    return parse_config(R"(command: ensemble
hurst: 0.6
sigma: 0.4
z0: 1
horizon: 1
dt: 0.01
n_paths: 50
seed: 41
output: small
drift:
  name: illustration1
  theta: 1
  c: 2
)");
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(FCIR_GFCIR_EXE) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("sha256 of known inputs", "[runner]") {
    TempDir dir;
    std::ofstream(dir.path() / "empty", std::ios::binary).close();
    CHECK(sha256_file(dir.path() / "empty") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    std::ofstream(dir.path() / "abc", std::ios::binary) << "abc";
    CHECK(sha256_file(dir.path() / "abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("ensemble run writes CSVs and a manifest", "[runner]") {
    TempDir dir;
    const auto m = run(small_ensemble(), dir.path(), 1);
    REQUIRE(m.outputs.size() == 2);
    CHECK(m.outputs[0].file == "small_stats.csv");
    CHECK(m.outputs[1].file == "small_hitprob.csv");
    CHECK(m.manifest_path == dir.path() / "small.manifest.json");

    const auto stats = slurp(dir.path() / "small_stats.csv");
    CHECK(stats.rfind("t,mean_x,var_x,q05,q50,q95,alive_fraction\n", 0) == 0);
    CHECK(stats.find('\r') == std::string::npos);
    const auto hit = slurp(dir.path() / "small_hitprob.csv");
    CHECK(hit.rfind("param,n_paths,hits,p_hat,ci_low,ci_high\n0.59999999999999998,50,0,0,0,", 0) == 0);

    const auto j = nlohmann::json::parse(slurp(m.manifest_path));
    CHECK(j["artifact"] == "gfcir");
    CHECK(j["version"] == artifact_version());
    CHECK(j["config"]["seed"] == 41);
    CHECK(j["config"]["drift"]["name"] == "illustration1");
    CHECK(j["outputs"].size() == 2);
    CHECK(j["outputs"][0]["sha256"] == m.outputs[0].sha256);
    CHECK(verify_manifest(m.manifest_path).ok);
}

TEST_CASE("repeated runs are byte-identical", "[runner][determinism]") {
    TempDir a, b;
    const auto ma = run(small_ensemble(), a.path(), 1);
    const auto mb = run(small_ensemble(), b.path(), 4);
    REQUIRE(ma.outputs.size() == mb.outputs.size());
    for (std::size_t i = 0; i < ma.outputs.size(); ++i) {
        CHECK(ma.outputs[i].sha256 == mb.outputs[i].sha256);
        CHECK(slurp(a.path() / ma.outputs[i].file) == slurp(b.path() / mb.outputs[i].file));
    }
}

TEST_CASE("manifest check notices tampering", "[runner]") {
    TempDir dir;
    const auto m = run(small_ensemble(), dir.path(), 1);
    std::ofstream(dir.path() / "small_stats.csv", std::ios::app) << "0,0,0,0,0,0,0\n";
    const auto check = verify_manifest(m.manifest_path);
    CHECK_FALSE(check.ok);
    REQUIRE(check.problems.size() == 1);
    CHECK_THAT(check.problems[0], ContainsSubstring("small_stats.csv"));

    fs::remove(dir.path() / "small_hitprob.csv");
    CHECK(verify_manifest(m.manifest_path).problems.size() == 2);
    CHECK_FALSE(verify_manifest(dir.path() / "missing.json").ok);
}

TEST_CASE("a failed run leaves no partial outputs", "[runner]") {
    TempDir dir;
    // A directory squatting on the second output name makes that write fail
    // after the first CSV is already on disk.
    fs::create_directory(dir.path() / "small_hitprob.csv");
    CHECK_THROWS(run(small_ensemble(), dir.path(), 1));
    CHECK_FALSE(fs::exists(dir.path() / "small_stats.csv"));
    CHECK_FALSE(fs::exists(dir.path() / "small.manifest.json"));
    CHECK(fs::is_directory(dir.path() / "small_hitprob.csv"));
}

TEST_CASE("each command produces its outputs", "[runner]") {
    TempDir dir;
    const auto write = [&](const std::string& text) { return run(parse_config(text), dir.path(), 1); };

    auto m = write("command: fbm\nhurst: 0.3\nhorizon: 1\ndt: 0.01\nseed: 5\n");
    REQUIRE(m.outputs.size() == 1);
    CHECK(slurp(dir.path() / "fbm.csv").rfind("t,w\n0,0\n", 0) == 0);

    m = write("command: simulate\nhurst: 0.7\nsigma: 0.4\nz0: 1\nhorizon: 1\ndt: 0.01\n"
              "solver: picard\ndrift:\n  name: mishura\n  mu: 2\n  theta: 1\n");
    CHECK(slurp(dir.path() / "simulate.csv").rfind("t,z,x\n0,1,1\n", 0) == 0);

    m = write("command: hitprob\nhurst: [0.6, 0.8]\nsigma: 0.4\nz0: 1\nhorizon: 1\ndt: 0.01\n"
              "n_paths: 20\ndrift:\n  name: illustration2\n  theta: 1\n  c: 0.02\n");
    const auto hp = slurp(dir.path() / "hitprob_hitprob.csv");
    CHECK(std::count(hp.begin(), hp.end(), '\n') == 3);

    m = write("command: sweep\nhurst: 0.3\nsigma: 0.4\nz0: 1\nhorizon: 1\ndt: 0.01\nn_paths: 20\n"
              "ks: [1, 2, 5]\ndrift:\n  name: level_sequence\n  a: 1\n");
    const auto sw = slurp(dir.path() / "sweep_hitprob.csv");
    CHECK(sw.find("\n1,20,") != std::string::npos);
    CHECK(sw.find("\n5,20,") != std::string::npos);

    m = write("command: verify\nhurst: 0.7\nsigma: 0.4\nz0: 1\nhorizon: 1\ndts: [0.01, 0.005]\n"
              "n_paths: 5\ndrift:\n  name: mishura\n  mu: 2\n  theta: 1\n");
    CHECK(slurp(dir.path() / "verify_residuals.csv").rfind("h,dt,path_id,sup_residual,at_horizon\n", 0) == 0);
    CHECK(slurp(dir.path() / "verify_convergence.csv").rfind("h,dt,median_sup_residual,n_used,diagnostic\n", 0) == 0);

    m = write("command: conditions\nhorizon: 10\nsigma: 0.4\ndrift:\n  name: illustration1\n  theta: 1\n  c: 2\n");
    const auto cond = slurp(dir.path() / "conditions_conditions.csv");
    CHECK_THAT(cond, ContainsSubstring("illustration1,10,256,256,"));
    CHECK_THAT(cond, ContainsSubstring(",0,true,"));
}

TEST_CASE("command-line front end", "[runner][cli]") {
    TempDir dir;
    const auto cfg = dir.path() / "run.yaml";
    std::ofstream(cfg) << "command: fbm\nhurst: 0.4\nhorizon: 1\ndt: 0.01\nseed: 1\noutput: w\n";
    const auto out = dir.path() / "out";

    CHECK(run_cli("--config " + cfg.string() + " --out " + out.string() + " --verify") == 0);
    CHECK(fs::exists(out / "w.csv"));
    CHECK(run_cli("--check-manifest " + (out / "w.manifest.json").string()) == 0);
    const auto first = slurp(out / "w.csv");

    CHECK(run_cli("--config " + cfg.string() + " --out " + out.string() + " --seed 2") == 0);
    CHECK(slurp(out / "w.csv") != first);

    std::ofstream(out / "w.csv", std::ios::app) << "tampered\n";
    CHECK(run_cli("--check-manifest " + (out / "w.manifest.json").string()) == 1);

    const auto bad = dir.path() / "bad.yaml";
    std::ofstream(bad) << "command: fbm\nhurst: 1.2\nhorizon: 1\ndt: 0.01\n";
    CHECK(run_cli("--config " + bad.string() + " --out " + out.string()) == 2);
    CHECK(run_cli("--preset no-such-preset --out " + out.string()) == 2);
    CHECK(run_cli("--version") == 0);
}
