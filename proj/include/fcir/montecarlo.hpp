#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fcir/drift.hpp"
#include "fcir/fbm.hpp"
#include "fcir/sde.hpp"
#include "fcir/stratonovich.hpp"
#include "fcir/time_grid.hpp"

namespace fcir {

struct EnsembleConfig {
    std::size_t n_paths = 1000;
    std::uint64_t master_seed = 0;
    TimeGrid grid;
    DriftSpec spec;
    double sigma = 0.4;
    double z0 = 1.0;
    Hurst hurst;
    FbmMethod fbm_method = FbmMethod::circulant;

    void validate() const;
};

/// A path-level failure inside an ensemble, tagged with the offending path.
class EnsembleError : public std::runtime_error {
public:
    EnsembleError(std::size_t path_index, const std::string& what);
    std::size_t path_index() const noexcept { return path_index_; }

private:
    std::size_t path_index_;
};

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

/// Wilson score interval at the given normal quantile (default: 95%).
Interval wilson_interval(std::size_t hits, std::size_t n, double z = 1.959963984540054);

/// Seed of the driver for path `path_index`.
std::uint64_t path_seed(std::uint64_t master_seed, std::size_t path_index) noexcept;

struct EnsembleStats {
    std::vector<double> t;
    std::vector<double> mean_x;
    std::vector<double> var_x;  // unbiased; 0 for a single path
    std::vector<double> q05, q50, q95;
    std::vector<double> alive_fraction;
    std::size_t n_paths = 0;
    std::size_t hit_count = 0;
    double p_hat = 0.0;
    Interval ci95;
};

struct HitProbability {
    std::size_t n_paths = 0;
    std::size_t hits = 0;
    double p_hat = 0.0;
    Interval ci95;
};

/// workers == 0 means std::thread::hardware_concurrency(). Results do not
/// depend on the worker count.
EnsembleStats run_ensemble(const EnsembleConfig& config, unsigned workers = 0);

/// Fraction of paths absorbed at or before the final grid point.
HitProbability hitting_probability(const EnsembleConfig& config, unsigned workers = 0);

struct SweepRow {
    double k = 0.0;
    HitProbability estimate;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool coupled = true;
    /// Coupled mode only: (path, adjacent k pair) where the larger k hit first.
    std::size_t order_violations = 0;
};

/// Hitting probabilities for drifts f_k = k - a x^2. Coupled mode reuses the
/// driver of path i for every k (and matches hitting_probability with that
/// drift); uncoupled mode draws an independent driver family per k.
SweepResult drift_sweep(const EnsembleConfig& base, const std::vector<double>& ks, double a,
                        bool coupled = true, unsigned workers = 0);

struct ConvergenceRow {
    double dt = 0.0;
    double median_sup_residual = 0.0;
    std::size_t n_used = 0;  // paths that survived at least one step
    bool diagnostic = false;
};

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    /// Per-path reports, row-major by dt; empty where a path was absorbed
    /// before its first increment.
    std::vector<std::vector<std::optional<ResidualReport>>> reports;
};

/// verify_identity over fresh paths at each step size (same horizon as base).
ConvergenceStudy convergence_study(const EnsembleConfig& base, const std::vector<double>& dts,
                                   std::size_t n_paths_per_dt, unsigned workers = 0);

double median(std::vector<double> values);

/// Number of adjacent pairs with values[i+1] > values[i].
std::size_t count_increases(const std::vector<double>& values);

/// Runs body(i) for i in [0, n) on up to `workers` threads. If any call throws,
/// the exception from the smallest index is rethrown as EnsembleError.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body);

unsigned resolve_workers(unsigned workers) noexcept;

}  // namespace fcir
