#include "fcir/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>

#include "fcir/rng.hpp"

namespace fcir {

void EnsembleConfig::validate() const {
    if (n_paths < 1) throw std::invalid_argument("ensemble: n_paths must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("ensemble: sigma must be > 0");
    if (!(z0 > 0.0)) throw std::invalid_argument("ensemble: z0 must be > 0");
}

EnsembleError::EnsembleError(std::size_t path_index, const std::string& what)
    : std::runtime_error("path " + std::to_string(path_index) + ": " + what),
      path_index_(path_index) {}

Interval wilson_interval(std::size_t hits, std::size_t n, double z) {
    if (n == 0) throw std::invalid_argument("wilson_interval: n must be >= 1");
    if (hits > n) throw std::invalid_argument("wilson_interval: hits exceeds n");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(hits) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

std::uint64_t path_seed(std::uint64_t master_seed, std::size_t path_index) noexcept {
    return derive_seed(master_seed, path_index);
}

unsigned resolve_workers(unsigned workers) noexcept {
    if (workers > 0) return workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body) {
    const unsigned w = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), n));
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::size_t err_index = std::numeric_limits<std::size_t>::max();
    std::exception_ptr err;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(err_mu);
                if (i < err_index) {
                    err_index = i;
                    err = std::current_exception();
                }
            }
        }
    };

    if (w <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(w);
        for (unsigned k = 0; k < w; ++k) pool.emplace_back(worker);
    }

    if (err) {
        try {
            std::rethrow_exception(err);
        } catch (const EnsembleError&) {
            throw;
        } catch (const std::exception& e) {
            throw EnsembleError(err_index, e.what());
        }
    }
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

HitProbability make_estimate(std::size_t hits, std::size_t n) {
    return {n, hits, static_cast<double>(hits) / static_cast<double>(n), wilson_interval(hits, n)};
}

}  // namespace

EnsembleStats run_ensemble(const EnsembleConfig& config, unsigned workers) {
    config.validate();
    const FbmSampler sampler(config.fbm_method, config.grid, config.hurst);
    const std::size_t n = config.n_paths;
    const std::size_t size = config.grid.size();

    std::vector<std::vector<double>> xs(n);
    std::vector<std::size_t> alive(n);
    parallel_for(n, workers, [&](std::size_t i) {
        auto driver = std::make_shared<const FbmPath>(sampler.sample(path_seed(config.master_seed, i)));
        const auto path = euler_maruyama(config.spec, config.sigma, config.z0, std::move(driver));
        xs[i] = square_process(path);
        alive[i] = path.alive_length();
    });

    EnsembleStats stats;
    stats.n_paths = n;
    stats.t.resize(size);
    stats.mean_x.resize(size);
    stats.var_x.resize(size);
    stats.q05.resize(size);
    stats.q50.resize(size);
    stats.q95.resize(size);
    stats.alive_fraction.resize(size);

    const double nn = static_cast<double>(n);
    parallel_for(size, workers, [&](std::size_t j) {
        std::vector<double> column(n);
        double sum = 0.0;
        std::size_t alive_count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            column[i] = xs[i][j];
            sum += column[i];
            if (j < alive[i]) ++alive_count;
        }
        const double mean = sum / nn;
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) ss += (column[i] - mean) * (column[i] - mean);
        std::sort(column.begin(), column.end());
        stats.t[j] = config.grid.t(j);
        stats.mean_x[j] = mean;
        stats.var_x[j] = n > 1 ? ss / (nn - 1.0) : 0.0;
        stats.q05[j] = quantile_sorted(column, 0.05);
        stats.q50[j] = quantile_sorted(column, 0.50);
        stats.q95[j] = quantile_sorted(column, 0.95);
        stats.alive_fraction[j] = static_cast<double>(alive_count) / nn;
    });

    stats.hit_count = static_cast<std::size_t>(
        std::count_if(alive.begin(), alive.end(), [size](std::size_t a) { return a < size; }));
    const auto est = make_estimate(stats.hit_count, n);
    stats.p_hat = est.p_hat;
    stats.ci95 = est.ci95;
    return stats;
}

HitProbability hitting_probability(const EnsembleConfig& config, unsigned workers) {
    config.validate();
    const FbmSampler sampler(config.fbm_method, config.grid, config.hurst);
    std::vector<char> hit(config.n_paths, 0);
    parallel_for(config.n_paths, workers, [&](std::size_t i) {
        const auto driver = sampler.sample(path_seed(config.master_seed, i));
        hit[i] = euler_hit_index(config.spec, config.sigma, config.z0, driver).has_value();
    });
    const auto hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
    return make_estimate(hits, config.n_paths);
}

SweepResult drift_sweep(const EnsembleConfig& base, const std::vector<double>& ks, double a,
                        bool coupled, unsigned workers) {
    base.validate();
    if (ks.empty()) throw std::invalid_argument("drift_sweep: ks must be non-empty");
    for (std::size_t j = 0; j < ks.size(); ++j) {
        if (!(ks[j] > 0.0)) throw std::invalid_argument("drift_sweep: every k must be > 0");
        if (j > 0 && !(ks[j] > ks[j - 1]))
            throw std::invalid_argument("drift_sweep: ks must be strictly increasing");
    }
    if (!(a > 0.0)) throw std::invalid_argument("drift_sweep: a must be > 0");

    std::vector<DriftSpec> drifts;
    drifts.reserve(ks.size());
    for (double k : ks) drifts.push_back(builtin("level_sequence", {{"k", k}, {"a", a}}));

    const FbmSampler sampler(base.fbm_method, base.grid, base.hurst);
    const std::size_t n = base.n_paths;
    const std::size_t m = ks.size();
    constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> tau(n * m, kNever);  // [path][k]

    parallel_for(n, workers, [&](std::size_t i) {
        if (coupled) {
            const auto driver = sampler.sample(path_seed(base.master_seed, i));
            for (std::size_t j = 0; j < m; ++j)
                tau[i * m + j] =
                    euler_hit_index(drifts[j], base.sigma, base.z0, driver).value_or(kNever);
        } else {
            for (std::size_t j = 0; j < m; ++j) {
                const auto driver = sampler.sample(path_seed(derive_seed(base.master_seed, j), i));
                tau[i * m + j] =
                    euler_hit_index(drifts[j], base.sigma, base.z0, driver).value_or(kNever);
            }
        }
    });

    SweepResult result;
    result.coupled = coupled;
    for (std::size_t j = 0; j < m; ++j) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) hits += tau[i * m + j] != kNever;
        result.rows.push_back({ks[j], make_estimate(hits, n)});
    }
    if (coupled) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 1; j < m; ++j)
                if (tau[i * m + j] < tau[i * m + j - 1]) ++result.order_violations;
    }
    return result;
}

ConvergenceStudy convergence_study(const EnsembleConfig& base, const std::vector<double>& dts,
                                   std::size_t n_paths_per_dt, unsigned workers) {
    base.validate();
    if (dts.empty()) throw std::invalid_argument("convergence_study: dts must be non-empty");
    for (std::size_t j = 1; j < dts.size(); ++j)
        if (!(dts[j] < dts[j - 1]))
            throw std::invalid_argument("convergence_study: dts must be strictly decreasing");
    if (n_paths_per_dt < 1)
        throw std::invalid_argument("convergence_study: n_paths_per_dt must be >= 1");

    ConvergenceStudy study;
    const double horizon = base.grid.horizon();
    for (std::size_t j = 0; j < dts.size(); ++j) {
        const TimeGrid grid = TimeGrid::from_horizon(horizon, dts[j]);
        const FbmSampler sampler(base.fbm_method, grid, base.hurst);
        const std::uint64_t family = derive_seed(base.master_seed, j);
        std::vector<std::optional<ResidualReport>> reports(n_paths_per_dt);
        parallel_for(n_paths_per_dt, workers, [&](std::size_t i) {
            auto driver = std::make_shared<const FbmPath>(sampler.sample(path_seed(family, i)));
            const auto path = euler_maruyama(base.spec, base.sigma, base.z0, std::move(driver));
            if (path.alive_length() >= 2) reports[i] = verify_identity(path, base.spec);
        });

        std::vector<double> sups;
        for (const auto& r : reports)
            if (r) sups.push_back(r->sup_residual);
        ConvergenceRow row;
        row.dt = dts[j];
        row.n_used = sups.size();
        row.median_sup_residual =
            sups.empty() ? std::numeric_limits<double>::quiet_NaN() : median(sups);
        row.diagnostic = base.hurst.value() < 0.5;
        study.rows.push_back(row);
        study.reports.push_back(std::move(reports));
    }
    return study;
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty sequence");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::size_t count_increases(const std::vector<double>& values) {
    std::size_t c = 0;
    for (std::size_t i = 1; i < values.size(); ++i) c += values[i] > values[i - 1];
    return c;
}

}  // namespace fcir
