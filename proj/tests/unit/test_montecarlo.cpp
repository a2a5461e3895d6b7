#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fcir/montecarlo.hpp"

using namespace fcir;
using Catch::Approx;

namespace {

EnsembleConfig small_config(std::size_t n_paths, std::uint64_t seed) {
    return EnsembleConfig{n_paths,
                          seed,
                          TimeGrid(200, 5e-3),
                          builtin("mishura", {{"mu", 1.0}, {"theta", 1.0}}),
                          1.5,
                          0.6,
                          Hurst(0.4),
                          FbmMethod::circulant};
}

EnsembleConfig level_config(std::size_t n_paths, std::uint64_t seed, double sigma, double k) {
    return EnsembleConfig{n_paths,
                          seed,
                          TimeGrid::from_horizon(10.0, 1e-3),
                          builtin("level_sequence", {{"k", k}, {"a", 1.0}}),
                          sigma,
                          1.0,
                          Hurst(0.3),
                          FbmMethod::circulant};
}

bool same(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}

}  // namespace

TEST_CASE("Wilson interval", "[montecarlo]") {
    const auto none = wilson_interval(0, 100);
    CHECK(none.low == 0.0);
    CHECK(none.high > 0.0);
    CHECK(none.high < 1.0);
    // z^2 / (n + z^2) at zero hits.
    const double z2 = 1.959963984540054 * 1.959963984540054;
    CHECK(none.high == Approx(z2 / (100 + z2)).epsilon(1e-12));

    const auto all = wilson_interval(100, 100);
    CHECK(all.high == 1.0);
    CHECK(all.low > 0.0);
    CHECK(all.low < 1.0);
    CHECK(all.low == Approx(1.0 - none.high).epsilon(1e-12));

    const auto mid = wilson_interval(30, 100);
    CHECK(mid.low == Approx(0.2189).margin(1e-4));
    CHECK(mid.high == Approx(0.3958).margin(1e-4));

    CHECK_THROWS_AS(wilson_interval(0, 0), std::invalid_argument);
    CHECK_THROWS_AS(wilson_interval(3, 2), std::invalid_argument);
}

TEST_CASE("median and count_increases", "[montecarlo]") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    CHECK(count_increases({5.0, 4.0, 4.0, 3.0}) == 0u);
    CHECK(count_increases({5.0, 6.0, 4.0, 4.5}) == 2u);
}

TEST_CASE("single-path ensemble reproduces the path", "[montecarlo]") {
    const auto cfg = small_config(1, 77);
    const auto stats = run_ensemble(cfg, 1);
    auto driver = std::make_shared<const FbmPath>(
        FbmSampler(cfg.fbm_method, cfg.grid, cfg.hurst).sample(path_seed(77, 0)));
    const auto path = euler_maruyama(cfg.spec, cfg.sigma, cfg.z0, driver);
    const auto x = path.x();
    REQUIRE(stats.mean_x.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(stats.mean_x[i] == x[i]);
        CHECK(stats.var_x[i] == 0.0);
        CHECK(stats.q05[i] == x[i]);
        CHECK(stats.q50[i] == x[i]);
        CHECK(stats.q95[i] == x[i]);
        CHECK(stats.alive_fraction[i] == (i < path.alive_length() ? 1.0 : 0.0));
    }
    CHECK(stats.hit_count == (path.hit_index() ? 1u : 0u));
}

TEST_CASE("ensemble statistics match a direct recomputation", "[montecarlo]") {
    const auto cfg = small_config(40, 3);
    const auto stats = run_ensemble(cfg, 1);
    const FbmSampler sampler(cfg.fbm_method, cfg.grid, cfg.hurst);
    std::vector<std::vector<double>> xs;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < 40; ++i) {
        auto d = std::make_shared<const FbmPath>(sampler.sample(path_seed(3, i)));
        const auto p = euler_maruyama(cfg.spec, cfg.sigma, cfg.z0, d);
        xs.emplace_back(p.x().begin(), p.x().end());
        hits += p.hit_index() ? 1 : 0;
    }
    CHECK(stats.hit_count == hits);
    CHECK(stats.p_hat == Approx(hits / 40.0));
    for (std::size_t t : {0u, 50u, 200u}) {
        std::vector<double> col;
        for (const auto& x : xs) col.push_back(x[t]);
        double m = 0.0;
        for (double v : col) m += v;
        m /= 40.0;
        double v2 = 0.0;
        for (double v : col) v2 += (v - m) * (v - m);
        std::sort(col.begin(), col.end());
        CHECK(stats.mean_x[t] == Approx(m).epsilon(1e-12));
        CHECK(stats.var_x[t] == Approx(v2 / 39.0).epsilon(1e-10).margin(1e-300));
        CHECK(stats.q50[t] == Approx(0.5 * (col[19] + col[20])).epsilon(1e-12));
        // type-7 at p = 0.05: h = 39 * 0.05 = 1.95
        CHECK(stats.q05[t] == Approx(col[1] + 0.95 * (col[2] - col[1])).epsilon(1e-12));
    }
}

TEST_CASE("results do not depend on the worker count", "[montecarlo][determinism]") {
    const auto cfg = small_config(64, 11);
    const auto one = run_ensemble(cfg, 1);
    for (unsigned w : {2u, 3u, 8u}) {
        const auto many = run_ensemble(cfg, w);
        CHECK(same(one.mean_x, many.mean_x));
        CHECK(same(one.var_x, many.var_x));
        CHECK(same(one.q05, many.q05));
        CHECK(same(one.q95, many.q95));
        CHECK(same(one.alive_fraction, many.alive_fraction));
        CHECK(one.hit_count == many.hit_count);
    }
}

TEST_CASE("alive fraction never increases", "[montecarlo][property]") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto stats = run_ensemble(small_config(100, seed), 1);
        CHECK(stats.alive_fraction.front() == 1.0);
        for (std::size_t i = 1; i < stats.alive_fraction.size(); ++i)
            CHECK(stats.alive_fraction[i] <= stats.alive_fraction[i - 1]);
        CHECK(1.0 - stats.alive_fraction.back() == Approx(stats.p_hat));
        CHECK(stats.ci95.low <= stats.p_hat);
        CHECK(stats.p_hat <= stats.ci95.high);
    }
}

TEST_CASE("a drift that is always negative absorbs every path", "[montecarlo]") {
    auto cfg = small_config(50, 5);
    cfg.spec = DriftSpec("negative", {}, 1.0, [](double, double) { return -1.0; });
    cfg.z0 = 0.1;
    cfg.sigma = 0.01;
    const auto hp = hitting_probability(cfg, 1);
    CHECK(hp.hits == 50u);
    CHECK(hp.p_hat == 1.0);
    CHECK(hp.ci95.high == 1.0);
    CHECK(hp.ci95.low > 0.9);
}

TEST_CASE("hitting_probability agrees with run_ensemble", "[montecarlo]") {
    const auto cfg = small_config(80, 21);
    const auto hp = hitting_probability(cfg, 1);
    const auto stats = run_ensemble(cfg, 1);
    CHECK(hp.hits == stats.hit_count);
    CHECK(hp.p_hat == stats.p_hat);
    CHECK(hp.ci95.low == stats.ci95.low);
    CHECK(hp.ci95.high == stats.ci95.high);
}

TEST_CASE("path failures carry the path index", "[montecarlo]") {
    try {
        parallel_for(40, 4, [](std::size_t i) {
            if (i == 17 || i == 5 || i == 33) throw std::runtime_error("boom");
        });
        FAIL("expected EnsembleError");
    } catch (const EnsembleError& e) {
        CHECK(e.path_index() == 5u);
    }

    auto cfg = small_config(10, 1);
    cfg.spec = DriftSpec("nan", {}, 1.0, [](double, double) { return std::nan(""); });
    CHECK_THROWS_AS(run_ensemble(cfg, 2), EnsembleError);

    cfg.n_paths = 0;
    CHECK_THROWS_AS(run_ensemble(cfg, 1), std::invalid_argument);
}

TEST_CASE("pinned hitting probability for level_sequence k=1, H=0.3", "[montecarlo][golden]") {
    // Reference: 20 000 Cholesky paths (tests/oracles/hitprob_reference) gave 0 hits.
    const std::size_t reference_hits = 0, reference_paths = 20000;
    const double reference_p = static_cast<double>(reference_hits) / reference_paths;

    const auto hp = hitting_probability(level_config(2000, 7, 0.4, 1.0), 0);
    CHECK(hp.hits == 0u);
    CHECK(hp.ci95.low == 0.0);
    CHECK(hp.ci95.high == Approx(0.0019170).margin(1e-7));
    CHECK(hp.ci95.low <= reference_p);
    CHECK(reference_p <= hp.ci95.high);
}

TEST_CASE("a one-row sweep equals hitting_probability", "[montecarlo][sweep]") {
    auto cfg = level_config(300, 19, 1.0, 1.0);
    cfg.grid = TimeGrid::from_horizon(2.0, 1e-3);
    const auto sweep = drift_sweep(cfg, {1.0}, 1.0, true, 0);
    const auto hp = hitting_probability(cfg, 0);
    REQUIRE(sweep.rows.size() == 1);
    CHECK(sweep.rows[0].k == 1.0);
    CHECK(sweep.rows[0].estimate.hits == hp.hits);
    CHECK(sweep.rows[0].estimate.ci95.high == hp.ci95.high);
}

TEST_CASE("sweep input checks", "[montecarlo][sweep]") {
    const auto cfg = level_config(10, 1, 0.4, 1.0);
    CHECK_THROWS_AS(drift_sweep(cfg, {}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(drift_sweep(cfg, {2.0, 1.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(drift_sweep(cfg, {0.0, 1.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(drift_sweep(cfg, {1.0}, -1.0), std::invalid_argument);
}

TEST_CASE("coupled sweep where hits occur", "[montecarlo][sweep]") {
    const auto res = drift_sweep(level_config(1000, 7, 1.0, 1.0), {0.5, 1.0, 2.0}, 1.0, true, 0);
    REQUIRE(res.rows.size() == 3);
    CHECK(res.coupled);
    CHECK(res.rows[0].estimate.hits > res.rows[1].estimate.hits);
    CHECK(res.rows[1].estimate.hits >= res.rows[2].estimate.hits);
    CHECK(res.rows[0].estimate.ci95.low > res.rows[2].estimate.ci95.high);
}

TEST_CASE("uncoupled sweep shows the same trend", "[montecarlo][sweep]") {
    const auto res = drift_sweep(level_config(1000, 7, 1.0, 1.0), {0.5, 1.0, 2.0}, 1.0, false, 0);
    CHECK_FALSE(res.coupled);
    CHECK(res.order_violations == 0u);
    CHECK(res.rows[0].estimate.p_hat > res.rows[1].estimate.p_hat);
    CHECK(res.rows[1].estimate.p_hat >= res.rows[2].estimate.p_hat);
    CHECK(res.rows[0].estimate.ci95.low > res.rows[2].estimate.ci95.high);
}

TEST_CASE("convergence study rows", "[montecarlo][identity]") {
    auto base = small_config(20, 4);
    base.spec = builtin("mishura", {{"mu", 2.0}, {"theta", 1.0}});
    base.sigma = 0.4;
    base.z0 = 1.0;
    base.hurst = Hurst(0.7);
    base.grid = TimeGrid::from_horizon(1.0, 1e-3);

    const auto one = convergence_study(base, {1e-3}, 20, 1);
    REQUIRE(one.rows.size() == 1);
    CHECK(one.rows[0].dt == 1e-3);
    CHECK(one.rows[0].n_used == 20u);
    CHECK_FALSE(one.rows[0].diagnostic);
    CHECK(one.reports[0].size() == 20u);

    const auto trend = convergence_study(base, {4e-3, 2e-3, 1e-3}, 50, 0);
    std::vector<double> medians;
    for (const auto& r : trend.rows) medians.push_back(r.median_sup_residual);
    CHECK(count_increases(medians) <= 1u);

    base.hurst = Hurst(0.3);
    const auto rough = convergence_study(base, {2e-3}, 5, 1);
    CHECK(rough.rows[0].diagnostic);

    CHECK_THROWS_AS(convergence_study(base, {1e-3, 2e-3}, 5, 1), std::invalid_argument);
}
