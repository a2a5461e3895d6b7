#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fcir/time_grid.hpp"

namespace fcir {

/// Hurst index, strictly inside (0, 1).
class Hurst {
public:
    explicit Hurst(double h);
    double value() const noexcept { return h_; }
    friend bool operator==(const Hurst&, const Hurst&) = default;

private:
    double h_;
};

enum class FbmMethod { cholesky, circulant };

const char* to_string(FbmMethod m) noexcept;
FbmMethod parse_fbm_method(const std::string& name);

/// Covariance factorisation broke down (numerically not positive definite).
class FactorizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sampled fractional Brownian motion on a uniform grid, values[0] == 0.
class FbmPath {
public:
    FbmPath(TimeGrid grid, std::vector<double> values, Hurst hurst, std::uint64_t seed = 0,
            FbmMethod method = FbmMethod::cholesky, bool fallback = false);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    Hurst hurst() const noexcept { return hurst_; }
    std::uint64_t seed() const noexcept { return seed_; }
    FbmMethod method() const noexcept { return method_; }
    /// True when a circulant request was served by the Cholesky generator.
    bool used_fallback() const noexcept { return fallback_; }

private:
    TimeGrid grid_;
    std::vector<double> values_;
    Hurst hurst_;
    std::uint64_t seed_;
    FbmMethod method_;
    bool fallback_;
};

/// Cov(W_s, W_t) = (s^{2H} + t^{2H} - |t - s|^{2H}) / 2.
double fbm_covariance(double s, double t, Hurst h);

/// Exact sampler: lower Cholesky factor of the covariance of (W_{t_1}..W_{t_N}).
/// O(N^3) setup, O(N^2) per path. Intended for N up to a few thousand.
class CholeskyFbm {
public:
    CholeskyFbm(TimeGrid grid, Hurst h);
    ~CholeskyFbm();
    CholeskyFbm(CholeskyFbm&&) noexcept;
    CholeskyFbm& operator=(CholeskyFbm&&) noexcept;

    FbmPath sample(std::uint64_t seed) const;
    const TimeGrid& grid() const noexcept { return grid_; }

private:
    struct Factor;
    TimeGrid grid_;
    Hurst hurst_;
    std::unique_ptr<Factor> factor_;
};

/// Eigenvalues of the circulant matrix whose first row is
/// (c_0, c_1, .., c_{N-1}, c_N, c_{N-1}, .., c_1), given autocov = c_0..c_N.
std::vector<double> circulant_eigenvalues(std::span<const double> autocov);

/// True when no eigenvalue is below -rel_tol * max eigenvalue.
bool embedding_admissible(std::span<const double> eigenvalues, double rel_tol = 1e-10);

/// Autocovariance of unit-step fractional Gaussian noise at lags 0..max_lag.
std::vector<double> fgn_autocovariance(Hurst h, std::size_t max_lag);

/// Davies-Harte circulant embedding of fractional Gaussian noise, O(N log N)
/// per path. If the embedding is not admissible the sampler switches to
/// CholeskyFbm and every path it produces reports used_fallback().
class CirculantFbm {
public:
    /// rel_tol: negative eigenvalues down to -rel_tol * max are treated as 0.
    CirculantFbm(TimeGrid grid, Hurst h, double rel_tol = 1e-10);
    ~CirculantFbm();
    CirculantFbm(CirculantFbm&&) noexcept;
    CirculantFbm& operator=(CirculantFbm&&) noexcept;

    FbmPath sample(std::uint64_t seed) const;
    bool uses_fallback() const noexcept { return static_cast<bool>(fallback_); }
    const TimeGrid& grid() const noexcept { return grid_; }

private:
    TimeGrid grid_;
    Hurst hurst_;
    std::vector<double> sqrt_eig_;  // sqrt(lambda_k / M)
    std::unique_ptr<CholeskyFbm> fallback_;
};

/// Either generator behind one interface; setup cost is paid once.
class FbmSampler {
public:
    FbmSampler(FbmMethod method, TimeGrid grid, Hurst h);
    ~FbmSampler();
    FbmSampler(FbmSampler&&) noexcept;
    FbmSampler& operator=(FbmSampler&&) noexcept;

    FbmPath sample(std::uint64_t seed) const;
    FbmMethod method() const noexcept { return method_; }

private:
    FbmMethod method_;
    std::unique_ptr<CholeskyFbm> cholesky_;
    std::unique_ptr<CirculantFbm> circulant_;
};

FbmPath generate_cholesky(const TimeGrid& grid, Hurst h, std::uint64_t seed);
FbmPath generate_circulant(const TimeGrid& grid, Hurst h, std::uint64_t seed);

/// output[n-1] = values[n] - values[n-1], n = 1..n_steps.
std::vector<double> increments(const FbmPath& path);

/// Inverse of increments: left-to-right running sum starting from 0.
std::vector<double> cumulative_sum(std::span<const double> incs);

/// Pairs of grid points checked by the Hoelder scan are all pairs of the
/// full grid when n_steps <= kHolderExhaustiveLimit, otherwise all pairs of
/// the subgrid taken with stride ceil(n_steps / kHolderExhaustiveLimit)
/// (the final grid point is always included).
inline constexpr std::size_t kHolderExhaustiveLimit = 8192;

struct HolderReport {
    double alpha = 0.0;
    double max_ratio = 0.0;  // max |W_t - W_s| / |t - s|^{H - alpha}
    std::pair<double, double> worst_pair{0.0, 0.0};
};

HolderReport empirical_holder_check(const FbmPath& path, double alpha);
/// alpha defaults to H / 10.
HolderReport empirical_holder_check(const FbmPath& path);

}  // namespace fcir
