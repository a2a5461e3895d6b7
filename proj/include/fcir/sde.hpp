#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fcir/drift.hpp"
#include "fcir/fbm.hpp"

namespace fcir {

/// Solved trajectory of dZ = f(t, Z) / (2Z) dt + (sigma / 2) dW^H together with
/// X = Z^2 1_{[0, tau)}. Once absorbed (hit_index set) z and x stay at 0.
class SdePath {
public:
    /// x is derived from z; z must already be zero from hit_index on.
    SdePath(std::shared_ptr<const FbmPath> driver, std::vector<double> z,
            std::optional<std::size_t> hit_index, double sigma, double z0);

    const TimeGrid& grid() const noexcept { return driver_->grid(); }
    std::span<const double> z() const noexcept { return z_; }
    std::span<const double> x() const noexcept { return x_; }
    std::optional<std::size_t> hit_index() const noexcept { return hit_index_; }
    const FbmPath& driver() const noexcept { return *driver_; }
    const std::shared_ptr<const FbmPath>& driver_ptr() const noexcept { return driver_; }
    double sigma() const noexcept { return sigma_; }
    double z0() const noexcept { return z0_; }
    /// Number of leading grid points strictly before absorption.
    std::size_t alive_length() const noexcept { return hit_index_.value_or(z_.size()); }

private:
    std::shared_ptr<const FbmPath> driver_;
    std::vector<double> z_;
    std::vector<double> x_;
    std::optional<std::size_t> hit_index_;
    double sigma_;
    double z0_;
};

/// Explicit Euler scheme on the driver's grid:
///   z[n] = z[n-1] + f(t_{n-1}, z[n-1]) / (2 z[n-1]) dt + (sigma / 2)(W_n - W_{n-1})
/// while z[n-1] > 0. The first non-positive update is set to exactly 0 and
/// the path stays there; hit_index records that step.
SdePath euler_maruyama(const DriftSpec& spec, double sigma, double z0,
                       std::shared_ptr<const FbmPath> driver);

/// Hitting index only, without materialising the path. Same arithmetic as
/// euler_maruyama, so the result always agrees with its hit_index.
std::optional<std::size_t> euler_hit_index(const DriftSpec& spec, double sigma, double z0,
                                           const FbmPath& driver);

struct PicardResult {
    SdePath path;
    int iterations = 0;
    double final_delta = 0.0;
    double stop_level = 0.0;
    /// First grid index at which the limit iterate sits frozen at stop_level.
    std::optional<std::size_t> stop_index;
};

/// Picard iteration did not reach the tolerance.
class PicardDivergence : public std::runtime_error {
public:
    PicardDivergence(int iterations, double last_delta);
    int iterations() const noexcept { return iterations_; }
    double last_delta() const noexcept { return last_delta_; }

private:
    int iterations_;
    double last_delta_;
};

inline constexpr double kPicardDefaultTol = 1e-8;
inline constexpr int kPicardDefaultMaxIter = 200;

/// Fixed-point iteration Z_{k+1}(t) = z0 + int_0^t g(s, Z_k(s)) ds + (sigma/2) W_t
/// with the integral taken by the trapezoid rule on the grid. Each iterate is
/// held at `level` from its first point at or below `level` onward. Stops once
/// the sup-distance between successive iterates drops below tol.
PicardResult picard_solve(const DriftSpec& spec, double sigma, double z0,
                          std::shared_ptr<const FbmPath> driver, double level,
                          double tol = kPicardDefaultTol, int max_iter = kPicardDefaultMaxIter);

/// X = Z^2 before absorption, 0 from the hitting index on.
std::vector<double> square_process(const SdePath& path);

/// t_{hit_index}, or empty when the path never reached zero on the grid.
std::optional<double> hitting_time(const SdePath& path);

}  // namespace fcir
