#include "fcir/sde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fcir {

SdePath::SdePath(std::shared_ptr<const FbmPath> driver, std::vector<double> z,
                 std::optional<std::size_t> hit_index, double sigma, double z0)
    : driver_(std::move(driver)), z_(std::move(z)), hit_index_(hit_index), sigma_(sigma), z0_(z0) {
    if (!driver_) throw std::invalid_argument("SdePath: null driver");
    if (z_.size() != driver_->grid().size())
        throw std::invalid_argument("SdePath: z length does not match the driver grid");
    if (!(z0_ > 0.0) || z_.front() != z0_)
        throw std::invalid_argument("SdePath: z[0] must equal z0 > 0");
    if (hit_index_) {
        if (*hit_index_ == 0 || *hit_index_ >= z_.size())
            throw std::invalid_argument("SdePath: hit_index out of range");
        if (std::any_of(z_.begin() + static_cast<std::ptrdiff_t>(*hit_index_), z_.end(),
                        [](double v) { return v != 0.0; }))
            throw std::invalid_argument("SdePath: z must be 0 from hit_index on");
    }
    x_.resize(z_.size());
    const std::size_t alive = alive_length();
    for (std::size_t i = 0; i < alive; ++i) x_[i] = z_[i] * z_[i];
    std::fill(x_.begin() + static_cast<std::ptrdiff_t>(alive), x_.end(), 0.0);
}

namespace {

void check_solver_args(double sigma, double z0, const std::shared_ptr<const FbmPath>& driver) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
    if (!(z0 > 0.0)) throw std::invalid_argument("z0 must be > 0");
    if (!driver) throw std::invalid_argument("null driver");
}

// Runs the scheme, writing into z when non-null. Returns the hitting index.
std::optional<std::size_t> euler_core(const DriftSpec& spec, double sigma, double z0,
                                      const FbmPath& driver, double* z) {
    const auto& grid = driver.grid();
    const auto w = driver.values();
    const double dt = grid.dt();
    const double half_sigma = 0.5 * sigma;
    const std::size_t n_steps = grid.n_steps();

    double prev = z0;
    if (z) z[0] = z0;
    for (std::size_t n = 1; n <= n_steps; ++n) {
        const double next = prev + spec(grid.t(n - 1), prev) / (2.0 * prev) * dt +
                            half_sigma * (w[n] - w[n - 1]);
        if (next <= 0.0) {
            if (z) std::fill(z + n, z + n_steps + 1, 0.0);
            return n;
        }
        if (!std::isfinite(next))
            throw std::runtime_error("euler_maruyama: non-finite state at step " +
                                     std::to_string(n));
        if (z) z[n] = next;
        prev = next;
    }
    return std::nullopt;
}

}  // namespace

SdePath euler_maruyama(const DriftSpec& spec, double sigma, double z0,
                       std::shared_ptr<const FbmPath> driver) {
    check_solver_args(sigma, z0, driver);
    std::vector<double> z(driver->grid().size());
    const auto hit = euler_core(spec, sigma, z0, *driver, z.data());
    return SdePath(std::move(driver), std::move(z), hit, sigma, z0);
}

std::optional<std::size_t> euler_hit_index(const DriftSpec& spec, double sigma, double z0,
                                           const FbmPath& driver) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
    if (!(z0 > 0.0)) throw std::invalid_argument("z0 must be > 0");
    return euler_core(spec, sigma, z0, driver, nullptr);
}

PicardDivergence::PicardDivergence(int iterations, double last_delta)
    : std::runtime_error("Picard iteration did not converge after " + std::to_string(iterations) +
                         " iterations (last sup-delta " + std::to_string(last_delta) +
                         "); tolerance too tight, level too small or horizon too long"),
      iterations_(iterations), last_delta_(last_delta) {}

PicardResult picard_solve(const DriftSpec& spec, double sigma, double z0,
                          std::shared_ptr<const FbmPath> driver, double level, double tol,
                          int max_iter) {
    check_solver_args(sigma, z0, driver);
    if (!(level > 0.0 && level < z0))
        throw std::invalid_argument("picard_solve: level must lie in (0, z0)");
    if (!(tol > 0.0)) throw std::invalid_argument("picard_solve: tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("picard_solve: max_iter must be >= 1");

    const auto& grid = driver->grid();
    const auto w = driver->values();
    const std::size_t size = grid.size();
    const double half_dt = 0.5 * grid.dt();
    const double half_sigma = 0.5 * sigma;

    std::vector<double> current(size, z0);
    std::vector<double> next(size);
    std::vector<double> g(size);

    double delta = 0.0;
    for (int iter = 1; iter <= max_iter; ++iter) {
        for (std::size_t i = 0; i < size; ++i) g[i] = spec(grid.t(i), current[i]) / (2.0 * current[i]);

        double integral = 0.0;
        std::optional<std::size_t> stop;
        next[0] = z0;
        for (std::size_t i = 1; i < size; ++i) {
            integral += half_dt * (g[i - 1] + g[i]);
            const double value = z0 + integral + half_sigma * w[i];
            if (value <= level) {
                stop = i;
                std::fill(next.begin() + static_cast<std::ptrdiff_t>(i), next.end(), level);
                break;
            }
            next[i] = value;
        }

        delta = 0.0;
        for (std::size_t i = 0; i < size; ++i) delta = std::max(delta, std::abs(next[i] - current[i]));
        current.swap(next);

        if (delta < tol) {
            SdePath path(std::move(driver), std::move(current), std::nullopt, sigma, z0);
            return PicardResult{std::move(path), iter, delta, level, stop};
        }
    }
    throw PicardDivergence(max_iter, delta);
}

std::vector<double> square_process(const SdePath& path) {
    return {path.x().begin(), path.x().end()};
}

std::optional<double> hitting_time(const SdePath& path) {
    if (const auto hit = path.hit_index()) return path.grid().t(*hit);
    return std::nullopt;
}

}  // namespace fcir
