#include "fcir/time_grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fcir {

TimeGrid::TimeGrid(std::size_t n_steps, double dt) : n_steps_(n_steps), dt_(dt) {
    if (n_steps == 0) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("TimeGrid: dt must be > 0");
}

TimeGrid TimeGrid::from_horizon(double horizon, double dt) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("TimeGrid: horizon must be > 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("TimeGrid: dt must be > 0");
    const double ratio = horizon / dt;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * n)
        throw std::invalid_argument("TimeGrid: horizon " + std::to_string(horizon) +
                                    " is not an integer multiple of dt " + std::to_string(dt));
    return TimeGrid(static_cast<std::size_t>(n), dt);
}

}  // namespace fcir
