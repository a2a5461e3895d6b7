#pragma once

#include <cstddef>

namespace fcir {

/// Uniform grid t_i = i * dt, i = 0..n_steps.
class TimeGrid {
public:
    TimeGrid(std::size_t n_steps, double dt);

    /// Grid covering [0, horizon] with step dt; horizon/dt must be an integer
    /// up to a relative 1e-9.
    static TimeGrid from_horizon(double horizon, double dt);

    std::size_t n_steps() const noexcept { return n_steps_; }
    std::size_t size() const noexcept { return n_steps_ + 1; }
    double dt() const noexcept { return dt_; }
    double horizon() const noexcept { return static_cast<double>(n_steps_) * dt_; }
    double t(std::size_t i) const noexcept { return static_cast<double>(i) * dt_; }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    std::size_t n_steps_;
    double dt_;
};

}  // namespace fcir
