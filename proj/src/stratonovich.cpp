#include "fcir/stratonovich.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fcir {

namespace {

void check_lengths(std::span<const double> y, std::span<const double> x) {
    if (y.size() != x.size())
        throw std::invalid_argument("stratonovich: sequences differ in length");
    if (y.size() < 2) throw std::invalid_argument("stratonovich: need at least two samples");
}

inline double midpoint_term(std::span<const double> y, std::span<const double> x, std::size_t i) {
    return 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
}

}  // namespace

double stratonovich_sum(std::span<const double> y, std::span<const double> x) {
    check_lengths(y, x);
    double acc = 0.0;
    for (std::size_t i = 1; i < y.size(); ++i) acc += midpoint_term(y, x, i);
    return acc;
}

std::vector<double> running_stratonovich(std::span<const double> y, std::span<const double> x) {
    check_lengths(y, x);
    std::vector<double> out(y.size());
    out[0] = 0.0;
    for (std::size_t i = 1; i < y.size(); ++i) out[i] = out[i - 1] + midpoint_term(y, x, i);
    return out;
}

ResidualReport verify_identity(const SdePath& path, const DriftSpec& spec) {
    const std::size_t alive = path.alive_length();
    if (alive < 2)
        throw std::invalid_argument("verify_identity: path absorbed before its first increment");

    const auto& grid = path.grid();
    const auto x = path.x().first(alive);
    const auto w = path.driver().values().first(alive);

    std::vector<double> root(alive);
    std::transform(x.begin(), x.end(), root.begin(), [](double v) { return std::sqrt(v); });
    const auto strat = running_stratonovich(root, w);

    const double half_dt = 0.5 * grid.dt();
    const double sigma = path.sigma();
    double drift_integral = 0.0;
    double f_prev = spec(0.0, root[0]);
    double sup = 0.0;
    double last = 0.0;
    for (std::size_t k = 1; k < alive; ++k) {
        const double f_k = spec(grid.t(k), root[k]);
        drift_integral += half_dt * (f_prev + f_k);
        f_prev = f_k;
        last = std::abs(x[k] - x[0] - drift_integral - sigma * strat[k]);
        sup = std::max(sup, last);
    }

    ResidualReport report;
    report.dt = grid.dt();
    report.sup_residual = sup;
    if (!path.hit_index()) report.at_horizon = last;
    report.n_terms = alive - 1;
    report.diagnostic = path.driver().hurst().value() < 0.5;
    return report;
}

}  // namespace fcir
