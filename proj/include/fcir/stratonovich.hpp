#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fcir/drift.hpp"
#include "fcir/sde.hpp"

namespace fcir {

/// Midpoint-average Riemann sum  sum_i (y_i + y_{i-1}) / 2 * (x_i - x_{i-1}),
/// accumulated left to right.
double stratonovich_sum(std::span<const double> y, std::span<const double> x);

/// Prefix sums of the above: output[k] covers the first k increments, so
/// output[0] == 0 and output.back() == stratonovich_sum(y, x) bit for bit.
std::vector<double> running_stratonovich(std::span<const double> y, std::span<const double> x);

struct ResidualReport {
    double dt = 0.0;
    /// sup_k |R(t_k)| over grid points strictly before absorption.
    double sup_residual = 0.0;
    /// |R(T)|, present only when the path was never absorbed.
    std::optional<double> at_horizon;
    std::size_t n_terms = 0;
    /// Set for H < 1/2, where the midpoint sums need not converge.
    bool diagnostic = false;
};

/// Residual of X_t = X_0 + int_0^t f(s, sqrt(X_s)) ds + sigma int_0^t sqrt(X_s) o dW_s
/// along a solved path, with the ds-integral by the trapezoid rule and the
/// Stratonovich integral by running_stratonovich.
ResidualReport verify_identity(const SdePath& path, const DriftSpec& spec);

}  // namespace fcir
