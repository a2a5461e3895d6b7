#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fcir {

using ParamMap = std::map<std::string, double, std::less<>>;
using DriftFn = std::function<double(double t, double x)>;

/// Time-dependent coefficient for the extended CIR family: a constant or a
/// piecewise-linear table (held flat outside the knot range).
class Curve {
public:
    static Curve constant(double value);
    static Curve piecewise_linear(std::vector<double> knots, std::vector<double> values);

    double operator()(double t) const;
    /// Supremum / infimum over [0, horizon].
    double sup(double horizon) const;
    double inf(double horizon) const;
    bool is_constant() const noexcept { return knots_.size() == 1; }

private:
    Curve(std::vector<double> knots, std::vector<double> values)
        : knots_(std::move(knots)), values_(std::move(values)) {}
    std::vector<double> knots_;
    std::vector<double> values_;
};

/// Named drift f(t, x) with the threshold x* beyond which g = f / (2x) < 0.
/// Immutable once built.
class DriftSpec {
public:
    DriftSpec(std::string name, ParamMap params, double x_star, DriftFn f);

    const std::string& name() const noexcept { return name_; }
    const ParamMap& params() const noexcept { return params_; }
    double x_star() const noexcept { return x_star_; }

    /// Unchecked evaluation for solver inner loops.
    double operator()(double t, double x) const { return f_(t, x); }

private:
    std::string name_;
    ParamMap params_;
    double x_star_;
    DriftFn f_;
};

/// f(t, x); requires t >= 0 and x >= 0.
double eval_f(const DriftSpec& spec, double t, double x);
/// g(t, x) = f(t, x) / (2x); requires x > 0.
double eval_g(const DriftSpec& spec, double t, double x);

/// Families addressable by name:
///   mishura         f = mu - theta x^2                                  {mu, theta}
///   level_sequence  f = k - a x^2                                       {k, a}
///   illustration1   f = s^2/2 (1 - e^{-2 theta t}) + theta (c - x^2)     {theta, c, sigma}
///   illustration2   f = (theta + c) e^{c t} + s^2/2 (1 - e^{-2 theta t}) - theta x^2
///                                                                       {theta, c, sigma}
///   extended_cir    f = theta_t (mu_t - x^2)  constant curves           {theta, mu}
/// illustration2 and extended_cir need the horizon their x* is valid on.
DriftSpec builtin(std::string_view name, const ParamMap& params,
                  std::optional<double> horizon = std::nullopt);

/// Extended CIR drift with arbitrary curves; x* = sqrt(sup mu_t) on [0, horizon].
DriftSpec extended_cir(Curve theta, Curve mu, double horizon);

const std::vector<std::string>& builtin_names();

struct D1Violation {
    double t;
    double x;
    double g;
};

struct AuditRegion {
    double horizon;
    int t_res;
    int x_res;
    double x_max;
};

struct ConditionReport {
    std::vector<D1Violation> d1_violations;
    /// x_T with min f > 0 on (0, T] x [0, x_T]; empty when the search gave up.
    std::optional<double> d2_witness;
    /// min f over the region of the final x_T tried.
    double d2_min_f = 0.0;
    int d2_shrink_steps = 0;
    AuditRegion region{};

    bool d1_holds() const noexcept { return d1_violations.empty(); }
    bool d2_holds() const noexcept { return d2_witness.has_value(); }
};

inline constexpr int kMaxD2ShrinkSteps = 60;

/// Grid audit of the sign conditions. Violations are reported, not thrown;
/// only malformed arguments throw.
ConditionReport check_conditions(const DriftSpec& spec, double horizon, int t_res, int x_res,
                                 double x_max);

}  // namespace fcir
