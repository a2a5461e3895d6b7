#include "fcir/drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fcir {

// ---------------------------------------------------------------------------
// Curve

Curve Curve::constant(double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("Curve: non-finite value");
    return Curve({0.0}, {value});
}

Curve Curve::piecewise_linear(std::vector<double> knots, std::vector<double> values) {
    if (knots.empty() || knots.size() != values.size())
        throw std::invalid_argument("Curve: knots and values must be non-empty and equal length");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i] > knots[i - 1]))
            throw std::invalid_argument("Curve: knots must be strictly increasing");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("Curve: non-finite value");
    return Curve(std::move(knots), std::move(values));
}

double Curve::operator()(double t) const {
    if (t <= knots_.front()) return values_.front();
    if (t >= knots_.back()) return values_.back();
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const auto i = static_cast<std::size_t>(it - knots_.begin());
    const double w = (t - knots_[i - 1]) / (knots_[i] - knots_[i - 1]);
    return values_[i - 1] + w * (values_[i] - values_[i - 1]);
}

// Piecewise linear: extremes sit at knots inside [0, horizon] or at the ends.
double Curve::sup(double horizon) const {
    double best = std::max((*this)(0.0), (*this)(horizon));
    for (std::size_t i = 0; i < knots_.size(); ++i)
        if (knots_[i] > 0.0 && knots_[i] < horizon) best = std::max(best, values_[i]);
    return best;
}

double Curve::inf(double horizon) const {
    double best = std::min((*this)(0.0), (*this)(horizon));
    for (std::size_t i = 0; i < knots_.size(); ++i)
        if (knots_[i] > 0.0 && knots_[i] < horizon) best = std::min(best, values_[i]);
    return best;
}

// ---------------------------------------------------------------------------
// DriftSpec

DriftSpec::DriftSpec(std::string name, ParamMap params, double x_star, DriftFn f)
    : name_(std::move(name)), params_(std::move(params)), x_star_(x_star), f_(std::move(f)) {
    if (!(x_star_ > 0.0) || !std::isfinite(x_star_))
        throw std::invalid_argument("DriftSpec '" + name_ + "': x_star must be > 0");
    if (!f_) throw std::invalid_argument("DriftSpec '" + name_ + "': empty evaluation rule");
}

double eval_f(const DriftSpec& spec, double t, double x) {
    if (t < 0.0) throw std::invalid_argument("eval_f: t must be >= 0");
    if (x < 0.0) throw std::invalid_argument("eval_f: x must be >= 0");
    return spec(t, x);
}

double eval_g(const DriftSpec& spec, double t, double x) {
    if (t < 0.0) throw std::invalid_argument("eval_g: t must be >= 0");
    if (!(x > 0.0)) throw std::invalid_argument("eval_g: x must be > 0");
    return spec(t, x) / (2.0 * x);
}

namespace {

double require_positive(const ParamMap& params, std::string_view family, const std::string& key) {
    const auto it = params.find(key);
    if (it == params.end())
        throw std::invalid_argument("drift '" + std::string(family) + "': missing parameter '" +
                                    key + "'");
    if (!(it->second > 0.0) || !std::isfinite(it->second))
        throw std::invalid_argument("drift '" + std::string(family) + "': parameter '" + key +
                                    "' must be > 0");
    return it->second;
}

void reject_unknown(const ParamMap& params, std::string_view family,
                    std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : params) {
        (void)value;
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw std::invalid_argument("drift '" + std::string(family) +
                                        "': unknown parameter '" + key + "'");
    }
}

double require_horizon(std::optional<double> horizon, std::string_view family) {
    if (!horizon || !(*horizon > 0.0))
        throw std::invalid_argument("drift '" + std::string(family) +
                                    "': a positive horizon is required to fix x_star");
    return *horizon;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names{"mishura", "extended_cir", "illustration1",
                                                "illustration2", "level_sequence"};
    return names;
}

DriftSpec builtin(std::string_view name, const ParamMap& params, std::optional<double> horizon) {
    if (name == "mishura") {
        reject_unknown(params, name, {"mu", "theta"});
        const double mu = require_positive(params, name, "mu");
        const double theta = require_positive(params, name, "theta");
        return DriftSpec("mishura", params, std::sqrt(mu / theta),
                         [mu, theta](double, double x) { return mu - theta * x * x; });
    }
    if (name == "level_sequence") {
        reject_unknown(params, name, {"k", "a"});
        const double k = require_positive(params, name, "k");
        const double a = require_positive(params, name, "a");
        return DriftSpec("level_sequence", params, std::sqrt(k / a),
                         [k, a](double, double x) { return k - a * x * x; });
    }
    if (name == "illustration1") {
        reject_unknown(params, name, {"theta", "c", "sigma"});
        const double theta = require_positive(params, name, "theta");
        const double c = require_positive(params, name, "c");
        const double sigma = require_positive(params, name, "sigma");
        const double half_s2 = 0.5 * sigma * sigma;
        return DriftSpec("illustration1", params, std::sqrt(c + half_s2 / theta),
                         [=](double t, double x) {
                             return half_s2 * (1.0 - std::exp(-2.0 * theta * t)) +
                                    theta * (c - x * x);
                         });
    }
    if (name == "illustration2") {
        reject_unknown(params, name, {"theta", "c", "sigma"});
        const double theta = require_positive(params, name, "theta");
        const double c = require_positive(params, name, "c");
        const double sigma = require_positive(params, name, "sigma");
        const double horizon_v = require_horizon(horizon, name);
        const double half_s2 = 0.5 * sigma * sigma;
        const double x_star =
            std::sqrt((theta + c) * std::exp(c * horizon_v) / theta + half_s2 / theta);
        return DriftSpec("illustration2", params, x_star, [=](double t, double x) {
            return (theta + c) * std::exp(c * t) + half_s2 * (1.0 - std::exp(-2.0 * theta * t)) -
                   theta * x * x;
        });
    }
    if (name == "extended_cir") {
        reject_unknown(params, name, {"theta", "mu"});
        const double theta = require_positive(params, name, "theta");
        const double mu = require_positive(params, name, "mu");
        const double h = horizon.value_or(1.0);
        return extended_cir(Curve::constant(theta), Curve::constant(mu), h);
    }
    throw std::invalid_argument("unknown drift family '" + std::string(name) + "'");
}

DriftSpec extended_cir(Curve theta, Curve mu, double horizon) {
    if (!(horizon > 0.0)) throw std::invalid_argument("extended_cir: horizon must be > 0");
    if (!(theta.inf(horizon) > 0.0))
        throw std::invalid_argument("drift 'extended_cir': theta_t must be > 0 on [0, horizon]");
    if (!(mu.inf(horizon) > 0.0))
        throw std::invalid_argument("drift 'extended_cir': mu_t must be > 0 on [0, horizon]");
    ParamMap params;
    if (theta.is_constant()) params["theta"] = theta(0.0);
    if (mu.is_constant()) params["mu"] = mu(0.0);
    const double x_star = std::sqrt(mu.sup(horizon));
    return DriftSpec("extended_cir", std::move(params), x_star,
                     [theta = std::move(theta), mu = std::move(mu)](double t, double x) {
                         return theta(t) * (mu(t) - x * x);
                     });
}

// ---------------------------------------------------------------------------
// Condition audit

ConditionReport check_conditions(const DriftSpec& spec, double horizon, int t_res, int x_res,
                                 double x_max) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("check_conditions: horizon must be > 0");
    if (t_res < 16 || x_res < 16)
        throw std::invalid_argument("check_conditions: resolutions must be >= 16");
    if (!(x_max > spec.x_star()) || !std::isfinite(x_max))
        throw std::invalid_argument("check_conditions: x_max must exceed x_star");

    ConditionReport report;
    report.region = {horizon, t_res, x_res, x_max};

    const auto t_at = [&](int i) { return horizon * i / t_res; };

    // g < 0 on (0, T] x (x*, x_max]
    const double x_star = spec.x_star();
    for (int i = 1; i <= t_res; ++i) {
        const double t = t_at(i);
        for (int j = 1; j <= x_res; ++j) {
            const double x = x_star + (x_max - x_star) * j / x_res;
            const double g = spec(t, x) / (2.0 * x);
            if (!(g < 0.0)) report.d1_violations.push_back({t, x, g});
        }
    }

    // f > 0 on (0, T] x [0, x_T], shrinking x_T geometrically.
    double x_t = 0.5 * x_star;
    for (int step = 0;; ++step) {
        double min_f = std::numeric_limits<double>::infinity();
        for (int i = 1; i <= t_res; ++i) {
            const double t = t_at(i);
            for (int j = 0; j <= x_res; ++j) min_f = std::min(min_f, spec(t, x_t * j / x_res));
        }
        report.d2_min_f = min_f;
        report.d2_shrink_steps = step;
        if (min_f > 0.0) {
            report.d2_witness = x_t;
            break;
        }
        if (step == kMaxD2ShrinkSteps) break;
        x_t *= 0.5;
    }
    return report;
}

}  // namespace fcir
