#include "fcir/csv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <stdexcept>

namespace fcir::csv {

std::string format_number(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                   std::chars_format::general, 17);
    if (res.ec != std::errc{}) throw std::runtime_error("format_number: conversion failed");
    return std::string(buf.data(), res.ptr);
}

void Writer::sep() {
    if (row_started_) out_.put(',');
    row_started_ = true;
}

Writer& Writer::header(std::initializer_list<std::string_view> names) {
    for (auto n : names) field(n);
    return end_row();
}

Writer& Writer::field(double v) {
    sep();
    out_ << format_number(v);
    return *this;
}

Writer& Writer::field(std::size_t v) {
    sep();
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out_.write(buf.data(), res.ptr - buf.data());
    return *this;
}

Writer& Writer::field(std::string_view v) {
    sep();
    out_ << v;
    return *this;
}

Writer& Writer::field(const std::optional<double>& v) {
    if (v) return field(*v);
    sep();
    return *this;
}

Writer& Writer::end_row() {
    out_.put('\n');
    row_started_ = false;
    return *this;
}

void write_fbm(std::ostream& out, const FbmPath& path) {
    Writer w(out);
    w.header({"t", "w"});
    const auto& grid = path.grid();
    for (std::size_t i = 0; i < grid.size(); ++i) w.field(grid.t(i)).field(path[i]).end_row();
}

void write_sde(std::ostream& out, const SdePath& path) {
    Writer w(out);
    w.header({"t", "z", "x"});
    const auto& grid = path.grid();
    for (std::size_t i = 0; i < grid.size(); ++i)
        w.field(grid.t(i)).field(path.z()[i]).field(path.x()[i]).end_row();
}

void write_stats(std::ostream& out, const EnsembleStats& s) {
    Writer w(out);
    w.header({"t", "mean_x", "var_x", "q05", "q50", "q95", "alive_fraction"});
    for (std::size_t i = 0; i < s.t.size(); ++i)
        w.field(s.t[i])
            .field(s.mean_x[i])
            .field(s.var_x[i])
            .field(s.q05[i])
            .field(s.q50[i])
            .field(s.q95[i])
            .field(s.alive_fraction[i])
            .end_row();
}

void write_hitprob(std::ostream& out, const std::vector<HitProbRow>& rows) {
    Writer w(out);
    w.header({"param", "n_paths", "hits", "p_hat", "ci_low", "ci_high"});
    for (const auto& r : rows)
        w.field(r.param)
            .field(r.estimate.n_paths)
            .field(r.estimate.hits)
            .field(r.estimate.p_hat)
            .field(r.estimate.ci95.low)
            .field(r.estimate.ci95.high)
            .end_row();
}

void write_residuals(std::ostream& out, const std::vector<ResidualRow>& rows) {
    Writer w(out);
    w.header({"h", "dt", "path_id", "sup_residual", "at_horizon"});
    for (const auto& r : rows)
        w.field(r.h)
            .field(r.dt)
            .field(r.path_id)
            .field(r.report.sup_residual)
            .field(r.report.at_horizon)
            .end_row();
}

void write_conditions(std::ostream& out, const DriftSpec& spec, const ConditionReport& report) {
    Writer w(out);
    w.header({"drift", "horizon", "t_res", "x_res", "x_max", "x_star", "d1_violations",
              "d2_holds", "x_T", "d2_min_f", "d2_shrink_steps"});
    w.field(spec.name())
        .field(report.region.horizon)
        .field(static_cast<std::size_t>(report.region.t_res))
        .field(static_cast<std::size_t>(report.region.x_res))
        .field(report.region.x_max)
        .field(spec.x_star())
        .field(report.d1_violations.size())
        .field(report.d2_holds() ? std::string_view("true") : std::string_view("false"))
        .field(report.d2_witness)
        .field(report.d2_min_f)
        .field(static_cast<std::size_t>(report.d2_shrink_steps))
        .end_row();
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file " + path.string());
    return out;
}

}  // namespace fcir::csv
