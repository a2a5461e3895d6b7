#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fcir/drift.hpp"
#include "fcir/fbm.hpp"
#include "fcir/montecarlo.hpp"
#include "fcir/sde.hpp"

namespace fcir::csv {

/// Shortest-form with 17 significant digits, '.' separator, locale-free.
std::string format_number(double v);

/// Comma-separated rows terminated by '\n'.
class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    Writer& header(std::initializer_list<std::string_view> names);
    Writer& field(double v);
    Writer& field(std::size_t v);
    Writer& field(std::string_view v);
    Writer& field(const std::optional<double>& v);  // empty when absent
    Writer& end_row();

private:
    void sep();
    std::ostream& out_;
    bool row_started_ = false;
};

struct HitProbRow {
    double param = 0.0;  // H or k, depending on the sweep axis
    HitProbability estimate;
};

struct ResidualRow {
    double h = 0.0;
    double dt = 0.0;
    std::size_t path_id = 0;
    ResidualReport report;
};

void write_fbm(std::ostream& out, const FbmPath& path);
void write_sde(std::ostream& out, const SdePath& path);
void write_stats(std::ostream& out, const EnsembleStats& stats);
void write_hitprob(std::ostream& out, const std::vector<HitProbRow>& rows);
void write_residuals(std::ostream& out, const std::vector<ResidualRow>& rows);
void write_conditions(std::ostream& out, const DriftSpec& spec, const ConditionReport& report);

/// Opens `path` for binary writing, throwing on failure.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace fcir::csv
