#pragma once

#include "sparseconf/baselines.hpp"
#include "sparseconf/conformal.hpp"
#include "sparseconf/diagnostics.hpp"
#include "sparseconf/path.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace sparseconf {

using json = nlohmann::json;

json to_json(const LossModel& model);
json to_json(const SolutionPath& path);
json to_json(const ConformalResult& result);
json to_json(const Interval& interval);
json to_json(const GridResult& result);
json to_json(const BoundReport& report);

// Shortest decimal form that reads back to the same double.
std::string format_number(double v);

// One row per node and nonzero coefficient (a blank coefficient for an all-zero node).
void write_path_csv(std::ostream& os, const SolutionPath& path);
void write_pi_csv(std::ostream& os, const std::vector<std::pair<double, double>>& curve);
void write_gap_csv(std::ostream& os, const std::vector<GapPoint>& gaps,
                   const std::vector<BoundReport>& reports);

// Writes the whole string to `path`, throwing Error(Io) on failure.
void write_file(const std::string& path, const std::string& contents);

} // namespace sparseconf
