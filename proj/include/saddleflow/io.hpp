#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "saddleflow/diagnostics.hpp"
#include "saddleflow/model.hpp"

namespace saddleflow {

// Quadratic problems serialize as
//   {"Q": [[...], ...], "q": [...], "c0": s, "A": [[...], ...], "b": [...]}
// with row-major matrices; "c0", "x0" and "lambda0" are optional.
struct ProblemFile {
  SaddleProblem problem;
  std::optional<Vector> x0;
  std::optional<Vector> lambda0;
};

ProblemFile parse_problem_json(const nlohmann::json& j);
ProblemFile load_problem_json(const std::string& path);

nlohmann::json problem_to_json(const SaddleProblem& p,
                               const std::optional<Vector>& x0 = std::nullopt,
                               const std::optional<Vector>& lambda0 = std::nullopt);
void save_problem_json(const std::string& path, const SaddleProblem& p,
                       const std::optional<Vector>& x0 = std::nullopt,
                       const std::optional<Vector>& lambda0 = std::nullopt);

// 17 significant digits: the shortest form that round-trips any double.
std::string format_full(double v);

// Columns: t,gap,vel_sq,err_sq_full,err_sq_primal,cesaro_gap.
void write_series_csv(const std::string& path, const DiagnosticsSeries& d);

nlohmann::json series_to_json(const DiagnosticsSeries& d);
void write_series_json(const std::string& path, const DiagnosticsSeries& d);

}  // namespace saddleflow
