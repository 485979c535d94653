#include "saddleflow/io.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace saddleflow {

namespace {

Matrix matrix_from_json(const nlohmann::json& j, const char* key) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument(std::string("problem file: '") + key +
                                "' must be a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j.at(0).is_array() ? j.at(0).size() : 0;
  if (cols == 0)
    throw std::invalid_argument(std::string("problem file: '") + key +
                                "' rows must be non-empty arrays");
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = j.at(r);
    if (!row.is_array() || row.size() != cols)
      throw std::invalid_argument(std::string("problem file: '") + key +
                                  "' rows have inconsistent lengths");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) =
          row.at(c).get<double>();
  }
  return m;
}

Vector vector_from_json(const nlohmann::json& j, const char* key) {
  if (!j.is_array())
    throw std::invalid_argument(std::string("problem file: '") + key +
                                "' must be an array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Index>(i)] = j.at(i).get<double>();
  return v;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

}  // namespace

ProblemFile parse_problem_json(const nlohmann::json& j) {
  for (const char* key : {"Q", "q", "A", "b"})
    if (!j.contains(key))
      throw std::invalid_argument(std::string("problem file: missing '") +
                                  key + "'");
  Matrix Q = matrix_from_json(j.at("Q"), "Q");
  Vector q = vector_from_json(j.at("q"), "q");
  const double c0 = j.value("c0", 0.0);
  Matrix A = matrix_from_json(j.at("A"), "A");
  Vector b = vector_from_json(j.at("b"), "b");

  ProblemFile out{
      SaddleProblem(std::make_shared<QuadraticObjective>(
                        std::move(Q), std::move(q), c0),
                    LinearConstraint(std::move(A), std::move(b))),
      std::nullopt, std::nullopt};
  if (j.contains("x0")) out.x0 = vector_from_json(j.at("x0"), "x0");
  if (j.contains("lambda0"))
    out.lambda0 = vector_from_json(j.at("lambda0"), "lambda0");
  if (out.x0 && out.x0->size() != out.problem.primal_dim())
    throw std::invalid_argument("problem file: 'x0' dimension mismatch");
  if (out.lambda0 && out.lambda0->size() != out.problem.dual_dim())
    throw std::invalid_argument("problem file: 'lambda0' dimension mismatch");
  return out;
}

ProblemFile load_problem_json(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot open problem file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed JSON in " + path + ": " + e.what());
  }
  return parse_problem_json(j);
}

nlohmann::json problem_to_json(const SaddleProblem& p,
                               const std::optional<Vector>& x0,
                               const std::optional<Vector>& lambda0) {
  const QuadraticObjective* f = p.objective->quadratic();
  if (!f)
    throw std::invalid_argument(
        "problem_to_json: only quadratic objectives serialize");
  nlohmann::json j;
  j["Q"] = matrix_to_json(f->Q());
  j["q"] = vector_to_json(f->q());
  j["c0"] = f->c0();
  j["A"] = matrix_to_json(p.constraint.A);
  j["b"] = vector_to_json(p.constraint.b);
  if (x0) j["x0"] = vector_to_json(*x0);
  if (lambda0) j["lambda0"] = vector_to_json(*lambda0);
  return j;
}

void save_problem_json(const std::string& path, const SaddleProblem& p,
                       const std::optional<Vector>& x0,
                       const std::optional<Vector>& lambda0) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << problem_to_json(p, x0, lambda0).dump(2) << '\n';
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_series_csv(const std::string& path, const DiagnosticsSeries& d) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,gap,vel_sq,err_sq_full,err_sq_primal,cesaro_gap\n";
  for (std::size_t k = 0; k < d.size(); ++k) {
    out << format_full(d.times[k]) << ',' << format_full(d.gap[k]) << ','
        << format_full(d.vel_sq[k]) << ',' << format_full(d.err_sq_full[k])
        << ',' << format_full(d.err_sq_primal[k]) << ','
        << format_full(d.cesaro_gap[k]) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

nlohmann::json series_to_json(const DiagnosticsSeries& d) {
  nlohmann::json j;
  j["t"] = d.times;
  j["gap"] = d.gap;
  j["vel_sq"] = d.vel_sq;
  j["err_sq_full"] = d.err_sq_full;
  j["err_sq_primal"] = d.err_sq_primal;
  j["cesaro_gap"] = d.cesaro_gap;
  return j;
}

void write_series_json(const std::string& path, const DiagnosticsSeries& d) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << series_to_json(d).dump(2) << '\n';
}

}  // namespace saddleflow
