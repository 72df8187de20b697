#pragma once

// Problem files: JSON documents describing one fixture of any solver family.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "proxtd/linalg.hpp"
#include "proxtd/nonlinear.hpp"
#include "proxtd/pwlinear.hpp"

namespace proxtd {

enum class ProblemKind { Spectrum, Linear, Chain, Piecewise, Nonlinear };

std::string to_string(ProblemKind kind);
std::optional<ProblemKind> parse_problem_kind(const std::string& text);

struct ChainData {
  Matrix P;
  Vector initial;
  std::uint64_t seed = 1;
};

struct NonlinearData {
  /// "tanh": T(x) = a .* tanh(x) + B x + c. "affine": T(x) = B x + c.
  std::string family = "tanh";
  Vector a;
  Matrix B;
  Vector c;
  /// Smooth part H(x) = H x of the split problem, when present.
  std::optional<Matrix> H;
};

struct PiecewiseData {
  std::vector<AffinePiece> pieces;
  Combinator combinator = Combinator::Min;
  std::vector<std::size_t> groups;
};

struct Problem {
  ProblemKind kind = ProblemKind::Linear;
  std::size_t n = 0;
  std::size_t s = 0;
  std::optional<Matrix> A;
  std::optional<Vector> b;
  std::vector<Complex> eigenvalues;
  std::optional<ChainData> chain;
  std::optional<Matrix> Phi;
  std::optional<Matrix> Psi;
  std::optional<Vector> xi;
  std::optional<PiecewiseData> piecewise;
  std::optional<NonlinearData> nonlinear;
  nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json to_json(const Problem& problem);
/// BadParams on a malformed document.
Problem problem_from_json(const nlohmann::json& doc);

Problem load_problem(const std::string& path);
void save_problem(const Problem& problem, const std::string& path);

/// Serialized text; doubles use the shortest decimal that reads back exactly.
std::string dump_problem(const Problem& problem);

nlohmann::json matrix_to_json(const Matrix& m);
nlohmann::json vector_to_json(const Vector& v);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& field);
Vector vector_from_json(const nlohmann::json& j, const std::string& field);

PiecewiseAffineMap build_piecewise(const Problem& problem);
NonlinearMap build_nonlinear(const Problem& problem);

}  // namespace proxtd
