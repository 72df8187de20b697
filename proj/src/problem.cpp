#include "proxtd/problem.hpp"

#include <fstream>
#include <sstream>

#include "proxtd/error.hpp"

namespace proxtd {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { fail(ErrorCode::BadParams, "problem file: " + what); }

double number(const json& j, const std::string& field) {
  if (!j.is_number()) bad(field + " must hold numbers");
  return j.get<double>();
}

const char* combinator_name(Combinator c) {
  switch (c) {
    case Combinator::Min: return "min";
    case Combinator::Max: return "max";
    case Combinator::MinMax: return "minmax";
  }
  return "min";
}

Combinator parse_combinator(const std::string& s) {
  if (s == "min") return Combinator::Min;
  if (s == "max") return Combinator::Max;
  if (s == "minmax") return Combinator::MinMax;
  bad("unknown combinator '" + s + "'");
}

}  // namespace

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Spectrum: return "spectrum";
    case ProblemKind::Linear: return "linear";
    case ProblemKind::Chain: return "chain";
    case ProblemKind::Piecewise: return "piecewise";
    case ProblemKind::Nonlinear: return "nonlinear";
  }
  return "linear";
}

std::optional<ProblemKind> parse_problem_kind(const std::string& text) {
  for (auto k : {ProblemKind::Spectrum, ProblemKind::Linear, ProblemKind::Chain, ProblemKind::Piecewise,
                 ProblemKind::Nonlinear})
    if (to_string(k) == text) return k;
  return std::nullopt;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) bad(field + " must be an array of rows");
  const auto rows = j.size();
  const auto cols = rows == 0 ? 0 : j.front().size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) bad(field + " has ragged rows");
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = number(j[i][k], field);
  }
  return m;
}

Vector vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) bad(field + " must be an array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = number(j[i], field);
  return v;
}

json to_json(const Problem& p) {
  json doc;
  doc["kind"] = to_string(p.kind);
  doc["n"] = p.n;
  if (p.s > 0) doc["s"] = p.s;
  if (p.A) doc["A"] = matrix_to_json(*p.A);
  if (p.b) doc["b"] = vector_to_json(*p.b);
  if (!p.eigenvalues.empty()) {
    json eigs = json::array();
    for (const auto& z : p.eigenvalues) eigs.push_back({z.real(), z.imag()});
    doc["eigenvalues"] = std::move(eigs);
  }
  if (p.chain) {
    doc["chain"] = {{"P", matrix_to_json(p.chain->P)},
                    {"initial", vector_to_json(p.chain->initial)},
                    {"seed", p.chain->seed}};
  }
  if (p.Phi) doc["Phi"] = matrix_to_json(*p.Phi);
  if (p.Psi) doc["Psi"] = matrix_to_json(*p.Psi);
  if (p.xi) doc["xi"] = vector_to_json(*p.xi);
  if (p.piecewise) {
    json pieces = json::array();
    for (const auto& piece : p.piecewise->pieces)
      pieces.push_back({{"A", matrix_to_json(piece.A)}, {"b", vector_to_json(piece.b)}});
    doc["pieces"] = std::move(pieces);
    doc["combinator"] = combinator_name(p.piecewise->combinator);
    if (!p.piecewise->groups.empty()) doc["groups"] = p.piecewise->groups;
  }
  if (p.nonlinear) {
    json nl;
    nl["family"] = p.nonlinear->family;
    if (p.nonlinear->a.size() > 0) nl["a"] = vector_to_json(p.nonlinear->a);
    nl["B"] = matrix_to_json(p.nonlinear->B);
    nl["c"] = vector_to_json(p.nonlinear->c);
    if (p.nonlinear->H) nl["H"] = matrix_to_json(*p.nonlinear->H);
    doc["nonlinear"] = std::move(nl);
  }
  doc["metadata"] = p.metadata;
  return doc;
}

Problem problem_from_json(const json& doc) {
  if (!doc.is_object()) bad("top level must be an object");
  Problem p;
  try {
    const auto kind = parse_problem_kind(doc.at("kind").get<std::string>());
    if (!kind) bad("unknown kind '" + doc.at("kind").get<std::string>() + "'");
    p.kind = *kind;
    p.n = doc.at("n").get<std::size_t>();
    p.s = doc.value("s", std::size_t{0});
    if (doc.contains("A")) p.A = matrix_from_json(doc["A"], "A");
    if (doc.contains("b")) p.b = vector_from_json(doc["b"], "b");
    if (doc.contains("eigenvalues")) {
      for (const auto& z : doc["eigenvalues"]) {
        if (!z.is_array() || z.size() != 2) bad("eigenvalues must be [re, im] pairs");
        p.eigenvalues.emplace_back(number(z[0], "eigenvalues"), number(z[1], "eigenvalues"));
      }
    }
    if (doc.contains("chain")) {
      const auto& c = doc["chain"];
      ChainData chain;
      chain.P = matrix_from_json(c.at("P"), "chain.P");
      chain.initial = vector_from_json(c.at("initial"), "chain.initial");
      chain.seed = c.value("seed", std::uint64_t{1});
      p.chain = std::move(chain);
    }
    if (doc.contains("Phi")) p.Phi = matrix_from_json(doc["Phi"], "Phi");
    if (doc.contains("Psi")) p.Psi = matrix_from_json(doc["Psi"], "Psi");
    if (doc.contains("xi")) p.xi = vector_from_json(doc["xi"], "xi");
    if (doc.contains("pieces")) {
      PiecewiseData pw;
      for (const auto& piece : doc["pieces"])
        pw.pieces.push_back({matrix_from_json(piece.at("A"), "pieces.A"), vector_from_json(piece.at("b"), "pieces.b")});
      pw.combinator = parse_combinator(doc.value("combinator", std::string("min")));
      if (doc.contains("groups")) pw.groups = doc["groups"].get<std::vector<std::size_t>>();
      p.piecewise = std::move(pw);
    }
    if (doc.contains("nonlinear")) {
      const auto& nl = doc["nonlinear"];
      NonlinearData data;
      data.family = nl.value("family", std::string("tanh"));
      if (nl.contains("a")) data.a = vector_from_json(nl["a"], "nonlinear.a");
      data.B = matrix_from_json(nl.at("B"), "nonlinear.B");
      data.c = vector_from_json(nl.at("c"), "nonlinear.c");
      if (nl.contains("H")) data.H = matrix_from_json(nl["H"], "nonlinear.H");
      p.nonlinear = std::move(data);
    }
    if (doc.contains("metadata")) p.metadata = doc["metadata"];
  } catch (const json::exception& e) {
    bad(e.what());
  }

  auto check_vec = [&](const std::optional<Vector>& v, const char* name) {
    if (v && static_cast<std::size_t>(v->size()) != p.n) bad(std::string(name) + " length differs from n");
  };
  auto check_mat = [&](const std::optional<Matrix>& m, std::size_t cols, const char* name) {
    if (m && (static_cast<std::size_t>(m->rows()) != p.n || static_cast<std::size_t>(m->cols()) != cols))
      bad(std::string(name) + " has the wrong shape");
  };
  check_mat(p.A, p.n, "A");
  check_vec(p.b, "b");
  check_vec(p.xi, "xi");
  if (p.Phi && p.s == 0) p.s = static_cast<std::size_t>(p.Phi->cols());
  check_mat(p.Phi, p.s, "Phi");
  check_mat(p.Psi, p.s, "Psi");
  switch (p.kind) {
    case ProblemKind::Spectrum:
    case ProblemKind::Linear:
      if (!p.A || !p.b) bad("linear problems need A and b");
      break;
    case ProblemKind::Chain:
      if (!p.A || !p.b || !p.Phi || !p.chain) bad("chain problems need A, b, Phi and chain");
      break;
    case ProblemKind::Piecewise:
      if (!p.piecewise) bad("piecewise problems need pieces");
      break;
    case ProblemKind::Nonlinear:
      if (!p.nonlinear) bad("nonlinear problems need a nonlinear block");
      break;
  }
  return p;
}

std::string dump_problem(const Problem& problem) { return to_json(problem).dump(1) + "\n"; }

Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    bad(path + ": " + e.what());
  }
  return problem_from_json(doc);
}

void save_problem(const Problem& problem, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::BadParams, "cannot write " + path);
  out << dump_problem(problem);
}

PiecewiseAffineMap build_piecewise(const Problem& problem) {
  if (!problem.piecewise) bad("no piecewise block");
  return PiecewiseAffineMap(problem.piecewise->pieces, problem.piecewise->combinator, problem.piecewise->groups);
}

NonlinearMap build_nonlinear(const Problem& problem) {
  if (!problem.nonlinear) bad("no nonlinear block");
  const auto& nl = *problem.nonlinear;
  if (nl.family == "affine") return affine_nonlinear(nl.B, nl.c);
  if (nl.family == "tanh") return scaled_tanh(nl.a, nl.B, nl.c);
  bad("unknown nonlinear family '" + nl.family + "'");
}

}  // namespace proxtd
