#pragma once

// JSON forms of matrix families, automata, LQ problems and certificates.
//
//   family:      {"n": 3, "matrices": [[[..],..], ...], "names": [...]}
//   automaton:   {"m": 2, "p": 4, "delta": [[j, ...] per node], "labels": [...]}
//   lq problem:  {"n": 2, "gamma": 1.0, "modes": [{"A": .., "B": .., "D": ..}, ...]}
//   certificate: {"rho": r, "automaton": {..}, "X": [matrix, ...],
//                 "epsilon": e, "family_hash": "<16 hex digits>"}
//
// Matrices are row-major nested arrays.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tropkraus/automaton.hpp"
#include "tropkraus/kraus.hpp"
#include "tropkraus/matkernel.hpp"
#include "tropkraus/riccati.hpp"

namespace tropkraus::io {

using json = nlohmann::ordered_json;

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Rectangular nested array of numbers. An empty row list or rows of length
/// zero give a matrix with `rows_hint` rows and no columns.
inline Matrix matrix_from_json(const json& j, const std::string& what, Index rows_hint = 0) {
  if (!j.is_array()) throw InputError(what + ": expected an array of rows");
  if (j.empty()) return Matrix(rows_hint, 0);
  const auto rows = static_cast<Index>(j.size());
  if (!j[0].is_array()) throw InputError(what + ": rows must be arrays");
  const auto cols = static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw InputError(what + ": ragged rows");
    for (Index c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw InputError(what + ": non-numeric entry");
      m(i, c) = v.get<double>();
    }
  }
  if (!m.allFinite()) throw InputError(what + ": non-finite entry");
  return m;
}

inline json family_to_json(const MatrixFamily& f) {
  json j;
  j["n"] = f.dim();
  j["matrices"] = json::array();
  for (const auto& a : f.matrices()) j["matrices"].push_back(matrix_to_json(a));
  if (!f.names().empty()) j["names"] = f.names();
  return j;
}

inline MatrixFamily family_from_json(const json& j) {
  if (!j.is_object() || !j.contains("matrices")) throw InputError("family: expected an object with \"matrices\"");
  const auto& ms = j["matrices"];
  if (!ms.is_array() || ms.empty()) throw InputError("family: \"matrices\" must be a non-empty array");
  std::vector<SquareMatrix> mats;
  for (std::size_t s = 0; s < ms.size(); ++s) {
    mats.push_back(matrix_from_json(ms[s], "family matrix " + std::to_string(s)));
    if (mats.back().rows() != mats.back().cols()) throw InputError("family matrix " + std::to_string(s) + " is not square");
  }
  if (j.contains("n")) {
    const auto n = j["n"].get<Index>();
    for (const auto& a : mats) {
      if (a.rows() != n) throw InputError("family: matrix dimension disagrees with \"n\" = " + std::to_string(n));
    }
  }
  std::vector<std::string> names;
  if (j.contains("names")) names = j["names"].get<std::vector<std::string>>();
  try {
    return MatrixFamily(std::move(mats), std::move(names));
  } catch (const UsageError& e) {
    throw InputError(std::string("family: ") + e.what());
  }
}

inline json automaton_to_json(const Automaton& a) {
  json j;
  j["m"] = a.alphabet_size();
  j["p"] = a.node_count();
  json delta = json::array();
  for (std::size_t i = 0; i < a.node_count(); ++i) {
    json row = json::array();
    for (std::size_t s = 0; s < a.alphabet_size(); ++s) row.push_back(a.next(i, s));
    delta.push_back(std::move(row));
  }
  j["delta"] = std::move(delta);
  j["labels"] = a.labels();
  return j;
}

inline Automaton automaton_from_json(const json& j) {
  try {
    const auto m = j.at("m").get<std::size_t>();
    const auto p = j.at("p").get<std::size_t>();
    const auto& d = j.at("delta");
    if (!d.is_array() || d.size() != p) throw InputError("automaton: \"delta\" must have one row per node");
    std::vector<std::size_t> delta;
    delta.reserve(m * p);
    for (const auto& row : d) {
      if (!row.is_array() || row.size() != m) throw InputError("automaton: each delta row needs m entries");
      for (const auto& v : row) delta.push_back(v.get<std::size_t>());
    }
    std::vector<std::string> labels;
    if (j.contains("labels")) labels = j["labels"].get<std::vector<std::string>>();
    return Automaton(m, p, std::move(delta), std::move(labels));
  } catch (const json::exception& e) {
    throw InputError(std::string("automaton: ") + e.what());
  } catch (const UsageError& e) {
    throw InputError(e.what());
  }
}

inline json lq_to_json(const LQProblem& prob) {
  json j;
  j["n"] = prob.dim();
  j["gamma"] = prob.gamma();
  j["modes"] = json::array();
  for (const auto& md : prob.modes()) {
    json mj;
    mj["A"] = matrix_to_json(md.a);
    mj["B"] = matrix_to_json(md.b);
    mj["D"] = matrix_to_json(md.d.mat());
    j["modes"].push_back(std::move(mj));
  }
  return j;
}

inline LQProblem lq_from_json(const json& j) {
  try {
    const double gamma = j.at("gamma").get<double>();
    const auto& ms = j.at("modes");
    if (!ms.is_array() || ms.empty()) throw InputError("lq: \"modes\" must be a non-empty array");
    std::vector<LQMode> modes;
    for (std::size_t s = 0; s < ms.size(); ++s) {
      const std::string tag = "lq mode " + std::to_string(s);
      Matrix a = matrix_from_json(ms[s].at("A"), tag + " A");
      Matrix b = matrix_from_json(ms[s].at("B"), tag + " B", a.rows());
      Matrix d = matrix_from_json(ms[s].at("D"), tag + " D");
      if (d.rows() != d.cols()) throw InputError(tag + ": D is not square");
      if ((d - d.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + d.cwiseAbs().maxCoeff())) {
        throw InputError(tag + ": D is not symmetric");
      }
      modes.push_back({std::move(a), std::move(b), SymMatrix(d)});
    }
    LQProblem prob(std::move(modes), gamma);
    if (j.contains("n") && j["n"].get<Index>() != prob.dim()) throw InputError("lq: \"n\" disagrees with the matrices");
    return prob;
  } catch (const json::exception& e) {
    throw InputError(std::string("lq: ") + e.what());
  } catch (const UsageError& e) {
    throw InputError(std::string("lq: ") + e.what());
  }
}

namespace detail {

/// 64-bit FNV-1a over little-endian words.
class Fnv1a {
 public:
  void word(std::uint64_t w) {
    for (int b = 0; b < 8; ++b) {
      h_ ^= (w >> (8 * b)) & 0xffU;
      h_ *= 0x100000001b3ULL;
    }
  }
  void real(double x) { word(std::bit_cast<std::uint64_t>(x)); }
  void matrix(const Matrix& m) {
    word(static_cast<std::uint64_t>(m.rows()));
    word(static_cast<std::uint64_t>(m.cols()));
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) real(m(i, j));
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
    return buf;
  }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace detail

/// FNV-1a (64 bit) over n, m and the IEEE-754 bit patterns of all entries in
/// row-major order, as 16 lowercase hex digits.
inline std::string family_hash(const MatrixFamily& f) {
  detail::Fnv1a h;
  h.word(static_cast<std::uint64_t>(f.dim()));
  h.word(static_cast<std::uint64_t>(f.size()));
  for (const auto& a : f.matrices())
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = 0; j < a.cols(); ++j) h.real(a(i, j));
  return h.hex();
}

inline std::string lq_hash(const LQProblem& prob) {
  detail::Fnv1a h;
  h.word(static_cast<std::uint64_t>(prob.dim()));
  h.word(static_cast<std::uint64_t>(prob.mode_count()));
  h.real(prob.gamma());
  for (const auto& md : prob.modes()) {
    h.matrix(md.a);
    h.matrix(md.b);
    h.matrix(md.d.mat());
  }
  return h.hex();
}

struct Certificate {
  double rho = 0.0;
  Automaton automaton;
  KrausState x;
  double epsilon = 0.0;
  std::string family_hash;
  std::optional<double> tau;  // present for value-function exports
};

inline json certificate_to_json(const Certificate& c) {
  json j;
  j["rho"] = c.rho;
  j["automaton"] = automaton_to_json(c.automaton);
  j["X"] = json::array();
  for (const auto& b : c.x.blocks()) j["X"].push_back(matrix_to_json(b.mat()));
  j["epsilon"] = c.epsilon;
  j["family_hash"] = c.family_hash;
  if (c.tau) j["tau"] = *c.tau;
  return j;
}

inline Certificate certificate_from_json(const json& j) {
  try {
    Automaton aut = automaton_from_json(j.at("automaton"));
    const auto& xs = j.at("X");
    if (!xs.is_array() || xs.size() != aut.node_count()) throw InputError("certificate: need one X matrix per node");
    std::vector<SymMatrix> blocks;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      Matrix m = matrix_from_json(xs[k], "certificate X_" + std::to_string(k));
      if (m.rows() != m.cols()) throw InputError("certificate: X_" + std::to_string(k) + " is not square");
      blocks.emplace_back(m);
    }
    std::optional<double> tau;
    if (j.contains("tau")) tau = j["tau"].get<double>();
    return Certificate{j.at("rho").get<double>(), std::move(aut), KrausState(std::move(blocks)),
                       j.value("epsilon", 0.0), j.at("family_hash").get<std::string>(), tau};
  } catch (const json::exception& e) {
    throw InputError(std::string("certificate: ") + e.what());
  } catch (const UsageError& e) {
    throw InputError(std::string("certificate: ") + e.what());
  }
}

/// Parses a JSON file, reporting syntax errors as "path:line:column: message".
inline json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t k = 0; k < stop; ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON (" + e.what() +
                     ")");
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace tropkraus::io
