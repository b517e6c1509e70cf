#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dhpair/dh.hpp"
#include "dhpair/pencil.hpp"
#include "dhpair/region.hpp"
#include "dhpair/result.hpp"

namespace dhpair::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

class IoError : public Error {
 public:
  using Error::Error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
}

inline json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(origin + ": " + e.what());
  }
}

inline json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Mat matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw IoError("field '" + field + "': expected an array of rows");
  const std::size_t rows = j.size();
  if (rows == 0) return Mat(0, 0);
  if (!j[0].is_array()) throw IoError("field '" + field + "': row 0 is not an array");
  const std::size_t cols = j[0].size();
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw IoError("field '" + field + "': row " + std::to_string(i) + " has wrong length");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number())
        throw IoError("field '" + field + "': entry (" + std::to_string(i) + "," + std::to_string(c) +
                      ") is not a number");
      m(i, c) = j[i][c].get<double>();
    }
  }
  return m;
}

inline json pair_to_json(const MatrixPair& p) {
  return {{"E", matrix_to_json(p.E)}, {"A", matrix_to_json(p.A)}};
}

inline MatrixPair pair_from_json(const json& j) {
  if (!j.is_object() || !j.contains("E") || !j.contains("A"))
    throw IoError("pair: expected an object with fields 'E' and 'A'");
  try {
    return MatrixPair(matrix_from_json(j.at("E"), "E"), matrix_from_json(j.at("A"), "A"));
  } catch (const DimensionError& e) {
    throw IoError(std::string("pair: ") + e.what());
  }
}

// CSV holding either E stacked above A (2n x n) or [E A] side by side (n x 2n).
inline MatrixPair pair_from_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    int col = 0;
    while (std::getline(ls, cell, ',')) {
      ++col;
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw IoError("csv line " + std::to_string(lineno) + ", column " + std::to_string(col) +
                      ": not a number: '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError("csv line " + std::to_string(lineno) + ": expected " +
                    std::to_string(rows.front().size()) + " columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("csv: no data");
  const std::size_t r = rows.size(), c = rows.front().size();
  Mat m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t k = 0; k < c; ++k) m(i, k) = rows[i][k];
  if (r == 2 * c) return MatrixPair(m.topRows(c), m.bottomRows(c));
  if (c == 2 * r) return MatrixPair(m.leftCols(r), m.rightCols(r));
  throw IoError("csv: expected a 2n x n or n x 2n block, got " + std::to_string(r) + " x " +
                std::to_string(c));
}

inline std::string pair_to_csv(const MatrixPair& p) {
  std::ostringstream os;
  os.precision(17);
  for (const Mat* m : {&p.E, &p.A})
    for (Eigen::Index i = 0; i < m->rows(); ++i) {
      for (Eigen::Index j = 0; j < m->cols(); ++j) os << (j ? "," : "") << (*m)(i, j);
      os << '\n';
    }
  return os.str();
}

inline MatrixPair load_pair(const std::string& path) {
  const std::string text = read_file(path);
  const bool csv = path.size() >= 4 && path.substr(path.size() - 4) == ".csv";
  try {
    return csv ? pair_from_csv(text) : pair_from_json(parse_json(text, path));
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

inline json primitive_to_json(const RegionPrimitive& p) {
  json j = {{"kind", std::string(p.name())}};
  const auto names = kind_param_names(p.kind());
  for (std::size_t i = 0; i < names.size(); ++i) j[names[i]] = p.param(i);
  return j;
}

inline json region_to_json(const LmiRegion& r) {
  const auto& prims = r.primitives();
  if (prims.empty()) return {{"raw", {{"B", matrix_to_json(r.B())}, {"C", matrix_to_json(r.C())}}}};
  if (prims.size() == 1) return primitive_to_json(prims.front());
  json arr = json::array();
  for (const auto& p : prims) arr.push_back(primitive_to_json(p));
  return {{"intersect", arr}};
}

inline LmiRegion region_from_json(const json& j, const std::string& where = "region") {
  if (!j.is_object()) throw IoError(where + ": expected an object");
  if (j.contains("intersect")) {
    const json& arr = j.at("intersect");
    if (!arr.is_array() || arr.empty())
      throw IoError(where + ".intersect: expected a non-empty array");
    LmiRegion out = region_from_json(arr[0], where + ".intersect[0]");
    for (std::size_t i = 1; i < arr.size(); ++i)
      out = intersect(out, region_from_json(arr[i], where + ".intersect[" + std::to_string(i) + "]"));
    return out;
  }
  if (j.contains("raw")) {
    const json& raw = j.at("raw");
    if (!raw.is_object() || !raw.contains("B") || !raw.contains("C"))
      throw IoError(where + ".raw: expected fields 'B' and 'C'");
    try {
      return LmiRegion::raw(matrix_from_json(raw.at("B"), "B"), matrix_from_json(raw.at("C"), "C"));
    } catch (const RegionError& e) {
      throw IoError(where + ".raw: " + e.what());
    } catch (const DimensionError& e) {
      throw IoError(where + ".raw: " + e.what());
    }
  }
  if (!j.contains("kind") || !j.at("kind").is_string())
    throw IoError(where + ": expected 'kind', 'intersect' or 'raw'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "hurwitz") return hurwitz_region();
  if (kind == "schur") return schur_region();
  const auto pk = kind_from_name(kind);
  if (!pk) throw IoError(where + ".kind: unknown region kind '" + kind + "'");
  std::vector<double> params;
  for (const auto& name : kind_param_names(*pk)) {
    if (!j.contains(name) || !j.at(name).is_number())
      throw IoError(where + ": missing numeric field '" + name + "' for " + kind);
    params.push_back(j.at(name).get<double>());
  }
  try {
    return LmiRegion::from_primitive(RegionPrimitive::make(*pk, params));
  } catch (const RegionError& e) {
    throw IoError(where + ": " + e.what());
  }
}

inline LmiRegion load_region(const std::string& path) {
  return region_from_json(parse_json(read_file(path), path), path);
}

inline json dh_to_json(const DhParam& d) {
  return {{"schema_version", kSchemaVersion},
          {"T", matrix_to_json(d.T())},
          {"J", matrix_to_json(d.J())},
          {"R", matrix_to_json(d.R())},
          {"Q", matrix_to_json(d.Q())}};
}

inline DhParam dh_from_json(const json& j) {
  if (!j.is_object()) throw IoError("dh: expected an object");
  if (!j.contains("schema_version") || j.at("schema_version") != kSchemaVersion)
    throw IoError("dh: unsupported or missing schema_version (expected " +
                  std::to_string(kSchemaVersion) + ")");
  for (const char* f : {"T", "J", "R", "Q"})
    if (!j.contains(f)) throw IoError(std::string("dh: missing field '") + f + "'");
  try {
    return DhParam(matrix_from_json(j.at("T"), "T"), matrix_from_json(j.at("J"), "J"),
                   matrix_from_json(j.at("R"), "R"), matrix_from_json(j.at("Q"), "Q"));
  } catch (const DimensionError& e) {
    throw IoError(std::string("dh: ") + e.what());
  }
}

inline json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline json verdict_to_json(const AdmissibilityVerdict& v) {
  json ev = json::array();
  for (const auto& fe : v.report.finite_eigenvalues) ev.push_back(complex_to_json(fe.lambda));
  return {{"admissible", v.admissible},
          {"reasons", v.reasons},
          {"regular", v.report.is_regular},
          {"impulse_free", v.report.is_impulse_free},
          {"rank_E", v.report.rank_E},
          {"num_finite", v.report.num_finite()},
          {"num_infinite", v.report.num_infinite},
          {"worst_margin", std::isfinite(v.worst_margin) ? json(v.worst_margin) : json(nullptr)},
          {"finite_eigenvalues", ev}};
}

inline json result_to_json(const SolveResult& r, const std::string& trace_path = "") {
  json j = {{"schema_version", kSchemaVersion},
            {"algorithm", r.algorithm},
            {"relative_error", r.relative_error},
            {"objective", r.objective},
            {"iterations", r.iterations},
            {"elapsed_s", r.elapsed_s},
            {"delta_shift", r.delta_shift},
            {"admissible", r.admissible},
            {"diagnostics", r.diagnostics},
            {"pair", pair_to_json(r.realized)},
            {"dh", dh_to_json(r.param)},
            {"verdict", verdict_to_json(r.verdict)}};
  if (!trace_path.empty()) j["trace_path"] = trace_path;
  return j;
}

}  // namespace dhpair::io
