#include "qctol/channel_json.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace qctol {

namespace {

[[noreturn]] void fail(const std::string& what, const std::string& why) {
  throw JsonSchemaError(what + ": " + why);
}

const json& field(const json& obj, const char* key, const std::string& what) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(what, std::string("missing field \"") + key + "\"");
  return *it;
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) fail(what, "expected a number");
  return j.get<double>();
}

int dimension_of(const json& j, const std::string& what) {
  if (!j.is_number_integer()) fail(what, "\"dim\" must be an integer");
  const int d = j.get<int>();
  if (d < 2 || (d & (d - 1)) != 0) fail(what, "\"dim\" must be a power of two >= 2");
  return d;
}

void check_square(const Matrix& m, Eigen::Index d, const std::string& what) {
  if (m.rows() != d || m.cols() != d) fail(what, "expected a " + std::to_string(d) + "x" + std::to_string(d) + " matrix");
}

}  // namespace

double round_sig9(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return std::strtod(buf, nullptr);
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) fail(what, "expected a nonempty array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) fail(what, "rows must be nonempty arrays");
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) fail(what, "ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& e = row[static_cast<std::size_t>(c)];
      if (!e.is_array() || e.size() != 2) fail(what, "entries must be [re, im] pairs");
      m(r, c) = cplx(number(e[0], what), number(e[1], what));
    }
  }
  return m;
}

json real_vector_to_json(const RealVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

RealVector real_vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) fail(what, "expected an array of numbers");
  RealVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], what);
  return v;
}

void require_only_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& what) {
  if (!obj.is_object()) fail(what, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) known = known || it.key() == k;
    if (!known) fail(what, "unknown field \"" + it.key() + "\"");
  }
}

MeasurePrepare measure_prepare_from_json(const json& data, const std::string& what) {
  if (!data.is_array() || data.empty()) fail(what, "measure_prepare data must be a nonempty list of [M, rho] pairs");
  std::vector<Matrix> povm, prepared;
  for (const json& pair : data) {
    if (!pair.is_array() || pair.size() != 2) fail(what, "each measure_prepare entry must be [M, rho]");
    povm.push_back(matrix_from_json(pair[0], what + ".M"));
    prepared.push_back(matrix_from_json(pair[1], what + ".rho"));
  }
  try {
    return MeasurePrepare(std::move(povm), std::move(prepared));
  } catch (const std::invalid_argument& e) {
    fail(what, e.what());
  }
}

Channel channel_from_json(const json& j) {
  const std::string what = "channel";
  require_only_keys(j, {"kind", "dim", "data", "name"}, what);
  const json& kind_j = field(j, "kind", what);
  if (!kind_j.is_string()) fail(what, "\"kind\" must be a string");
  const std::string kind = kind_j.get<std::string>();
  std::string name;
  if (j.contains("name")) {
    if (!j["name"].is_string()) fail(what, "\"name\" must be a string");
    name = j["name"].get<std::string>();
  }

  try {
    if (kind == "named") {
      if (j.contains("data")) fail(what, "named channels take no \"data\"");
      if (name.empty()) fail(what, "named channels need \"name\"");
      int qubits = 0;
      if (j.contains("dim")) qubits = qubit_count(dimension_of(j["dim"], what));
      Channel c = named_channel(name, qubits);
      if (qubits != 0 && c.num_qubits() != qubits) fail(what, "\"dim\" does not match the named channel");
      return c;
    }
    const int d = dimension_of(field(j, "dim", what), what);
    const json& data = field(j, "data", what);
    if (kind == "unitary") {
      const Matrix u = matrix_from_json(data, what + ".data");
      check_square(u, d, what);
      if (!is_unitary(u, 1e-9)) fail(what, "matrix is not unitary");
      return unitary(u, name);
    }
    if (kind == "kraus") {
      if (!data.is_array() || data.empty()) fail(what, "kraus data must be a nonempty list of matrices");
      std::vector<Matrix> ops;
      for (const json& k : data) {
        ops.push_back(matrix_from_json(k, what + ".data"));
        check_square(ops.back(), d, what);
      }
      return Channel(choi_from_kraus(KrausSet(std::move(ops))), name);
    }
    if (kind == "choi") {
      const Matrix c = matrix_from_json(data, what + ".data");
      check_square(c, static_cast<Eigen::Index>(d) * d, what);
      return Channel(ChoiState(c), name);
    }
    if (kind == "measure_prepare") {
      MeasurePrepare mp = measure_prepare_from_json(data, what + ".data");
      check_square(mp.povm.front(), d, what);
      return measure_prepare(mp, name);
    }
  } catch (const JsonSchemaError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    fail(what, e.what());
  }
  fail(what, "unknown kind \"" + kind + "\"");
}

json channel_to_json(const Channel& channel) {
  json j;
  j["kind"] = "choi";
  j["dim"] = channel.dim();
  j["data"] = matrix_to_json(channel.choi().matrix());
  if (!channel.name().empty()) j["name"] = channel.name();
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw JsonSchemaError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw JsonSchemaError(path + ": " + e.what());
  }
}

Channel load_channel(const std::string& path) { return channel_from_json(read_json_file(path)); }

}  // namespace qctol
