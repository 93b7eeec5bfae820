#include "qctol/certificate_json.hpp"

namespace qctol {

namespace {

const json& need(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw JsonSchemaError(std::string("certificate: missing field \"") + key + "\"");
  return *it;
}

double num(const json& j, const char* what) {
  if (!j.is_number()) throw JsonSchemaError(std::string("certificate: \"") + what + "\" must be a number");
  return j.get<double>();
}

bool flag(const json& j, const char* what) {
  if (!j.is_boolean()) throw JsonSchemaError(std::string("certificate: \"") + what + "\" must be a boolean");
  return j.get<bool>();
}

}  // namespace

json certificate_to_json(const ThresholdCertificate& c) {
  json j;
  j["schema_version"] = kCertificateSchemaVersion;
  j["kind"] = c.kind;
  j["p_star"] = c.p_star;
  j["split"] = to_string(c.split);
  j["tight"] = c.tight;
  j["valid"] = c.valid;
  j["tolerance"] = c.tolerance;
  j["gate"] = matrix_to_json(c.gate);
  if (c.noise_lambda.size() > 0) j["noise_lambda"] = real_vector_to_json(c.noise_lambda);

  json lower = json::array();
  for (const WitnessPoint& w : c.lower_witness)
    lower.push_back({{"p", w.p}, {"min_pt_eigenvalue", w.min_pt_eigenvalue}, {"feasible", w.feasible}});
  json upper = json::array();
  for (std::size_t k = 0; k < c.upper_witness.size(); ++k) {
    const ProductDecomposition& d = c.upper_witness[k];
    json terms = json::array();
    for (const ProductTerm& t : d.terms)
      terms.push_back({{"weight", t.weight}, {"left", matrix_to_json(t.left)}, {"right", matrix_to_json(t.right)}});
    upper.push_back({{"split", to_string(d.split)},
                     {"weight", k < c.upper_weights.size() ? c.upper_weights[k] : 0.0},
                     {"residual", d.residual},
                     {"terms", std::move(terms)}});
  }
  json checks = json::object();
  for (const auto& [name, value] : c.checks) checks[name] = value;
  j["witnesses"] = {{"lower", std::move(lower)}, {"upper", std::move(upper)}, {"checks", std::move(checks)}};
  return j;
}

ThresholdCertificate certificate_from_json(const json& j) {
  require_only_keys(j, {"schema_version", "kind", "p_star", "split", "tight", "valid", "tolerance", "gate", "noise_lambda",
                        "witnesses"},
                    "certificate");
  const json& version = need(j, "schema_version");
  if (!version.is_number_integer() || version.get<int>() != kCertificateSchemaVersion)
    throw JsonSchemaError("certificate: unsupported schema_version");
  ThresholdCertificate c;
  const json& kind = need(j, "kind");
  if (!kind.is_string()) throw JsonSchemaError("certificate: \"kind\" must be a string");
  c.kind = kind.get<std::string>();
  c.p_star = num(need(j, "p_star"), "p_star");
  const json& split = need(j, "split");
  if (!split.is_string()) throw JsonSchemaError("certificate: \"split\" must be a string");
  try {
    c.split = split_kind_from_string(split.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw JsonSchemaError(std::string("certificate: ") + e.what());
  }
  c.tight = flag(need(j, "tight"), "tight");
  c.valid = flag(need(j, "valid"), "valid");
  c.tolerance = num(need(j, "tolerance"), "tolerance");
  c.gate = matrix_from_json(need(j, "gate"), "certificate.gate");
  if (j.contains("noise_lambda")) c.noise_lambda = real_vector_from_json(j["noise_lambda"], "certificate.noise_lambda");

  const json& w = need(j, "witnesses");
  require_only_keys(w, {"lower", "upper", "checks"}, "certificate.witnesses");
  if (w.contains("lower")) {
    if (!w["lower"].is_array()) throw JsonSchemaError("certificate: witnesses.lower must be an array");
    for (const json& p : w["lower"]) {
      require_only_keys(p, {"p", "min_pt_eigenvalue", "feasible"}, "certificate.witnesses.lower");
      c.lower_witness.push_back({num(need(p, "p"), "p"), num(need(p, "min_pt_eigenvalue"), "min_pt_eigenvalue"),
                                 flag(need(p, "feasible"), "feasible")});
    }
  }
  if (w.contains("upper")) {
    if (!w["upper"].is_array()) throw JsonSchemaError("certificate: witnesses.upper must be an array");
    for (const json& u : w["upper"]) {
      require_only_keys(u, {"split", "weight", "residual", "terms"}, "certificate.witnesses.upper");
      ProductDecomposition d;
      const json& s = need(u, "split");
      if (!s.is_string()) throw JsonSchemaError("certificate: upper split must be a string");
      try {
        d.split = split_kind_from_string(s.get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw JsonSchemaError(std::string("certificate: ") + e.what());
      }
      if (d.split == SplitKind::kBiEntangling) throw JsonSchemaError("certificate: upper witness needs a bipartite split");
      d.residual = num(need(u, "residual"), "residual");
      const json& terms = need(u, "terms");
      if (!terms.is_array()) throw JsonSchemaError("certificate: terms must be an array");
      for (const json& t : terms) {
        require_only_keys(t, {"weight", "left", "right"}, "certificate.witnesses.upper.terms");
        d.terms.push_back({num(need(t, "weight"), "weight"), matrix_from_json(need(t, "left"), "term.left"),
                           matrix_from_json(need(t, "right"), "term.right")});
      }
      c.upper_weights.push_back(num(need(u, "weight"), "weight"));
      c.upper_witness.push_back(std::move(d));
    }
  }
  if (w.contains("checks")) {
    if (!w["checks"].is_object()) throw JsonSchemaError("certificate: witnesses.checks must be an object");
    for (auto it = w["checks"].begin(); it != w["checks"].end(); ++it)
      c.checks.emplace_back(it.key(), num(it.value(), "check"));
  }
  return c;
}

}  // namespace qctol
