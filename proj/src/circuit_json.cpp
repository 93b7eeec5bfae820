#include "qctol/circuit_json.hpp"

#include <map>

namespace qctol {

namespace {

[[noreturn]] void fail(const std::string& what, const std::string& why) { throw JsonSchemaError(what + ": " + why); }

const json& field(const json& obj, const char* key, const std::string& what) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(what, std::string("missing field \"") + key + "\"");
  return *it;
}

std::vector<KrausPair> kraus_pairs_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) fail(what, "expected a list of [A, B] pairs");
  std::vector<KrausPair> out;
  for (const json& pair : j) {
    if (!pair.is_array() || pair.size() != 2) fail(what, "each entry must be [A, B]");
    KrausPair kp{matrix_from_json(pair[0], what + ".A"), matrix_from_json(pair[1], what + ".B")};
    if (kp.first.rows() != 2 || kp.first.cols() != 2 || kp.second.rows() != 2 || kp.second.cols() != 2)
      fail(what, "Kraus factors must be 2x2");
    out.push_back(std::move(kp));
  }
  return out;
}

json kraus_pairs_to_json(const std::vector<KrausPair>& pairs) {
  json out = json::array();
  for (const KrausPair& kp : pairs) out.push_back({matrix_to_json(kp.first), matrix_to_json(kp.second)});
  return out;
}

std::vector<int> int_list(const json& j, const std::string& what) {
  if (!j.is_array()) fail(what, "expected a list of integers");
  std::vector<int> out;
  for (const json& e : j) {
    if (!e.is_number_integer()) fail(what, "expected a list of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

}  // namespace

std::shared_ptr<const BiEntanglingGateSpec> bient_spec_from_json(const json& j) {
  const std::string what = "bient_spec";
  if (!j.is_object()) fail(what, "expected an object");
  try {
    if (j.contains("named")) {
      require_only_keys(j, {"named", "p"}, what);
      if (!j["named"].is_string()) fail(what, "\"named\" must be a string");
      const std::string name = j["named"].get<std::string>();
      if (name == "noisy_cnot") {
        const json& p = field(j, "p", what);
        if (!p.is_number()) fail(what, "\"p\" must be a number");
        return std::make_shared<const BiEntanglingGateSpec>(noisy_cnot_spec(p.get<double>()));
      }
      if (name == "swap") {
        if (j.contains("p")) fail(what, "swap takes no \"p\"");
        return std::make_shared<const BiEntanglingGateSpec>(swap_spec());
      }
      fail(what, "unknown named spec \"" + name + "\" (noisy_cnot|swap)");
    }
    require_only_keys(j, {"weights", "separable", "swap", "measure_prepare", "reference", "name"}, what);
    const RealVector w = real_vector_from_json(field(j, "weights", what), what + ".weights");
    if (w.size() != 3) fail(what, "\"weights\" needs three entries");
    std::vector<KrausPair> sep, swp;
    if (j.contains("separable")) sep = kraus_pairs_from_json(j["separable"], what + ".separable");
    if (j.contains("swap")) swp = kraus_pairs_from_json(j["swap"], what + ".swap");
    std::optional<MeasurePrepare> eb;
    if (j.contains("measure_prepare")) eb = measure_prepare_from_json(j["measure_prepare"], what + ".measure_prepare");
    std::optional<Matrix> ref;
    if (j.contains("reference")) ref = matrix_from_json(j["reference"], what + ".reference");
    std::string name;
    if (j.contains("name")) {
      if (!j["name"].is_string()) fail(what, "\"name\" must be a string");
      name = j["name"].get<std::string>();
    }
    return std::make_shared<const BiEntanglingGateSpec>(std::array<double, 3>{w(0), w(1), w(2)}, std::move(sep),
                                                        std::move(swp), std::move(eb), std::move(ref), name);
  } catch (const JsonSchemaError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    fail(what, e.what());
  }
}

json bient_spec_to_json(const BiEntanglingGateSpec& spec) {
  json j;
  j["weights"] = {spec.weights()[0], spec.weights()[1], spec.weights()[2]};
  if (!spec.separable().empty()) j["separable"] = kraus_pairs_to_json(spec.separable());
  if (!spec.swap().empty()) j["swap"] = kraus_pairs_to_json(spec.swap());
  if (spec.eb()) {
    json mp = json::array();
    for (std::size_t k = 0; k < spec.eb()->povm.size(); ++k)
      mp.push_back({matrix_to_json(spec.eb()->povm[k]), matrix_to_json(spec.eb()->prepared[k])});
    j["measure_prepare"] = std::move(mp);
  }
  if (!spec.name().empty()) j["name"] = spec.name();
  return j;
}

Circuit circuit_from_json(const json& j) {
  const std::string what = "circuit";
  require_only_keys(j, {"n_qubits", "init", "gates", "measure", "pad"}, what);
  Circuit c;
  const json& n = field(j, "n_qubits", what);
  if (!n.is_number_integer() || n.get<int>() < 1) fail(what, "\"n_qubits\" must be a positive integer");
  c.n_qubits = n.get<int>();
  if (j.contains("pad")) {
    if (!j["pad"].is_boolean()) fail(what, "\"pad\" must be a boolean");
    c.pad = j["pad"].get<bool>();
  }

  if (j.contains("init")) {
    const json& init = j["init"];
    if (!init.is_array() || static_cast<int>(init.size()) != c.n_qubits)
      fail(what, "\"init\" needs one entry per qubit");
    for (const json& e : init) {
      try {
        c.init.push_back(e.is_string() ? init_state_from_ref(e.get<std::string>()) : matrix_from_json(e, what + ".init"));
      } catch (const JsonSchemaError&) {
        throw;
      } catch (const std::invalid_argument& ex) {
        fail(what + ".init", ex.what());
      }
    }
  } else {
    c.init.assign(static_cast<std::size_t>(c.n_qubits), init_state_from_ref("0"));
  }

  // Named specs are costly to build; share them within one circuit.
  std::map<std::string, std::shared_ptr<const BiEntanglingGateSpec>> spec_cache;
  const json& gates = field(j, "gates", what);
  if (!gates.is_array()) fail(what, "\"gates\" must be a list");
  for (std::size_t g = 0; g < gates.size(); ++g) {
    const std::string gw = what + ".gates[" + std::to_string(g) + "]";
    const json& gj = gates[g];
    require_only_keys(gj, {"type", "targets", "channel", "bient_spec"}, gw);
    const json& type = field(gj, "type", gw);
    if (!type.is_string() || (type != "1q" && type != "2q")) fail(gw, "\"type\" must be \"1q\" or \"2q\"");
    const int arity = type == "1q" ? 1 : 2;
    Gate gate;
    gate.targets = int_list(field(gj, "targets", gw), gw + ".targets");
    if (static_cast<int>(gate.targets.size()) != arity) fail(gw, "target count does not match \"type\"");
    if (gj.contains("channel")) {
      const json& ch = gj["channel"];
      try {
        gate.channel = std::make_shared<const Channel>(ch.is_string() ? named_channel(ch.get<std::string>(), arity)
                                                                      : channel_from_json(ch));
      } catch (const JsonSchemaError& e) {
        fail(gw, e.what());
      } catch (const std::invalid_argument& e) {
        fail(gw, e.what());
      }
    }
    if (gj.contains("bient_spec")) {
      const std::string key = gj["bient_spec"].dump();
      auto it = spec_cache.find(key);
      if (it == spec_cache.end()) {
        try {
          it = spec_cache.emplace(key, bient_spec_from_json(gj["bient_spec"])).first;
        } catch (const JsonSchemaError& e) {
          fail(gw, e.what());
        }
      }
      gate.spec = it->second;
    }
    c.gates.push_back(std::move(gate));
  }
  c.measure = int_list(field(j, "measure", what), what + ".measure");
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    fail(what, e.what());
  }
  return c;
}

json circuit_to_json(const Circuit& circuit) {
  json j;
  j["n_qubits"] = circuit.n_qubits;
  json init = json::array();
  for (const Matrix& m : circuit.init) init.push_back(matrix_to_json(m));
  j["init"] = std::move(init);
  json gates = json::array();
  for (const Gate& g : circuit.gates) {
    json gj;
    gj["type"] = g.targets.size() == 1 ? "1q" : "2q";
    gj["targets"] = g.targets;
    if (g.channel) gj["channel"] = channel_to_json(*g.channel);
    if (g.spec) gj["bient_spec"] = bient_spec_to_json(*g.spec);
    gates.push_back(std::move(gj));
  }
  j["gates"] = std::move(gates);
  j["measure"] = circuit.measure;
  if (circuit.pad) j["pad"] = true;
  return j;
}

Circuit load_circuit(const std::string& path) { return circuit_from_json(read_json_file(path)); }

json counts_to_json(const Counts& counts, std::uint64_t seed, std::int64_t shots) {
  json c = json::object();
  for (const auto& [k, v] : counts) c[k] = v;
  return {{"counts", std::move(c)}, {"metadata", {{"seed", seed}, {"shots", shots}, {"version", QCTOL_VERSION}}}};
}

}  // namespace qctol
