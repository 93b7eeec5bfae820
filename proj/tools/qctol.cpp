// qctol: thresholds, gate analysis, B-machine simulation and checks, as JSON.
//
// Exit codes: 0 success, 2 invalid input, 3 verification failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qctol/certificate_json.hpp"
#include "qctol/circuit_json.hpp"
#include "qctol/dense_oracle.hpp"
#include "qctol/octahedron.hpp"
#include "qctol/thresholds.hpp"

using namespace qctol;

namespace {

constexpr int kSchemaVersion = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitVerification = 3;
// Prior bound for the depolarized CNOT, reported for comparison only.
constexpr double kPriorCnotBound = 0.74;

struct Output {
  json body;
  int code = 0;
};

// JSON text with every float at 9 significant digits.
void write_json(std::ostream& os, const json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
      os << "null";
      return;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    std::string text = buf;
    // Keep it a float token so readers see 1.0 rather than 1.
    if (text.find_first_of(".eE") == std::string::npos) text += ".0";
    os << text;
  } else if (j.is_object() || j.is_array()) {
    const bool obj = j.is_object();
    if (j.empty()) {
      os << (obj ? "{}" : "[]");
      return;
    }
    const bool flat = !obj && std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
    os << (obj ? "{" : "[");
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) os << ",";
      first = false;
      if (flat)
        os << (j.size() > 1 && it != j.begin() ? " " : "");
      else
        os << "\n" << pad;
      if (obj) os << json(it.key()).dump() << ": ";
      write_json(os, *it, indent, depth + 1);
    }
    if (!flat) os << "\n" << close;
    os << (obj ? "}" : "]");
  } else {
    os << j.dump();
  }
}

std::string scalar_text(const json& j) {
  std::ostringstream os;
  write_json(os, j, 0, 0);
  return os.str();
}

void print_table(const json& j, const std::string& prefix) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) print_table(*it, prefix.empty() ? it.key() : prefix + "." + it.key());
    return;
  }
  if (j.is_array() && !j.empty() && (j[0].is_object() || j[0].is_array())) {
    for (std::size_t i = 0; i < j.size(); ++i) print_table(j[i], prefix + "[" + std::to_string(i) + "]");
    return;
  }
  std::printf("%-40s %s\n", prefix.c_str(), scalar_text(j).c_str());
}

json bloch_json(const BlochVector& b) { return json::array({b.x, b.y, b.z}); }

json checks_json(const std::vector<std::pair<std::string, double>>& checks) {
  json out = json::object();
  for (const auto& [k, v] : checks) out[k] = v;
  return out;
}

// thresholds cnot-depolarizing
Output cnot_depolarizing(double tol, const std::string& certificate_out, const std::string& verify_path) {
  Output out;
  if (!verify_path.empty()) {
    const ThresholdCertificate cert = certificate_from_json(read_json_file(verify_path));
    const VerificationReport rep = verify_certificate(cert);
    json checks = json::object();
    for (const auto& [k, v] : rep.checks) checks[k] = v;
    out.body = {{"certificate", verify_path}, {"kind", cert.kind}, {"p_star", cert.p_star}, {"valid", rep.valid},
                {"checks", checks}};
    out.code = rep.valid ? 0 : kExitVerification;
    return out;
  }
  if (!(tol > 0.0) || tol >= 0.5) throw std::invalid_argument("--tol must lie in (0, 0.5)");
  const CnotDepolarizingThreshold th = cnot_depolarizing_threshold(tol);
  const ThresholdCertificate cert = cnot_depolarizing_certificate(th.p_high);
  if (!certificate_out.empty()) {
    std::ofstream f(certificate_out);
    if (!f) throw std::invalid_argument("cannot write " + certificate_out);
    f << certificate_to_json(cert).dump(1) << "\n";
  }
  out.body = {{"p_star", th.p_star},
              {"p_low", th.p_low},
              {"p_high", th.p_high},
              {"tolerance", tol},
              {"tight_upper", cert.tight && cert.valid},
              {"certificate_valid", cert.valid},
              {"paper_comparison", kPriorCnotBound},
              {"checks", checks_json(cert.checks)}};
  out.code = cert.valid ? 0 : kExitVerification;
  return out;
}

Output clifford(double theta, const std::string& noise) {
  const PlaneThreshold t = plane_threshold(theta, noise_kind_from_string(noise));
  return {{{"theta", theta},
           {"noise", to_string(t.kind)},
           {"p_star", t.p},
           {"closed_form", t.analytic},
           {"noise_point", bloch_json(t.noise_point)}},
          0};
}

Matrix named_two_qubit_unitary(const std::string& name) {
  if (name == "cnot") return gates::cnot();
  if (name == "cz") return gates::cz();
  if (name == "swap") return gates::swap();
  if (name == "identity") return identity(4);
  throw std::invalid_argument("unknown two-qubit gate \"" + name + "\" (cnot|cz|swap|identity)");
}

Output split_command(const std::string& gate, const std::string& split, double tol) {
  const ThresholdCertificate cert = split_threshold(named_two_qubit_unitary(gate), split_kind_from_string(split), tol);
  return {{{"gate", gate},
           {"split", to_string(cert.split)},
           {"p_star", cert.p_star},
           {"tight_upper", cert.tight},
           {"certificate_valid", cert.valid},
           {"checks", checks_json(cert.checks)}},
          cert.valid ? 0 : kExitVerification};
}

Output analyze_gate(const std::string& name, const std::string& channel_path, const std::string& split_name) {
  const SplitKind kind = split_kind_from_string(split_name);
  if (kind == SplitKind::kBiEntangling) throw std::invalid_argument("--split must be S, SS or EB");
  const Channel channel = channel_path.empty() ? named_channel(name, 2) : load_channel(channel_path);
  if (channel.num_qubits() != 2) throw std::invalid_argument("analyze gate needs a two-qubit channel");
  const BipartiteSplit split = choi_split(kind);
  const DensityMatrix& rho = channel.choi().state();
  const RealVector pt = hermitian_eigenvalues(partial_transpose(rho, split));
  json body = {{"gate", channel_path.empty() ? name : channel_path},
               {"split", to_string(kind)},
               {"left", split.left},
               {"right", split.right},
               {"min_pt_eigenvalue", pt.minCoeff()},
               {"log_negativity", std::log2(pt.cwiseAbs().sum())}};
  if (channel.kraus().ops.size() == 1) {
    const Matrix& u = channel.kraus().ops.front();
    body["ebits"] = entanglement_entropy_pure(choi_vector_of_unitary(u), rho.labels(), split);
    // The symmetry-reduced bound only holds for Clifford gates.
    if (symmetry_group(u).is_local())
      body["lambda0_bound"] = max_ppt_lambda0(u, kind).lambda0;
    else
      body["lambda0_bound"] = nullptr;
  } else {
    body["ebits"] = nullptr;
    body["lambda0_bound"] = nullptr;
  }
  return {body, 0};
}

Output simulate(const std::string& path, std::int64_t shots, std::uint64_t seed, bool oracle, double alpha,
                int threads) {
  if (shots < 1) throw std::invalid_argument("--shots must be positive");
  const Circuit c = load_circuit(path);
  const Counts counts = run(c, shots, seed, threads);
  Output out{counts_to_json(counts, seed, shots), 0};
  if (oracle) {
    const ComparisonReport rep = compare(counts, run_dense(c), alpha);
    json table = json::array();
    for (const OutcomeRow& r : rep.table)
      table.push_back({{"outcome", r.outcome}, {"observed", r.observed}, {"expected", r.expected}});
    out.body["comparison"] = {{"tv_distance", rep.tv_distance}, {"chi2", rep.chi2},     {"dof", rep.dof},
                              {"chi2_pvalue", rep.chi2_pvalue}, {"alpha", rep.alpha},  {"pass", rep.pass},
                              {"table", table}};
    if (!rep.pass) out.code = kExitVerification;
  }
  return out;
}

Output verify_omega(int inputs, std::uint64_t seed) {
  const OmegaReport r = omega_analysis(inputs, seed);
  return {{{"marginal_error", r.marginal_error},
           {"valid_choi", r.valid_choi},
           {"outcome_probability", r.outcome_probability},
           {"ghz_fidelity", r.ghz_fidelity},
           {"product_inputs", r.product_inputs},
           {"min_output_pt_eigenvalue", r.min_output_pt_eigenvalue},
           {"outputs_separable", r.outputs_separable},
           {"bient_membership", to_string(r.membership)},
           {"genuine_tripartite", r.genuine_tripartite},
           {"pass", r.passed()}},
          r.passed() ? 0 : kExitVerification};
}

Output verify_observation0(int circuits, std::uint64_t seed, int ancillas, int threads) {
  const Observation0Report r = observation0_check(ancillas, circuits, seed, threads);
  return {{{"circuits", r.circuits},
           {"inputs_checked", r.inputs_checked},
           {"escapes", r.escapes},
           {"non_vertex_outputs", r.non_vertex_outputs},
           {"max_deviation", r.max_deviation},
           {"pass", r.passed()}},
          r.passed() ? 0 : kExitVerification};
}

Output verify_twirl(const std::string& group_name, const std::string& channel_path, std::uint64_t seed) {
  const GateSymmetryGroup group = symmetry_group(named_two_qubit_unitary(group_name));
  std::mt19937_64 rng(seed);
  const Channel channel = channel_path.empty() ? random_channel(2, rng) : load_channel(channel_path);
  if (channel.num_qubits() != 2) throw std::invalid_argument("twirl needs a two-qubit channel");
  const TwirlResult t = twirl(channel.choi(), group);
  const double sum = t.lambda.sum();
  const bool pass = t.off_diagonal <= 1e-10 && std::abs(sum - 1.0) <= 1e-10 && t.lambda.minCoeff() >= -1e-10;
  std::vector<double> lambda(t.lambda.data(), t.lambda.data() + t.lambda.size());
  return {{{"group", group_name},
           {"channel", channel_path.empty() ? "random(seed=" + std::to_string(seed) + ")" : channel_path},
           {"lambda", lambda},
           {"lambda_sum", sum},
           {"off_diagonal", t.off_diagonal},
           {"pass", pass}},
          pass ? 0 : kExitVerification};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise thresholds and classical simulation of bi-entangling circuits"};
  app.require_subcommand(1);
  // Lets --pretty follow the subcommand.
  app.fallthrough();
  bool pretty = false;
  app.add_flag("--pretty", pretty, "Print a key/value table instead of JSON");

  std::string invocation;
  for (int i = 0; i < argc; ++i) invocation += (i ? " " : "") + std::string(argv[i]);

  Output result;
  std::string command;

  auto* thresholds = app.add_subcommand("thresholds", "Noise thresholds")->require_subcommand(1);
  double tol = 1e-6;
  std::string cert_out, verify_path;
  auto* cnot = thresholds->add_subcommand("cnot-depolarizing", "Depolarized CNOT threshold with certificate");
  cnot->add_option("--tol", tol, "Bisection tolerance")->capture_default_str();
  cnot->add_option("--certificate-out", cert_out, "Write the certificate to this file");
  cnot->add_option("--verify", verify_path, "Replay a certificate file instead of computing");
  cnot->callback([&] {
    command = "thresholds cnot-depolarizing";
    result = cnot_depolarizing(tol, cert_out, verify_path);
  });

  double theta = 0.0;
  std::string noise = "generic";
  auto* cliff = thresholds->add_subcommand("clifford", "Noise needed to bring diag(1, e^{i theta}) into the octahedron");
  cliff->add_option("--theta", theta, "Phase angle in radians")->required();
  cliff->add_option("--noise", noise, "generic or dephasing")->capture_default_str();
  cliff->callback([&] {
    command = "thresholds clifford";
    result = clifford(theta, noise);
  });

  std::string gate = "cnot", split = "S";
  auto* split_cmd = thresholds->add_subcommand("split", "Depolarizing threshold across one Choi splitting");
  split_cmd->add_option("--gate", gate, "Named two-qubit gate")->capture_default_str();
  split_cmd->add_option("--split", split, "S, SS or EB")->required();
  split_cmd->add_option("--tol", tol, "Bisection tolerance")->capture_default_str();
  split_cmd->callback([&] {
    command = "thresholds split";
    result = split_command(gate, split, tol);
  });

  auto* analyze = app.add_subcommand("analyze", "Entanglement analysis")->require_subcommand(1);
  std::string name = "cnot", channel_path;
  auto* agate = analyze->add_subcommand("gate", "Entanglement of a gate's Choi state across a splitting");
  auto* name_opt = agate->add_option("--name", name, "Named two-qubit channel")->capture_default_str();
  agate->add_option("--channel", channel_path, "Channel JSON file")->excludes(name_opt);
  agate->add_option("--split", split, "S, SS or EB")->required();
  agate->callback([&] {
    command = "analyze gate";
    result = analyze_gate(name, channel_path, split);
  });

  std::string circuit_path;
  std::int64_t shots = 100000;
  std::uint64_t seed = 7;
  bool oracle = false;
  double alpha = 0.001;
  int threads = 0;
  auto* sim = app.add_subcommand("simulate", "Run a circuit on the pairing-list simulator");
  sim->add_option("--circuit", circuit_path, "Circuit JSON file")->required();
  sim->add_option("--shots", shots, "Number of shots")->capture_default_str();
  sim->add_option("--seed", seed, "Seed")->capture_default_str();
  sim->add_flag("--oracle", oracle, "Compare against dense evolution (at most 8 qubits)");
  sim->add_option("--alpha", alpha, "Significance level for --oracle")->capture_default_str();
  sim->add_option("--threads", threads, "Worker threads (0: QCTOL_THREADS or all cores)");
  sim->callback([&] {
    command = "simulate";
    result = simulate(circuit_path, shots, seed, oracle, alpha, threads);
  });

  auto* verify = app.add_subcommand("verify", "Checks of the structural claims")->require_subcommand(1);
  int inputs = 200;
  auto* vomega = verify->add_subcommand("omega", "Separability-preserving map outside the bi-entangling hull");
  vomega->add_option("--inputs", inputs, "Random product inputs")->capture_default_str();
  vomega->add_option("--seed", seed, "Seed")->capture_default_str();
  vomega->callback([&] {
    command = "verify omega";
    result = verify_omega(inputs, seed);
  });

  int circuits = 10000, ancillas = 2;
  auto* vobs = verify->add_subcommand("observation0", "Random Clifford circuits keep the octahedron");
  vobs->add_option("--circuits", circuits, "Number of random circuits")->capture_default_str();
  vobs->add_option("--seed", seed, "Seed")->capture_default_str();
  vobs->add_option("--ancillas", ancillas, "Ancilla qubits (0 to 2)")->capture_default_str();
  vobs->add_option("--threads", threads, "Worker threads");
  vobs->callback([&] {
    command = "verify observation0";
    result = verify_observation0(circuits, seed, ancillas, threads);
  });

  std::string group = "cnot";
  auto* vtwirl = verify->add_subcommand("twirl", "Twirl a two-qubit channel over a gate's symmetry group");
  vtwirl->add_option("--group", group, "Named gate whose symmetry group is used")->capture_default_str();
  vtwirl->add_option("--channel", channel_path, "Channel JSON file (random channel if absent)");
  vtwirl->add_option("--seed", seed, "Seed for the random channel")->capture_default_str();
  vtwirl->callback([&] {
    command = "verify twirl";
    result = verify_twirl(group, channel_path, seed);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ShotError& e) {
    std::cerr << "simulation error: " << e.what() << "\n";
    return kExitVerification;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerification;
  }

  json doc = {{"schema_version", kSchemaVersion}, {"command", command}, {"invocation", invocation}};
  for (auto it = result.body.begin(); it != result.body.end(); ++it) doc[it.key()] = *it;
  if (pretty) {
    print_table(doc, "");
  } else {
    write_json(std::cout, doc, 2, 0);
    std::cout << "\n";
  }
  return result.code;
}
