#pragma once

// Monte-Carlo simulator for circuits of bi-entangling two-qubit gates.
//
// The state is a perfect matching of qubits (the pairing list) plus one
// 4x4 real matrix per pair, R(i, j) = Tr[rho sigma_i (x) sigma_j] with i for
// the lower qubit id. Gates inside a pair update R deterministically;
// gates across pairs sample one branch of the gate's decomposition into
// separable, separable+swap and entanglement-breaking parts. Each update
// touches at most two pairs, so the cost per gate does not depend on the
// number of qubits.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qctol/channels.hpp"

namespace qctol {

using PairMatrix = Eigen::Matrix4d;
using Ptm1 = Eigen::Matrix4d;
using Ptm2 = Eigen::Matrix<double, 16, 16>;

/// A on the first target, B on the second.
struct KrausPair {
  Matrix first;
  Matrix second;
};

/// weights = (separable, separable+swap, entanglement breaking).
class BiEntanglingGateSpec {
 public:
  // Throws std::invalid_argument if the weights are not a distribution, a
  // branch with positive weight is empty or not trace preserving to 1e-9, or
  // the mixture differs from `reference` (a 16x16 Choi) by more than 1e-8.
  BiEntanglingGateSpec(std::array<double, 3> weights, std::vector<KrausPair> separable, std::vector<KrausPair> swap,
                       std::optional<MeasurePrepare> eb, std::optional<Matrix> reference = std::nullopt,
                       std::string name = {});

  const std::array<double, 3>& weights() const { return weights_; }
  const std::vector<KrausPair>& separable() const { return separable_; }
  const std::vector<KrausPair>& swap() const { return swap_; }
  const std::optional<MeasurePrepare>& eb() const { return eb_; }
  const std::string& name() const { return name_; }
  // The weighted mixture of the three branches.
  const Channel& channel() const { return *channel_; }

 private:
  std::array<double, 3> weights_;
  std::vector<KrausPair> separable_;
  std::vector<KrausPair> swap_;
  std::optional<MeasurePrepare> eb_;
  std::string name_;
  std::shared_ptr<const Channel> channel_;
};

// Depolarizing CNOT (control first) as separable + EB branches. Needs
// 2/3 <= p <= 1, where the outer terms become separable across input|output.
BiEntanglingGateSpec noisy_cnot_spec(double p);
// Pure logical swap.
BiEntanglingGateSpec swap_spec();
// Bell-basis measurement; outcome k reprepares prepared[k] on the targets.
MeasurePrepare bell_measurement(std::vector<Matrix> prepared);
// Kraus pairs of a single-qubit product channel a (x) b.
std::vector<KrausPair> product_kraus_pairs(const Channel& a, const Channel& b);

struct Gate {
  std::vector<int> targets;                        // one or two qubits
  std::shared_ptr<const Channel> channel;          // required for one-qubit gates
  std::shared_ptr<const BiEntanglingGateSpec> spec;  // required for gates across pairs
};

struct Circuit {
  int n_qubits = 0;
  std::vector<Matrix> init;  // one 2x2 density matrix per qubit
  std::vector<Gate> gates;
  std::vector<int> measure;
  // Odd qubit counts get an idle |0> partner instead of an error.
  bool pad = false;

  // Throws std::invalid_argument on bad targets, init states or arities.
  void validate() const;

  Circuit& add(const Channel& channel, int target);
  Circuit& add(const Channel& channel, int a, int b);
  Circuit& add(std::shared_ptr<const BiEntanglingGateSpec> spec, int a, int b);
};

// "0", "1", "+", "-", "+i", "-i" or "mixed".
Matrix init_state_from_ref(const std::string& ref);

// Builds a circuit of n qubits all starting in |0>.
Circuit make_circuit(int n_qubits, std::vector<int> measure = {});

struct PairState {
  std::array<int, 2> qubits{};  // ascending
  PairMatrix r = PairMatrix::Zero();
};

struct MachineState {
  std::vector<int> partner;
  std::vector<int> pair_index;
  std::vector<PairState> pairs;

  int num_qubits() const { return static_cast<int>(partner.size()); }
  const PairState& pair_of(int q) const { return pairs[pair_index[q]]; }
  bool is_perfect_matching() const;
  // Reals held in pair vectors: 16 per pair.
  std::size_t state_size() const { return pairs.size() * 16; }
};

/// Raised when a shot cannot continue (inconsistent branch weights or a
/// conditional state that is not PSD beyond the repair threshold).
class ShotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Counter-based generator: every draw is a hash of (seed, shot, stream,
/// draw index), so shots are reproducible in any order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t shot);
  void set_stream(std::uint64_t stream);
  double uniform();

 private:
  std::uint64_t key_;
  std::uint64_t stream_ = 0;
  std::uint64_t draw_ = 0;
};

Ptm1 ptm1_of(const Channel& channel);
Ptm2 ptm2_of(const Channel& channel);

struct CompiledKrausPair {
  Ptm1 first;
  Ptm1 second;
};

struct CompiledSpec {
  std::array<double, 3> weights{};
  std::vector<CompiledKrausPair> separable;
  std::vector<CompiledKrausPair> swap;
  std::vector<PairMatrix> povm;      // Tr[M_k sigma_P (x) sigma_Q]
  std::vector<PairMatrix> prepared;  // Pauli matrix of rho_k
  Ptm2 in_pair;                      // whole channel, for targets sharing a pair
};

CompiledSpec compile_spec(const BiEntanglingGateSpec& spec);

using BranchTrace = std::vector<std::string>;

MachineState init_machine(const Circuit& circuit);
void apply_1q(MachineState& s, const Ptm1& ptm, int target);
// Throws std::invalid_argument unless a and b are partners.
void apply_2q_in_pair(MachineState& s, const Ptm2& ptm, int a, int b);
void apply_2q_cross_pair(MachineState& s, const CompiledSpec& spec, int a, int b, CounterRng& rng,
                         BranchTrace* trace = nullptr);
void separable_branch(MachineState& s, const std::vector<CompiledKrausPair>& pairs, int a, int b, CounterRng& rng,
                      BranchTrace* trace = nullptr);
void swap_branch(MachineState& s, const std::vector<CompiledKrausPair>& pairs, int a, int b, CounterRng& rng,
                 BranchTrace* trace = nullptr);
void eb_branch(MachineState& s, const std::vector<PairMatrix>& povm, const std::vector<PairMatrix>& prepared, int a,
               int b, CounterRng& rng, BranchTrace* trace = nullptr);
// Samples a computational-basis measurement and conditions the pair.
int measure_qubit(MachineState& s, int q, CounterRng& rng);

// 4x4 density matrix of a pair (lower qubit first).
Matrix pair_density(const PairState& pair);

class CompiledCircuit {
 public:
  explicit CompiledCircuit(const Circuit& circuit);

  const Circuit& circuit() const { return circuit_; }
  const MachineState& initial_state() const { return initial_; }

  struct Step {
    std::array<int, 2> targets{};
    int arity = 1;
    Ptm1 one = Ptm1::Zero();
    Ptm2 two = Ptm2::Zero();           // whole channel in target order (a, b)
    Ptm2 two_reversed = Ptm2::Zero();  // the same with b as the first index
    std::shared_ptr<const CompiledSpec> spec;  // null for channel-only two-qubit gates
  };
  const std::vector<Step>& steps() const { return steps_; }

 private:
  Circuit circuit_;
  MachineState initial_;
  std::vector<Step> steps_;
};

struct ShotResult {
  std::vector<int> bits;
  BranchTrace branch_trace;
};

ShotResult sample_shot(const CompiledCircuit& circuit, std::uint64_t seed, std::uint64_t shot,
                       bool record_trace = false);

using Counts = std::map<std::string, std::int64_t>;

// Worker count: `requested` if positive, else QCTOL_THREADS, else the
// hardware concurrency.
int worker_count(int requested = 0);

Counts run(const Circuit& circuit, std::int64_t shots, std::uint64_t seed, int threads = 0);

}  // namespace qctol
