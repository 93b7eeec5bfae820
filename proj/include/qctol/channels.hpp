#pragma once

// Quantum channels with the Choi (Jamiolkowski) state as canonical form.
//
// Normalization: rho(E) = (I_A (x) E_B)(|+><+|), |+> = d^-1/2 sum_i |i>_A|i>_B,
// so the Choi state has unit trace and A-marginal I/d. For k-qubit channels
// the labels are A1..Ak, B1..Bk, with |+> pairs (Ai, Bi).

#include <string>
#include <vector>

#include "qctol/qmath.hpp"

namespace qctol {

inline constexpr double kChannelTol = 1e-9;

// "A1".."Ak", "B1".."Bk".
Labels choi_labels(int num_qubits);

/// Choi state of a trace-preserving channel on `num_qubits` qubits.
class ChoiState {
 public:
  explicit ChoiState(Matrix choi);

  const DensityMatrix& state() const { return state_; }
  const Matrix& matrix() const { return state_.matrix(); }
  int num_qubits() const { return num_qubits_; }
  int in_dim() const { return 1 << num_qubits_; }
  int out_dim() const { return 1 << num_qubits_; }

 private:
  DensityMatrix state_;
  int num_qubits_;
};

/// Kraus operators with sum K^dagger K = I to 1e-9.
struct KrausSet {
  KrausSet() = default;
  explicit KrausSet(std::vector<Matrix> ops);
  std::vector<Matrix> ops;
};

/// Measurement followed by a repreparation conditioned on the outcome.
struct MeasurePrepare {
  MeasurePrepare() = default;
  MeasurePrepare(std::vector<Matrix> povm, std::vector<Matrix> prepared);
  std::vector<Matrix> povm;
  std::vector<Matrix> prepared;
};

/// Pauli transfer matrix; acts on Pauli-expansion vectors.
struct PTM {
  RealMatrix matrix;
};

class Channel {
 public:
  explicit Channel(ChoiState choi, std::string name = {});

  const ChoiState& choi() const { return choi_; }
  const KrausSet& kraus() const { return kraus_; }
  const std::string& name() const { return name_; }
  int num_qubits() const { return choi_.num_qubits(); }
  int dim() const { return choi_.in_dim(); }

  // Channel applied to a matrix on exactly num_qubits() qubits.
  Matrix apply(const Matrix& rho) const;

 private:
  ChoiState choi_;
  KrausSet kraus_;
  std::string name_;
};

Vector choi_vector_of_unitary(const Matrix& u);
ChoiState choi_of_unitary(const Matrix& u);
ChoiState choi_from_kraus(const KrausSet& kraus);
// Eigen-decomposition of d * Choi; eigenvalues below 1e-10 are dropped and
// those in [1e-10, 1e-7) emit a warning.
KrausSet kraus_from_choi(const ChoiState& choi);
ChoiState choi_from_measure_prepare(const MeasurePrepare& mp);

// Sum_k K rho K^dagger with the channel embedded on `targets`.
DensityMatrix apply(const Channel& channel, const DensityMatrix& rho, std::span<const std::string> targets);
DensityMatrix apply(const Channel& channel, const DensityMatrix& rho, std::initializer_list<std::string> targets);

// (1 - p) ideal + p noise at the Choi level.
Channel mix(double p, const Channel& ideal, const Channel& noise);
// Weighted mixture; weights must be a probability vector.
Channel mixture(std::span<const double> weights, std::span<const Channel> channels);
// outer o inner.
Channel compose(const Channel& outer, const Channel& inner);
// a on the leading qubits, b on the trailing ones.
Channel tensor(const Channel& a, const Channel& b);

PTM ptm(const Channel& channel);
// Transfer matrix of the (generally non-trace-preserving) map rho -> A rho A^dagger.
RealMatrix pauli_transfer_of_operator(const Matrix& a);

namespace gates {
Matrix cnot();  // control first qubit
Matrix cz();
Matrix swap();
Matrix hadamard();
Matrix phase_s();
// |0><0| + exp(i theta)|1><1|
Matrix phase(double theta);
// phase(pi/4)
Matrix pi8();
}  // namespace gates

Channel unitary(const Matrix& u, std::string name = {});
Channel identity_channel(int num_qubits = 1);
// rho -> I/d on num_qubits qubits.
Channel depolarize(int num_qubits = 1);
// Computational-basis dephasing of each qubit.
Channel dephase(int num_qubits = 1);
// sum_P w_P P rho P over all 4^n Pauli strings in lexicographic order.
Channel pauli_channel(std::span<const double> weights);
Channel measure_prepare(const MeasurePrepare& mp, std::string name = {});

// "cnot", "pi8", "phase_s", "hadamard", "depolarize", "dephase", "identity",
// plus "swap", "cz". num_qubits only matters for the qubit-count agnostic
// names (depolarize, dephase, identity).
Channel named_channel(const std::string& name, int num_qubits = 0);

// Haar-random isometry into `kraus_count` environment levels.
Channel random_channel(int num_qubits, std::mt19937_64& rng, int kraus_count = 4);

}  // namespace qctol
