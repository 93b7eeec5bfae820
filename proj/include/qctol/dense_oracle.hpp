#pragma once

// Brute-force density-matrix reference for circuits of at most 8 qubits.

#include <map>
#include <string>
#include <vector>

#include "qctol/bmachine.hpp"

namespace qctol {

inline constexpr int kDenseMaxQubits = 8;

class DenseState {
 public:
  // Product of single-qubit states (qubit 0 most significant).
  explicit DenseState(std::span<const Matrix> single_qubit_states);
  // |0...0>.
  explicit DenseState(int num_qubits);

  int num_qubits() const { return n_; }
  const Matrix& matrix() const { return rho_; }

  void apply_unitary(const Matrix& u, std::span<const int> targets);
  void apply_channel(const Channel& channel, std::span<const int> targets);
  double probability_zero(int q) const;
  // Projects qubit q onto |outcome> and renormalizes; throws if the outcome
  // has zero probability.
  void project(int q, int outcome);
  // Reduced state on `keep`, in the order given.
  Matrix reduced(std::span<const int> keep) const;

 private:
  int n_;
  Matrix rho_;
};

using Distribution = std::map<std::string, double>;

// Exact distribution of the measured bitstrings (measure order, '0'/'1').
// Throws std::invalid_argument above kDenseMaxQubits.
Distribution run_dense(const Circuit& circuit);
// Final dense state before measurement.
DenseState evolve_dense(const Circuit& circuit);

struct OutcomeRow {
  std::string outcome;
  std::int64_t observed = 0;
  double expected = 0.0;  // shots * probability
};

struct ComparisonReport {
  double tv_distance = 0.0;
  double chi2 = 0.0;
  int dof = 0;
  double chi2_pvalue = 1.0;
  double alpha = 0.001;
  bool pass = false;
  std::vector<OutcomeRow> table;
};

// Chi-square goodness of fit; bins with expected count below 5 are pooled.
// An observed outcome of zero exact probability fails outright.
ComparisonReport compare(const Counts& counts, const Distribution& exact, double alpha = 0.001);

}  // namespace qctol
