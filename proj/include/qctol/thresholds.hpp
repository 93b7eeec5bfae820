#pragma once

// Noise thresholds for two-qubit gates via their Choi states on A1 A2 B1 B2.
//
// Split conventions (|+> pairs are (A1,B1) and (A2,B2)):
//   S   separable operations        (A1 B1) | (A2 B2)
//   SS  separable + swap            (A1 B2) | (A2 B1)
//   EB  entanglement breaking       (A1 A2) | (B1 B2)   (input | output)

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qctol/channels.hpp"

namespace qctol {

enum class SplitKind { kS, kSS, kEB, kBiEntangling };

std::string to_string(SplitKind kind);
SplitKind split_kind_from_string(const std::string& name);
BipartiteSplit choi_split(SplitKind kind);

/// The 16 operators W_ij = s_i^T (x) s_j^T (x) U (s_i (x) s_j) U^dagger on
/// A1 A2 B1 B2, stored at index 4 i + j with i, j over I, X, Y, Z.
struct GateSymmetryGroup {
  Matrix base_unitary;
  std::array<Matrix, 16> elements;

  const Matrix& element(int i, int j) const { return elements[4 * i + j]; }
  // Every element is a tensor product of single-qubit Paulis up to phase.
  bool is_local() const;
  bool is_closed_up_to_phase(double tol = 1e-10) const;
  bool is_abelian_up_to_phase(double tol = 1e-10) const;
};

// True if m is proportional (|phase| = 1) to a Pauli string.
bool is_pauli_up_to_phase(const Matrix& m, double tol = 1e-10);

GateSymmetryGroup symmetry_group(const Matrix& u);

/// Common eigenprojectors |e,U><e,U| of the group, indexed by the 4-bit
/// string e = (e0 e1 e2 e3) as e0 * 8 + e1 * 4 + e2 * 2 + e3 for the
/// generators W_0x, W_0z, W_x0, W_z0.
struct EigenBasis {
  std::array<Matrix, 16> projectors;
};

EigenBasis eigenprojectors(const GateSymmetryGroup& group);

struct TwirlResult {
  RealVector lambda;       // 16 eigenvalues, sums to 1
  Matrix twirled;          // average of W c W^dagger
  double off_diagonal = 0; // ||twirled - sum_e lambda_e P_e||_max
};

TwirlResult twirl(const ChoiState& choi, const GateSymmetryGroup& group);
TwirlResult twirl(const ChoiState& choi, const GateSymmetryGroup& group, const EigenBasis& basis);

/// A decomposition sum_k w_k left_k (x) right_k of a Choi state across a
/// split, with left/right on split.left / split.right in label order.
struct ProductTerm {
  double weight = 0.0;
  Matrix left;
  Matrix right;
};

struct ProductDecomposition {
  SplitKind split = SplitKind::kS;
  std::vector<ProductTerm> terms;
  double residual = 0.0;  // Frobenius reconstruction error when it was built
};

// Reassembles sum_k w_k left_k (x) right_k in A1 A2 B1 B2 order.
Matrix reconstruct(const ProductDecomposition& decomposition);

// Per-side dictionary: the 60 two-qubit stabilizer states followed by
// seeded Haar-random states, truncated to `size` entries.
std::vector<Vector> product_dictionary(int size, std::uint64_t seed = 2024);

// Non-negative least-squares fit of `target` by pure product states from the
// dictionary across each listed split. The result keeps nonzero weights only.
std::vector<ProductDecomposition> decompose_over_dictionary(const Matrix& target,
                                                            std::span<const SplitKind> splits,
                                                            int dictionary_size, double* residual = nullptr);

struct WitnessPoint {
  double p = 0.0;
  double min_pt_eigenvalue = 0.0;
  bool feasible = false;
};

struct ThresholdCertificate {
  std::string kind;  // "split_threshold" or "cnot_depolarizing"
  double p_star = 0.0;
  SplitKind split = SplitKind::kS;
  bool tight = false;
  bool valid = false;
  double tolerance = 1e-6;
  Matrix gate;               // the ideal two-qubit unitary
  RealVector noise_lambda;   // split_threshold: twirled noise distribution at p_star
  std::vector<WitnessPoint> lower_witness;
  std::vector<ProductDecomposition> upper_witness;
  // Weights of each upper_witness entry in the certified Choi state.
  std::vector<double> upper_weights;
  std::vector<std::pair<std::string, double>> checks;

  double check(const std::string& name) const;
};

// Largest e = 0 weight over twirl-invariant states that are PPT across the
// split (cutting-plane linear program). Needs a Clifford gate, whose
// symmetry group is local; other gates throw std::invalid_argument.
struct SplitOptimum {
  double lambda0 = 0.0;
  RealVector weights;  // optimal diagonal weights over e
  int cuts = 0;
};
SplitOptimum max_ppt_lambda0(const Matrix& u, SplitKind split);

ThresholdCertificate split_threshold(const Matrix& u, SplitKind split, double tol = 1e-6);

// Boundary p of ((1-p)^2 Phi_d + p^2 I/d^2) / ((1-p)^2 + p^2) between a
// maximally entangled state and white noise: sqrt(d) / (sqrt(d) + 1).
double isotropic_threshold(int d);
// That state on 2 log2(d) qubits, ordered (left | right).
Matrix isotropic_state(int d, double p);

// Depolarizing CNOT: (1-p)^2 U + p(1-p)(D(x)I)U + p(1-p)(I(x)D)U + p^2 D(x)D.
Channel noisy_cnot(double p);
// (1-p)^2 rho(U) + p^2 I/16, normalized.
Matrix cnot_outer_choi(double p);
// Minimum eigenvalue of the partial transpose of cnot_outer_choi across EB.
double cnot_outer_min_pt_eigenvalue(double p);
// Equal mixture of |a b>_{A1B1} (x) (|0 a> + |1 not a>)/sqrt2 _{A2B2}.
Matrix cnot_central_four_state_mixture();
std::array<Vector, 4> cnot_central_four_states();

struct CnotDepolarizingThreshold {
  double p_star = 0.0;
  double p_low = 0.0;   // NPT side of the final bracket
  double p_high = 1.0;  // PPT side of the final bracket
  std::vector<WitnessPoint> trace;
};
CnotDepolarizingThreshold cnot_depolarizing_threshold(double tol = 1e-6);
ThresholdCertificate cnot_depolarizing_certificate(double p);

// Re-runs every check recorded in a certificate from scratch.
struct VerificationReport {
  bool valid = false;
  std::vector<std::pair<std::string, bool>> checks;
};
VerificationReport verify_certificate(const ThresholdCertificate& certificate);

enum class BientStatus { kCertifiedIn, kCertifiedOutByPpt, kUndecided };
std::string to_string(BientStatus status);

struct BientMembership {
  BientStatus status = BientStatus::kUndecided;
  std::vector<ProductDecomposition> decomposition;  // certified-in
  double residual = 0.0;
  double fidelity = 0.0;  // with the nearest unitary's Choi (certified-out test)
  double bound = 0.0;     // max over splits of the PPT lambda0 bound
  bool local_group = false;
};
BientMembership bient_membership(const ChoiState& choi, int dictionary_size = 60);

DensityMatrix omega_state();

struct OmegaReport {
  double marginal_error = 0.0;
  bool valid_choi = false;
  std::array<double, 2> outcome_probability{};
  std::array<double, 2> ghz_fidelity{};
  int product_inputs = 0;
  double min_output_pt_eigenvalue = 0.0;
  bool outputs_separable = false;
  BientStatus membership = BientStatus::kUndecided;
  // GHZ fidelity above 1/2 witnesses genuine tripartite entanglement.
  bool genuine_tripartite = false;

  bool passed() const;
};
OmegaReport omega_analysis(int product_inputs = 200, std::uint64_t seed = 7);

struct EbMeasurementCheck {
  bool entanglement_breaking = false;
  int offending_index = -1;
  std::optional<ProductDecomposition> decomposition;
};
// Rank-1 POVM elements on two qubits give an entanglement-breaking channel
// whatever is reprepared; a higher-rank element returns false with its index.
EbMeasurementCheck nondegenerate_measurement_is_eb(const MeasurePrepare& mp);

}  // namespace qctol
