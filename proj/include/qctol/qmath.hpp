#pragma once

// Dense complex linear algebra over multi-qubit Hilbert spaces.
//
// Qubit labels map to tensor factors left to right: the first label is the
// most significant bit of a basis index. Every module relies on this.

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qctol {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Labels = std::vector<std::string>;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kEigenvalueFloor = -1e-9;
inline constexpr double kPptTol = 1e-9;

// Tensor product; row index of the result is i_a * dim_b + i_b.
Matrix kron(const Matrix& a, const Matrix& b);
Vector kron(const Vector& a, const Vector& b);
Matrix kron_all(std::span<const Matrix> factors);

Matrix identity(int dim);
// 'I', 'X', 'Y' or 'Z'.
Matrix pauli(char which);

// Number of qubits for a power-of-two dimension; throws otherwise.
int qubit_count(Eigen::Index dim);

bool is_unitary(const Matrix& u, double tol = 1e-10);
bool is_hermitian(const Matrix& m, double tol = kHermitianTol);

// Eigenvalues (ascending) of the Hermitian part (M + M^dagger)/2.
RealVector hermitian_eigenvalues(const Matrix& m);

// Eigen-decomposition of the Hermitian part; eigenvalues ascending.
struct HermitianEigen {
  RealVector values;
  Matrix vectors;
};
HermitianEigen hermitian_eigen(const Matrix& m);

/// A tensor product of single-qubit Pauli operators with a global phase
/// drawn from {+1, -1, +i, -i}.
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::string factors, cplx phase = 1.0);

  const std::string& factors() const { return factors_; }
  cplx phase() const { return phase_; }
  int num_qubits() const { return static_cast<int>(factors_.size()); }
  Matrix matrix() const;

  // All 4^n strings in lexicographic [I, X, Y, Z] order per qubit.
  static std::vector<PauliString> all(int num_qubits);
  // String at position `index` of that ordering.
  static PauliString from_index(std::uint64_t index, int num_qubits);

 private:
  std::string factors_;
  cplx phase_ = 1.0;
};

struct BipartiteSplit {
  Labels left;
  Labels right;
};

Labels default_labels(int num_qubits);

/// Validated density matrix with one label per qubit.
///
/// Construction checks Hermiticity (1e-10), unit trace (1e-10) and a minimum
/// eigenvalue no lower than -1e-9; anything else throws std::invalid_argument.
class DensityMatrix {
 public:
  DensityMatrix(Matrix rho, Labels labels);
  explicit DensityMatrix(Matrix rho);

  static DensityMatrix pure(const Vector& psi, Labels labels);
  static DensityMatrix maximally_mixed(Labels labels);

  const Matrix& matrix() const { return rho_; }
  const Labels& labels() const { return labels_; }
  int num_qubits() const { return static_cast<int>(labels_.size()); }
  Eigen::Index dim() const { return rho_.rows(); }

  // Tensor position of `label`; throws std::invalid_argument if unknown.
  int position(const std::string& label) const;
  std::vector<int> positions(std::span<const std::string> labels) const;

  DensityMatrix relabeled(Labels labels) const;
  double purity() const;

 private:
  Matrix rho_;
  Labels labels_;
};

// Reorders tensor factors: qubit i of the result is qubit perm[i] of the input.
Matrix permute_qubits(const Matrix& m, std::span<const int> perm);
Vector permute_qubits(const Vector& v, std::span<const int> perm);

// Partial trace keeping `keep` positions (result keeps input order of those).
Matrix partial_trace(const Matrix& rho, int num_qubits, std::span<const int> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::string> keep);

// Transposes the tensor factors at `positions`.
Matrix partial_transpose(const Matrix& m, int num_qubits, std::span<const int> positions);
Matrix partial_transpose(const DensityMatrix& rho, const BipartiteSplit& split);
double min_pt_eigenvalue(const DensityMatrix& rho, const BipartiteSplit& split);
inline bool is_ppt(double min_pt_eigenvalue) { return min_pt_eigenvalue >= -kPptTol; }

// Throws std::invalid_argument unless split partitions `labels` into two
// disjoint nonempty sets.
void validate_split(const BipartiteSplit& split, const Labels& labels);

// Von Neumann entropy (bits) of the reduced state of split.left.
double entanglement_entropy_pure(const Vector& psi, const Labels& labels,
                                 const BipartiteSplit& split);
// Schmidt coefficients (descending) of a pure state across the split.
RealVector schmidt_coefficients(const Vector& psi, const Labels& labels,
                                const BipartiteSplit& split);

// r_P = Tr[P rho] over all Pauli strings in lexicographic order.
RealVector pauli_expand(const Matrix& rho);
RealVector pauli_expand(const DensityMatrix& rho);
// Inverse: rho = 2^-n sum_P r_P P.
Matrix pauli_reconstruct(const RealVector& r);

// Applies `op` (2^k x 2^k) to the qubits at `positions` from the left,
// in place: m <- (op on positions) m.
void apply_left(Matrix& m, const Matrix& op, std::span<const int> positions);
// op_full rho op_full^dagger for an operator on the given positions.
Matrix conjugate(const Matrix& rho, const Matrix& op, std::span<const int> positions);
// Full 2^n operator acting as `op` on `positions`.
Matrix embed(const Matrix& op, std::span<const int> positions, int num_qubits);

// |Tr(A^dagger B)|.
double hs_overlap_abs(const Matrix& a, const Matrix& b);
// Frobenius norm of a - b.
double distance(const Matrix& a, const Matrix& b);

Matrix random_unitary(int dim, std::mt19937_64& rng);
Vector random_state(int dim, std::mt19937_64& rng);
// Ginibre-distributed density matrix of the given rank (full rank when 0).
Matrix random_density(int dim, std::mt19937_64& rng, int rank = 0);

}  // namespace qctol
