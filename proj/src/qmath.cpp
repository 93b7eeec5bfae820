#include "qctol/qmath.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace qctol {

namespace {

inline int bit_of(std::uint64_t index, int qubit, int n) {
  return static_cast<int>((index >> (n - 1 - qubit)) & 1U);
}

// Matrix element <row|sigma|col> for a single-qubit Pauli.
inline cplx pauli_entry(char p, int row, int col) {
  switch (p) {
    case 'I':
      return row == col ? 1.0 : 0.0;
    case 'X':
      return row != col ? 1.0 : 0.0;
    case 'Y':
      if (row == col) return 0.0;
      return row == 1 ? cplx(0, 1) : cplx(0, -1);
    case 'Z':
      if (row != col) return 0.0;
      return row == 0 ? 1.0 : -1.0;
    default:
      throw std::invalid_argument(std::string("unknown Pauli factor '") + p + "'");
  }
}

constexpr char kPauliOrder[4] = {'I', 'X', 'Y', 'Z'};

}  // namespace

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

Matrix kron_all(std::span<const Matrix> factors) {
  Matrix out = Matrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

Matrix identity(int dim) { return Matrix::Identity(dim, dim); }

Matrix pauli(char which) {
  Matrix m(2, 2);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) m(r, c) = pauli_entry(which, r, c);
  return m;
}

int qubit_count(Eigen::Index dim) {
  if (dim < 1 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("dimension " + std::to_string(dim) + " is not a power of two");
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  return n;
}

bool is_unitary(const Matrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

bool is_hermitian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

RealVector hermitian_eigenvalues(const Matrix& m) {
  Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

HermitianEigen hermitian_eigen(const Matrix& m) {
  Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  return {solver.eigenvalues(), solver.eigenvectors()};
}

// ---------------------------------------------------------------------------
// PauliString

PauliString::PauliString(std::string factors, cplx phase)
    : factors_(std::move(factors)), phase_(phase) {
  for (char c : factors_)
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
      throw std::invalid_argument("invalid Pauli string '" + factors_ + "'");
  const cplx allowed[] = {1.0, -1.0, cplx(0, 1), cplx(0, -1)};
  if (std::none_of(std::begin(allowed), std::end(allowed),
                   [&](cplx a) { return std::abs(a - phase_) < 1e-12; }))
    throw std::invalid_argument("Pauli phase must be one of +1, -1, +i, -i");
}

Matrix PauliString::matrix() const {
  const int n = num_qubits();
  const std::uint64_t dim = std::uint64_t{1} << n;
  Matrix m = Matrix::Zero(dim, dim);
  std::uint64_t flip = 0;
  for (int q = 0; q < n; ++q)
    if (factors_[q] == 'X' || factors_[q] == 'Y') flip |= std::uint64_t{1} << (n - 1 - q);
  for (std::uint64_t col = 0; col < dim; ++col) {
    const std::uint64_t row = col ^ flip;
    cplx v = phase_;
    for (int q = 0; q < n; ++q) v *= pauli_entry(factors_[q], bit_of(row, q, n), bit_of(col, q, n));
    m(row, col) = v;
  }
  return m;
}

PauliString PauliString::from_index(std::uint64_t index, int num_qubits) {
  std::string f(num_qubits, 'I');
  for (int q = num_qubits - 1; q >= 0; --q) {
    f[q] = kPauliOrder[index & 3U];
    index >>= 2;
  }
  return PauliString(std::move(f));
}

std::vector<PauliString> PauliString::all(int num_qubits) {
  std::vector<PauliString> out;
  const std::uint64_t count = std::uint64_t{1} << (2 * num_qubits);
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(from_index(i, num_qubits));
  return out;
}

// ---------------------------------------------------------------------------
// DensityMatrix

Labels default_labels(int num_qubits) {
  Labels out;
  for (int i = 0; i < num_qubits; ++i) out.push_back("q" + std::to_string(i));
  return out;
}

DensityMatrix::DensityMatrix(Matrix rho, Labels labels)
    : rho_(std::move(rho)), labels_(std::move(labels)) {
  if (rho_.rows() != rho_.cols()) throw std::invalid_argument("density matrix must be square");
  const int n = qubit_count(rho_.rows());
  if (static_cast<int>(labels_.size()) != n)
    throw std::invalid_argument("expected " + std::to_string(n) + " qubit labels, got " +
                                std::to_string(labels_.size()));
  if (std::set<std::string>(labels_.begin(), labels_.end()).size() != labels_.size())
    throw std::invalid_argument("qubit labels must be distinct");
  if (!rho_.allFinite()) throw std::invalid_argument("density matrix has non-finite entries");
  if (!is_hermitian(rho_)) throw std::invalid_argument("density matrix is not Hermitian");
  if (std::abs(rho_.trace() - cplx(1.0)) > kTraceTol)
    throw std::invalid_argument("density matrix trace is not 1");
  const double min_eig = hermitian_eigenvalues(rho_)(0);
  if (min_eig < kEigenvalueFloor)
    throw std::invalid_argument("density matrix has negative eigenvalue " + std::to_string(min_eig));
}

DensityMatrix::DensityMatrix(Matrix rho)
    : DensityMatrix(rho, default_labels(qubit_count(rho.rows()))) {}

DensityMatrix DensityMatrix::pure(const Vector& psi, Labels labels) {
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw std::invalid_argument("state vector is not normalized");
  return DensityMatrix(psi * psi.adjoint(), std::move(labels));
}

DensityMatrix DensityMatrix::maximally_mixed(Labels labels) {
  const Eigen::Index dim = Eigen::Index{1} << labels.size();
  return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim), std::move(labels));
}

int DensityMatrix::position(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw std::invalid_argument("unknown qubit label '" + label + "'");
  return static_cast<int>(it - labels_.begin());
}

std::vector<int> DensityMatrix::positions(std::span<const std::string> labels) const {
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(position(l));
  return out;
}

DensityMatrix DensityMatrix::relabeled(Labels labels) const { return DensityMatrix(rho_, std::move(labels)); }

double DensityMatrix::purity() const { return (rho_ * rho_).trace().real(); }

// ---------------------------------------------------------------------------
// Index gymnastics

namespace {

std::vector<std::uint64_t> permutation_map(int n, std::span<const int> perm) {
  if (static_cast<int>(perm.size()) != n) throw std::invalid_argument("permutation size mismatch");
  std::vector<bool> seen(n, false);
  for (int p : perm) {
    if (p < 0 || p >= n || seen[p]) throw std::invalid_argument("invalid qubit permutation");
    seen[p] = true;
  }
  const std::uint64_t dim = std::uint64_t{1} << n;
  std::vector<std::uint64_t> map(dim);
  for (std::uint64_t old_idx = 0; old_idx < dim; ++old_idx) {
    std::uint64_t new_idx = 0;
    for (int i = 0; i < n; ++i)
      new_idx |= static_cast<std::uint64_t>(bit_of(old_idx, perm[i], n)) << (n - 1 - i);
    map[old_idx] = new_idx;
  }
  return map;
}

}  // namespace

Matrix permute_qubits(const Matrix& m, std::span<const int> perm) {
  const int n = qubit_count(m.rows());
  const auto map = permutation_map(n, perm);
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) out(map[r], map[c]) = m(r, c);
  return out;
}

Vector permute_qubits(const Vector& v, std::span<const int> perm) {
  const int n = qubit_count(v.size());
  const auto map = permutation_map(n, perm);
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(map[i]) = v(i);
  return out;
}

Matrix partial_trace(const Matrix& rho, int num_qubits, std::span<const int> keep) {
  std::vector<int> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  if (std::adjacent_find(kept.begin(), kept.end()) != kept.end())
    throw std::invalid_argument("duplicate qubit in partial trace");
  std::vector<int> perm = kept;
  for (int q = 0; q < num_qubits; ++q)
    if (!std::binary_search(kept.begin(), kept.end(), q)) perm.push_back(q);
  const Matrix p = permute_qubits(rho, perm);
  const Eigen::Index dk = Eigen::Index{1} << kept.size();
  const Eigen::Index dt = p.rows() / dk;
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index i = 0; i < dk; ++i)
    for (Eigen::Index j = 0; j < dk; ++j)
      for (Eigen::Index t = 0; t < dt; ++t) out(i, j) += p(i * dt + t, j * dt + t);
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep) {
  std::vector<int> pos = rho.positions(keep);
  std::sort(pos.begin(), pos.end());
  Labels labels;
  for (int p : pos) labels.push_back(rho.labels()[p]);
  if (labels.empty()) throw std::invalid_argument("partial trace must keep at least one qubit");
  return DensityMatrix(partial_trace(rho.matrix(), rho.num_qubits(), pos), std::move(labels));
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::string> keep) {
  std::vector<std::string> k(keep);
  return partial_trace(rho, std::span<const std::string>(k));
}

Matrix partial_transpose(const Matrix& m, int num_qubits, std::span<const int> positions) {
  std::uint64_t mask = 0;
  for (int p : positions) {
    if (p < 0 || p >= num_qubits) throw std::invalid_argument("partial transpose position out of range");
    mask |= std::uint64_t{1} << (num_qubits - 1 - p);
  }
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const std::uint64_t rr = static_cast<std::uint64_t>(r), cc = static_cast<std::uint64_t>(c);
      const std::uint64_t new_r = (rr & ~mask) | (cc & mask);
      const std::uint64_t new_c = (cc & ~mask) | (rr & mask);
      out(new_r, new_c) = m(r, c);
    }
  return out;
}

void validate_split(const BipartiteSplit& split, const Labels& labels) {
  if (split.left.empty() || split.right.empty())
    throw std::invalid_argument("both sides of a bipartite split must be nonempty");
  std::set<std::string> all(labels.begin(), labels.end());
  std::set<std::string> seen;
  for (const auto* side : {&split.left, &split.right})
    for (const auto& l : *side) {
      if (!all.count(l)) throw std::invalid_argument("split references unknown label '" + l + "'");
      if (!seen.insert(l).second) throw std::invalid_argument("label '" + l + "' appears twice in split");
    }
  if (seen.size() != all.size()) throw std::invalid_argument("split does not cover every qubit label");
}

Matrix partial_transpose(const DensityMatrix& rho, const BipartiteSplit& split) {
  validate_split(split, rho.labels());
  const auto pos = rho.positions(split.right);
  return partial_transpose(rho.matrix(), rho.num_qubits(), pos);
}

double min_pt_eigenvalue(const DensityMatrix& rho, const BipartiteSplit& split) {
  return hermitian_eigenvalues(partial_transpose(rho, split))(0);
}

RealVector schmidt_coefficients(const Vector& psi, const Labels& labels, const BipartiteSplit& split) {
  validate_split(split, labels);
  const int n = qubit_count(psi.size());
  if (static_cast<int>(labels.size()) != n) throw std::invalid_argument("label count mismatch");
  std::vector<int> perm;
  for (const auto* side : {&split.left, &split.right})
    for (const auto& l : *side)
      perm.push_back(static_cast<int>(std::find(labels.begin(), labels.end(), l) - labels.begin()));
  const Vector p = permute_qubits(psi, perm);
  const Eigen::Index dl = Eigen::Index{1} << split.left.size();
  const Eigen::Index dr = p.size() / dl;
  Matrix m(dl, dr);
  for (Eigen::Index i = 0; i < dl; ++i)
    for (Eigen::Index j = 0; j < dr; ++j) m(i, j) = p(i * dr + j);
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

double entanglement_entropy_pure(const Vector& psi, const Labels& labels, const BipartiteSplit& split) {
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw std::invalid_argument("state vector is not normalized");
  const RealVector s = schmidt_coefficients(psi, labels, split);
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double p = s(i) * s(i);
    if (p > 1e-300) entropy -= p * std::log2(p);
  }
  return entropy;
}

// ---------------------------------------------------------------------------
// Pauli expansion

RealVector pauli_expand(const Matrix& rho) {
  const int n = qubit_count(rho.rows());
  const std::uint64_t dim = std::uint64_t{1} << n;
  const std::uint64_t count = dim * dim;
  RealVector r(count);
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    const PauliString p = PauliString::from_index(idx, n);
    std::uint64_t flip = 0;
    for (int q = 0; q < n; ++q)
      if (p.factors()[q] == 'X' || p.factors()[q] == 'Y') flip |= std::uint64_t{1} << (n - 1 - q);
    // Tr[P rho] = sum_i P[i, i^flip] rho[i^flip, i]
    cplx acc = 0.0;
    for (std::uint64_t i = 0; i < dim; ++i) {
      const std::uint64_t j = i ^ flip;
      cplx v = 1.0;
      for (int q = 0; q < n; ++q) v *= pauli_entry(p.factors()[q], bit_of(i, q, n), bit_of(j, q, n));
      acc += v * rho(j, i);
    }
    r(idx) = acc.real();
  }
  return r;
}

RealVector pauli_expand(const DensityMatrix& rho) { return pauli_expand(rho.matrix()); }

Matrix pauli_reconstruct(const RealVector& r) {
  const std::uint64_t count = static_cast<std::uint64_t>(r.size());
  int n = 0;
  while ((std::uint64_t{1} << (2 * n)) < count) ++n;
  if ((std::uint64_t{1} << (2 * n)) != count) throw std::invalid_argument("Pauli vector length is not 4^n");
  const std::uint64_t dim = std::uint64_t{1} << n;
  Matrix rho = Matrix::Zero(dim, dim);
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    if (r(idx) == 0.0) continue;
    const PauliString p = PauliString::from_index(idx, n);
    std::uint64_t flip = 0;
    for (int q = 0; q < n; ++q)
      if (p.factors()[q] == 'X' || p.factors()[q] == 'Y') flip |= std::uint64_t{1} << (n - 1 - q);
    for (std::uint64_t col = 0; col < dim; ++col) {
      const std::uint64_t row = col ^ flip;
      cplx v = r(idx);
      for (int q = 0; q < n; ++q) v *= pauli_entry(p.factors()[q], bit_of(row, q, n), bit_of(col, q, n));
      rho(row, col) += v;
    }
  }
  return rho / static_cast<double>(dim);
}

// ---------------------------------------------------------------------------
// Local operator application

void apply_left(Matrix& m, const Matrix& op, std::span<const int> positions) {
  const int n = qubit_count(m.rows());
  const int k = static_cast<int>(positions.size());
  const Eigen::Index dk = Eigen::Index{1} << k;
  if (op.rows() != dk || op.cols() != dk) throw std::invalid_argument("operator size does not match target count");
  std::uint64_t mask = 0;
  std::vector<std::uint64_t> bits(k);
  for (int i = 0; i < k; ++i) {
    if (positions[i] < 0 || positions[i] >= n) throw std::invalid_argument("target position out of range");
    bits[i] = std::uint64_t{1} << (n - 1 - positions[i]);
    if (mask & bits[i]) throw std::invalid_argument("duplicate target position");
    mask |= bits[i];
  }
  // offsets[s] = basis index contribution of local index s
  std::vector<std::uint64_t> offsets(dk, 0);
  for (Eigen::Index s = 0; s < dk; ++s)
    for (int i = 0; i < k; ++i)
      if ((s >> (k - 1 - i)) & 1) offsets[s] |= bits[i];
  Vector in(dk), out(dk);
  const std::uint64_t dim = static_cast<std::uint64_t>(m.rows());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (std::uint64_t base = 0; base < dim; ++base) {
      if (base & mask) continue;
      for (Eigen::Index s = 0; s < dk; ++s) in(s) = m(base | offsets[s], c);
      out.noalias() = op * in;
      for (Eigen::Index s = 0; s < dk; ++s) m(base | offsets[s], c) = out(s);
    }
  }
}

Matrix conjugate(const Matrix& rho, const Matrix& op, std::span<const int> positions) {
  Matrix t = rho;
  apply_left(t, op, positions);
  Matrix u = t.adjoint();
  apply_left(u, op, positions);
  return u.adjoint();
}

Matrix embed(const Matrix& op, std::span<const int> positions, int num_qubits) {
  Matrix m = Matrix::Identity(Eigen::Index{1} << num_qubits, Eigen::Index{1} << num_qubits);
  apply_left(m, op, positions);
  return m;
}

double hs_overlap_abs(const Matrix& a, const Matrix& b) { return std::abs((a.adjoint() * b).trace()); }

double distance(const Matrix& a, const Matrix& b) { return (a - b).norm(); }

// ---------------------------------------------------------------------------
// Random objects

namespace {
Matrix ginibre(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = cplx(g(rng), g(rng));
  return m;
}
}  // namespace

Matrix random_unitary(int dim, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(ginibre(dim, dim, rng));
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) {
    const cplx d = r(i, i);
    if (std::abs(d) > 0) q.col(i) *= d / std::abs(d);
  }
  return q;
}

Vector random_state(int dim, std::mt19937_64& rng) {
  Vector v = ginibre(dim, 1, rng).col(0);
  return v / v.norm();
}

Matrix random_density(int dim, std::mt19937_64& rng, int rank) {
  const Matrix g = ginibre(dim, rank > 0 ? rank : dim, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

}  // namespace qctol
