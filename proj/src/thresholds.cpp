#include "qctol/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qctol/optimize.hpp"
#include "qctol/stabilizer_states.hpp"

namespace qctol {

namespace {

constexpr int kChoiQubits = 4;  // A1 A2 B1 B2
constexpr double kCutTol = 1e-10;
constexpr double kDecompositionTol = 1e-8;

// Positions of a split in A1 A2 B1 B2 order: left pair then right pair.
std::array<int, 4> split_order(SplitKind kind) {
  switch (kind) {
    case SplitKind::kS: return {0, 2, 1, 3};
    case SplitKind::kSS: return {0, 3, 1, 2};
    case SplitKind::kEB: return {0, 1, 2, 3};
    case SplitKind::kBiEntangling: break;
  }
  throw std::invalid_argument("bi-entangling is not a bipartite split");
}

// Inverse of split_order, for permute_qubits from split order to canonical.
std::array<int, 4> to_canonical(SplitKind kind) {
  const auto order = split_order(kind);
  std::array<int, 4> inv{};
  for (int k = 0; k < 4; ++k) inv[order[k]] = k;
  return inv;
}

std::array<int, 2> right_positions(SplitKind kind) {
  const auto order = split_order(kind);
  return {order[2], order[3]};
}

Matrix pt_right(const Matrix& m, SplitKind kind) {
  const auto pos = right_positions(kind);
  return partial_transpose(m, kChoiQubits, pos);
}

double min_pt(const Matrix& m, SplitKind kind) { return hermitian_eigenvalues(pt_right(m, kind))(0); }

// Real coordinates of a Hermitian matrix in which the Euclidean norm is the
// Frobenius norm.
RealVector hermitian_coordinates(const Matrix& m) {
  const Eigen::Index d = m.rows();
  RealVector out(d * d);
  Eigen::Index k = 0;
  const double s = std::sqrt(2.0);
  for (Eigen::Index r = 0; r < d; ++r) {
    out(k++) = m(r, r).real();
    for (Eigen::Index c = r + 1; c < d; ++c) {
      out(k++) = s * m(r, c).real();
      out(k++) = s * m(r, c).imag();
    }
  }
  return out;
}

RealVector pure_coordinates(const Vector& psi) {
  return hermitian_coordinates(psi * psi.adjoint());
}

bool valid_state(const Matrix& m) {
  try {
    DensityMatrix check(m);
    (void)check;
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix cnot_dep_first() {
  return compose(tensor(depolarize(1), identity_channel(1)), unitary(gates::cnot())).choi().matrix();
}

Matrix cnot_dep_second() {
  return compose(tensor(identity_channel(1), depolarize(1)), unitary(gates::cnot())).choi().matrix();
}

// SWAP_{1<->2}[H^{(x)4} rho H^{(x)4}] on A1 A2 B1 B2.
Matrix mirror(const Matrix& rho) {
  const Matrix h = gates::hadamard();
  const Matrix h4 = kron(kron(h, h), kron(h, h));
  const std::array<int, 4> swap12{1, 0, 3, 2};
  return permute_qubits(Matrix(h4 * rho * h4.adjoint()), swap12);
}

Vector mirror(const Vector& psi) {
  const Matrix h = gates::hadamard();
  const Matrix h4 = kron(kron(h, h), kron(h, h));
  const std::array<int, 4> swap12{1, 0, 3, 2};
  return permute_qubits(Vector(h4 * psi), swap12);
}

// Splits a pure product state (canonical order) into its two factors.
ProductTerm factor_product(const Vector& psi, SplitKind kind, double weight) {
  const Matrix rho = psi * psi.adjoint();
  const auto order = split_order(kind);
  const std::array<int, 2> left{order[0], order[1]};
  const std::array<int, 2> right{order[2], order[3]};
  return {weight, partial_trace(rho, kChoiQubits, left), partial_trace(rho, kChoiQubits, right)};
}

RealVector unit(int n, int i) {
  RealVector v = RealVector::Zero(n);
  v(i) = 1.0;
  return v;
}

Matrix diagonal_state(const EigenBasis& basis, const RealVector& w) {
  Matrix m = Matrix::Zero(16, 16);
  for (int e = 0; e < 16; ++e) m += w(e) * basis.projectors[e];
  return m;
}

// Cutting-plane LP over twirl-invariant diagonal states Sum_e w_e P_e that
// are PPT across a split.
class PptPolytope {
 public:
  PptPolytope(const Matrix& u, SplitKind kind) {
    const GateSymmetryGroup group = symmetry_group(u);
    // Twirling by nonlocal elements would not preserve separability.
    if (!group.is_local()) throw std::invalid_argument("the gate's symmetry group is not local (not a Clifford gate)");
    const EigenBasis basis = eigenprojectors(group);
    basis_ = basis;
    for (int e = 0; e < 16; ++e) transposed_[e] = pt_right(basis.projectors[e], kind);
    Matrix generic = Matrix::Zero(16, 16);
    for (int e = 0; e < 16; ++e) {
      generic += std::sqrt(2.0 + e) * transposed_[e];
      add_eigenvector_cuts(transposed_[e]);
    }
    add_eigenvector_cuts(generic);
  }

  const EigenBasis& basis() const { return basis_; }
  int cuts() const { return static_cast<int>(cuts_.size()); }

  // Maximizes w_0 subject to w_0 >= min_lambda0. Empty optional if no PPT
  // state satisfies the bound.
  std::optional<RealVector> maximize(double min_lambda0) {
    for (int round = 0; round < 500; ++round) {
      LinearProgram lp;
      lp.c = -unit(16, 0);
      const Eigen::Index m = static_cast<Eigen::Index>(cuts_.size()) + 1;
      lp.a_ub = RealMatrix::Zero(m, 16);
      lp.b_ub = RealVector::Zero(m);
      for (std::size_t j = 0; j < cuts_.size(); ++j) lp.a_ub.row(static_cast<Eigen::Index>(j)) = -cuts_[j];
      lp.a_ub(m - 1, 0) = -1.0;
      lp.b_ub(m - 1) = -min_lambda0;
      lp.a_eq = RealMatrix::Ones(1, 16);
      lp.b_eq = RealVector::Ones(1);
      const LpResult res = solve_lp(lp);
      if (res.status != LpStatus::kOptimal) return std::nullopt;
      RealVector w = res.x.cwiseMax(0.0);
      w /= w.sum();
      const HermitianEigen eig = hermitian_eigen(transposed_state(w));
      if (eig.values(0) >= -kCutTol) return w;
      bool added = false;
      for (Eigen::Index k = 0; k < eig.values.size() && eig.values(k) < -kCutTol; ++k)
        added = add_cut(eig.vectors.col(k)) || added;
      // The violated cuts are already in the LP: what remains is round-off.
      if (!added && eig.values(0) >= -kPptTol) return w;
      if (!added) {
        double worst = 0.0;
        for (const RealVector& c : cuts_) worst = std::min(worst, c.dot(w));
        throw std::runtime_error("PPT cutting-plane loop stalled (min eigenvalue " + std::to_string(eig.values(0)) +
                                 ", worst cut " + std::to_string(worst) + ")");
      }
    }
    throw std::runtime_error("PPT cutting-plane loop did not converge");
  }

  Matrix transposed_state(const RealVector& w) const {
    Matrix m = Matrix::Zero(16, 16);
    for (int e = 0; e < 16; ++e) m += w(e) * transposed_[e];
    return m;
  }

  double min_pt_of(const RealVector& w) const { return hermitian_eigenvalues(transposed_state(w))(0); }

 private:
  void add_eigenvector_cuts(const Matrix& m) {
    const HermitianEigen eig = hermitian_eigen(m);
    for (Eigen::Index k = 0; k < eig.vectors.cols(); ++k) add_cut(eig.vectors.col(k));
  }

  // False if an equivalent cut is already present.
  bool add_cut(const Vector& v) {
    RealVector c(16);
    for (int e = 0; e < 16; ++e) c(e) = (v.adjoint() * transposed_[e] * v)(0, 0).real();
    for (const RealVector& old : cuts_)
      if ((old - c).cwiseAbs().maxCoeff() < 1e-14) return false;
    cuts_.push_back(c);
    return true;
  }

  EigenBasis basis_;
  std::array<Matrix, 16> transposed_;
  std::vector<RealVector> cuts_;
};

}  // namespace

std::string to_string(SplitKind kind) {
  switch (kind) {
    case SplitKind::kS: return "S";
    case SplitKind::kSS: return "SS";
    case SplitKind::kEB: return "EB";
    case SplitKind::kBiEntangling: return "bi-entangling";
  }
  return "?";
}

SplitKind split_kind_from_string(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (n == "S") return SplitKind::kS;
  if (n == "SS") return SplitKind::kSS;
  if (n == "EB") return SplitKind::kEB;
  if (n == "BI-ENTANGLING" || n == "BIENTANGLING") return SplitKind::kBiEntangling;
  throw std::invalid_argument("unknown split: " + name);
}

BipartiteSplit choi_split(SplitKind kind) {
  const Labels labels = choi_labels(2);
  const auto order = split_order(kind);
  return {{labels[order[0]], labels[order[1]]}, {labels[order[2]], labels[order[3]]}};
}

bool is_pauli_up_to_phase(const Matrix& m, double tol) {
  const int n = qubit_count(m.rows());
  const double d = static_cast<double>(m.rows());
  for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << (2 * n)); ++idx) {
    const Matrix p = PauliString::from_index(idx, n).matrix();
    const cplx overlap = (p.adjoint() * m).trace() / d;
    if (std::abs(std::abs(overlap) - 1.0) < tol) return (m - overlap * p).norm() < tol * d;
  }
  return false;
}

bool GateSymmetryGroup::is_local() const {
  return std::all_of(elements.begin(), elements.end(), [](const Matrix& w) { return is_pauli_up_to_phase(w); });
}

bool GateSymmetryGroup::is_closed_up_to_phase(double tol) const {
  for (const Matrix& a : elements)
    for (const Matrix& b : elements) {
      const Matrix prod = a * b;
      const bool found = std::any_of(elements.begin(), elements.end(), [&](const Matrix& c) {
        return std::abs(hs_overlap_abs(c, prod) / 16.0 - 1.0) < tol;
      });
      if (!found) return false;
    }
  return true;
}

bool GateSymmetryGroup::is_abelian_up_to_phase(double tol) const {
  for (const Matrix& a : elements)
    for (const Matrix& b : elements)
      if (std::abs(hs_overlap_abs(a * b, b * a) / 16.0 - 1.0) > tol) return false;
  return true;
}

namespace {

// A Hermitian two-qubit operator within 1e-10 of +-(Pauli string) is replaced
// by the exact string, so Clifford gates read from Kraus data or files give
// the same projectors as their exact matrices.
Matrix snap_to_pauli(const Matrix& m) {
  for (std::uint64_t idx = 0; idx < 16; ++idx) {
    const Matrix p = PauliString::from_index(idx, 2).matrix();
    const cplx overlap = (p.adjoint() * m).trace() / 4.0;
    if (std::abs(std::abs(overlap) - 1.0) > 1e-10) continue;
    for (const cplx phase : {cplx(1, 0), cplx(-1, 0), cplx(0, 1), cplx(0, -1)})
      if (std::abs(overlap - phase) < 1e-10 && (m - phase * p).norm() < 1e-9) return phase * p;
    break;
  }
  return m;
}

}  // namespace

GateSymmetryGroup symmetry_group(const Matrix& u) {
  if (u.rows() != 4 || u.cols() != 4 || !is_unitary(u)) throw std::invalid_argument("symmetry_group: U must be a 4x4 unitary");
  static const char names[] = {'I', 'X', 'Y', 'Z'};
  GateSymmetryGroup g;
  g.base_unitary = u;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const Matrix si = pauli(names[i]);
      const Matrix sj = pauli(names[j]);
      const Matrix a_side = kron(Matrix(si.transpose()), Matrix(sj.transpose()));
      g.elements[4 * i + j] = kron(a_side, snap_to_pauli(u * kron(si, sj) * u.adjoint()));
    }
  return g;
}

EigenBasis eigenprojectors(const GateSymmetryGroup& group) {
  const std::array<const Matrix*, 4> generators{&group.element(0, 1), &group.element(0, 3), &group.element(1, 0),
                                                &group.element(3, 0)};
  const Matrix id = identity(16);
  EigenBasis basis;
  for (int e = 0; e < 16; ++e) {
    Matrix p = id;
    for (int alpha = 0; alpha < 4; ++alpha) {
      const int bit = (e >> (3 - alpha)) & 1;
      const double sign = bit ? -1.0 : 1.0;
      // Hermitian part guards against round-off in U W U^dagger.
      const Matrix w = 0.5 * (*generators[alpha] + generators[alpha]->adjoint());
      p = p * (0.5 * (id + sign * w));
    }
    basis.projectors[e] = 0.5 * (p + p.adjoint());
  }
  return basis;
}

TwirlResult twirl(const ChoiState& choi, const GateSymmetryGroup& group) {
  return twirl(choi, group, eigenprojectors(group));
}

TwirlResult twirl(const ChoiState& choi, const GateSymmetryGroup& group, const EigenBasis& basis) {
  if (choi.num_qubits() != 2) throw std::invalid_argument("twirl: expected a two-qubit channel");
  const Matrix& c = choi.matrix();
  TwirlResult out;
  out.twirled = Matrix::Zero(16, 16);
  for (const Matrix& w : group.elements) out.twirled += w * c * w.adjoint();
  out.twirled /= 16.0;
  out.lambda.resize(16);
  for (int e = 0; e < 16; ++e) out.lambda(e) = (basis.projectors[e] * c).trace().real();
  out.off_diagonal = max_abs(out.twirled - diagonal_state(basis, out.lambda));
  return out;
}

Matrix reconstruct(const ProductDecomposition& decomposition) {
  const auto perm = to_canonical(decomposition.split);
  Matrix split_ordered = Matrix::Zero(16, 16);
  for (const ProductTerm& t : decomposition.terms) split_ordered += t.weight * kron(t.left, t.right);
  return permute_qubits(split_ordered, perm);
}

std::vector<Vector> product_dictionary(int size, std::uint64_t seed) {
  if (size < 1) throw std::invalid_argument("product_dictionary: size must be positive");
  const auto& stab = stabilizer_states(2);
  std::vector<Vector> out(stab.begin(), stab.begin() + std::min<std::size_t>(size, stab.size()));
  std::mt19937_64 rng(seed);
  while (static_cast<int>(out.size()) < size) out.push_back(random_state(4, rng));
  return out;
}

std::vector<ProductDecomposition> decompose_over_dictionary(const Matrix& target, std::span<const SplitKind> splits,
                                                            int dictionary_size, double* residual) {
  if (target.rows() != 16 || target.cols() != 16) throw std::invalid_argument("decompose: expected a 16x16 matrix");
  const std::vector<Vector> dict = product_dictionary(dictionary_size);
  const Eigen::Index n_side = static_cast<Eigen::Index>(dict.size());
  const Eigen::Index per_split = n_side * n_side;
  RealMatrix a(256, per_split * static_cast<Eigen::Index>(splits.size()));
  for (std::size_t s = 0; s < splits.size(); ++s) {
    const auto perm = to_canonical(splits[s]);
    for (Eigen::Index i = 0; i < n_side; ++i)
      for (Eigen::Index j = 0; j < n_side; ++j) {
        const Vector psi = permute_qubits(kron(dict[i], dict[j]), perm);
        a.col(static_cast<Eigen::Index>(s) * per_split + i * n_side + j) = pure_coordinates(psi);
      }
  }
  const NnlsResult fit = nnls(a, hermitian_coordinates(target));
  std::vector<ProductDecomposition> out;
  for (std::size_t s = 0; s < splits.size(); ++s) {
    ProductDecomposition dec;
    dec.split = splits[s];
    dec.residual = fit.residual;
    for (Eigen::Index i = 0; i < n_side; ++i)
      for (Eigen::Index j = 0; j < n_side; ++j) {
        const double w = fit.x(static_cast<Eigen::Index>(s) * per_split + i * n_side + j);
        if (w > 1e-14) dec.terms.push_back({w, dict[i] * dict[i].adjoint(), dict[j] * dict[j].adjoint()});
      }
    out.push_back(std::move(dec));
  }
  if (residual) *residual = fit.residual;
  return out;
}

double ThresholdCertificate::check(const std::string& name) const {
  for (const auto& [key, value] : checks)
    if (key == name) return value;
  throw std::out_of_range("certificate has no check named " + name);
}

SplitOptimum max_ppt_lambda0(const Matrix& u, SplitKind split) {
  PptPolytope poly(u, split);
  const auto w = poly.maximize(0.0);
  if (!w) throw std::runtime_error("max_ppt_lambda0: the maximally mixed state must be feasible");
  return {(*w)(0), *w, poly.cuts()};
}

ThresholdCertificate split_threshold(const Matrix& u, SplitKind split, double tol) {
  if (split == SplitKind::kBiEntangling) throw std::invalid_argument("split_threshold: choose S, SS or EB");
  PptPolytope poly(u, split);
  const auto optimum = poly.maximize(0.0);
  if (!optimum) throw std::runtime_error("split_threshold: the maximally mixed state must be feasible");
  const double lambda0_opt = (*optimum)(0);
  // Noise distribution of the optimal state, used to report NPT values below p_star.
  const double p_opt = 1.0 - lambda0_opt;
  RealVector noise = p_opt > 1e-12 ? RealVector((*optimum - (1.0 - p_opt) * unit(16, 0)) / p_opt) : unit(16, 0);

  ThresholdCertificate cert;
  cert.kind = "split_threshold";
  cert.split = split;
  cert.tolerance = tol;
  cert.gate = u;

  auto record = [&](double p, const std::optional<RealVector>& w) {
    WitnessPoint pt;
    pt.p = p;
    pt.feasible = w.has_value();
    const RealVector candidate = w ? *w : RealVector((1.0 - p) * unit(16, 0) + p * noise);
    pt.min_pt_eigenvalue = poly.min_pt_of(candidate);
    cert.lower_witness.push_back(pt);
  };

  RealVector best;
  double lo = 0.0, hi = 1.0;
  if (auto w0 = poly.maximize(1.0 - 1e-12)) {
    record(0.0, w0);
    hi = 0.0;
    best = *w0;
  } else {
    record(0.0, std::nullopt);
    auto w1 = poly.maximize(0.0);
    best = *w1;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      auto w = poly.maximize(1.0 - mid);
      record(mid, w);
      if (w) {
        hi = mid;
        best = *w;
      } else {
        lo = mid;
      }
    }
  }
  cert.p_star = hi;
  // Twirled state at p_star: weight (1 - p) + p lambda_0 on e = 0.
  RealVector w_cert = best;
  if (w_cert(0) > 1.0 - hi) {
    // Lower the e = 0 weight to exactly 1 - p_star by mixing towards the
    // maximally mixed state (both PPT, so the mixture is too).
    const double t = (w_cert(0) - (1.0 - hi)) / (w_cert(0) - 1.0 / 16.0);
    if (t > 0 && t <= 1) w_cert = (1.0 - t) * w_cert + t * RealVector::Constant(16, 1.0 / 16.0);
  }
  cert.noise_lambda = hi > 1e-12 ? RealVector((w_cert - (1.0 - hi) * unit(16, 0)) / hi) : unit(16, 0);
  cert.noise_lambda = cert.noise_lambda.cwiseMax(0.0);
  cert.noise_lambda /= cert.noise_lambda.sum();
  const Matrix state = diagonal_state(poly.basis(), (1.0 - hi) * unit(16, 0) + hi * cert.noise_lambda);

  cert.checks.emplace_back("lambda0_opt", lambda0_opt);
  cert.checks.emplace_back("closed_form_gap", std::abs(cert.p_star - (1.0 - lambda0_opt)));
  cert.checks.emplace_back("min_pt_eigenvalue", min_pt(state, split));
  cert.checks.emplace_back("cuts", poly.cuts());

  for (int size : {60, 120}) {
    double residual = 0.0;
    const std::array<SplitKind, 1> one{split};
    auto dec = decompose_over_dictionary(state, one, size, &residual);
    if (residual < kDecompositionTol) {
      cert.upper_witness = std::move(dec);
      cert.upper_weights = {1.0};
      cert.tight = true;
      cert.checks.emplace_back("reconstruction_error", residual);
      break;
    }
  }
  cert.valid = min_pt(state, split) >= -kPptTol && std::abs(cert.p_star - (1.0 - lambda0_opt)) <= tol + 1e-9;
  return cert;
}

double isotropic_threshold(int d) {
  if (d < 2) throw std::invalid_argument("isotropic_threshold: d must be at least 2");
  const double s = std::sqrt(static_cast<double>(d));
  return s / (s + 1.0);
}

Matrix isotropic_state(int d, double p) {
  if (d < 2 || (d & (d - 1)) != 0) throw std::invalid_argument("isotropic_state: d must be a power of two >= 2");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("isotropic_state: p must lie in [0, 1]");
  Vector phi = Vector::Zero(d * d);
  for (int i = 0; i < d; ++i) phi(i * d + i) = 1.0 / std::sqrt(static_cast<double>(d));
  const double a = (1.0 - p) * (1.0 - p);
  const double b = p * p;
  return (a * phi * phi.adjoint() + b * identity(d * d) / static_cast<double>(d * d)) / (a + b);
}

Channel noisy_cnot(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("noisy_cnot: p must lie in [0, 1]");
  const Channel u = unitary(gates::cnot(), "cnot");
  const Channel d1 = depolarize(1);
  const Channel id1 = identity_channel(1);
  const std::array<Channel, 4> parts{u, compose(tensor(d1, id1), u), compose(tensor(id1, d1), u), depolarize(2)};
  const std::array<double, 4> w{(1 - p) * (1 - p), p * (1 - p), p * (1 - p), p * p};
  return Channel(mixture(w, parts).choi(), "noisy_cnot");
}

Matrix cnot_outer_choi(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("cnot_outer_choi: p must lie in [0, 1]");
  const double a = (1.0 - p) * (1.0 - p);
  const double b = p * p;
  return (a * choi_of_unitary(gates::cnot()).matrix() + b * identity(16) / 16.0) / (a + b);
}

double cnot_outer_min_pt_eigenvalue(double p) { return min_pt(cnot_outer_choi(p), SplitKind::kEB); }

std::array<Vector, 4> cnot_central_four_states() {
  std::array<Vector, 4> out;
  const double r = 1.0 / std::sqrt(2.0);
  const std::array<int, 4> canonical = to_canonical(SplitKind::kS);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Vector ab = Vector::Zero(4);
      ab(2 * a + b) = 1.0;
      Vector bell = Vector::Zero(4);
      // (|0 a> + |1 not a>)/sqrt2 on (A2, B2)
      bell(a) = r;
      bell(2 + (1 - a)) = r;
      out[2 * a + b] = permute_qubits(kron(ab, bell), canonical);
    }
  return out;
}

Matrix cnot_central_four_state_mixture() {
  Matrix m = Matrix::Zero(16, 16);
  for (const Vector& v : cnot_central_four_states()) m += 0.25 * v * v.adjoint();
  return m;
}

CnotDepolarizingThreshold cnot_depolarizing_threshold(double tol) {
  CnotDepolarizingThreshold out;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double ev = cnot_outer_min_pt_eigenvalue(mid);
    const bool ppt = ev >= 0.0;
    out.trace.push_back({mid, ev, ppt});
    (ppt ? hi : lo) = mid;
  }
  out.p_low = lo;
  out.p_high = hi;
  out.p_star = 0.5 * (lo + hi);
  return out;
}

namespace {

struct CnotStaticChecks {
  double central_error = 0.0;
  double schmidt_tail = 0.0;
  double mirror_error = 0.0;
};

const CnotStaticChecks& cnot_static_checks() {
  static const CnotStaticChecks checks = [] {
    CnotStaticChecks c;
    const Matrix first = cnot_dep_first();
    c.central_error = max_abs(first - cnot_central_four_state_mixture());
    c.mirror_error = max_abs(cnot_dep_second() - mirror(first));
    const Labels labels = choi_labels(2);
    const BipartiteSplit s = choi_split(SplitKind::kS);
    for (const Vector& v : cnot_central_four_states()) {
      const RealVector coeffs = schmidt_coefficients(v, labels, s);
      for (Eigen::Index k = 1; k < coeffs.size(); ++k) c.schmidt_tail = std::max(c.schmidt_tail, std::abs(coeffs(k)));
    }
    return c;
  }();
  return checks;
}

}  // namespace

ThresholdCertificate cnot_depolarizing_certificate(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("cnot_depolarizing_certificate: p must lie in [0, 1]");
  const CnotStaticChecks& st = cnot_static_checks();
  ThresholdCertificate cert;
  cert.kind = "cnot_depolarizing";
  cert.p_star = p;
  cert.split = SplitKind::kBiEntangling;
  cert.tolerance = kDecompositionTol;
  cert.gate = gates::cnot();
  const double outer_ev = cnot_outer_min_pt_eigenvalue(p);
  const bool outer_ppt = outer_ev >= -kPptTol;
  cert.lower_witness.push_back({p, outer_ev, outer_ppt});
  cert.checks.emplace_back("central_mixture_error", st.central_error);
  cert.checks.emplace_back("central_schmidt_tail", st.schmidt_tail);
  cert.checks.emplace_back("mirror_error", st.mirror_error);
  cert.checks.emplace_back("outer_min_pt_eigenvalue", outer_ev);
  cert.valid = st.central_error <= 1e-10 && st.schmidt_tail <= 1e-10 && st.mirror_error <= 1e-10 && outer_ppt;
  if (!cert.valid) return cert;

  // Central terms: the four product states and their mirror images, 1/8 each.
  ProductDecomposition central;
  central.split = SplitKind::kS;
  for (const Vector& v : cnot_central_four_states()) {
    central.terms.push_back(factor_product(v, SplitKind::kS, 0.125));
    central.terms.push_back(factor_product(mirror(v), SplitKind::kS, 0.125));
  }
  const double w_central = 2.0 * p * (1.0 - p);
  const double w_outer = (1.0 - p) * (1.0 - p) + p * p;

  double residual = 0.0;
  const std::array<SplitKind, 1> eb{SplitKind::kEB};
  auto outer = decompose_over_dictionary(cnot_outer_choi(p), eb, 60, &residual);
  cert.checks.emplace_back("outer_reconstruction_error", residual);
  if (residual < kDecompositionTol) {
    cert.upper_witness = {central, outer.front()};
    cert.upper_weights = {w_central, w_outer};
    const Matrix recon = w_central * reconstruct(central) + w_outer * reconstruct(outer.front());
    const double err = distance(recon, noisy_cnot(p).choi().matrix());
    cert.checks.emplace_back("reconstruction_error", err);
    cert.tight = err < kDecompositionTol;
  }
  return cert;
}

VerificationReport verify_certificate(const ThresholdCertificate& cert) {
  VerificationReport rep;
  auto add = [&](const std::string& name, bool ok) { rep.checks.emplace_back(name, ok); };
  Matrix claimed;
  if (cert.kind == "cnot_depolarizing") {
    if (cert.p_star < 0.0 || cert.p_star > 1.0) {
      add("p_in_range", false);
      return rep;
    }
    const CnotStaticChecks& st = cnot_static_checks();
    add("central_terms_product", st.central_error <= 1e-10 && st.schmidt_tail <= 1e-10);
    add("mirror_identity", st.mirror_error <= 1e-10);
    add("outer_ppt", cnot_outer_min_pt_eigenvalue(cert.p_star) >= -kPptTol);
    claimed = noisy_cnot(cert.p_star).choi().matrix();
  } else if (cert.kind == "split_threshold") {
    if (cert.split == SplitKind::kBiEntangling || cert.gate.rows() != 4 || !is_unitary(cert.gate) ||
        cert.noise_lambda.size() != 16) {
      add("well_formed", false);
      return rep;
    }
    const bool prob = cert.noise_lambda.minCoeff() >= -1e-12 && std::abs(cert.noise_lambda.sum() - 1.0) < 1e-9;
    add("noise_is_distribution", prob);
    const EigenBasis basis = eigenprojectors(symmetry_group(cert.gate));
    claimed = diagonal_state(basis, (1.0 - cert.p_star) * unit(16, 0) + cert.p_star * cert.noise_lambda);
    add("state_ppt", min_pt(claimed, cert.split) >= -kPptTol);
    const double lambda0 = max_ppt_lambda0(cert.gate, cert.split).lambda0;
    add("p_star_matches_lp", std::abs(cert.p_star - (1.0 - lambda0)) <= cert.tolerance + 1e-9);
  } else {
    add("known_kind", false);
    return rep;
  }

  if (!cert.upper_witness.empty()) {
    bool shape = cert.upper_weights.size() == cert.upper_witness.size();
    bool factors = true;
    Matrix recon = Matrix::Zero(16, 16);
    for (std::size_t k = 0; shape && k < cert.upper_witness.size(); ++k) {
      const ProductDecomposition& dec = cert.upper_witness[k];
      double total = 0.0;
      for (const ProductTerm& t : dec.terms) {
        total += t.weight;
        factors = factors && t.weight >= 0.0 && t.left.rows() == 4 && t.right.rows() == 4 && valid_state(t.left) &&
                  valid_state(t.right);
      }
      factors = factors && std::abs(total - 1.0) < 1e-6;
      if (factors) recon += cert.upper_weights[k] * reconstruct(dec);
    }
    add("witness_factors_valid", shape && factors);
    add("witness_reconstructs", shape && factors && distance(recon, claimed) <= std::max(cert.tolerance, kDecompositionTol));
  }
  rep.valid = std::all_of(rep.checks.begin(), rep.checks.end(), [](const auto& c) { return c.second; });
  return rep;
}

std::string to_string(BientStatus status) {
  switch (status) {
    case BientStatus::kCertifiedIn: return "certified-in";
    case BientStatus::kCertifiedOutByPpt: return "certified-out-by-PPT";
    case BientStatus::kUndecided: return "undecided";
  }
  return "?";
}

BientMembership bient_membership(const ChoiState& choi, int dictionary_size) {
  if (choi.num_qubits() != 2) throw std::invalid_argument("bient_membership: expected a two-qubit channel");
  BientMembership out;
  const Matrix& c = choi.matrix();
  const std::array<SplitKind, 3> splits{SplitKind::kS, SplitKind::kSS, SplitKind::kEB};
  auto dec = decompose_over_dictionary(c, splits, dictionary_size, &out.residual);
  if (out.residual < kDecompositionTol) {
    out.status = BientStatus::kCertifiedIn;
    out.decomposition = std::move(dec);
    return out;
  }

  // Nearest unitary to the dominant Choi eigenvector.
  const HermitianEigen eig = hermitian_eigen(c);
  const Vector v = eig.vectors.col(15);
  Matrix k(4, 4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) k(b, a) = v(a * 4 + b);
  Eigen::JacobiSVD<Matrix> svd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix u = svd.matrixU() * svd.matrixV().adjoint();
  out.fidelity = (choi_of_unitary(u).matrix() * c).trace().real();
  out.local_group = symmetry_group(u).is_local();
  if (!out.local_group) return out;
  for (SplitKind s : splits) out.bound = std::max(out.bound, max_ppt_lambda0(u, s).lambda0);
  if (out.fidelity > out.bound + 1e-9) out.status = BientStatus::kCertifiedOutByPpt;
  return out;
}

DensityMatrix omega_state() {
  const double r = 1.0 / std::sqrt(2.0);
  Vector ghz = Vector::Zero(8), ghz_p = Vector::Zero(8);
  ghz(0) = r;
  ghz(7) = r;
  ghz_p(3) = r;
  ghz_p(4) = r;
  Vector zero = Vector::Zero(2), one = Vector::Zero(2);
  zero(0) = 1.0;
  one(1) = 1.0;
  const Vector a = kron(ghz, zero);
  const Vector b = kron(ghz_p, one);
  return DensityMatrix(0.5 * a * a.adjoint() + 0.5 * b * b.adjoint(), choi_labels(2));
}

bool OmegaReport::passed() const {
  return marginal_error <= 1e-9 && valid_choi && std::abs(outcome_probability[0] - 0.5) <= 1e-12 &&
         std::abs(outcome_probability[1] - 0.5) <= 1e-12 && std::abs(ghz_fidelity[0] - 1.0) <= 1e-10 &&
         std::abs(ghz_fidelity[1] - 1.0) <= 1e-10 && outputs_separable && product_inputs >= 200 &&
         membership != BientStatus::kCertifiedIn && genuine_tripartite;
}

OmegaReport omega_analysis(int product_inputs, std::uint64_t seed) {
  OmegaReport rep;
  const DensityMatrix omega = omega_state();
  const Matrix& w = omega.matrix();
  const std::array<int, 2> a_side{0, 1};
  rep.marginal_error = max_abs(partial_trace(w, 4, a_side) - identity(4) / 4.0);
  std::optional<ChoiState> choi;
  try {
    choi.emplace(w);
    rep.valid_choi = true;
  } catch (const std::invalid_argument&) {
    rep.valid_choi = false;
  }

  const double r = 1.0 / std::sqrt(2.0);
  std::array<Vector, 2> ghz{Vector::Zero(8), Vector::Zero(8)};
  ghz[0](0) = r;
  ghz[0](7) = r;
  ghz[1](3) = r;
  ghz[1](4) = r;
  const std::array<int, 3> keep{0, 1, 2};
  for (int k = 0; k < 2; ++k) {
    Matrix proj = Matrix::Zero(2, 2);
    proj(k, k) = 1.0;
    const Matrix full = kron(identity(8), proj);
    const Matrix post = full * w * full;
    rep.outcome_probability[k] = post.trace().real();
    const Matrix reduced = partial_trace(post, 4, keep) / rep.outcome_probability[k];
    rep.ghz_fidelity[k] = (ghz[k].adjoint() * reduced * ghz[k])(0, 0).real();
  }
  rep.genuine_tripartite = rep.ghz_fidelity[0] > 0.5 && rep.ghz_fidelity[1] > 0.5;

  if (choi) {
    const Channel channel(*choi, "omega");
    std::mt19937_64 rng(seed);
    rep.min_output_pt_eigenvalue = 1.0;
    const std::array<int, 1> second{1};
    for (int i = 0; i < product_inputs; ++i) {
      Vector in;
      if (i == 0) {
        in = Vector::Zero(4);
        in(1) = 1.0;  // |01>
      } else {
        in = kron(random_state(2, rng), random_state(2, rng));
      }
      const Matrix out = channel.apply(in * in.adjoint());
      rep.min_output_pt_eigenvalue =
          std::min(rep.min_output_pt_eigenvalue, hermitian_eigenvalues(partial_transpose(out, 2, second))(0));
      ++rep.product_inputs;
    }
    rep.outputs_separable = rep.min_output_pt_eigenvalue >= -kPptTol;
    rep.membership = bient_membership(*choi).status;
  }
  return rep;
}

EbMeasurementCheck nondegenerate_measurement_is_eb(const MeasurePrepare& mp) {
  EbMeasurementCheck out;
  for (std::size_t k = 0; k < mp.povm.size(); ++k)
    if (mp.povm[k].rows() != 4 || mp.prepared[k].rows() != 4)
      throw std::invalid_argument("nondegenerate_measurement_is_eb: expected a two-qubit measurement");
  ProductDecomposition dec;
  dec.split = SplitKind::kEB;
  for (std::size_t k = 0; k < mp.povm.size(); ++k) {
    const HermitianEigen eig = hermitian_eigen(mp.povm[k]);
    if (eig.values(2) > 1e-9) {
      out.offending_index = static_cast<int>(k);
      return out;
    }
    const double lambda = eig.values(3);
    if (lambda <= 1e-12) continue;
    const Matrix mt = mp.povm[k].transpose() / lambda;
    dec.terms.push_back({lambda / 4.0, 0.5 * (mt + mt.adjoint()), mp.prepared[k]});
  }
  dec.residual = distance(reconstruct(dec), choi_from_measure_prepare(mp).matrix());
  out.entanglement_breaking = dec.residual < kDecompositionTol;
  out.decomposition = std::move(dec);
  return out;
}

}  // namespace qctol
