#include "qctol/channels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qctol/log.hpp"

namespace qctol {

Labels choi_labels(int num_qubits) {
  Labels out;
  for (int i = 1; i <= num_qubits; ++i) out.push_back("A" + std::to_string(i));
  for (int i = 1; i <= num_qubits; ++i) out.push_back("B" + std::to_string(i));
  return out;
}

namespace {

int choi_qubits(const Matrix& choi) {
  const int total = qubit_count(choi.rows());
  if (total % 2 != 0) throw std::invalid_argument("Choi matrix must act on an even number of qubits");
  return total / 2;
}

// vec(K)[a * d + b] = K(b, a), i.e. (I (x) K) sum_a |a>|a>.
Vector vectorize(const Matrix& k) {
  const Eigen::Index d = k.cols();
  Vector v(d * k.rows());
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < k.rows(); ++b) v(a * k.rows() + b) = k(b, a);
  return v;
}

Matrix unvectorize(const Vector& v, Eigen::Index d) {
  Matrix k(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) k(b, a) = v(a * d + b);
  return k;
}

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability " + std::to_string(p) + " outside [0, 1]");
}

}  // namespace

ChoiState::ChoiState(Matrix choi)
    : state_(choi, choi_labels(choi_qubits(choi))), num_qubits_(choi_qubits(choi)) {
  std::vector<int> a_positions;
  for (int i = 0; i < num_qubits_; ++i) a_positions.push_back(i);
  const Matrix marginal = partial_trace(state_.matrix(), 2 * num_qubits_, a_positions);
  const Matrix target = Matrix::Identity(in_dim(), in_dim()) / static_cast<double>(in_dim());
  if ((marginal - target).cwiseAbs().maxCoeff() > kChannelTol)
    throw std::invalid_argument("Choi state is not trace preserving (A marginal differs from I/d)");
}

KrausSet::KrausSet(std::vector<Matrix> kraus_ops) : ops(std::move(kraus_ops)) {
  if (ops.empty()) throw std::invalid_argument("Kraus set is empty");
  const Eigen::Index d = ops.front().cols();
  Matrix sum = Matrix::Zero(d, d);
  for (const auto& k : ops) {
    if (k.cols() != d || k.rows() != d) throw std::invalid_argument("Kraus operators must be square and equal-sized");
    sum += k.adjoint() * k;
  }
  if ((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > kChannelTol)
    throw std::invalid_argument("Kraus operators do not satisfy sum K^dagger K = I");
}

MeasurePrepare::MeasurePrepare(std::vector<Matrix> povm_elements, std::vector<Matrix> prepared_states)
    : povm(std::move(povm_elements)), prepared(std::move(prepared_states)) {
  if (povm.empty() || povm.size() != prepared.size())
    throw std::invalid_argument("measure-prepare needs one prepared state per POVM element");
  const Eigen::Index d = povm.front().rows();
  Matrix sum = Matrix::Zero(d, d);
  for (std::size_t k = 0; k < povm.size(); ++k) {
    const auto& m = povm[k];
    if (m.rows() != d || m.cols() != d) throw std::invalid_argument("POVM elements must share one dimension");
    if (!is_hermitian(m, kChannelTol) || hermitian_eigenvalues(m)(0) < -kChannelTol)
      throw std::invalid_argument("POVM element " + std::to_string(k) + " is not positive semidefinite");
    sum += m;
    DensityMatrix check(prepared[k]);  // validates
    if (prepared[k].rows() != d) throw std::invalid_argument("prepared state dimension mismatch");
  }
  if ((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > kChannelTol)
    throw std::invalid_argument("POVM elements do not sum to the identity");
}

Channel::Channel(ChoiState choi, std::string name)
    : choi_(std::move(choi)), kraus_(kraus_from_choi(choi_)), name_(std::move(name)) {}

Matrix Channel::apply(const Matrix& rho) const {
  if (rho.rows() != dim() || rho.cols() != dim()) throw std::invalid_argument("channel input dimension mismatch");
  Matrix out = Matrix::Zero(dim(), dim());
  for (const auto& k : kraus_.ops) out += k * rho * k.adjoint();
  return out;
}

Vector choi_vector_of_unitary(const Matrix& u) {
  if (!is_unitary(u, 1e-10)) throw std::invalid_argument("matrix is not unitary");
  qubit_count(u.rows());
  return vectorize(u) / std::sqrt(static_cast<double>(u.rows()));
}

ChoiState choi_of_unitary(const Matrix& u) {
  const Vector v = choi_vector_of_unitary(u);
  return ChoiState(v * v.adjoint());
}

ChoiState choi_from_kraus(const KrausSet& kraus) {
  const Eigen::Index d = kraus.ops.front().cols();
  Matrix choi = Matrix::Zero(d * d, d * d);
  for (const auto& k : kraus.ops) {
    const Vector v = vectorize(k);
    choi += v * v.adjoint();
  }
  return ChoiState(choi / static_cast<double>(d));
}

KrausSet kraus_from_choi(const ChoiState& choi) {
  const Eigen::Index d = choi.in_dim();
  const HermitianEigen eig = hermitian_eigen(static_cast<double>(d) * choi.matrix());
  std::vector<Matrix> ops;
  for (Eigen::Index i = eig.values.size() - 1; i >= 0; --i) {
    const double lambda = eig.values(i);
    if (lambda < 1e-10) continue;
    if (lambda < 1e-7) warn("Kraus extraction kept a small eigenvalue " + std::to_string(lambda));
    ops.push_back(std::sqrt(lambda) * unvectorize(eig.vectors.col(i), d));
  }
  // Dropped eigenvalues perturb sum K^dagger K by at most d * 1e-10 per term;
  // rescale so the set stays exactly trace preserving.
  Matrix sum = Matrix::Zero(d, d);
  for (const auto& k : ops) sum += k.adjoint() * k;
  if ((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-12) {
    Eigen::SelfAdjointEigenSolver<Matrix> s(0.5 * (sum + sum.adjoint()));
    const Matrix inv_sqrt = s.operatorInverseSqrt();
    for (auto& k : ops) k = k * inv_sqrt;
  }
  return KrausSet(std::move(ops));
}

ChoiState choi_from_measure_prepare(const MeasurePrepare& mp) {
  const Eigen::Index d = mp.povm.front().rows();
  Matrix choi = Matrix::Zero(d * d, d * d);
  for (std::size_t k = 0; k < mp.povm.size(); ++k) choi += kron(mp.povm[k].transpose(), mp.prepared[k]);
  return ChoiState(choi / static_cast<double>(d));
}

DensityMatrix apply(const Channel& channel, const DensityMatrix& rho, std::span<const std::string> targets) {
  if (static_cast<int>(targets.size()) != channel.num_qubits())
    throw std::invalid_argument("channel arity " + std::to_string(channel.num_qubits()) + " does not match " +
                                std::to_string(targets.size()) + " targets");
  const auto pos = rho.positions(targets);
  Matrix out = Matrix::Zero(rho.dim(), rho.dim());
  for (const auto& k : channel.kraus().ops) out += conjugate(rho.matrix(), k, pos);
  return DensityMatrix(0.5 * (out + out.adjoint()), rho.labels());
}

DensityMatrix apply(const Channel& channel, const DensityMatrix& rho, std::initializer_list<std::string> targets) {
  std::vector<std::string> t(targets);
  return apply(channel, rho, std::span<const std::string>(t));
}

Channel mix(double p, const Channel& ideal, const Channel& noise) {
  check_probability(p);
  if (ideal.num_qubits() != noise.num_qubits()) throw std::invalid_argument("mixed channels differ in arity");
  return Channel(ChoiState((1.0 - p) * ideal.choi().matrix() + p * noise.choi().matrix()));
}

Channel mixture(std::span<const double> weights, std::span<const Channel> channels) {
  if (weights.size() != channels.size() || channels.empty())
    throw std::invalid_argument("mixture needs one weight per channel");
  double total = 0.0;
  Matrix choi = Matrix::Zero(channels.front().choi().matrix().rows(), channels.front().choi().matrix().cols());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    check_probability(weights[i]);
    if (channels[i].num_qubits() != channels.front().num_qubits())
      throw std::invalid_argument("mixed channels differ in arity");
    total += weights[i];
    choi += weights[i] * channels[i].choi().matrix();
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("mixture weights do not sum to 1");
  return Channel(ChoiState(choi));
}

Channel compose(const Channel& outer, const Channel& inner) {
  if (outer.num_qubits() != inner.num_qubits()) throw std::invalid_argument("composed channels differ in arity");
  std::vector<Matrix> ops;
  for (const auto& a : outer.kraus().ops)
    for (const auto& b : inner.kraus().ops) ops.push_back(a * b);
  return Channel(choi_from_kraus(KrausSet(std::move(ops))));
}

Channel tensor(const Channel& a, const Channel& b) {
  std::vector<Matrix> ops;
  for (const auto& ka : a.kraus().ops)
    for (const auto& kb : b.kraus().ops) ops.push_back(kron(ka, kb));
  return Channel(choi_from_kraus(KrausSet(std::move(ops))));
}

PTM ptm(const Channel& channel) {
  const int n = channel.num_qubits();
  if (n > 2) throw std::invalid_argument("Pauli transfer matrices are limited to two qubits");
  const auto paulis = PauliString::all(n);
  std::vector<Matrix> mats;
  for (const auto& p : paulis) mats.push_back(p.matrix());
  const Eigen::Index count = static_cast<Eigen::Index>(paulis.size());
  const double d = static_cast<double>(channel.dim());
  RealMatrix t(count, count);
  for (Eigen::Index q = 0; q < count; ++q) {
    const Matrix out = channel.apply(mats[q]);
    for (Eigen::Index p = 0; p < count; ++p) t(p, q) = (mats[p] * out).trace().real() / d;
  }
  return PTM{t};
}

RealMatrix pauli_transfer_of_operator(const Matrix& a) {
  const int n = qubit_count(a.rows());
  const auto paulis = PauliString::all(n);
  std::vector<Matrix> mats;
  for (const auto& p : paulis) mats.push_back(p.matrix());
  const Eigen::Index count = static_cast<Eigen::Index>(paulis.size());
  const double d = static_cast<double>(a.rows());
  RealMatrix t(count, count);
  for (Eigen::Index q = 0; q < count; ++q) {
    const Matrix out = a * mats[q] * a.adjoint();
    for (Eigen::Index p = 0; p < count; ++p) t(p, q) = (mats[p] * out).trace().real() / d;
  }
  return t;
}

namespace gates {

Matrix cnot() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
  return m;
}

Matrix cz() {
  Matrix m = Matrix::Identity(4, 4);
  m(3, 3) = -1.0;
  return m;
}

Matrix swap() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1.0;
  return m;
}

Matrix hadamard() {
  Matrix m(2, 2);
  m << 1.0, 1.0, 1.0, -1.0;
  return m / std::sqrt(2.0);
}

Matrix phase_s() { return phase(std::numbers::pi / 2); }

Matrix phase(double theta) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = std::polar(1.0, theta);
  return m;
}

Matrix pi8() { return phase(std::numbers::pi / 4); }

}  // namespace gates

Channel unitary(const Matrix& u, std::string name) { return Channel(choi_of_unitary(u), std::move(name)); }

Channel identity_channel(int num_qubits) { return unitary(identity(1 << num_qubits), "identity"); }

Channel depolarize(int num_qubits) {
  const Eigen::Index d2 = Eigen::Index{1} << (2 * num_qubits);
  return Channel(ChoiState(Matrix::Identity(d2, d2) / static_cast<double>(d2)), "depolarize");
}

Channel dephase(int num_qubits) {
  Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  std::vector<Matrix> ops{Matrix::Identity(1, 1)};
  for (int q = 0; q < num_qubits; ++q) {
    std::vector<Matrix> next;
    for (const auto& k : ops) {
      next.push_back(kron(k, p0));
      next.push_back(kron(k, p1));
    }
    ops = std::move(next);
  }
  return Channel(choi_from_kraus(KrausSet(std::move(ops))), "dephase");
}

Channel pauli_channel(std::span<const double> weights) {
  const std::uint64_t count = weights.size();
  int n = 0;
  while ((std::uint64_t{1} << (2 * n)) < count) ++n;
  if (n == 0 || (std::uint64_t{1} << (2 * n)) != count)
    throw std::invalid_argument("Pauli channel needs 4^n weights");
  double total = 0.0;
  std::vector<Matrix> ops;
  for (std::uint64_t i = 0; i < count; ++i) {
    if (weights[i] < -1e-12) throw std::invalid_argument("Pauli channel weights must be nonnegative");
    total += weights[i];
    if (weights[i] > 0.0) ops.push_back(std::sqrt(weights[i]) * PauliString::from_index(i, n).matrix());
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("Pauli channel weights must sum to 1");
  return Channel(choi_from_kraus(KrausSet(std::move(ops))), "pauli");
}

Channel measure_prepare(const MeasurePrepare& mp, std::string name) {
  return Channel(choi_from_measure_prepare(mp), std::move(name));
}

Channel named_channel(const std::string& name, int num_qubits) {
  const int n = num_qubits == 0 ? 1 : num_qubits;
  auto fixed = [&](int arity, const Matrix& u) {
    if (num_qubits != 0 && num_qubits != arity)
      throw std::invalid_argument("channel '" + name + "' acts on " + std::to_string(arity) + " qubit(s)");
    return unitary(u, name);
  };
  if (name == "cnot") return fixed(2, gates::cnot());
  if (name == "cz") return fixed(2, gates::cz());
  if (name == "swap") return fixed(2, gates::swap());
  if (name == "pi8") return fixed(1, gates::pi8());
  if (name == "phase_s") return fixed(1, gates::phase_s());
  if (name == "hadamard") return fixed(1, gates::hadamard());
  if (name == "depolarize") return depolarize(n);
  if (name == "dephase") return dephase(n);
  if (name == "identity") return identity_channel(n);
  throw std::invalid_argument("unknown named channel '" + name + "'");
}

Channel random_channel(int num_qubits, std::mt19937_64& rng, int kraus_count) {
  if (num_qubits < 1 || kraus_count < 1) throw std::invalid_argument("random_channel: bad size");
  const int d = 1 << num_qubits;
  const Matrix u = random_unitary(d * kraus_count, rng);
  std::vector<Matrix> ops;
  for (int k = 0; k < kraus_count; ++k) ops.push_back(u.block(k * d, 0, d, d));
  return Channel(choi_from_kraus(KrausSet(std::move(ops))), "random");
}

}  // namespace qctol
