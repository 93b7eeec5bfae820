#include "qctol/bmachine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <unordered_map>

#include <Eigen/Eigenvalues>

#include "qctol/thresholds.hpp"

namespace qctol {

namespace {

constexpr double kBranchTol = 1e-9;
constexpr double kRepairFloor = -1e-7;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// sigma_i (x) sigma_j at index 4i + j.
const std::array<Eigen::Matrix4cd, 16>& pauli_products() {
  static const std::array<Eigen::Matrix4cd, 16> table = [] {
    const std::array<char, 4> names{'I', 'X', 'Y', 'Z'};
    std::array<Eigen::Matrix4cd, 16> t;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) t[4 * i + j] = kron(pauli(names[i]), pauli(names[j]));
    return t;
  }();
  return table;
}

PairMatrix pauli_matrix_of(const Eigen::Matrix4cd& rho4) {
  const auto& p = pauli_products();
  PairMatrix r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r(i, j) = (p[4 * i + j] * rho4).trace().real();
  return r;
}

Eigen::Matrix4cd density_of(const PairMatrix& r) {
  const auto& p = pauli_products();
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (r(i, j) != 0.0) rho += r(i, j) * p[4 * i + j];
  return 0.25 * rho;
}

Ptm2 reversed(const Ptm2& t) {
  Ptm2 out;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) out((i % 4) * 4 + i / 4, (j % 4) * 4 + j / 4) = t(i, j);
  return out;
}

bool is_first(const PairState& pair, int q) { return pair.qubits[0] == q; }

// Pauli vector of qubit q's marginal.
Eigen::Vector4d marginal(const PairState& pair, int q) {
  return is_first(pair, q) ? Eigen::Vector4d(pair.r.col(0)) : Eigen::Vector4d(pair.r.row(0).transpose());
}

void transform_qubit(PairState& pair, int q, const Ptm1& t) {
  if (is_first(pair, q))
    pair.r = t * pair.r;
  else
    pair.r = pair.r * t.transpose();
}

void set_pair(MachineState& s, int slot, int x, int y, const PairMatrix& r_xy) {
  PairState& p = s.pairs[slot];
  if (x < y) {
    p.qubits = {x, y};
    p.r = r_xy;
  } else {
    p.qubits = {y, x};
    p.r = r_xy.transpose();
  }
  s.partner[x] = y;
  s.partner[y] = x;
  s.pair_index[x] = slot;
  s.pair_index[y] = slot;
}

// Normalizes a conditional pair and enforces the PSD repair rule.
void condition(PairState& pair) {
  const double tr = pair.r(0, 0);
  if (!(tr > 0.0)) throw ShotError("conditional pair state has zero trace");
  pair.r /= tr;
  const Eigen::Matrix4cd rho = density_of(pair.r);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> eig(Eigen::Matrix4cd(0.5 * (rho + rho.adjoint())),
                                                      Eigen::EigenvaluesOnly);
  const double min_ev = eig.eigenvalues()(0);
  if (min_ev >= 0.0) return;
  if (min_ev < kRepairFloor)
    throw ShotError("conditional pair state has eigenvalue " + std::to_string(min_ev) + " below the repair floor");
  eig.compute(Eigen::Matrix4cd(0.5 * (rho + rho.adjoint())));
  Eigen::Vector4d ev = eig.eigenvalues().cwiseMax(0.0);
  ev /= ev.sum();
  const Eigen::Matrix4cd fixed = eig.eigenvectors() * ev.cast<cplx>().asDiagonal() * eig.eigenvectors().adjoint();
  pair.r = pauli_matrix_of(fixed);
}

std::size_t sample_index(const std::vector<double>& weights, double total, CounterRng& rng) {
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  // Round-off at the top end: last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0.0) return i;
  return weights.size() - 1;
}

void check_cross(const MachineState& s, int a, int b) {
  const int n = s.num_qubits();
  if (a < 0 || b < 0 || a >= n || b >= n || a == b) throw std::invalid_argument("gate targets out of range");
  if (s.partner[a] == b) throw std::invalid_argument("targets share a pair; use the in-pair update");
}

void apply_in_pair_ordered(MachineState& s, const Ptm2& t_ab, const Ptm2& t_ba, int a, int b) {
  if (s.partner[a] != b) throw std::invalid_argument("apply_2q_in_pair: targets are not partners");
  PairState& pair = s.pairs[s.pair_index[a]];
  const Ptm2& t = is_first(pair, a) ? t_ab : t_ba;
  Eigen::Matrix<double, 16, 1> v;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) v(4 * i + j) = pair.r(i, j);
  const Eigen::Matrix<double, 16, 1> out = t * v;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) pair.r(i, j) = out(4 * i + j);
}

Matrix kraus_operator_sum(const std::vector<KrausPair>& pairs, bool swapped) {
  Matrix total = Matrix::Zero(4, 4);
  for (const KrausPair& k : pairs) {
    Matrix op = kron(k.first, k.second);
    if (swapped) op = op * gates::swap();
    total += op.adjoint() * op;
  }
  return total;
}

ChoiState branch_choi(const std::vector<KrausPair>& pairs, bool swapped) {
  std::vector<Matrix> ops;
  for (const KrausPair& k : pairs) {
    if (k.first.rows() != 2 || k.first.cols() != 2 || k.second.rows() != 2 || k.second.cols() != 2)
      throw std::invalid_argument("Kraus pairs must hold 2x2 operators");
    Matrix op = kron(k.first, k.second);
    if (swapped) op = op * gates::swap();
    ops.push_back(op);
  }
  return choi_from_kraus(KrausSet(std::move(ops)));
}

// Kraus operator of a single-qubit factor from a normalized 2-qubit Choi vector.
Matrix unvec2(const Vector& v) {
  Matrix k(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) k(b, a) = v(2 * a + b);
  return k;
}

Vector top_eigenvector(const Matrix& rho) { return hermitian_eigen(rho).vectors.col(rho.rows() - 1); }

}  // namespace

BiEntanglingGateSpec::BiEntanglingGateSpec(std::array<double, 3> weights, std::vector<KrausPair> separable,
                                           std::vector<KrausPair> swap, std::optional<MeasurePrepare> eb,
                                           std::optional<Matrix> reference, std::string name)
    : weights_(weights), separable_(std::move(separable)), swap_(std::move(swap)), eb_(std::move(eb)),
      name_(std::move(name)) {
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw std::invalid_argument("branch weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("branch weights must sum to 1");

  std::vector<double> mix_weights;
  std::vector<Channel> parts;
  const Matrix id4 = identity(4);
  auto add_kraus_branch = [&](const std::vector<KrausPair>& pairs, bool swapped, double w, const char* label) {
    if (w == 0.0 && pairs.empty()) return;
    if (pairs.empty()) throw std::invalid_argument(std::string(label) + " branch has weight but no Kraus pairs");
    if ((kraus_operator_sum(pairs, swapped) - id4).cwiseAbs().maxCoeff() > 1e-9)
      throw std::invalid_argument(std::string(label) + " branch is not trace preserving");
    if (w > 0.0) {
      mix_weights.push_back(w);
      parts.emplace_back(branch_choi(pairs, swapped));
    }
  };
  add_kraus_branch(separable_, false, weights_[0], "separable");
  add_kraus_branch(swap_, true, weights_[1], "swap");
  if (eb_) {
    if (eb_->povm.empty() || eb_->povm.front().rows() != 4)
      throw std::invalid_argument("entanglement-breaking branch must act on two qubits");
    if (weights_[2] > 0.0) {
      mix_weights.push_back(weights_[2]);
      parts.push_back(measure_prepare(*eb_));
    }
  } else if (weights_[2] > 0.0) {
    throw std::invalid_argument("entanglement-breaking branch has weight but no measurement");
  }
  channel_ = std::make_shared<const Channel>(mixture(mix_weights, parts).choi(), name_);
  if (reference) {
    if (reference->rows() != 16 || reference->cols() != 16)
      throw std::invalid_argument("reference Choi must be 16x16");
    if ((channel_->choi().matrix() - *reference).cwiseAbs().maxCoeff() > 1e-8)
      throw std::invalid_argument("branch mixture does not match the reference Choi");
  }
}

BiEntanglingGateSpec noisy_cnot_spec(double p) {
  if (p < 2.0 / 3.0 - 1e-12 || p > 1.0)
    throw std::invalid_argument("noisy_cnot_spec: needs 2/3 <= p <= 1 for a bi-entangling decomposition");
  const ThresholdCertificate cert = cnot_depolarizing_certificate(std::max(p, 2.0 / 3.0));
  if (!cert.tight || cert.upper_witness.size() != 2)
    throw std::runtime_error("noisy_cnot_spec: no constructive decomposition found");

  // Central terms: pure products across (A1 B1)|(A2 B2) give Kraus pairs.
  std::vector<KrausPair> sep;
  for (const ProductTerm& t : cert.upper_witness[0].terms) {
    const Vector l = top_eigenvector(t.left);
    const Vector r = top_eigenvector(t.right);
    sep.push_back({std::sqrt(2.0 * t.weight) * unvec2(l), std::sqrt(2.0) * unvec2(r)});
  }
  // Outer terms across input|output: measure-prepare form.
  std::vector<Matrix> povm, prepared;
  for (const ProductTerm& t : cert.upper_witness[1].terms) {
    povm.push_back(4.0 * t.weight * Matrix(t.left.transpose()));
    prepared.push_back(t.right);
  }
  const double w_sep = 2.0 * p * (1.0 - p);
  return BiEntanglingGateSpec({w_sep, 0.0, 1.0 - w_sep}, std::move(sep), {},
                              MeasurePrepare(std::move(povm), std::move(prepared)), noisy_cnot(p).choi().matrix(),
                              "noisy_cnot");
}

BiEntanglingGateSpec swap_spec() {
  return BiEntanglingGateSpec({0.0, 1.0, 0.0}, {}, {{identity(2), identity(2)}}, std::nullopt,
                              choi_of_unitary(gates::swap()).matrix(), "swap");
}

MeasurePrepare bell_measurement(std::vector<Matrix> prepared) {
  if (prepared.size() != 4) throw std::invalid_argument("bell_measurement: need four prepared states");
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<Matrix> povm;
  const std::array<std::array<int, 2>, 4> kets{{{0, 3}, {0, 3}, {1, 2}, {1, 2}}};
  const std::array<double, 4> signs{1.0, -1.0, 1.0, -1.0};
  for (int k = 0; k < 4; ++k) {
    Vector v = Vector::Zero(4);
    v(kets[k][0]) = r;
    v(kets[k][1]) = signs[k] * r;
    povm.push_back(v * v.adjoint());
  }
  return MeasurePrepare(std::move(povm), std::move(prepared));
}

std::vector<KrausPair> product_kraus_pairs(const Channel& a, const Channel& b) {
  if (a.num_qubits() != 1 || b.num_qubits() != 1) throw std::invalid_argument("product_kraus_pairs: single-qubit channels");
  std::vector<KrausPair> out;
  for (const Matrix& ka : a.kraus().ops)
    for (const Matrix& kb : b.kraus().ops) out.push_back({ka, kb});
  return out;
}

void Circuit::validate() const {
  if (n_qubits < 1) throw std::invalid_argument("circuit needs at least one qubit");
  if (static_cast<int>(init.size()) != n_qubits) throw std::invalid_argument("one init state per qubit required");
  for (const Matrix& m : init) {
    if (m.rows() != 2 || m.cols() != 2) throw std::invalid_argument("init states must be 2x2");
    DensityMatrix check(m);
    (void)check;
  }
  if (n_qubits % 2 == 1 && !pad) throw std::invalid_argument("odd qubit count needs padding");
  for (std::size_t g = 0; g < gates.size(); ++g) {
    const Gate& gate = gates[g];
    const std::string where = "gate " + std::to_string(g) + ": ";
    if (gate.targets.empty() || gate.targets.size() > 2) throw std::invalid_argument(where + "one or two targets");
    for (int t : gate.targets)
      if (t < 0 || t >= n_qubits) throw std::invalid_argument(where + "target out of range");
    if (gate.targets.size() == 2 && gate.targets[0] == gate.targets[1])
      throw std::invalid_argument(where + "targets must differ");
    if (gate.targets.size() == 1) {
      if (!gate.channel || gate.channel->num_qubits() != 1) throw std::invalid_argument(where + "needs a one-qubit channel");
      if (gate.spec) throw std::invalid_argument(where + "one-qubit gates take no branch spec");
    } else {
      if (!gate.channel && !gate.spec) throw std::invalid_argument(where + "needs a channel or a branch spec");
      if (gate.channel && gate.channel->num_qubits() != 2) throw std::invalid_argument(where + "needs a two-qubit channel");
      if (gate.channel && gate.spec &&
          (gate.channel->choi().matrix() - gate.spec->channel().choi().matrix()).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument(where + "channel and branch spec disagree");
    }
  }
  std::vector<bool> seen(static_cast<std::size_t>(n_qubits), false);
  for (int q : measure) {
    if (q < 0 || q >= n_qubits) throw std::invalid_argument("measured qubit out of range");
    if (seen[q]) throw std::invalid_argument("qubit measured twice");
    seen[q] = true;
  }
}

Circuit& Circuit::add(const Channel& channel, int target) {
  gates.push_back({{target}, std::make_shared<const Channel>(channel), nullptr});
  return *this;
}

Circuit& Circuit::add(const Channel& channel, int a, int b) {
  gates.push_back({{a, b}, std::make_shared<const Channel>(channel), nullptr});
  return *this;
}

Circuit& Circuit::add(std::shared_ptr<const BiEntanglingGateSpec> spec, int a, int b) {
  gates.push_back({{a, b}, nullptr, std::move(spec)});
  return *this;
}

Matrix init_state_from_ref(const std::string& ref) {
  const double r = 1.0 / std::sqrt(2.0);
  Vector v(2);
  if (ref == "0")
    v << 1.0, 0.0;
  else if (ref == "1")
    v << 0.0, 1.0;
  else if (ref == "+")
    v << r, r;
  else if (ref == "-")
    v << r, -r;
  else if (ref == "+i")
    v << r, cplx(0.0, r);
  else if (ref == "-i")
    v << r, cplx(0.0, -r);
  else if (ref == "mixed")
    return identity(2) / 2.0;
  else
    throw std::invalid_argument("unknown init state \"" + ref + "\"");
  return v * v.adjoint();
}

Circuit make_circuit(int n_qubits, std::vector<int> measure) {
  Circuit c;
  c.n_qubits = n_qubits;
  c.init.assign(static_cast<std::size_t>(n_qubits), init_state_from_ref("0"));
  c.measure = std::move(measure);
  return c;
}

bool MachineState::is_perfect_matching() const {
  const int n = num_qubits();
  if (n % 2 != 0 || static_cast<int>(pairs.size()) * 2 != n) return false;
  for (int q = 0; q < n; ++q) {
    const int p = partner[q];
    if (p < 0 || p >= n || p == q || partner[p] != q) return false;
    const PairState& ps = pairs[pair_index[q]];
    if (pair_index[p] != pair_index[q] || ps.qubits[0] >= ps.qubits[1]) return false;
    if (ps.qubits[0] != std::min(p, q) || ps.qubits[1] != std::max(p, q)) return false;
  }
  return true;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t shot) : key_(splitmix(splitmix(seed) ^ shot)) {}

void CounterRng::set_stream(std::uint64_t stream) {
  stream_ = stream;
  draw_ = 0;
}

double CounterRng::uniform() {
  const std::uint64_t x = splitmix(key_ ^ splitmix((stream_ << 24) ^ draw_++));
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

Ptm1 ptm1_of(const Channel& channel) {
  if (channel.num_qubits() != 1) throw std::invalid_argument("ptm1_of: one-qubit channel required");
  return ptm(channel).matrix;
}

Ptm2 ptm2_of(const Channel& channel) {
  if (channel.num_qubits() != 2) throw std::invalid_argument("ptm2_of: two-qubit channel required");
  return ptm(channel).matrix;
}

CompiledSpec compile_spec(const BiEntanglingGateSpec& spec) {
  CompiledSpec c;
  c.weights = spec.weights();
  for (const KrausPair& k : spec.separable())
    c.separable.push_back({pauli_transfer_of_operator(k.first), pauli_transfer_of_operator(k.second)});
  for (const KrausPair& k : spec.swap())
    c.swap.push_back({pauli_transfer_of_operator(k.first), pauli_transfer_of_operator(k.second)});
  if (spec.eb()) {
    for (std::size_t k = 0; k < spec.eb()->povm.size(); ++k) {
      c.povm.push_back(pauli_matrix_of(Eigen::Matrix4cd(spec.eb()->povm[k])));
      c.prepared.push_back(pauli_matrix_of(Eigen::Matrix4cd(spec.eb()->prepared[k])));
    }
  }
  c.in_pair = ptm2_of(spec.channel());
  return c;
}

Matrix pair_density(const PairState& pair) { return density_of(pair.r); }

MachineState init_machine(const Circuit& circuit) {
  circuit.validate();
  std::vector<Matrix> init = circuit.init;
  if (init.size() % 2 == 1) init.push_back(init_state_from_ref("0"));
  const int n = static_cast<int>(init.size());
  MachineState s;
  s.partner.resize(n);
  s.pair_index.resize(n);
  for (int q = 0; q < n; q += 2) {
    const RealVector a = pauli_expand(init[q]);
    const RealVector b = pauli_expand(init[q + 1]);
    PairState p;
    p.qubits = {q, q + 1};
    p.r = Eigen::Vector4d(a) * Eigen::Vector4d(b).transpose();
    s.partner[q] = q + 1;
    s.partner[q + 1] = q;
    s.pair_index[q] = s.pair_index[q + 1] = static_cast<int>(s.pairs.size());
    s.pairs.push_back(p);
  }
  return s;
}

void apply_1q(MachineState& s, const Ptm1& ptm, int target) {
  if (target < 0 || target >= s.num_qubits()) throw std::invalid_argument("apply_1q: target out of range");
  transform_qubit(s.pairs[s.pair_index[target]], target, ptm);
}

void apply_2q_in_pair(MachineState& s, const Ptm2& ptm, int a, int b) {
  if (a < 0 || b < 0 || a >= s.num_qubits() || b >= s.num_qubits())
    throw std::invalid_argument("apply_2q_in_pair: target out of range");
  apply_in_pair_ordered(s, ptm, reversed(ptm), a, b);
}

void separable_branch(MachineState& s, const std::vector<CompiledKrausPair>& pairs, int a, int b, CounterRng& rng,
                      BranchTrace* trace) {
  check_cross(s, a, b);
  if (pairs.empty()) throw ShotError("separable branch has no Kraus pairs");
  PairState& pa = s.pairs[s.pair_index[a]];
  PairState& pb = s.pairs[s.pair_index[b]];
  const Eigen::Vector4d ra = marginal(pa, a);
  const Eigen::Vector4d rb = marginal(pb, b);
  std::vector<double> w(pairs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    w[i] = std::max(0.0, pairs[i].first.row(0).dot(ra)) * std::max(0.0, pairs[i].second.row(0).dot(rb));
    total += w[i];
  }
  if (total < 1e-12) throw ShotError("separable branch: total Kraus weight vanishes");
  if (std::abs(total - 1.0) > kBranchTol) throw ShotError("separable branch: Kraus weights do not sum to 1");
  const std::size_t i = sample_index(w, total, rng);
  transform_qubit(pa, a, pairs[i].first);
  transform_qubit(pb, b, pairs[i].second);
  condition(pa);
  condition(pb);
  if (trace) trace->push_back("sep[" + std::to_string(i) + "]");
}

void swap_branch(MachineState& s, const std::vector<CompiledKrausPair>& pairs, int a, int b, CounterRng& rng,
                 BranchTrace* trace) {
  check_cross(s, a, b);
  const int x = s.partner[a];
  const int y = s.partner[b];
  const int slot_a = s.pair_index[a];
  const int slot_b = s.pair_index[b];
  // Orient both pair matrices as (x, a) and (b, y), then exchange a and b.
  const PairMatrix r_xa = is_first(s.pairs[slot_a], x) ? s.pairs[slot_a].r : PairMatrix(s.pairs[slot_a].r.transpose());
  const PairMatrix r_by = is_first(s.pairs[slot_b], b) ? s.pairs[slot_b].r : PairMatrix(s.pairs[slot_b].r.transpose());
  set_pair(s, slot_a, x, b, r_xa);
  set_pair(s, slot_b, a, y, r_by);
  if (trace) trace->push_back("swap");
  separable_branch(s, pairs, a, b, rng, trace);
}

void eb_branch(MachineState& s, const std::vector<PairMatrix>& povm, const std::vector<PairMatrix>& prepared, int a,
               int b, CounterRng& rng, BranchTrace* trace) {
  check_cross(s, a, b);
  if (povm.empty() || povm.size() != prepared.size()) throw ShotError("entanglement-breaking branch is empty");
  const int x = s.partner[a];
  const int y = s.partner[b];
  const int slot_a = s.pair_index[a];
  const int slot_b = s.pair_index[b];
  const PairMatrix r_xa = is_first(s.pairs[slot_a], x) ? s.pairs[slot_a].r : PairMatrix(s.pairs[slot_a].r.transpose());
  const PairMatrix r_by = is_first(s.pairs[slot_b], b) ? s.pairs[slot_b].r : PairMatrix(s.pairs[slot_b].r.transpose());
  const Eigen::Vector4d ra = r_xa.row(0).transpose();
  const Eigen::Vector4d rb = r_by.col(0);
  std::vector<double> w(povm.size());
  double total = 0.0;
  for (std::size_t k = 0; k < povm.size(); ++k) {
    w[k] = std::max(0.0, 0.25 * ra.dot(povm[k] * rb));
    total += w[k];
  }
  if (std::abs(total - 1.0) > kBranchTol) throw ShotError("entanglement-breaking branch: outcome probabilities do not sum to 1");
  const std::size_t k = sample_index(w, total, rng);
  const PairMatrix r_xy = 0.25 * r_xa * povm[k] * r_by;
  set_pair(s, slot_a, x, y, r_xy);
  condition(s.pairs[slot_a]);
  set_pair(s, slot_b, a, b, prepared[k]);
  if (trace) trace->push_back("eb[" + std::to_string(k) + "]");
}

void apply_2q_cross_pair(MachineState& s, const CompiledSpec& spec, int a, int b, CounterRng& rng, BranchTrace* trace) {
  if (a >= 0 && a < s.num_qubits() && s.partner[a] == b) {
    apply_2q_in_pair(s, spec.in_pair, a, b);
    if (trace) trace->push_back("pair");
    return;
  }
  const double u = rng.uniform();
  if (u < spec.weights[0])
    separable_branch(s, spec.separable, a, b, rng, trace);
  else if (u < spec.weights[0] + spec.weights[1] || spec.weights[2] == 0.0)
    swap_branch(s, spec.swap, a, b, rng, trace);
  else
    eb_branch(s, spec.povm, spec.prepared, a, b, rng, trace);
}

int measure_qubit(MachineState& s, int q, CounterRng& rng) {
  if (q < 0 || q >= s.num_qubits()) throw std::invalid_argument("measure_qubit: qubit out of range");
  PairState& pair = s.pairs[s.pair_index[q]];
  const double z = marginal(pair, q)(3);
  const double p0 = std::clamp(0.5 * (1.0 + z), 0.0, 1.0);
  const int bit = rng.uniform() < p0 ? 0 : 1;
  Ptm1 proj = Ptm1::Zero();
  const double sign = bit == 0 ? 1.0 : -1.0;
  proj(0, 0) = 0.5;
  proj(0, 3) = 0.5 * sign;
  proj(3, 0) = 0.5 * sign;
  proj(3, 3) = 0.5;
  transform_qubit(pair, q, proj);
  condition(pair);
  return bit;
}

CompiledCircuit::CompiledCircuit(const Circuit& circuit) : circuit_(circuit), initial_(init_machine(circuit_)) {
  std::unordered_map<const BiEntanglingGateSpec*, std::shared_ptr<const CompiledSpec>> cache;
  for (const Gate& g : circuit_.gates) {
    Step st;
    st.arity = static_cast<int>(g.targets.size());
    st.targets[0] = g.targets[0];
    if (st.arity == 1) {
      st.one = ptm1_of(*g.channel);
    } else {
      st.targets[1] = g.targets[1];
      if (g.spec) {
        auto it = cache.find(g.spec.get());
        if (it == cache.end()) it = cache.emplace(g.spec.get(), std::make_shared<const CompiledSpec>(compile_spec(*g.spec))).first;
        st.spec = it->second;
        st.two = st.spec->in_pair;
      } else {
        st.two = ptm2_of(*g.channel);
      }
      st.two_reversed = reversed(st.two);
    }
    steps_.push_back(std::move(st));
  }
}

ShotResult sample_shot(const CompiledCircuit& compiled, std::uint64_t seed, std::uint64_t shot, bool record_trace) {
  MachineState s = compiled.initial_state();
  CounterRng rng(seed, shot);
  ShotResult out;
  BranchTrace* trace = record_trace ? &out.branch_trace : nullptr;
  const auto& steps = compiled.steps();
  for (std::size_t g = 0; g < steps.size(); ++g) {
    const auto& st = steps[g];
    rng.set_stream(g);
    if (st.arity == 1) {
      apply_1q(s, st.one, st.targets[0]);
      continue;
    }
    const int a = st.targets[0], b = st.targets[1];
    if (s.partner[a] == b) {
      apply_in_pair_ordered(s, st.two, st.two_reversed, a, b);
      if (trace) trace->push_back("g" + std::to_string(g) + ":pair");
      continue;
    }
    if (!st.spec)
      throw ShotError("gate " + std::to_string(g) + " acts across pairs but has no bi-entangling decomposition");
    if (trace) trace->push_back("g" + std::to_string(g));
    apply_2q_cross_pair(s, *st.spec, a, b, rng, trace);
  }
  const auto& measure = compiled.circuit().measure;
  for (std::size_t m = 0; m < measure.size(); ++m) {
    rng.set_stream(steps.size() + m);
    out.bits.push_back(measure_qubit(s, measure[m], rng));
  }
  return out;
}

int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("QCTOL_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Counts run(const Circuit& circuit, std::int64_t shots, std::uint64_t seed, int threads) {
  if (shots < 0) throw std::invalid_argument("run: shots must be nonnegative");
  const CompiledCircuit compiled(circuit);
  const int workers = static_cast<int>(std::min<std::int64_t>(worker_count(threads), std::max<std::int64_t>(shots, 1)));
  std::vector<Counts> partial(static_cast<std::size_t>(workers));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto work = [&](int w) {
    try {
      const std::int64_t begin = shots * w / workers;
      const std::int64_t end = shots * (w + 1) / workers;
      std::string key;
      for (std::int64_t shot = begin; shot < end; ++shot) {
        const ShotResult r = sample_shot(compiled, seed, static_cast<std::uint64_t>(shot));
        key.assign(r.bits.size(), '0');
        for (std::size_t i = 0; i < r.bits.size(); ++i) key[i] = static_cast<char>('0' + r.bits[i]);
        ++partial[w][key];
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  Counts total;
  for (const Counts& c : partial)
    for (const auto& [k, v] : c) total[k] += v;
  return total;
}

}  // namespace qctol
