#include "qctol/dense_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace qctol {

namespace {

void check_size(int n) {
  if (n < 1 || n > kDenseMaxQubits)
    throw std::invalid_argument("dense oracle supports 1 to " + std::to_string(kDenseMaxQubits) + " qubits");
}

int bit_of(Eigen::Index index, int q, int n) { return static_cast<int>((index >> (n - 1 - q)) & 1); }

}  // namespace

DenseState::DenseState(std::span<const Matrix> single_qubit_states) : n_(static_cast<int>(single_qubit_states.size())) {
  check_size(n_);
  rho_ = kron_all(single_qubit_states);
}

DenseState::DenseState(int num_qubits) : n_(num_qubits) {
  check_size(n_);
  const Eigen::Index d = Eigen::Index{1} << n_;
  rho_ = Matrix::Zero(d, d);
  rho_(0, 0) = 1.0;
}

void DenseState::apply_unitary(const Matrix& u, std::span<const int> targets) { rho_ = conjugate(rho_, u, targets); }

void DenseState::apply_channel(const Channel& channel, std::span<const int> targets) {
  if (static_cast<int>(targets.size()) != channel.num_qubits())
    throw std::invalid_argument("channel arity does not match target count");
  Matrix out = Matrix::Zero(rho_.rows(), rho_.cols());
  for (const Matrix& k : channel.kraus().ops) out += conjugate(rho_, k, targets);
  rho_ = std::move(out);
}

double DenseState::probability_zero(int q) const {
  if (q < 0 || q >= n_) throw std::invalid_argument("qubit out of range");
  double p = 0.0;
  for (Eigen::Index i = 0; i < rho_.rows(); ++i)
    if (bit_of(i, q, n_) == 0) p += rho_(i, i).real();
  return p;
}

void DenseState::project(int q, int outcome) {
  if (q < 0 || q >= n_ || (outcome != 0 && outcome != 1)) throw std::invalid_argument("bad projection");
  double tr = 0.0;
  for (Eigen::Index i = 0; i < rho_.rows(); ++i)
    if (bit_of(i, q, n_) == outcome) tr += rho_(i, i).real();
  if (tr <= 1e-15) throw std::invalid_argument("projection onto a zero-probability outcome");
  for (Eigen::Index i = 0; i < rho_.rows(); ++i)
    if (bit_of(i, q, n_) != outcome) {
      rho_.row(i).setZero();
      rho_.col(i).setZero();
    }
  rho_ /= tr;
}

Matrix DenseState::reduced(std::span<const int> keep) const {
  std::vector<int> sorted(keep.begin(), keep.end());
  std::sort(sorted.begin(), sorted.end());
  const Matrix r = partial_trace(rho_, n_, sorted);
  std::vector<int> perm;
  for (int q : keep) perm.push_back(static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), q) - sorted.begin()));
  return permute_qubits(r, perm);
}

DenseState evolve_dense(const Circuit& circuit) {
  circuit.validate();
  check_size(circuit.n_qubits);
  DenseState state(circuit.init);
  for (const Gate& g : circuit.gates) {
    const Channel& ch = g.channel ? *g.channel : g.spec->channel();
    state.apply_channel(ch, g.targets);
  }
  return state;
}

Distribution run_dense(const Circuit& circuit) {
  const DenseState state = evolve_dense(circuit);
  Distribution out;
  if (circuit.measure.empty()) {
    out[""] = 1.0;
    return out;
  }
  const Matrix r = state.reduced(circuit.measure);
  const int m = static_cast<int>(circuit.measure.size());
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    std::string key(static_cast<std::size_t>(m), '0');
    for (int k = 0; k < m; ++k) key[k] = static_cast<char>('0' + bit_of(i, k, m));
    out[key] = std::max(0.0, r(i, i).real());
  }
  return out;
}

ComparisonReport compare(const Counts& counts, const Distribution& exact, double alpha) {
  ComparisonReport rep;
  rep.alpha = alpha;
  std::int64_t shots = 0;
  for (const auto& [k, v] : counts) {
    if (v < 0) throw std::invalid_argument("negative count");
    shots += v;
  }
  if (shots == 0) throw std::invalid_argument("compare: no shots");

  std::map<std::string, OutcomeRow> rows;
  for (const auto& [k, p] : exact) rows[k] = {k, 0, p * static_cast<double>(shots)};
  for (const auto& [k, v] : counts) {
    auto& row = rows[k];
    row.outcome = k;
    row.observed = v;
  }
  bool impossible = false;
  for (const auto& [k, row] : rows) {
    rep.tv_distance += 0.5 * std::abs(static_cast<double>(row.observed) / static_cast<double>(shots) -
                                      row.expected / static_cast<double>(shots));
    if (row.observed > 0 && row.expected <= 1e-15 * static_cast<double>(shots)) impossible = true;
    rep.table.push_back(row);
  }

  // Bins with expected count >= 5 stand alone; the rest are pooled.
  std::vector<std::pair<double, double>> bins;  // (observed, expected)
  double pool_o = 0.0, pool_e = 0.0;
  for (const OutcomeRow& row : rep.table) {
    if (row.expected >= 5.0)
      bins.emplace_back(static_cast<double>(row.observed), row.expected);
    else {
      pool_o += static_cast<double>(row.observed);
      pool_e += row.expected;
    }
  }
  if (pool_e > 0.0) {
    if (pool_e >= 5.0 || bins.empty()) {
      bins.emplace_back(pool_o, pool_e);
    } else {
      auto smallest = std::min_element(bins.begin(), bins.end(), [](auto& a, auto& b) { return a.second < b.second; });
      smallest->first += pool_o;
      smallest->second += pool_e;
    }
  }
  for (const auto& [o, e] : bins) rep.chi2 += (o - e) * (o - e) / e;
  rep.dof = static_cast<int>(bins.size()) - 1;
  if (impossible)
    rep.chi2_pvalue = 0.0;
  else if (rep.dof <= 0)
    rep.chi2_pvalue = 1.0;
  else
    rep.chi2_pvalue = boost::math::gamma_q(0.5 * rep.dof, 0.5 * rep.chi2);
  rep.pass = rep.chi2_pvalue > alpha;
  return rep;
}

}  // namespace qctol
