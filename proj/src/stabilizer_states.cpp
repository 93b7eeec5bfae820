#include "qctol/stabilizer_states.hpp"

#include <deque>
#include <map>
#include <mutex>
#include <stdexcept>

#include "qctol/channels.hpp"

namespace qctol {

namespace {

Vector canonical_phase(const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > 1e-9) return v * (std::abs(v(i)) / v(i));
  return v;
}

bool same_state(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff() < 1e-9; }

std::vector<Vector> enumerate(int n) {
  std::vector<Matrix> gens;
  const Matrix h = gates::hadamard(), s = gates::phase_s();
  for (int q = 0; q < n; ++q) {
    const int pos[] = {q};
    gens.push_back(embed(h, pos, n));
    gens.push_back(embed(s, pos, n));
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b) {
        const int pos[] = {a, b};
        gens.push_back(embed(gates::cnot(), pos, n));
      }
  Vector start = Vector::Zero(Eigen::Index{1} << n);
  start(0) = 1.0;
  std::vector<Vector> found{start};
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const Vector cur = found[queue.front()];
    queue.pop_front();
    for (const auto& g : gens) {
      const Vector next = canonical_phase(g * cur);
      bool known = false;
      for (const auto& f : found)
        if (same_state(f, next)) {
          known = true;
          break;
        }
      if (!known) {
        found.push_back(next);
        queue.push_back(found.size() - 1);
      }
    }
  }
  return found;
}

}  // namespace

const std::vector<Vector>& stabilizer_states(int num_qubits) {
  if (num_qubits < 1 || num_qubits > 3) throw std::invalid_argument("stabilizer states are enumerated for 1-3 qubits");
  static std::mutex mutex;
  static std::map<int, std::vector<Vector>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(num_qubits);
  if (it == cache.end()) it = cache.emplace(num_qubits, enumerate(num_qubits)).first;
  return it->second;
}

}  // namespace qctol
