#pragma once

// Single-qubit geometry: the octahedron spanned by the six Pauli
// eigenstates, noise thresholds for U(theta) = diag(1, e^{i theta}), and the
// Bell twirl that sends any single-qubit channel to a Pauli channel.

#include <array>
#include <cstdint>
#include <vector>

#include "qctol/channels.hpp"

namespace qctol {

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  // Throws std::invalid_argument if the length exceeds 1 + 1e-9.
  static BlochVector checked(double x, double y, double z);
  static BlochVector of(const Matrix& rho);  // 2x2 density matrix

  double l1() const;
  double l2() const;
};

// |x| + |y| + |z| <= 1 + 1e-9.
bool in_octahedron(const BlochVector& r);

enum class NoiseKind { kGeneric, kDephasing };
NoiseKind noise_kind_from_string(const std::string& name);
std::string to_string(NoiseKind kind);

/// Minimal p with (1 - p) a(theta) + p s in the square |x| + |y| <= 1, over
/// s in the unit disc (generic) or s = 0 (dephasing).
struct PlaneThreshold {
  double theta = 0.0;
  NoiseKind kind = NoiseKind::kGeneric;
  double p = 0.0;
  BlochVector noise_point;  // s
  double analytic = 0.0;    // closed-form value for comparison
};

PlaneThreshold min_generic_noise(double theta);
PlaneThreshold min_dephasing_noise(double theta);
PlaneThreshold plane_threshold(double theta, NoiseKind kind);

// Channel whose Choi state is the image of the x-y Bloch point (x, y) under
// |0> -> |00>, |1> -> |11>; U(theta) itself is the point (cos, sin).
Channel plane_channel(double x, double y);
// Inverse map: reads (x, y) from the |00>,|11> coherence of a one-qubit Choi.
BlochVector plane_point(const ChoiState& choi);

struct BellTwirl {
  std::array<double, 4> weights{};  // Pauli weights in I, X, Y, Z order
  Matrix twirled_choi;
  Matrix noise_choi;            // (1/3) sum_{i=x,y,z} of the conjugated channel
  double off_diagonal = 0.0;    // largest off-diagonal entry in the Bell basis
  double mixture_error = 0.0;   // ||E/4 + 3N/4 - pauli_channel(weights)||_max on Choi states
};

BellTwirl bell_twirl(const Channel& channel);

// The 24 single-qubit Cliffords modulo phase, first nonzero entry real positive.
const std::vector<Matrix>& clifford1q_group();

struct Observation0Report {
  int circuits = 0;
  int inputs_checked = 0;
  int escapes = 0;            // outputs outside the octahedron
  int non_vertex_outputs = 0; // outputs neither a vertex nor the centre
  double max_deviation = 0.0; // max over outputs of min(|l1|, |l1 - 1|)

  bool passed() const { return escapes == 0 && non_vertex_outputs == 0; }
};

// Random circuits of H, S, CNOT and computational-basis measurements on the
// system qubit (index 0) plus n_ancilla ancillas in |0>, each run on the six
// vertex inputs. Deterministic for a given seed and independent of threads.
Observation0Report observation0_check(int n_ancilla, int n_circuits, std::uint64_t seed, int threads = 0);

}  // namespace qctol
