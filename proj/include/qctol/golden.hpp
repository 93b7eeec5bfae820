#pragma once

// Reference circuits (at most 8 qubits, at most 20 gates) used to check the
// pairing-list simulator against dense evolution.

#include <string>
#include <vector>

#include "qctol/bmachine.hpp"

namespace qctol {

struct GoldenCircuit {
  std::string name;
  std::string description;
  Circuit circuit;
};

// Twelve circuits; builds the noisy-CNOT decomposition once and shares it.
std::vector<GoldenCircuit> golden_suite();

// Two Bell pairs (0,1) and (2,3), Bell measurement on (1,2) reprepared as the
// computational state |k>, then a Bell-basis readout of (0,3).
Circuit entanglement_swapping_circuit();

// |+>|0> on qubits 0 and 2 of four, p-depolarized CNOT across the pairs.
Circuit noisy_cnot_circuit(double p);

}  // namespace qctol
