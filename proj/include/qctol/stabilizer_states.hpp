#pragma once

#include <vector>

#include "qctol/qmath.hpp"

namespace qctol {

// All pure stabilizer states on 1-3 qubits (6, 60 and 1080 of them), global
// phase fixed so the first nonzero amplitude is real and positive. Order is
// deterministic (breadth-first from |0...0> under H, S and CNOT).
const std::vector<Vector>& stabilizer_states(int num_qubits);

}  // namespace qctol
