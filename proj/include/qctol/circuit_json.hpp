#pragma once

// Circuit and counts JSON.
//
// {"n_qubits": n, "init": [ref | 2x2 matrix, ...], "pad": optional bool,
//  "gates": [{"type": "1q"|"2q", "targets": [...],
//             "channel": <channel JSON> | "<named channel>",
//             "bient_spec": optional branch spec}],
//  "measure": [ids]}
//
// Branch spec: {"named": "noisy_cnot", "p": p} | {"named": "swap"} |
//   {"weights": [p, q, r], "separable": [[A, B], ...], "swap": [[A, B], ...],
//    "measure_prepare": [[M, rho], ...], "reference": optional 16x16 Choi,
//    "name": optional}

#include <cstdint>
#include <string>

#include "qctol/bmachine.hpp"
#include "qctol/channel_json.hpp"

namespace qctol {

std::shared_ptr<const BiEntanglingGateSpec> bient_spec_from_json(const json& j);
json bient_spec_to_json(const BiEntanglingGateSpec& spec);

// Validates the result; schema violations throw JsonSchemaError.
Circuit circuit_from_json(const json& j);
json circuit_to_json(const Circuit& circuit);
Circuit load_circuit(const std::string& path);

json counts_to_json(const Counts& counts, std::uint64_t seed, std::int64_t shots);

}  // namespace qctol
