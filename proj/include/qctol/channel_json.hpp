#pragma once

// JSON forms of matrices and channels.
//
// Matrices are arrays of rows; each entry is a [re, im] pair.
// Channel: {"kind": "unitary"|"kraus"|"choi"|"measure_prepare"|"named",
//           "dim": d, "data": ..., "name": optional string}
//   unitary          data = d x d matrix
//   kraus            data = list of d x d matrices
//   choi             data = d^2 x d^2 matrix
//   measure_prepare  data = list of [M_k, rho_k] pairs
//   named            name = cnot | pi8 | phase_s | hadamard | depolarize |
//                    dephase | identity | swap | cz; dim optional
// Unknown fields are errors.

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qctol/channels.hpp"

namespace qctol {

using json = nlohmann::json;

class JsonSchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Rounds to 9 significant digits, the precision of every emitted number.
double round_sig9(double x);

// Full double precision, so certificates and channels replay exactly.
json matrix_to_json(const Matrix& m);
// `what` names the field in error messages.
Matrix matrix_from_json(const json& j, const std::string& what);

json real_vector_to_json(const RealVector& v);
RealVector real_vector_from_json(const json& j, const std::string& what);

// Throws JsonSchemaError unless every key of `obj` is in `allowed`.
void require_only_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& what);

Channel channel_from_json(const json& j);
// Always written as kind "choi".
json channel_to_json(const Channel& channel);
MeasurePrepare measure_prepare_from_json(const json& data, const std::string& what);

json read_json_file(const std::string& path);
Channel load_channel(const std::string& path);

}  // namespace qctol
