#pragma once

// Certificate files:
// {"schema_version": 1, "kind": "split_threshold"|"cnot_depolarizing",
//  "p_star": x, "split": "S"|"SS"|"EB"|"bi-entangling", "tight": b,
//  "valid": b, "tolerance": x, "gate": matrix, "noise_lambda": [16 numbers],
//  "witnesses": {"lower": [{"p", "min_pt_eigenvalue", "feasible"}],
//                "upper": [{"split", "weight", "residual",
//                           "terms": [{"weight", "left", "right"}]}],
//                "checks": {name: value}}}
// Numbers are written at full precision so a file replays exactly.

#include "qctol/channel_json.hpp"
#include "qctol/thresholds.hpp"

namespace qctol {

inline constexpr int kCertificateSchemaVersion = 1;

json certificate_to_json(const ThresholdCertificate& certificate);
ThresholdCertificate certificate_from_json(const json& j);

}  // namespace qctol
