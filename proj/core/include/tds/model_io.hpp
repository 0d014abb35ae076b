#pragma once

#include <string>
#include <string_view>

#include "tds/quasipolynomial.hpp"

namespace tds {

/**
 * Model file format (JSON):
 *
 *   {"delays": {"kind": "commensurate", "tau": 1.0}
 *            | {"kind": "fixed", "values": [0, 1.0, 3.14]},
 *    "terms": [{"index": 0, "coeffs": [2, 3, 1]}, ...]}
 *
 * Unknown fields are rejected. Errors are ValidationError with the offending
 * field path or the line of a syntax error.
 */
Quasipolynomial parse_model(std::string_view text);
Quasipolynomial load_model(const std::string& path);
std::string serialize_model(const Quasipolynomial& qp);

}  // namespace tds
