// JSON parameter files and u grids.
//
// Parameter file:
//   {"version": 1, "d": 2, "alpha": [[..]], "b": [[..]],
//    "drift": {"type": "lyapunov", "beta": [[..]]} | {"type": "general", "matrix": [[..]]},
//    "c": 0, "gamma": [[..]],
//    "m": {"atoms": [{"xi": [[..]], "weight": w}]},
//    "mu": {"atoms": [{"xi": [[..]], "weightMatrix": [[..]]}]}}
// c, gamma, m and mu may be omitted (zero). Matrices are row-major nested
// arrays.
//
// u grid:
//   {"u": [{"re": [[..]], "im": [[..]]}], "times": [t1, t2, ...]}
// im may be omitted.
#ifndef PSDAFFINE_IO_HPP
#define PSDAFFINE_IO_HPP

#include "psdaffine/model.hpp"

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace psdaffine {

/// Malformed input. The message starts with the JSON path of the offending
/// field, e.g. "$.m.atoms[1].xi: ...".
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

AffineParams params_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const AffineParams& params);
/// Canonical text: sorted keys, two-space indent, shortest round-trip decimals.
std::string dump_params(const AffineParams& params);

struct UGrid {
  std::vector<CSymMatrix> u;
  std::vector<double> times;
};

UGrid ugrid_from_json(const nlohmann::json& j);

/// A bare matrix or {"x": matrix}; must be PSD.
SymMatrix state_from_json(const nlohmann::json& j);

/// Reads and parses a file; InputError when unreadable or not JSON.
nlohmann::json read_json_file(const std::string& path);

}  // namespace psdaffine

#endif  // PSDAFFINE_IO_HPP
