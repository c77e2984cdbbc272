#pragma once

// JSON forms of kets, operators and solver problems.
//
//   ket:      {"photons": 2, "factor_order": ["path1", ...], "terms": [["0100", re, im], ...]}
//   operator: {"photons": 2, "factor_order": [...], "entries": [["0100", "1000", re, im], ...]}
//             (row label first, then column label)
//   problem:  {"pre": <ket>, "targets": [{"observable": "path:1:L", "re": 1, "im": 0}, ...]}
//
// Doubles are written in shortest round-trip form, so reading back a written
// ket or operator reproduces it bit for bit.

#include <string>
#include <vector>

#include <json.hpp>

#include "cheshire/hilbert.hpp"
#include "cheshire/solver.hpp"

namespace cheshire {

nlohmann::json to_json(const Ket& ket);
nlohmann::json to_json(const Operator& op);

/// Throws ParseError on a malformed document.
Ket ket_from_json(const nlohmann::json& doc);
Operator operator_from_json(const nlohmann::json& doc);

struct SolveProblem {
    Ket pre;
    std::vector<WeakValueTarget> targets;
};

SolveProblem problem_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const SolveProblem& problem);

/// Reads a whole file into a JSON document; IoError / ParseError on failure.
nlohmann::json load_json(const std::string& path);

}  // namespace cheshire
