#pragma once

// Command-line front end. `run` is the whole program minus process plumbing,
// so it can be driven from tests with string streams.
//
// Exit codes:
//   0  success / match
//   1  mismatch (pattern, residual or convergence check failed)
//   2  usage or parse error (bad flags, malformed files, inconsistent circuit)
//   3  infeasible targets, degenerate scenario, anomalous selection, calibration failure
//   4  I/O error

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace cheshire::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitMismatch = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitIo = 4;

inline constexpr std::uint64_t kDefaultSeed = 1234567;
inline constexpr double kDefaultTolerance = 1e-10;
inline constexpr std::uint64_t kDefaultShots = 60000;

/// Pointer sweeps pass when each step shrinks the deviation by this fraction
/// of the ideal (g_k / g_{k+1})^2 factor ...
inline constexpr double kPointerEfficiency = 0.875;
/// ... or when the deviation is already below this floor.
inline constexpr double kPointerNoiseFloor = 1e-9;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cheshire::cli
