#pragma once

// Line-based circuit description files.
//
//   # comment
//   photons 2
//   source spdc                      (or: source ket 0001:0.7071:0 0010:0.7071:0,
//                                     or: source scenario=two-cat)
//   stage pre
//   pbs photon=1 label=PBS1
//   hwp photon=1 arm=R
//   stage post
//   hadamard photon=2 arm=L
//   phase photon=2 arm=L phase=pi/2
//   bs modes=LR,RL t=0.8 r=0.6 phi_t=0 phi_r=0 adjustable pass=a label=BS1
//   mirror
//   detector D5 photon=1 arm=L pol=H    (arm/pol may be '*' or omitted)
//   success D5
//   calibrate scenario=two-cat          (or: calibrate ket <terms>)
//
// Ket terms are label:re[:im], with binary ("0100") or compact ("LRHH") labels.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "cheshire/optics.hpp"

namespace cheshire {

struct CircuitFile {
    Circuit circuit;
    /// Post-selected state the adjustable splitters should be tuned to, if any.
    std::optional<Ket> calibration_target;
    std::string calibration_source;  // "scenario=two-cat", "ket", or empty
};

/// Throws ParseError (with the offending line) on malformed text and
/// ConfigurationError when the described circuit is inconsistent.
CircuitFile parse_circuit(std::string_view text);

/// Reads and parses a file; IoError when it cannot be read.
CircuitFile load_circuit(const std::string& path);

/// Writes a circuit back out in the same format; parse_circuit reproduces it.
std::string format_circuit(const Circuit& circuit);

struct PreparedCircuit {
    Circuit circuit;
    std::optional<double> calibration_residual;  // set when the file asked for calibration
};

/// Applies `calibrate` when the file requests it, otherwise returns the circuit unchanged.
PreparedCircuit prepare(const CircuitFile& file);

}  // namespace cheshire
