#pragma once

// Linear-optical circuits over the labeled path/polarization space.
//
// Every photon has two spatial modes (L, R) and two polarizations (H, V).
// Gates act on the photon's own qubits, except beam splitters, which mix two
// path configurations ("modes"). A mode is a pattern with one character per
// photon, L / R / '*'. "L*" and "R*" are photon 1's two arms; "LR" and "RL"
// are joint two-photon configurations. Detectors are bound to output ports
// (photon, arm, polarization) and read at the end of the circuit.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cheshire/hilbert.hpp"

namespace cheshire {

enum class ElementKind { SPDC, PBS, HWP, HadamardPlate, PhaseShifter, BeamSplitter, Mirror };

std::string to_string(ElementKind kind);

enum class Stage { Pre, Post };

/// 2x2 mixing of modes (a, b):
///   a' = t e^{i phi_t} a + i r e^{i phi_r} b
///   b' = i r e^{-i phi_r} a + t e^{-i phi_t} b
struct BeamSplitterParams {
    double t = 1.0 / 1.4142135623730951;
    double r = 1.0 / 1.4142135623730951;
    double phi_t = 0.0;
    double phi_r = 0.0;

    Mat2 matrix() const;
};

struct Element {
    ElementKind kind = ElementKind::Mirror;
    std::string label;
    Stage stage = Stage::Post;

    int photon = 0;                 // PBS, HWP, HadamardPlate, PhaseShifter
    Arm arm = Arm::L;               // HWP, HadamardPlate, PhaseShifter
    double phase = 0.0;             // PhaseShifter
    std::string mode_a, mode_b;     // BeamSplitter
    BeamSplitterParams splitter;    // BeamSplitter
    bool adjustable = false;        // BeamSplitter: tuned by calibration
    bool pass_a = true;             // BeamSplitter: calibration routes into mode a (else b)

    static Element pbs(int photon);
    static Element hwp(int photon, Arm arm);
    static Element hadamard_plate(int photon, Arm arm);
    static Element phase_shifter(int photon, Arm arm, double phase);
    /// Throws InputError unless t^2 + r^2 = 1 within 1e-12.
    static Element beam_splitter(std::string mode_a, std::string mode_b, BeamSplitterParams params);
    static Element mirror();

    /// Full-space action; unitary for every kind.
    Operator matrix(const BasisConvention& convention) const;
};

/// SPDC pair (|H1 V2> + |V1 H2>)/sqrt(2), both photons in the L input mode.
Ket spdc_source();

struct DetectorBinding {
    std::string detector;
    int photon;
    std::optional<Arm> arm;           // nullopt: both arms
    std::optional<Polarization> pol;  // nullopt: both polarizations
};

class Circuit {
public:
    Circuit(Ket input, std::vector<Element> elements, std::vector<DetectorBinding> bindings,
            std::string success_detector = "D5", std::string source_name = "ket");

    const BasisConvention& convention() const noexcept { return input_.convention(); }
    int photons() const noexcept { return convention().photons(); }
    const Ket& input() const noexcept { return input_; }
    const std::string& source_name() const noexcept { return source_name_; }
    const std::vector<Element>& elements() const noexcept { return elements_; }
    std::vector<Element>& mutable_elements() noexcept { return elements_; }
    const std::vector<DetectorBinding>& bindings() const noexcept { return bindings_; }
    const std::string& success_detector() const noexcept { return success_detector_; }

    const std::string& detector(int photon, Arm arm, Polarization pol) const;

    /// Sorted, de-duplicated detectors clicked by the basis state `index`.
    std::vector<std::string> pattern(BasisIndex index) const;

    /// Distinct detector labels, sorted.
    std::vector<std::string> detectors() const;

private:
    void validate() const;

    Ket input_;
    std::vector<Element> elements_;
    std::vector<DetectorBinding> bindings_;
    std::string success_detector_;
    std::string source_name_;
    std::vector<std::string> port_detector_;  // index: (photon-1)*4 + arm*2 + pol
};

std::string pattern_label(const std::vector<std::string>& detectors);

struct PatternOutcome {
    std::vector<std::string> detectors;
    double probability;
    /// Renormalized output state restricted to the basis states producing this pattern.
    Ket conditional_state;
};

struct ExactResult {
    Ket post_input;   // state entering the post-selection stage
    Ket output;
    std::vector<PatternOutcome> patterns;                  // sorted by pattern label, p > 0
    std::map<std::string, double> detector_probabilities;  // marginal click probability

    /// Probability that exactly the given detector (and no other) clicks.
    double exclusive_probability(const std::string& detector) const;
};

ExactResult run_exact(const Circuit& circuit);

struct ClickRecord {
    std::map<std::string, std::uint64_t> counts;          // shots in which the detector clicked
    std::map<std::string, std::uint64_t> pattern_counts;  // keyed by pattern_label
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const ClickRecord&, const ClickRecord&) = default;
};

/// Shots are drawn in fixed-size blocks, each with its own generator seeded
/// from (seed, block); the result does not depend on `threads`.
ClickRecord run_monte_carlo(const Circuit& circuit, std::uint64_t shots, std::uint64_t seed, unsigned threads = 0);

inline constexpr std::uint64_t kMonteCarloBlock = 8192;
inline constexpr double kCalibrationThreshold = 1e-10;

/// Effect operator E = K^dagger K of the "only the success detector clicks"
/// event, as a map on states entering the post-selection stage.
Eigen::MatrixXcd success_effect(const Circuit& circuit);

/// For a rank-1 success effect E = |f><f|, returns f (phase fixed by the
/// largest component being real positive) and the rank-1 residual ||E - ff^dagger||_F.
struct EffectivePostselection {
    Ket vector;
    double rank_one_residual;
};
EffectivePostselection effective_postselection(const Circuit& circuit);

struct CalibrationResult {
    Circuit circuit;
    double residual;  // ||E - |t><t| ||_F with t the normalized target
};

/// Tunes every adjustable post-stage beam splitter, in order, so that the
/// forward-propagated target leaves through its pass port. Throws
/// CalibrationError (carrying the achieved residual) above kCalibrationThreshold.
CalibrationResult calibrate_postselection(const Circuit& circuit, const Ket& target_post);

/// Residual of the success effect against the projector onto `target_post`.
double postselection_residual(const Circuit& circuit, const Ket& target_post);

}  // namespace cheshire
