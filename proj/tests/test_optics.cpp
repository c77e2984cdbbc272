#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <numbers>

#include "cheshire/circuit_io.hpp"
#include "cheshire/errors.hpp"
#include "cheshire/optics.hpp"
#include "cheshire/scenarios.hpp"
#include "cheshire/weakval.hpp"
#include "oracle.hpp"

using namespace cheshire;
using oracle::I;

namespace {

constexpr double kPi = std::numbers::pi;
const double r2 = 1.0 / std::sqrt(2.0);

std::string data_file(const std::string& name) { return std::string(CHESHIRE_DATA_DIR) + "/" + name; }

// Every port on its own detector; (1, L, H) is "D5".
std::vector<DetectorBinding> distinct_ports(int photons) {
    std::vector<DetectorBinding> out;
    int next = 0;
    for (int p = 1; p <= photons; ++p)
        for (Arm a : {Arm::L, Arm::R})
            for (Polarization q : {Polarization::H, Polarization::V}) {
                const bool success = p == 1 && a == Arm::L && q == Polarization::H;
                out.push_back({success ? "D5" : "X" + std::to_string(next++), p, a, q});
            }
    return out;
}

oracle::Mat x2() {
    oracle::Mat m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

oracle::Mat hadamard2() {
    oracle::Mat m(2, 2);
    m << r2, r2, r2, -r2;
    return m;
}

// Gate u on photon's polarization, applied only while the photon is in `arm`.
oracle::Mat on_arm(int n, int photon, int arm, const oracle::Mat& u) {
    const oracle::Mat here = oracle::embed(n, photon - 1, oracle::projector(arm));
    const oracle::Mat there = oracle::embed(n, photon - 1, oracle::projector(1 - arm));
    return here * oracle::embed(n, n + photon - 1, u) + there;
}

oracle::Mat dense_pbs(int n, int photon) {
    return oracle::embed(n, n + photon - 1, oracle::projector(0)) +
           oracle::embed(n, photon - 1, x2()) * oracle::embed(n, n + photon - 1, oracle::projector(1));
}

Element random_element(std::mt19937_64& rng, int photons) {
    std::uniform_int_distribution<int> kind(0, 5);
    std::uniform_int_distribution<int> photon(1, photons);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    const Arm arm = (rng() & 1U) ? Arm::R : Arm::L;
    switch (kind(rng)) {
        case 0: return Element::pbs(photon(rng));
        case 1: return Element::hwp(photon(rng), arm);
        case 2: return Element::hadamard_plate(photon(rng), arm);
        case 3: return Element::phase_shifter(photon(rng), arm, angle(rng));
        case 4: return Element::mirror();
        default: {
            const double theta = angle(rng);
            BeamSplitterParams params{std::abs(std::cos(theta)), std::abs(std::sin(theta)), angle(rng), angle(rng)};
            const std::string rest(static_cast<std::size_t>(photons - 1), '*');
            if (photons == 1 || (rng() & 1U)) return Element::beam_splitter("R" + rest, "L" + rest, params);
            const std::string tail(static_cast<std::size_t>(photons - 2), '*');
            return Element::beam_splitter("LR" + tail, "RL" + tail, params);
        }
    }
}

Circuit calibrated_device() {
    const PreparedCircuit prepared = prepare(load_circuit(data_file("two_cat_device.circuit")));
    return prepared.circuit;
}

}  // namespace

// --- elements ------------------------------------------------------------------------

TEST(Elements, MatchKroneckerConstruction) {
    const BasisConvention c(2);
    for (int photon = 1; photon <= 2; ++photon) {
        EXPECT_LT((oracle::dense(Element::pbs(photon).matrix(c)) - dense_pbs(2, photon)).norm(), 1e-15);
        for (int arm = 0; arm < 2; ++arm) {
            const Arm a = arm == 0 ? Arm::L : Arm::R;
            EXPECT_LT((oracle::dense(Element::hwp(photon, a).matrix(c)) - on_arm(2, photon, arm, x2())).norm(), 1e-15);
            EXPECT_LT((oracle::dense(Element::hadamard_plate(photon, a).matrix(c)) - on_arm(2, photon, arm, hadamard2()))
                          .norm(),
                      1e-15);
            const oracle::Mat phase = oracle::Mat::Identity(2, 2) * std::polar(1.0, 0.7);
            EXPECT_LT((oracle::dense(Element::phase_shifter(photon, a, 0.7).matrix(c)) - on_arm(2, photon, arm, phase))
                          .norm(),
                      1e-15);
        }
    }
}

TEST(Elements, SinglePhotonBeamSplitterIsPathMixer) {
    const BasisConvention c(1);
    const BeamSplitterParams p{0.6, 0.8, 0.3, -1.1};
    oracle::Mat b(2, 2);
    b << 0.6 * std::polar(1.0, 0.3), I * 0.8 * std::polar(1.0, -1.1), I * 0.8 * std::polar(1.0, 1.1),
        0.6 * std::polar(1.0, -0.3);
    const oracle::Mat expected = Eigen::kroneckerProduct(b, oracle::Mat::Identity(2, 2)).eval();
    EXPECT_LT((oracle::dense(Element::beam_splitter("L", "R", p).matrix(c)) - expected).norm(), 1e-15);
}

TEST(Elements, BeamSplitterRejectsNonUnitaryParameters) {
    EXPECT_THROW(Element::beam_splitter("L", "R", {0.6, 0.6, 0.0, 0.0}), InputError);
}

TEST(Elements, RandomElementsAreUnitary) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 3;
        const BasisConvention c(n);
        const oracle::Mat u = oracle::dense(random_element(rng, n).matrix(c));
        EXPECT_LT((u.adjoint() * u - oracle::Mat::Identity(u.rows(), u.cols())).norm(), 1e-12);
    }
}

TEST(Elements, SpdcSource) {
    const oracle::Vec expected = (oracle::product("0001") + oracle::product("0010")) * r2;
    EXPECT_LT((oracle::dense(spdc_source()) - expected).norm(), 1e-15);
}

// --- two-photon device -----------------------------------------------------------------------

TEST(Device, PreBlockPreparesTwoCatPreState) {
    const ExactResult result = run_exact(calibrated_device());
    // Independent product: PBS1, PBS2, then HWPs on the R arms.
    const oracle::Vec spdc = (oracle::product("0001") + oracle::product("0010")) * r2;
    const oracle::Vec dense = on_arm(2, 2, 1, x2()) * on_arm(2, 1, 1, x2()) * dense_pbs(2, 2) * dense_pbs(2, 1) * spdc;
    const oracle::Vec psi0 = (oracle::product("0100") + oracle::product("1000")) * r2;
    EXPECT_GE(std::norm(psi0.dot(dense)), 1.0 - 1e-12);
    EXPECT_GE(std::norm(psi0.dot(oracle::dense(result.post_input))), 1.0 - 1e-12);
}

TEST(Device, CalibrationIsExactAndSuccessProbabilityIsOneSixth) {
    const PreparedCircuit prepared = prepare(load_circuit(data_file("two_cat_device.circuit")));
    ASSERT_TRUE(prepared.calibration_residual.has_value());
    EXPECT_LE(*prepared.calibration_residual, 1e-10);

    const oracle::Vec psi0 = (oracle::product("0100") + oracle::product("1000")) * r2;
    const oracle::Vec psif =
        (-I * oracle::product("0100") + oracle::product("1001") + oracle::product("1010")) / std::sqrt(3.0);
    const double expected = std::norm(psif.dot(psi0));
    EXPECT_NEAR(expected, 1.0 / 6.0, 1e-15);

    const ExactResult result = run_exact(prepared.circuit);
    EXPECT_NEAR(result.exclusive_probability("D5"), expected, 1e-12);
    double total = 0.0;
    for (const auto& p : result.patterns) total += p.probability;
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Device, CalibratedSplitterSettings) {
    const Circuit circuit = calibrated_device();
    std::vector<BeamSplitterParams> splitters;
    for (const auto& e : circuit.elements())
        if (e.kind == ElementKind::BeamSplitter) splitters.push_back(e.splitter);
    ASSERT_EQ(splitters.size(), 2u);
    EXPECT_NEAR(splitters[0].t, r2, 1e-12);
    EXPECT_NEAR(splitters[0].r, r2, 1e-12);
    EXPECT_NEAR(splitters[1].t, std::sqrt(2.0 / 3.0), 1e-12);
    EXPECT_NEAR(splitters[1].r, 1.0 / std::sqrt(3.0), 1e-12);
}

TEST(Device, EffectivePostselectionReproducesTwoCatWeakValues) {
    const Circuit circuit = calibrated_device();
    const ExactResult result = run_exact(circuit);
    const EffectivePostselection eff = effective_postselection(circuit);
    EXPECT_LT(eff.rank_one_residual, 1e-10);
    const PrePostPair device(result.post_input, eff.vector);
    const auto device_report = weak_value_report(device);
    const auto ideal_report = weak_value_report(build_pair(ScenarioId::two_cat()));
    ASSERT_EQ(device_report.entries.size(), ideal_report.entries.size());
    for (std::size_t k = 0; k < ideal_report.entries.size(); ++k) {
        EXPECT_NEAR(std::abs(device_report.entries[k].value - ideal_report.entries[k].value), 0.0, 1e-10)
            << ideal_report.entries[k].key.descriptor();
    }
}

TEST(Device, ConditionalStateOfSuccessPattern) {
    const ExactResult result = run_exact(calibrated_device());
    const auto it = std::find_if(result.patterns.begin(), result.patterns.end(),
                                 [](const PatternOutcome& p) { return pattern_label(p.detectors) == "D5"; });
    ASSERT_NE(it, result.patterns.end());
    EXPECT_NEAR(it->conditional_state.norm(), 1.0, 1e-12);
}

TEST(Device, LocalPlatesThenFilterCannotProjectOntoTarget) {
    // Hadamard plates, phase and a PBS per photon, then a tunable splitter per photon.
    const PreparedCircuit reference = prepare(load_circuit(data_file("two_cat_device.circuit")));
    std::vector<Element> elements;
    for (const auto& e : reference.circuit.elements())
        if (e.stage == Stage::Pre) elements.push_back(e);
    auto post = [&](Element e) {
        e.stage = Stage::Post;
        elements.push_back(e);
    };
    post(Element::hadamard_plate(1, Arm::R));
    post(Element::hadamard_plate(2, Arm::L));
    post(Element::phase_shifter(2, Arm::L, kPi / 2));
    post(Element::pbs(1));
    post(Element::pbs(2));
    Element bs1 = Element::beam_splitter("L*", "R*", {});
    bs1.adjustable = true;
    post(bs1);
    Element bs2 = Element::beam_splitter("*R", "*L", {});
    bs2.adjustable = true;
    post(bs2);
    std::vector<DetectorBinding> bindings = distinct_ports(2);
    for (auto& b : bindings)
        if (b.photon == 2 && b.arm == Arm::R && b.pol == Polarization::H) b.detector = "D5";
    const Circuit narrative(spdc_source(), elements, bindings);
    try {
        calibrate_postselection(narrative, build_pair(ScenarioId::two_cat()).post());
        FAIL() << "expected CalibrationError";
    } catch (const CalibrationError& e) {
        EXPECT_GT(e.best_residual(), 1e-10);
        EXPECT_NE(std::string(e.what()).find("residual"), std::string::npos);
    }
}

// --- generic circuits -----------------------------------------------------------------------

TEST(Circuit, EmptyCircuitWithOneDetector) {
    const BasisConvention c(1);
    const Circuit circuit(basis_ket(c, "00"), {}, {{"D", 1, std::nullopt, std::nullopt}}, "D");
    const ExactResult result = run_exact(circuit);
    ASSERT_EQ(result.patterns.size(), 1u);
    EXPECT_NEAR(result.exclusive_probability("D"), 1.0, 1e-15);
    EXPECT_NEAR(result.detector_probabilities.at("D"), 1.0, 1e-15);
}

TEST(Circuit, RandomCircuitsConserveProbability) {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 120; ++trial) {
        const int n = 1 + trial % 2;
        const BasisConvention c(n);
        std::vector<Element> elements;
        for (int k = 0; k < 6; ++k) elements.push_back(random_element(rng, n));
        const Circuit circuit(oracle::random_ket(rng, c), elements, distinct_ports(n));
        const ExactResult result = run_exact(circuit);
        double total = 0.0;
        for (const auto& p : result.patterns) total += p.probability;
        EXPECT_NEAR(total, 1.0, 1e-12);
        EXPECT_NEAR(result.output.norm(), circuit.input().norm(), 1e-12 * circuit.input().norm());
        // one detector per photon clicks in every basis state
        double marginal = 0.0;
        for (const auto& [d, p] : result.detector_probabilities) marginal += p;
        EXPECT_NEAR(marginal, static_cast<double>(n), 1e-12);
    }
}

TEST(Circuit, Validation) {
    const BasisConvention c(1);
    const Ket in = basis_ket(c, "00");
    // unbound port
    EXPECT_THROW(Circuit(in, {}, {{"D5", 1, Arm::L, std::nullopt}}), ConfigurationError);
    // success detector missing
    EXPECT_THROW(Circuit(in, {}, {{"D", 1, std::nullopt, std::nullopt}}, "D5"), ConfigurationError);
    // two detectors on one port
    EXPECT_THROW(Circuit(in, {}, {{"D5", 1, std::nullopt, std::nullopt}, {"D6", 1, Arm::L, Polarization::H}}),
                 ConfigurationError);
    // photon out of range
    EXPECT_THROW(Circuit(in, {Element::pbs(2)}, distinct_ports(1)), ConfigurationError);
    // bad beam-splitter modes
    EXPECT_THROW(Circuit(in, {Element::beam_splitter("L", "L", {})}, distinct_ports(1)), ConfigurationError);
    EXPECT_THROW(Circuit(in, {Element::beam_splitter("LR", "RL", {})}, distinct_ports(1)), ConfigurationError);
}

TEST(Circuit, IdentityCalibrationForBasisTarget) {
    const BasisConvention c(1);
    Element bs = Element::beam_splitter("L", "R", {});
    bs.adjustable = true;
    const Circuit circuit(superpose({{r2, basis_ket(c, "00")}, {r2, basis_ket(c, "10")}}), {bs}, distinct_ports(1));
    const CalibrationResult result = calibrate_postselection(circuit, basis_ket(c, "00"));
    EXPECT_EQ(result.residual, 0.0);
    const auto& tuned = result.circuit.elements().front().splitter;
    EXPECT_NEAR(tuned.t, 1.0, 1e-15);
    EXPECT_NEAR(tuned.r, 0.0, 1e-15);
    EXPECT_NEAR(run_exact(result.circuit).exclusive_probability("D5"), 0.5, 1e-12);
}

TEST(Circuit, UntouchedSplitterFallsBackToIdentity) {
    // The target never reaches the splitter's modes (photon 2 is always in R here).
    const BasisConvention c(2);
    Element bs = Element::beam_splitter("LL", "RL", {});
    bs.adjustable = true;
    std::vector<DetectorBinding> bindings = distinct_ports(2);
    for (auto& b : bindings)
        if (b.photon == 2 && b.arm == Arm::R && b.pol == Polarization::H) b.detector = "D5";
    const Circuit circuit(basis_ket(c, "0100"), {bs}, bindings);
    const CalibrationResult result = calibrate_postselection(circuit, basis_ket(c, "0100"));
    const auto& tuned = result.circuit.elements().front().splitter;
    EXPECT_EQ(tuned.t, 1.0);
    EXPECT_EQ(tuned.r, 0.0);
}

// --- Monte Carlo ---------------------------------------------------------------------------

TEST(MonteCarlo, DeterministicAndThreadIndependent) {
    const Circuit circuit = calibrated_device();
    const ClickRecord one = run_monte_carlo(circuit, 60000, 1234567, 1);
    const ClickRecord four = run_monte_carlo(circuit, 60000, 1234567, 4);
    const ClickRecord again = run_monte_carlo(circuit, 60000, 1234567, 0);
    EXPECT_EQ(one, four);
    EXPECT_EQ(one, again);
    const ClickRecord other = run_monte_carlo(circuit, 60000, 7654321, 1);
    EXPECT_NE(one.pattern_counts, other.pattern_counts);
    std::uint64_t total = 0;
    for (const auto& [label, count] : one.pattern_counts) total += count;
    EXPECT_EQ(total, 60000u);
}

TEST(MonteCarlo, CountsFollowExactDistribution) {
    const Circuit circuit = calibrated_device();
    const ExactResult exact = run_exact(circuit);
    const std::uint64_t shots = 200000;
    const ClickRecord record = run_monte_carlo(circuit, shots, 99, 0);
    double chi2 = 0.0;
    for (const auto& p : exact.patterns) {
        const double expected = p.probability * static_cast<double>(shots);
        const double observed = static_cast<double>(record.pattern_counts.at(pattern_label(p.detectors)));
        chi2 += (observed - expected) * (observed - expected) / expected;
    }
    const boost::math::chi_squared dist(static_cast<double>(exact.patterns.size() - 1));
    EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 1e-4) << "chi2 = " << chi2;
}

TEST(MonteCarlo, SingleShotAndZeroShots) {
    const Circuit circuit = calibrated_device();
    const ClickRecord record = run_monte_carlo(circuit, 1, 5, 0);
    std::uint64_t total = 0;
    for (const auto& [label, count] : record.pattern_counts) total += count;
    EXPECT_EQ(total, 1u);
    EXPECT_THROW(run_monte_carlo(circuit, 0, 5, 0), InputError);
}
