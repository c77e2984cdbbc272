#include "cheshire/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <thread>

#include "cheshire/dense.hpp"
#include "cheshire/errors.hpp"

namespace cheshire {

namespace {

constexpr Complex kI{0.0, 1.0};

struct ModePair {
    BasisIndex mask = 0;  // path bits fixed by the patterns
    BasisIndex a = 0;     // path bits of mode a under the mask
    BasisIndex b = 0;
};

ModePair parse_modes(const BasisConvention& convention, const std::string& mode_a, const std::string& mode_b) {
    const auto n = static_cast<std::size_t>(convention.photons());
    if (mode_a.size() != n || mode_b.size() != n) {
        throw InputError("beam-splitter modes '" + mode_a + "', '" + mode_b + "' need one character per photon (" +
                         std::to_string(n) + ")");
    }
    ModePair pair;
    for (std::size_t i = 0; i < n; ++i) {
        const char ca = mode_a[i];
        const char cb = mode_b[i];
        auto valid = [](char c) { return c == 'L' || c == 'R' || c == '*'; };
        if (!valid(ca) || !valid(cb)) throw InputError("beam-splitter modes use only L, R and *");
        if ((ca == '*') != (cb == '*')) throw InputError("beam-splitter modes must leave the same photons unspecified");
        if (ca == '*') continue;
        const BasisIndex bit = BasisIndex{1} << convention.path_bit(static_cast<int>(i) + 1);
        pair.mask |= bit;
        if (ca == 'R') pair.a |= bit;
        if (cb == 'R') pair.b |= bit;
    }
    if (pair.mask == 0 || pair.a == pair.b) throw InputError("beam-splitter modes must be two distinct configurations");
    return pair;
}

int port_slot(int photon, Arm arm, Polarization pol) {
    return (photon - 1) * 4 + (arm == Arm::R ? 2 : 0) + (pol == Polarization::V ? 1 : 0);
}

Ket propagate(Ket state, const std::vector<Element>& elements, std::optional<Stage> only) {
    for (const auto& e : elements) {
        if (only && e.stage != *only) continue;
        state = apply(e.matrix(state.convention()), state);
    }
    return state;
}

// U_post^dagger |s> for every basis state s of the success event.
std::vector<Ket> success_preimages(const Circuit& circuit) {
    const auto& convention = circuit.convention();
    std::vector<Operator> adjoints;
    for (const auto& e : circuit.elements()) {
        if (e.stage == Stage::Post) adjoints.push_back(e.matrix(convention).adjoint());
    }
    const std::vector<std::string> success{circuit.success_detector()};
    std::vector<Ket> out;
    for (BasisIndex k = 0; k < convention.dimension(); ++k) {
        if (circuit.pattern(k) != success) continue;
        Ket f = basis_ket(convention, k);
        for (auto it = adjoints.rbegin(); it != adjoints.rend(); ++it) f = apply(*it, f);
        out.push_back(std::move(f));
    }
    return out;
}

BeamSplitterParams routing_params(const Eigen::Matrix2cd& gram, bool pass_a) {
    if (gram.trace().real() < 1e-28) return {1.0, 0.0, 0.0, 0.0};
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> eigen(gram);
    const Complex alpha = eigen.eigenvectors()(0, 1);
    const Complex beta = eigen.eigenvectors()(1, 1);
    const double half_pi = std::numbers::pi / 2;
    // The pass row of the mixing matrix becomes (conj(alpha), conj(beta)).
    if (pass_a) return {std::abs(alpha), std::abs(beta), -std::arg(alpha), -std::arg(beta) - half_pi};
    return {std::abs(beta), std::abs(alpha), std::arg(beta), std::arg(alpha) + half_pi};
}

}  // namespace

std::string to_string(ElementKind kind) {
    switch (kind) {
        case ElementKind::SPDC: return "spdc";
        case ElementKind::PBS: return "pbs";
        case ElementKind::HWP: return "hwp";
        case ElementKind::HadamardPlate: return "hadamard";
        case ElementKind::PhaseShifter: return "phase";
        case ElementKind::BeamSplitter: return "bs";
        case ElementKind::Mirror: return "mirror";
    }
    return "?";
}

Mat2 BeamSplitterParams::matrix() const {
    return {{{t * std::polar(1.0, phi_t), kI * r * std::polar(1.0, phi_r)},
             {kI * r * std::polar(1.0, -phi_r), t * std::polar(1.0, -phi_t)}}};
}

// ---------------------------------------------------------------------------
// Elements

Element Element::pbs(int photon) {
    Element e;
    e.kind = ElementKind::PBS;
    e.photon = photon;
    return e;
}

Element Element::hwp(int photon, Arm arm) {
    Element e;
    e.kind = ElementKind::HWP;
    e.photon = photon;
    e.arm = arm;
    return e;
}

Element Element::hadamard_plate(int photon, Arm arm) {
    Element e;
    e.kind = ElementKind::HadamardPlate;
    e.photon = photon;
    e.arm = arm;
    return e;
}

Element Element::phase_shifter(int photon, Arm arm, double phase) {
    Element e;
    e.kind = ElementKind::PhaseShifter;
    e.photon = photon;
    e.arm = arm;
    e.phase = phase;
    return e;
}

Element Element::beam_splitter(std::string mode_a, std::string mode_b, BeamSplitterParams params) {
    if (!std::isfinite(params.t) || !std::isfinite(params.r) || !std::isfinite(params.phi_t) ||
        !std::isfinite(params.phi_r)) {
        throw InputError("beam-splitter parameters must be finite");
    }
    if (std::abs(params.t * params.t + params.r * params.r - 1.0) > 1e-12) {
        throw InputError("beam splitter needs |t|^2 + |r|^2 = 1");
    }
    Element e;
    e.kind = ElementKind::BeamSplitter;
    e.mode_a = std::move(mode_a);
    e.mode_b = std::move(mode_b);
    e.splitter = params;
    return e;
}

Element Element::mirror() { return Element{}; }

Operator Element::matrix(const BasisConvention& convention) const {
    const BasisIndex dim = convention.dimension();
    std::vector<Operator::Entry> entries;
    entries.reserve(dim * 2);

    switch (kind) {
        case ElementKind::SPDC:
            throw InputError("SPDC is a source, not a gate");
        case ElementKind::Mirror:
            return Operator::identity(convention);
        case ElementKind::PBS: {
            // H is transmitted (arm kept), V is reflected (arm swapped).
            const BasisIndex path = BasisIndex{1} << convention.path_bit(photon);
            const int pol = convention.pol_bit(photon);
            for (BasisIndex k = 0; k < dim; ++k) entries.push_back({k, ((k >> pol) & 1U) ? k ^ path : k, 1.0});
            break;
        }
        case ElementKind::HWP:
        case ElementKind::HadamardPlate:
        case ElementKind::PhaseShifter: {
            const int path = convention.path_bit(photon);
            const int pol = convention.pol_bit(photon);
            const BasisIndex pol_mask = BasisIndex{1} << pol;
            const BasisIndex on_arm = arm == Arm::R ? 1 : 0;
            const double h = 1.0 / std::sqrt(2.0);
            for (BasisIndex k = 0; k < dim; ++k) {
                if (((k >> path) & 1U) != on_arm) {
                    entries.push_back({k, k, 1.0});
                    continue;
                }
                if (kind == ElementKind::HWP) {
                    entries.push_back({k, k ^ pol_mask, 1.0});
                } else if (kind == ElementKind::PhaseShifter) {
                    entries.push_back({k, k, std::polar(1.0, phase)});
                } else {
                    const bool vertical = (k >> pol) & 1U;
                    entries.push_back({k, k & ~pol_mask, h});
                    entries.push_back({k, k | pol_mask, vertical ? -h : h});
                }
            }
            break;
        }
        case ElementKind::BeamSplitter: {
            const ModePair modes = parse_modes(convention, mode_a, mode_b);
            const Mat2 m = splitter.matrix();
            for (BasisIndex k = 0; k < dim; ++k) {
                const BasisIndex rest = k & ~modes.mask;
                const BasisIndex ka = rest | modes.a;
                const BasisIndex kb = rest | modes.b;
                if ((k & modes.mask) == modes.a) {
                    entries.push_back({k, ka, m[0][0]});
                    entries.push_back({k, kb, m[1][0]});
                } else if ((k & modes.mask) == modes.b) {
                    entries.push_back({k, ka, m[0][1]});
                    entries.push_back({k, kb, m[1][1]});
                } else {
                    entries.push_back({k, k, 1.0});
                }
            }
            break;
        }
    }
    return Operator(convention, std::move(entries));
}

Ket spdc_source() {
    const BasisConvention c(2);
    const double h = 1.0 / std::sqrt(2.0);
    return superpose({{h, basis_ket(c, "L1 L2 H1 V2")}, {h, basis_ket(c, "L1 L2 V1 H2")}});
}

// ---------------------------------------------------------------------------
// Circuit

Circuit::Circuit(Ket input, std::vector<Element> elements, std::vector<DetectorBinding> bindings,
                 std::string success_detector, std::string source_name)
    : input_(std::move(input)),
      elements_(std::move(elements)),
      bindings_(std::move(bindings)),
      success_detector_(std::move(success_detector)),
      source_name_(std::move(source_name)) {
    if (input_.is_zero()) throw ConfigurationError("circuit input state is the zero vector");
    input_ = normalize(input_);

    port_detector_.assign(static_cast<std::size_t>(photons() * 4), std::string{});
    for (const auto& b : bindings_) {
        if (b.detector.empty()) throw ConfigurationError("detector label must not be empty");
        if (b.photon < 1 || b.photon > photons()) {
            throw ConfigurationError("detector " + b.detector + " bound to photon " + std::to_string(b.photon) +
                                     " outside 1.." + std::to_string(photons()));
        }
        for (auto arm : {Arm::L, Arm::R}) {
            if (b.arm && *b.arm != arm) continue;
            for (auto pol : {Polarization::H, Polarization::V}) {
                if (b.pol && *b.pol != pol) continue;
                auto& slot = port_detector_[static_cast<std::size_t>(port_slot(b.photon, arm, pol))];
                if (!slot.empty() && slot != b.detector) {
                    throw ConfigurationError("port (photon " + std::to_string(b.photon) + ", " + arm_letter(arm) +
                                             ", " + (pol == Polarization::H ? "H" : "V") + ") bound to both " +
                                             slot + " and " + b.detector);
                }
                slot = b.detector;
            }
        }
    }
    validate();
}

void Circuit::validate() const {
    for (int i = 1; i <= photons(); ++i) {
        for (auto arm : {Arm::L, Arm::R}) {
            for (auto pol : {Polarization::H, Polarization::V}) {
                if (port_detector_[static_cast<std::size_t>(port_slot(i, arm, pol))].empty()) {
                    throw ConfigurationError("unbound output port (photon " + std::to_string(i) + ", " +
                                             arm_letter(arm) + ", " + (pol == Polarization::H ? "H" : "V") + ")");
                }
            }
        }
    }
    const auto labels = detectors();
    if (std::find(labels.begin(), labels.end(), success_detector_) == labels.end()) {
        throw ConfigurationError("success detector " + success_detector_ + " is not bound to any port");
    }
    for (const auto& e : elements_) {
        switch (e.kind) {
            case ElementKind::SPDC:
                throw ConfigurationError("SPDC may only appear as the circuit source");
            case ElementKind::BeamSplitter:
                try {
                    parse_modes(convention(), e.mode_a, e.mode_b);
                } catch (const InputError& err) {
                    throw ConfigurationError(std::string(err.what()) + (e.label.empty() ? "" : " (" + e.label + ")"));
                }
                break;
            case ElementKind::Mirror:
                break;
            default:
                if (e.photon < 1 || e.photon > photons()) {
                    throw ConfigurationError(to_string(e.kind) + " addresses photon " + std::to_string(e.photon) +
                                             " outside 1.." + std::to_string(photons()));
                }
        }
    }
}

const std::string& Circuit::detector(int photon, Arm arm, Polarization pol) const {
    if (photon < 1 || photon > photons()) throw InputError("photon index out of range");
    return port_detector_[static_cast<std::size_t>(port_slot(photon, arm, pol))];
}

std::vector<std::string> Circuit::pattern(BasisIndex index) const {
    std::vector<std::string> out;
    const auto& c = convention();
    for (int i = 1; i <= photons(); ++i) {
        const Arm arm = ((index >> c.path_bit(i)) & 1U) ? Arm::R : Arm::L;
        const Polarization pol = ((index >> c.pol_bit(i)) & 1U) ? Polarization::V : Polarization::H;
        out.push_back(detector(i, arm, pol));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::string> Circuit::detectors() const {
    std::set<std::string> labels(port_detector_.begin(), port_detector_.end());
    labels.erase(std::string{});
    return {labels.begin(), labels.end()};
}

std::string pattern_label(const std::vector<std::string>& detectors) {
    std::string out;
    for (const auto& d : detectors) {
        if (!out.empty()) out += '+';
        out += d;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exact propagation

double ExactResult::exclusive_probability(const std::string& detector) const {
    for (const auto& p : patterns) {
        if (p.detectors.size() == 1 && p.detectors.front() == detector) return p.probability;
    }
    return 0.0;
}

ExactResult run_exact(const Circuit& circuit) {
    const Ket post_input = propagate(circuit.input(), circuit.elements(), Stage::Pre);
    const Ket output = propagate(post_input, circuit.elements(), Stage::Post);
    const double total = output.norm() * output.norm();

    std::map<std::string, std::pair<std::vector<std::string>, Ket::Amplitudes>> grouped;
    for (const auto& [index, amp] : output.amplitudes()) {
        auto detectors = circuit.pattern(index);
        auto& slot = grouped[pattern_label(detectors)];
        slot.first = std::move(detectors);
        slot.second.emplace(index, amp);
    }

    ExactResult result{post_input, output, {}, {}};
    for (const auto& label : circuit.detectors()) result.detector_probabilities[label] = 0.0;
    for (auto& [label, group] : grouped) {
        Ket restricted(circuit.convention(), std::move(group.second));
        const double probability = restricted.norm() * restricted.norm() / total;
        for (const auto& d : group.first) result.detector_probabilities[d] += probability;
        result.patterns.push_back({group.first, probability, normalize(restricted)});
    }
    return result;
}

// ---------------------------------------------------------------------------
// Monte Carlo

ClickRecord run_monte_carlo(const Circuit& circuit, std::uint64_t shots, std::uint64_t seed, unsigned threads) {
    if (shots == 0) throw InputError("Monte Carlo needs at least one shot");
    const ExactResult exact = run_exact(circuit);

    std::vector<double> cumulative;
    double running = 0.0;
    for (const auto& p : exact.patterns) {
        running += p.probability;
        cumulative.push_back(running);
    }
    const std::size_t outcomes = exact.patterns.size();
    const std::uint64_t blocks = (shots + kMonteCarloBlock - 1) / kMonteCarloBlock;

    auto run_block = [&](std::uint64_t block, std::vector<std::uint64_t>& tally) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> uniform(0.0, running);
        const std::uint64_t begin = block * kMonteCarloBlock;
        const std::uint64_t end = std::min(shots, begin + kMonteCarloBlock);
        for (std::uint64_t s = begin; s < end; ++s) {
            const double u = uniform(rng);
            auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
            auto idx = static_cast<std::size_t>(it - cumulative.begin());
            ++tally[std::min(idx, outcomes - 1)];
        }
    };

    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, blocks));
    std::vector<std::vector<std::uint64_t>> tallies(workers, std::vector<std::uint64_t>(outcomes, 0));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::uint64_t b = w; b < blocks; b += workers) run_block(b, tallies[w]);
        });
    }
    for (std::uint64_t b = 0; b < blocks; b += workers) run_block(b, tallies[0]);
    for (auto& t : pool) t.join();

    ClickRecord record;
    record.shots = shots;
    record.seed = seed;
    for (const auto& label : circuit.detectors()) record.counts[label] = 0;
    for (std::size_t o = 0; o < outcomes; ++o) {
        std::uint64_t count = 0;
        for (const auto& t : tallies) count += t[o];
        record.pattern_counts[pattern_label(exact.patterns[o].detectors)] = count;
        for (const auto& d : exact.patterns[o].detectors) record.counts[d] += count;
    }
    return record;
}

// ---------------------------------------------------------------------------
// Post-selection

Eigen::MatrixXcd success_effect(const Circuit& circuit) {
    const auto dim = static_cast<Eigen::Index>(to_dense(circuit.input()).size());
    Eigen::MatrixXcd effect = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& f : success_preimages(circuit)) {
        const Eigen::VectorXcd v = to_dense(f);
        effect += v * v.adjoint();
    }
    return effect;
}

EffectivePostselection effective_postselection(const Circuit& circuit) {
    const Eigen::MatrixXcd effect = success_effect(circuit);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eigen(effect);
    const Eigen::Index top = effect.rows() - 1;
    const double weight = std::max(0.0, eigen.eigenvalues()(top));
    Eigen::VectorXcd f = std::sqrt(weight) * eigen.eigenvectors().col(top);
    Eigen::Index largest = 0;
    f.cwiseAbs().maxCoeff(&largest);
    if (std::abs(f(largest)) > 0.0) f *= std::abs(f(largest)) / f(largest);
    const double residual = (effect - f * f.adjoint()).norm();
    return {ket_from_dense(circuit.convention(), f), residual};
}

double postselection_residual(const Circuit& circuit, const Ket& target_post) {
    const Ket t = normalize(target_post);
    const auto preimages = success_preimages(circuit);
    // ||E - tt^dagger||_F^2 with E = sum_s f_s f_s^dagger, via inner products only.
    double squared = 1.0;
    for (const auto& f : preimages) {
        squared -= 2.0 * std::norm(inner(t, f));
        for (const auto& g : preimages) squared += std::norm(inner(f, g));
    }
    return std::sqrt(std::max(0.0, squared));
}

CalibrationResult calibrate_postselection(const Circuit& circuit, const Ket& target_post) {
    if (!(target_post.convention() == circuit.convention())) {
        throw InputError("calibration target lives on a different convention");
    }
    std::vector<Element> elements = circuit.elements();
    Ket state = normalize(target_post);
    for (auto& e : elements) {
        if (e.stage != Stage::Post) continue;
        if (e.kind == ElementKind::BeamSplitter && e.adjustable) {
            const ModePair modes = parse_modes(circuit.convention(), e.mode_a, e.mode_b);
            Eigen::Matrix2cd gram = Eigen::Matrix2cd::Zero();
            std::set<BasisIndex> seen;
            for (const auto& [index, amp] : state.amplitudes()) {
                const BasisIndex masked = index & modes.mask;
                if (masked != modes.a && masked != modes.b) continue;
                const BasisIndex rest = index & ~modes.mask;
                if (!seen.insert(rest).second) continue;
                Eigen::Vector2cd pair(state.amplitude(rest | modes.a), state.amplitude(rest | modes.b));
                gram += pair * pair.adjoint();
            }
            e.splitter = routing_params(gram, e.pass_a);
        }
        state = apply(e.matrix(circuit.convention()), state);
    }

    Circuit calibrated(circuit.input(), std::move(elements), circuit.bindings(), circuit.success_detector(),
                       circuit.source_name());
    const double residual = postselection_residual(calibrated, target_post);
    if (!(residual <= kCalibrationThreshold)) {
        throw CalibrationError("no beam-splitter setting routes the target to " + circuit.success_detector() +
                                   " alone (residual " + std::to_string(residual) + ")",
                               residual);
    }
    return {std::move(calibrated), residual};
}

}  // namespace cheshire
