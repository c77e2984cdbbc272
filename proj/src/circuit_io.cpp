#include "cheshire/circuit_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "cheshire/errors.hpp"
#include "cheshire/scenarios.hpp"

namespace cheshire {

namespace {

std::vector<std::string> split_words(std::string_view line) {
    std::vector<std::string> words;
    std::istringstream in{std::string(line)};
    for (std::string w; in >> w;) words.push_back(w);
    return words;
}

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        out.emplace_back(text.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double to_double(const std::string& text, std::size_t line) {
    try {
        return parse_angle(text);
    } catch (const InputError&) {
        throw ParseError("bad number '" + text + "'", line);
    }
}

int to_int(const std::string& text, std::size_t line) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) throw ParseError("bad integer '" + text + "'", line);
    return value;
}

// key=value options plus bare flags ("adjustable").
struct Options {
    std::map<std::string, std::string> values;
    std::size_t line;

    Options(const std::vector<std::string>& words, std::size_t first, std::size_t line_no) : line(line_no) {
        for (std::size_t k = first; k < words.size(); ++k) {
            const auto eq = words[k].find('=');
            const std::string key = words[k].substr(0, eq);
            const std::string value = eq == std::string::npos ? "" : words[k].substr(eq + 1);
            if (key.empty()) throw ParseError("empty option name in '" + words[k] + "'", line);
            if (!values.emplace(key, value).second) throw ParseError("option '" + key + "' given twice", line);
        }
    }

    std::optional<std::string> take(const std::string& key) {
        auto it = values.find(key);
        if (it == values.end()) return std::nullopt;
        std::string v = it->second;
        values.erase(it);
        return v;
    }

    std::string require(const std::string& key) {
        auto v = take(key);
        if (!v) throw ParseError("missing " + key + "=", line);
        return *v;
    }

    void finish(const std::string& what) const {
        if (!values.empty()) throw ParseError("unknown option '" + values.begin()->first + "' for " + what, line);
    }
};

Arm to_arm(const std::string& text, std::size_t line) {
    if (text == "L") return Arm::L;
    if (text == "R") return Arm::R;
    throw ParseError("arm must be L or R, got '" + text + "'", line);
}

Ket parse_ket_terms(const BasisConvention& convention, const std::vector<std::string>& words, std::size_t first,
                    std::size_t line) {
    if (first >= words.size()) throw ParseError("ket needs at least one label:re[:im] term", line);
    Ket::Amplitudes amplitudes;
    for (std::size_t k = first; k < words.size(); ++k) {
        const auto parts = split(words[k], ':');
        if (parts.size() < 2 || parts.size() > 3) throw ParseError("ket term '" + words[k] + "' is not label:re[:im]", line);
        BasisIndex index = 0;
        try {
            index = convention.parse_label(parts[0]);
        } catch (const InputError& e) {
            throw ParseError(e.what(), line);
        }
        const Complex value{to_double(parts[1], line), parts.size() == 3 ? to_double(parts[2], line) : 0.0};
        amplitudes[index] += value;
    }
    Ket ket(convention, std::move(amplitudes));
    if (ket.is_zero()) throw ParseError("ket is the zero vector", line);
    return ket;
}

std::string number(double value) {
    std::ostringstream out;
    out.precision(17);
    out << value;
    return out.str();
}

std::string ket_terms(const Ket& ket) {
    std::string out;
    for (const auto& [index, amp] : ket.amplitudes()) {
        out += ' ' + ket.convention().label(index) + ':' + number(amp.real()) + ':' + number(amp.imag());
    }
    return out;
}

}  // namespace

CircuitFile parse_circuit(std::string_view text) {
    std::optional<int> photons;
    std::optional<Ket> source;
    std::string source_name;
    std::optional<std::pair<std::vector<std::string>, std::size_t>> deferred_source;
    std::vector<Element> elements;
    std::vector<DetectorBinding> bindings;
    std::string success = "D5";
    std::optional<std::pair<std::vector<std::string>, std::size_t>> calibrate_line;
    Stage stage = Stage::Post;

    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const auto words = split_words(raw);
        if (words.empty()) continue;
        const std::string& head = words[0];

        if (head == "photons") {
            if (words.size() != 2) throw ParseError("expected 'photons N'", line_no);
            if (photons) throw ParseError("photon count given twice", line_no);
            const int n = to_int(words[1], line_no);
            if (n < 1 || n > kMaxPhotons) throw ParseError("photon count out of range", line_no);
            photons = n;
        } else if (head == "source") {
            if (deferred_source) throw ParseError("source given twice", line_no);
            if (words.size() < 2) throw ParseError("expected 'source spdc|ket ...|scenario=..'", line_no);
            deferred_source = {words, line_no};
        } else if (head == "stage") {
            if (words.size() != 2 || (words[1] != "pre" && words[1] != "post")) {
                throw ParseError("expected 'stage pre' or 'stage post'", line_no);
            }
            stage = words[1] == "pre" ? Stage::Pre : Stage::Post;
        } else if (head == "pbs" || head == "hwp" || head == "hadamard" || head == "phase" || head == "bs" ||
                   head == "mirror") {
            Options opts(words, 1, line_no);
            Element e;
            if (head == "pbs") {
                e = Element::pbs(to_int(opts.require("photon"), line_no));
            } else if (head == "hwp" || head == "hadamard") {
                const int photon = to_int(opts.require("photon"), line_no);
                const Arm arm = to_arm(opts.require("arm"), line_no);
                e = head == "hwp" ? Element::hwp(photon, arm) : Element::hadamard_plate(photon, arm);
            } else if (head == "phase") {
                const int photon = to_int(opts.require("photon"), line_no);
                const Arm arm = to_arm(opts.require("arm"), line_no);
                e = Element::phase_shifter(photon, arm, to_double(opts.require("phase"), line_no));
            } else if (head == "bs") {
                const auto modes = split(opts.require("modes"), ',');
                if (modes.size() != 2) throw ParseError("modes= needs two patterns, e.g. modes=LR,RL", line_no);
                BeamSplitterParams params;
                const auto t = opts.take("t");
                const auto r = opts.take("r");
                if (t && r) {
                    params.t = to_double(*t, line_no);
                    params.r = to_double(*r, line_no);
                } else if (t) {
                    params.t = to_double(*t, line_no);
                    params.r = std::sqrt(std::max(0.0, 1.0 - params.t * params.t));
                } else if (r) {
                    params.r = to_double(*r, line_no);
                    params.t = std::sqrt(std::max(0.0, 1.0 - params.r * params.r));
                }
                if (auto v = opts.take("phi_t")) params.phi_t = to_double(*v, line_no);
                if (auto v = opts.take("phi_r")) params.phi_r = to_double(*v, line_no);
                try {
                    e = Element::beam_splitter(modes[0], modes[1], params);
                } catch (const InputError& err) {
                    throw ParseError(err.what(), line_no);
                }
                if (auto flag = opts.take("adjustable")) {
                    if (!flag->empty()) throw ParseError("'adjustable' takes no value", line_no);
                    e.adjustable = true;
                }
                if (auto pass = opts.take("pass")) {
                    if (*pass != "a" && *pass != "b") throw ParseError("pass must be a or b", line_no);
                    e.pass_a = *pass == "a";
                }
            } else {
                e = Element::mirror();
            }
            if (auto label = opts.take("label")) e.label = *label;
            opts.finish(head);
            e.stage = stage;
            elements.push_back(std::move(e));
        } else if (head == "detector") {
            if (words.size() < 2 || words[1].find('=') != std::string::npos) {
                throw ParseError("expected 'detector NAME photon=.. [arm=..] [pol=..]'", line_no);
            }
            Options opts(words, 2, line_no);
            DetectorBinding b{words[1], to_int(opts.require("photon"), line_no), std::nullopt, std::nullopt};
            if (auto arm = opts.take("arm"); arm && *arm != "*") b.arm = to_arm(*arm, line_no);
            if (auto pol = opts.take("pol"); pol && *pol != "*") {
                if (*pol != "H" && *pol != "V") throw ParseError("pol must be H, V or *", line_no);
                b.pol = *pol == "H" ? Polarization::H : Polarization::V;
            }
            opts.finish("detector");
            bindings.push_back(std::move(b));
        } else if (head == "success") {
            if (words.size() != 2) throw ParseError("expected 'success NAME'", line_no);
            success = words[1];
        } else if (head == "calibrate") {
            if (calibrate_line) throw ParseError("calibrate given twice", line_no);
            if (words.size() < 2) throw ParseError("expected 'calibrate scenario=..' or 'calibrate ket ...'", line_no);
            calibrate_line = {words, line_no};
        } else {
            throw ParseError("unknown directive '" + head + "'", line_no);
        }
    }

    if (!deferred_source) throw ParseError("circuit has no source line", 0);
    {
        const auto& [words, line] = *deferred_source;
        if (words[1] == "spdc") {
            if (words.size() != 2) throw ParseError("'source spdc' takes no arguments", line);
            source = spdc_source();
            source_name = "spdc";
        } else if (words[1] == "ket") {
            if (!photons) throw ParseError("'photons N' must be given for a ket source", line);
            source = parse_ket_terms(BasisConvention(*photons), words, 2, line);
            source_name = "ket";
        } else if (words[1].rfind("scenario=", 0) == 0 && words.size() == 2) {
            try {
                source = build_pair(ScenarioId::parse(words[1].substr(9))).pre();
            } catch (const InputError& e) {
                throw ParseError(e.what(), line);
            }
            source_name = words[1];
        } else {
            throw ParseError("unknown source '" + words[1] + "'", line);
        }
        if (photons && *photons != source->convention().photons()) {
            throw ParseError("source has " + std::to_string(source->convention().photons()) + " photons, file says " +
                                 std::to_string(*photons),
                             line);
        }
    }

    std::optional<Ket> target;
    std::string target_name;
    if (calibrate_line) {
        const auto& [words, line] = *calibrate_line;
        if (words[1] == "ket") {
            target = parse_ket_terms(source->convention(), words, 2, line);
            target_name = "ket";
        } else if (words[1].rfind("scenario=", 0) == 0 && words.size() == 2) {
            try {
                target = build_pair(ScenarioId::parse(words[1].substr(9))).post();
            } catch (const InputError& e) {
                throw ParseError(e.what(), line);
            }
            target_name = words[1];
        } else {
            throw ParseError("expected 'calibrate scenario=..' or 'calibrate ket ...'", line);
        }
        if (!(target->convention() == source->convention())) {
            throw ParseError("calibration target and source have different photon counts", line);
        }
    }

    return {Circuit(*source, std::move(elements), std::move(bindings), success, source_name), target, target_name};
}

CircuitFile load_circuit(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_circuit(buffer.str());
}

std::string format_circuit(const Circuit& circuit) {
    std::ostringstream out;
    out << "photons " << circuit.photons() << '\n';
    out << "source ket" << ket_terms(circuit.input()) << '\n';
    std::optional<Stage> stage;
    for (const auto& e : circuit.elements()) {
        if (stage != e.stage) {
            out << "stage " << (e.stage == Stage::Pre ? "pre" : "post") << '\n';
            stage = e.stage;
        }
        out << to_string(e.kind);
        switch (e.kind) {
            case ElementKind::PBS: out << " photon=" << e.photon; break;
            case ElementKind::HWP:
            case ElementKind::HadamardPlate: out << " photon=" << e.photon << " arm=" << arm_letter(e.arm); break;
            case ElementKind::PhaseShifter:
                out << " photon=" << e.photon << " arm=" << arm_letter(e.arm) << " phase=" << number(e.phase);
                break;
            case ElementKind::BeamSplitter:
                out << " modes=" << e.mode_a << ',' << e.mode_b << " t=" << number(e.splitter.t)
                    << " r=" << number(e.splitter.r) << " phi_t=" << number(e.splitter.phi_t)
                    << " phi_r=" << number(e.splitter.phi_r);
                if (e.adjustable) out << " adjustable pass=" << (e.pass_a ? 'a' : 'b');
                break;
            default: break;
        }
        if (!e.label.empty()) out << " label=" << e.label;
        out << '\n';
    }
    for (const auto& b : circuit.bindings()) {
        out << "detector " << b.detector << " photon=" << b.photon;
        if (b.arm) out << " arm=" << arm_letter(*b.arm);
        if (b.pol) out << " pol=" << (*b.pol == Polarization::H ? 'H' : 'V');
        out << '\n';
    }
    out << "success " << circuit.success_detector() << '\n';
    return out.str();
}

PreparedCircuit prepare(const CircuitFile& file) {
    if (!file.calibration_target) return {file.circuit, std::nullopt};
    auto calibrated = calibrate_postselection(file.circuit, *file.calibration_target);
    return {std::move(calibrated.circuit), calibrated.residual};
}

}  // namespace cheshire
