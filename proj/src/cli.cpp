#include "cheshire/cli.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cheshire/circuit_io.hpp"
#include "cheshire/errors.hpp"
#include "cheshire/scenarios.hpp"
#include "cheshire/serialize.hpp"
#include "cheshire/solver.hpp"
#include "cheshire/weakval.hpp"

namespace cheshire::cli {

namespace {

using nlohmann::json;

enum class Format { Table, Csv, Json };

struct Settings {
    std::string format = "table";
    std::uint64_t seed = kDefaultSeed;
    double tolerance = kDefaultTolerance;

    Format parsed_format() const {
        if (format == "csv") return Format::Csv;
        if (format == "json") return Format::Json;
        return Format::Table;
    }
};

std::string fmt(double value) {
    std::ostringstream out;
    out << std::setprecision(12) << (value == 0.0 ? 0.0 : value);
    return out.str();
}

std::string full(double value) {
    std::ostringstream out;
    out << std::setprecision(17) << (value == 0.0 ? 0.0 : value);
    return out.str();
}

// Marks values that sit on 0 or 1, so delta patterns stand out.
std::string flag(Complex value) {
    if (std::abs(value) <= 1e-12) return "=0";
    if (std::abs(value - 1.0) <= 1e-12) return "=1";
    return "";
}

void print_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths;
    for (const auto& row : rows) {
        widths.resize(std::max(widths.size(), row.size()), 0);
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    }
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            line += row[c];
            if (c + 1 < row.size()) line += std::string(widths[c] - row[c].size() + 2, ' ');
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out << line << '\n';
    }
}

void print_csv(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
        out << '\n';
    }
}

std::vector<std::vector<std::string>> ket_rows(const Ket& ket, bool table) {
    std::vector<std::vector<std::string>> rows{{"label", "re", "im"}};
    for (const auto& [index, amp] : ket.amplitudes()) {
        rows.push_back({ket.convention().label(index), table ? fmt(amp.real()) : full(amp.real()),
                        table ? fmt(amp.imag()) : full(amp.imag())});
    }
    return rows;
}

// ---------------------------------------------------------------------------

int cmd_scenario(const std::string& id_text, const Settings& s, std::ostream& out, std::ostream& err) {
    const ScenarioId id = ScenarioId::parse(id_text);
    const PrePostPair pair = build_pair(id);
    const WeakValueReport report = weak_value_report(pair);
    const ExpectedPattern expected = expected_pattern(id);
    const double deviation = pattern_deviation(report, expected);
    const bool match = deviation < s.tolerance;

    switch (s.parsed_format()) {
        case Format::Json: {
            json entries = json::array();
            for (const auto& e : report.entries) {
                entries.push_back({{"photon", e.key.photon},
                                   {"kind", to_string(e.key.kind)},
                                   {"arm", std::string(1, arm_letter(e.key.arm))},
                                   {"re", e.value.real()},
                                   {"im", e.value.imag()},
                                   {"expected", expected.at(e.key)}});
            }
            out << json{{"scenario", id.name()},
                        {"photons", id.photons()},
                        {"entries", std::move(entries)},
                        {"overlap", {{"re", report.overlap.real()}, {"im", report.overlap.imag()}}},
                        {"max_deviation", deviation},
                        {"tolerance", s.tolerance},
                        {"match", match}}
                       .dump(2)
                << '\n';
            break;
        }
        case Format::Csv: {
            std::vector<std::vector<std::string>> rows{{"photon", "kind", "arm", "re", "im"}};
            for (const auto& e : report.entries) {
                rows.push_back({std::to_string(e.key.photon), to_string(e.key.kind), std::string(1, arm_letter(e.key.arm)),
                                full(e.value.real()), full(e.value.imag())});
            }
            rows.push_back({"overlap", "", "", full(report.overlap.real()), full(report.overlap.imag())});
            print_csv(out, rows);
            break;
        }
        case Format::Table: {
            out << "scenario " << id.name() << " (" << id.photons() << " photon" << (id.photons() > 1 ? "s" : "")
                << ")\n";
            std::vector<std::vector<std::string>> rows{{"photon", "kind", "arm", "Re", "Im", "", "expected"}};
            for (const auto& e : report.entries) {
                rows.push_back({std::to_string(e.key.photon), to_string(e.key.kind), std::string(1, arm_letter(e.key.arm)),
                                fmt(e.value.real()), fmt(e.value.imag()), flag(e.value),
                                std::to_string(expected.at(e.key))});
            }
            rows.push_back({"overlap", "", "", fmt(report.overlap.real()), fmt(report.overlap.imag())});
            print_table(out, rows);
            out << "pattern " << (match ? "matches" : "MISMATCH") << " (max deviation " << fmt(deviation) << ", tol "
                << s.tolerance << ")\n";
            break;
        }
    }
    if (!match) err << "weak values deviate from the expected pattern by " << deviation << '\n';
    return match ? kExitOk : kExitMismatch;
}

int cmd_solve(const std::string& path, const Settings& s, std::ostream& out, std::ostream& err) {
    const SolveProblem problem = problem_from_json(load_json(path));
    const Ket post = solve_post(assemble(problem.pre, problem.targets));
    const double residual = verify(problem.pre, post, problem.targets);
    const bool ok = residual < s.tolerance;

    switch (s.parsed_format()) {
        case Format::Json:
            out << json{{"post", to_json(post)}, {"residual", residual}, {"tolerance", s.tolerance}, {"ok", ok}}.dump(2)
                << '\n';
            break;
        case Format::Csv:
            print_csv(out, ket_rows(post, false));
            break;
        case Format::Table:
            out << "post-selected state (unnormalized, " << post.support_size() << " terms)\n";
            print_table(out, ket_rows(post, true));
            out << "residual " << fmt(residual) << " (tol " << s.tolerance << ")\n";
            break;
    }
    if (!ok) err << "solution misses the targets by " << residual << '\n';
    return ok ? kExitOk : kExitMismatch;
}

int cmd_circuit(const std::string& path, const std::string& emit, std::uint64_t shots, const Settings& s,
                std::ostream& out) {
    const PreparedCircuit prepared = prepare(load_circuit(path));
    const Circuit& circuit = prepared.circuit;
    const ExactResult exact = run_exact(circuit);
    const Format format = s.parsed_format();

    json doc;
    if (prepared.calibration_residual) doc["calibration_residual"] = *prepared.calibration_residual;

    if (emit == "probs") {
        std::vector<std::vector<std::string>> rows{{"pattern", "probability"}};
        json patterns = json::array();
        for (const auto& p : exact.patterns) {
            const auto label = pattern_label(p.detectors);
            rows.push_back({label, format == Format::Table ? fmt(p.probability) : full(p.probability)});
            patterns.push_back({{"pattern", label}, {"detectors", p.detectors}, {"probability", p.probability}});
        }
        doc["patterns"] = std::move(patterns);
        doc["marginal"] = exact.detector_probabilities;
        if (format == Format::Json) {
            out << doc.dump(2) << '\n';
        } else if (format == Format::Csv) {
            print_csv(out, rows);
        } else {
            if (prepared.calibration_residual) out << "calibration residual " << fmt(*prepared.calibration_residual) << '\n';
            print_table(out, rows);
        }
    } else if (emit == "counts") {
        const ClickRecord record = run_monte_carlo(circuit, shots, s.seed);
        std::vector<std::vector<std::string>> rows{{"pattern", "count"}};
        for (const auto& [label, count] : record.pattern_counts) rows.push_back({label, std::to_string(count)});
        doc["shots"] = record.shots;
        doc["seed"] = record.seed;
        doc["patterns"] = record.pattern_counts;
        doc["detectors"] = record.counts;
        if (format == Format::Json) {
            out << doc.dump(2) << '\n';
        } else if (format == Format::Csv) {
            print_csv(out, rows);
        } else {
            out << "shots " << record.shots << ", seed " << record.seed << '\n';
            print_table(out, rows);
        }
    } else {
        const std::vector<std::string> success{circuit.success_detector()};
        const auto it = std::find_if(exact.patterns.begin(), exact.patterns.end(),
                                     [&](const PatternOutcome& p) { return p.detectors == success; });
        if (it == exact.patterns.end()) {
            throw VacuousSelectionError("success pattern " + circuit.success_detector() + " never occurs");
        }
        const auto effective = effective_postselection(circuit);
        doc["pattern"] = circuit.success_detector();
        doc["probability"] = it->probability;
        doc["conditional_state"] = to_json(it->conditional_state);
        doc["post_input"] = to_json(exact.post_input);
        doc["effective_postselection"] = to_json(effective.vector);
        doc["rank_one_residual"] = effective.rank_one_residual;
        if (format == Format::Json) {
            out << doc.dump(2) << '\n';
        } else if (format == Format::Csv) {
            print_csv(out, ket_rows(it->conditional_state, false));
        } else {
            out << "pattern " << circuit.success_detector() << ", probability " << fmt(it->probability) << '\n';
            out << "conditional output state\n";
            print_table(out, ket_rows(it->conditional_state, true));
            out << "effective post-selection vector (rank-1 residual " << fmt(effective.rank_one_residual) << ")\n";
            print_table(out, ket_rows(effective.vector, true));
        }
    }
    return kExitOk;
}

int cmd_pointer(const std::string& id_text, const std::string& descriptor, const std::vector<double>& couplings,
                const Settings& s, std::ostream& out, std::ostream& err) {
    const PrePostPair pair = build_pair(ScenarioId::parse(id_text));
    const Operator observable = parse_observable(pair.convention(), descriptor);
    const Complex target = weak_value(observable, pair);
    const auto rows = pointer_sweep(observable, pair, couplings);
    const bool ok = converges_quadratically(rows, kPointerEfficiency, kPointerNoiseFloor);

    if (s.parsed_format() == Format::Json) {
        json entries = json::array();
        for (const auto& r : rows) {
            entries.push_back({{"g", r.coupling}, {"re_estimate", r.re_estimate}, {"im_estimate", r.im_estimate},
                               {"deviation", r.deviation}});
        }
        out << json{{"observable", descriptor},
                    {"weak_value", {{"re", target.real()}, {"im", target.imag()}}},
                    {"rows", std::move(entries)},
                    {"converged", ok}}
                   .dump(2)
            << '\n';
    } else {
        const bool table = s.parsed_format() == Format::Table;
        std::vector<std::vector<std::string>> out_rows{{"g", "shift/g", "deviation", "ratio", "im_estimate"}};
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const auto& r = rows[k];
            std::string ratio;
            if (k > 0 && r.deviation > 0.0) ratio = fmt(rows[k - 1].deviation / r.deviation);
            out_rows.push_back({table ? fmt(r.coupling) : full(r.coupling), table ? fmt(r.re_estimate) : full(r.re_estimate),
                                table ? fmt(r.deviation) : full(r.deviation), ratio,
                                table ? fmt(r.im_estimate) : full(r.im_estimate)});
        }
        if (table) {
            out << descriptor << ": weak value " << fmt(target.real()) << " + " << fmt(target.imag()) << "i\n";
            print_table(out, out_rows);
            out << (ok ? "converges quadratically" : "NOT converging quadratically") << '\n';
        } else {
            print_csv(out, out_rows);
        }
    }
    if (!ok) err << "pointer deviations do not shrink quadratically\n";
    return ok ? kExitOk : kExitMismatch;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Weak values, post-selection synthesis and optical simulation for entangled Cheshire cats", "cheshire"};
    app.require_subcommand(1);
    app.fallthrough();

    Settings settings;
    app.add_option("--format", settings.format, "Output format")
        ->check(CLI::IsMember({"table", "csv", "json"}))
        ->capture_default_str();
    app.add_option("--seed", settings.seed, "Monte Carlo seed")->capture_default_str();
    app.add_option("--tol", settings.tolerance, "Match tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    std::string scenario_id;
    auto* scenario = app.add_subcommand("scenario", "Weak-value report of a built-in scenario");
    scenario->add_option("id", scenario_id, "single | two-cat | general:theta=..,phi=.. | n-cat:n=..")->required();

    std::string problem_path;
    auto* solve = app.add_subcommand("solve", "Synthesize a post-selected state from weak-value targets");
    solve->add_option("problem", problem_path, "Problem file (JSON)")->required();

    std::string circuit_path;
    std::string emit = "probs";
    std::uint64_t shots = kDefaultShots;
    auto* circuit = app.add_subcommand("circuit", "Simulate an optical circuit file");
    circuit->add_option("file", circuit_path, "Circuit description")->required();
    circuit->add_option("--emit", emit, "What to print")
        ->check(CLI::IsMember({"counts", "probs", "conditional-state"}))
        ->capture_default_str();
    circuit->add_option("--shots", shots, "Monte Carlo shots (counts)")
        ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()))
        ->capture_default_str();

    std::string pointer_id;
    std::string observable = "path:1:L";
    std::vector<double> couplings{1e-2, 5e-3, 2.5e-3};
    auto* pointer = app.add_subcommand("pointer", "Weak-measurement pointer sweep over couplings");
    pointer->add_option("id", pointer_id, "Scenario id")->required();
    pointer->add_option("--observable", observable, "path:i:L|R, grin:i:L|R, sigma:i or identity")
        ->capture_default_str();
    pointer->add_option("--g", couplings, "Couplings, largest first")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (scenario->parsed()) return cmd_scenario(scenario_id, settings, out, err);
        if (solve->parsed()) return cmd_solve(problem_path, settings, out, err);
        if (circuit->parsed()) return cmd_circuit(circuit_path, emit, shots, settings, out);
        if (pointer->parsed()) return cmd_pointer(pointer_id, observable, couplings, settings, out, err);
    } catch (const AnomalousSelectionError& e) {
        err << "error: " << e.what() << " (overlap " << e.overlap().real() << (e.overlap().imag() < 0 ? "" : "+")
            << e.overlap().imag() << "i)\n";
        return kExitInfeasible;
    } catch (const CalibrationError& e) {
        err << "error: " << e.what() << " (best residual " << e.best_residual() << ")\n";
        return kExitInfeasible;
    } catch (const DegenerateScenarioError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const InfeasibleTargetsError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const VacuousSelectionError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const DegenerateInputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const Error& e) {
        // ParseError, InputError, ConfigurationError
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace cheshire::cli
