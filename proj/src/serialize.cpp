#include "cheshire/serialize.hpp"

#include <fstream>

#include "cheshire/errors.hpp"

namespace cheshire {

using nlohmann::json;

namespace {

json header(const BasisConvention& convention) {
    return {{"photons", convention.photons()}, {"factor_order", convention.factor_names()}};
}

BasisConvention read_header(const json& doc) {
    if (!doc.is_object()) throw ParseError("expected a JSON object", 0);
    if (!doc.contains("photons") || !doc["photons"].is_number_integer()) {
        throw ParseError("missing integer field 'photons'", 0);
    }
    const int n = doc["photons"].get<int>();
    if (n < 1 || n > kMaxPhotons) throw ParseError("photon count out of range", 0);
    BasisConvention convention(n);
    if (doc.contains("factor_order") && doc["factor_order"] != json(convention.factor_names())) {
        throw ParseError("unsupported factor order (expected paths first, then polarizations)", 0);
    }
    return convention;
}

double number(const json& value, const std::string& where) {
    if (!value.is_number()) throw ParseError(where + " must be a number", 0);
    return value.get<double>();
}

BasisIndex index_of(const BasisConvention& convention, const json& label) {
    if (!label.is_string()) throw ParseError("basis label must be a string", 0);
    try {
        return convention.parse_label(label.get<std::string>());
    } catch (const InputError& e) {
        throw ParseError(e.what(), 0);
    }
}

}  // namespace

json to_json(const Ket& ket) {
    json doc = header(ket.convention());
    json terms = json::array();
    for (const auto& [index, amp] : ket.amplitudes()) {
        terms.push_back({ket.convention().label(index), amp.real(), amp.imag()});
    }
    doc["terms"] = std::move(terms);
    return doc;
}

json to_json(const Operator& op) {
    json doc = header(op.convention());
    json entries = json::array();
    for (const auto& e : op.entries()) {
        entries.push_back({op.convention().label(e.row), op.convention().label(e.col), e.value.real(), e.value.imag()});
    }
    doc["entries"] = std::move(entries);
    return doc;
}

Ket ket_from_json(const json& doc) {
    const BasisConvention convention = read_header(doc);
    if (!doc.contains("terms") || !doc["terms"].is_array()) throw ParseError("missing array field 'terms'", 0);
    Ket::Amplitudes amplitudes;
    for (const auto& term : doc["terms"]) {
        if (!term.is_array() || term.size() != 3) throw ParseError("ket term must be [label, re, im]", 0);
        amplitudes[index_of(convention, term[0])] += Complex{number(term[1], "re"), number(term[2], "im")};
    }
    return Ket(convention, std::move(amplitudes));
}

Operator operator_from_json(const json& doc) {
    const BasisConvention convention = read_header(doc);
    if (!doc.contains("entries") || !doc["entries"].is_array()) throw ParseError("missing array field 'entries'", 0);
    std::vector<Operator::Entry> entries;
    for (const auto& e : doc["entries"]) {
        if (!e.is_array() || e.size() != 4) throw ParseError("operator entry must be [row, col, re, im]", 0);
        entries.push_back(
            {index_of(convention, e[1]), index_of(convention, e[0]), Complex{number(e[2], "re"), number(e[3], "im")}});
    }
    return Operator(convention, std::move(entries));
}

SolveProblem problem_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("pre")) throw ParseError("problem needs a 'pre' ket", 0);
    Ket pre = ket_from_json(doc["pre"]);
    if (!doc.contains("targets") || !doc["targets"].is_array()) throw ParseError("problem needs a 'targets' array", 0);
    std::vector<WeakValueTarget> targets;
    for (const auto& t : doc["targets"]) {
        if (!t.is_object() || !t.contains("observable") || !t["observable"].is_string()) {
            throw ParseError("each target needs an 'observable' string", 0);
        }
        const auto descriptor = t["observable"].get<std::string>();
        Operator observable = Operator::zero(pre.convention());
        try {
            observable = parse_observable(pre.convention(), descriptor);
        } catch (const InputError& e) {
            throw ParseError(e.what(), 0);
        }
        const double re = t.contains("re") ? number(t["re"], "re") : 0.0;
        const double im = t.contains("im") ? number(t["im"], "im") : 0.0;
        targets.push_back({std::move(observable), Complex{re, im}, descriptor});
    }
    return {std::move(pre), std::move(targets)};
}

json to_json(const SolveProblem& problem) {
    json targets = json::array();
    for (const auto& t : problem.targets) {
        targets.push_back({{"observable", t.descriptor}, {"re", t.target.real()}, {"im", t.target.imag()}});
    }
    return {{"pre", to_json(problem.pre)}, {"targets", std::move(targets)}};
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what(), 0);
    }
}

}  // namespace cheshire
