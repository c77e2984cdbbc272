#include "cheshire/scenarios.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cheshire/errors.hpp"

namespace cheshire {

namespace {

constexpr Complex kI{0.0, 1.0};

double parse_number(std::string_view text) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) throw InputError("bad number '" + std::string(text) + "'");
    return value;
}

std::string_view strip_prefix(std::string_view key) {
    // Accept both ASCII and the Greek letters for the angle keys.
    if (key == "θ" || key == "theta") return "theta";
    if (key == "φ" || key == "phi") return "phi";
    return key;
}

}  // namespace

double parse_angle(std::string_view text) {
    std::size_t pi_pos = text.find("pi");
    std::size_t pi_len = 2;
    if (pi_pos == std::string_view::npos) {
        pi_pos = text.find("π");
        pi_len = std::string_view("π").size();
    }
    if (pi_pos == std::string_view::npos) return parse_number(text);

    std::string_view coefficient = text.substr(0, pi_pos);
    std::string_view divisor = text.substr(pi_pos + pi_len);
    if (!coefficient.empty() && coefficient.back() == '*') coefficient.remove_suffix(1);
    double value = std::numbers::pi;
    if (coefficient == "-") {
        value = -value;
    } else if (!coefficient.empty()) {
        value *= parse_number(coefficient);
    }
    if (!divisor.empty()) {
        if (divisor.front() != '/') throw InputError("bad angle '" + std::string(text) + "'");
        value /= parse_number(divisor.substr(1));
    }
    return value;
}

// ---------------------------------------------------------------------------
// ScenarioId

ScenarioId ScenarioId::single() { return {Kind::Single, 0.0, 0.0, 1}; }

ScenarioId ScenarioId::two_cat() { return {Kind::TwoCat, std::numbers::pi / 4, 0.0, 2}; }

ScenarioId ScenarioId::general(double theta, double phi) {
    if (!std::isfinite(theta) || !std::isfinite(phi)) throw InputError("scenario angles must be finite");
    if (!(theta > 0.0 && theta < std::numbers::pi / 2)) {
        throw DegenerateScenarioError("general scenario needs 0 < theta < pi/2 (cot(theta) finite and nonzero), got theta=" +
                                      std::to_string(theta));
    }
    return {Kind::General, theta, phi, 2};
}

ScenarioId ScenarioId::n_cat(int n) {
    if (n < 2) throw InputError("n-cat scenario needs n >= 2, got " + std::to_string(n));
    if (n > kMaxPhotons) throw InputError("n-cat scenario limited to n <= " + std::to_string(kMaxPhotons));
    return {Kind::NCat, 0.0, 0.0, n};
}

int ScenarioId::photons() const noexcept { return n_; }

std::string ScenarioId::name() const {
    std::ostringstream out;
    out.precision(17);
    switch (kind_) {
        case Kind::Single: return "single";
        case Kind::TwoCat: return "two-cat";
        case Kind::General: out << "general:theta=" << theta_ << ",phi=" << phi_; return out.str();
        case Kind::NCat: return "n-cat:n=" + std::to_string(n_);
    }
    return {};
}

ScenarioId ScenarioId::parse(std::string_view text) {
    if (text == "single") return single();
    if (text == "two-cat") return two_cat();

    const auto colon = text.find(':');
    const auto head = text.substr(0, colon);
    std::map<std::string, std::string> params;
    if (colon != std::string_view::npos) {
        std::string_view rest = text.substr(colon + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const auto item = rest.substr(0, comma);
            const auto eq = item.find('=');
            if (eq == std::string_view::npos) {
                throw InputError("scenario parameter '" + std::string(item) + "' lacks '='");
            }
            params[std::string(strip_prefix(item.substr(0, eq)))] = std::string(item.substr(eq + 1));
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
    }

    if (head == "general") {
        if (!params.contains("theta")) throw InputError("general scenario needs theta=..");
        const double theta = parse_angle(params.at("theta"));
        const double phi = params.contains("phi") ? parse_angle(params.at("phi")) : 0.0;
        params.erase("theta");
        params.erase("phi");
        if (!params.empty()) throw InputError("unknown parameter '" + params.begin()->first + "' for general scenario");
        return general(theta, phi);
    }
    if (head == "n-cat") {
        if (!params.contains("n") || params.size() != 1) throw InputError("n-cat scenario needs exactly n=..");
        const auto& value = params.at("n");
        int n = 0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
        if (ec != std::errc() || ptr != value.data() + value.size()) {
            throw InputError("bad photon count '" + value + "'");
        }
        return n_cat(n);
    }
    throw InputError("unknown scenario '" + std::string(text) +
                     "' (expected single, two-cat, general:theta=..,phi=.., n-cat:n=..)");
}

// ---------------------------------------------------------------------------
// Binary index families

PreStateIndices pre_state_indices(int n) {
    if (n < 2 || n > kMaxPhotons) throw InputError("pre_state_indices needs 2 <= n <= " + std::to_string(kMaxPhotons));
    PreStateIndices out{0, 0};
    for (int k = 1; k <= n / 2; ++k) out.first += BasisIndex{1} << (2 * n - 2 * k);
    for (int j = 1; j <= (n + 1) / 2; ++j) out.second += BasisIndex{1} << (2 * n - 2 * j + 1);
    return out;
}

PostStateIndices post_state_indices(int n) {
    const auto pre = pre_state_indices(n);
    PostStateIndices out{pre.first, pre.second + 1, {}};
    for (int l = 0; l <= n - 2; ++l) out.extras.push_back(pre.second + (BasisIndex{1} << (l + 1)));
    return out;
}

// ---------------------------------------------------------------------------
// Pairs

PrePostPair build_pair(const ScenarioId& id) {
    const double r2 = 1.0 / std::sqrt(2.0);
    switch (id.kind()) {
        case ScenarioId::Kind::Single: {
            const BasisConvention c(1);
            Ket pre = superpose({{kI * r2, basis_ket(c, "LH")}, {r2, basis_ket(c, "RH")}});
            Ket post = superpose({{r2, basis_ket(c, "LH")}, {r2, basis_ket(c, "RV")}});
            return {std::move(pre), std::move(post)};
        }
        case ScenarioId::Kind::TwoCat: {
            const BasisConvention c(2);
            const double r3 = 1.0 / std::sqrt(3.0);
            Ket pre = superpose({{r2, basis_ket(c, "0100")}, {r2, basis_ket(c, "1000")}});
            Ket post = superpose(
                {{-kI * r3, basis_ket(c, "0100")}, {r3, basis_ket(c, "1001")}, {r3, basis_ket(c, "1010")}});
            return {std::move(pre), std::move(post)};
        }
        case ScenarioId::Kind::General: {
            const BasisConvention c(2);
            const double r3 = 1.0 / std::sqrt(3.0);
            const Complex phase = std::polar(1.0, id.phi());
            const double cot = 1.0 / std::tan(id.theta());
            Ket pre = superpose(
                {{std::cos(id.theta()), basis_ket(c, "0100")}, {phase * std::sin(id.theta()), basis_ket(c, "1000")}});
            // Displayed coefficients; not unit norm unless theta = pi/4.
            Ket post = superpose({{-kI * r3, basis_ket(c, "0100")},
                                  {phase * cot * r3, basis_ket(c, "1001")},
                                  {phase * cot * r3, basis_ket(c, "1010")}});
            return {std::move(pre), std::move(post)};
        }
        case ScenarioId::Kind::NCat: {
            const int n = id.photons();
            const BasisConvention c(n);
            const auto pre_idx = pre_state_indices(n);
            const auto post_idx = post_state_indices(n);
            Ket pre(c, {{pre_idx.first, r2}, {pre_idx.second, r2}});
            const double rn = 1.0 / std::sqrt(static_cast<double>(n + 1));
            Ket::Amplitudes post{{post_idx.first, -kI * rn}, {post_idx.main, rn}};
            for (auto extra : post_idx.extras) post.emplace(extra, rn);
            return {std::move(pre), Ket(c, std::move(post))};
        }
    }
    throw InputError("unknown scenario kind");
}

ExpectedPattern expected_pattern(const ScenarioId& id) {
    // Odd photons: path in L, polarization in R. Even photons: the mirror image.
    ExpectedPattern pattern;
    for (int i = 1; i <= id.photons(); ++i) {
        const Arm cat = i % 2 == 1 ? Arm::L : Arm::R;
        const Arm grin = i % 2 == 1 ? Arm::R : Arm::L;
        for (auto arm : {Arm::L, Arm::R}) {
            pattern[{i, ObservableKind::Path, arm}] = arm == cat ? 1 : 0;
            pattern[{i, ObservableKind::Grin, arm}] = arm == grin ? 1 : 0;
        }
    }
    return pattern;
}

double pattern_deviation(const WeakValueReport& report, const ExpectedPattern& pattern) {
    if (report.entries.size() != pattern.size()) {
        throw InputError("report and pattern cover different observables");
    }
    double worst = 0.0;
    for (const auto& entry : report.entries) {
        auto it = pattern.find(entry.key);
        if (it == pattern.end()) throw InputError("pattern lacks " + entry.key.descriptor());
        worst = std::max(worst, std::abs(entry.value - Complex{static_cast<double>(it->second)}));
    }
    return worst;
}

}  // namespace cheshire
