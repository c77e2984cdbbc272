#include "cheshire/hilbert.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "cheshire/errors.hpp"

namespace cheshire {

namespace {

constexpr Complex kI{0.0, 1.0};

void require_same(const BasisConvention& a, const BasisConvention& b, const char* what) {
    if (!(a == b)) {
        throw InputError(std::string(what) + ": mixed basis conventions (" +
                         std::to_string(a.photons()) + " vs " + std::to_string(b.photons()) +
                         " photons)");
    }
}

void check_photon(const BasisConvention& convention, int photon) {
    if (photon < 1 || photon > convention.photons()) {
        throw InputError("photon index " + std::to_string(photon) + " outside 1.." +
                         std::to_string(convention.photons()));
    }
}

int parse_int(std::string_view text, std::string_view context) {
    int value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw InputError("bad integer '" + std::string(text) + "' in " + std::string(context));
    }
    return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

}  // namespace

char arm_letter(Arm arm) { return arm == Arm::L ? 'L' : 'R'; }

Arm parse_arm(std::string_view text) {
    if (text == "L" || text == "l") return Arm::L;
    if (text == "R" || text == "r") return Arm::R;
    throw InputError("arm must be L or R, got '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// BasisConvention

BasisConvention::BasisConvention(int photons) : photons_(photons) {
    if (photons < 1 || photons > kMaxPhotons) {
        throw InputError("photon count must be in 1.." + std::to_string(kMaxPhotons) + ", got " +
                         std::to_string(photons));
    }
}

int BasisConvention::factor_bit(int factor) const {
    if (factor < 0 || factor >= factors()) {
        throw InputError("factor index " + std::to_string(factor) + " out of range");
    }
    return factors() - 1 - factor;
}

int BasisConvention::path_bit(int photon) const {
    check_photon(*this, photon);
    return factor_bit(photon - 1);
}

int BasisConvention::pol_bit(int photon) const {
    check_photon(*this, photon);
    return factor_bit(photons_ + photon - 1);
}

std::string BasisConvention::label(BasisIndex index) const {
    if (index >= dimension()) throw InputError("basis index out of range");
    std::string out(static_cast<std::size_t>(factors()), '0');
    for (int f = 0; f < factors(); ++f) {
        if ((index >> factor_bit(f)) & 1U) out[static_cast<std::size_t>(f)] = '1';
    }
    return out;
}

BasisIndex BasisConvention::parse_label(std::string_view text) const {
    const auto width = static_cast<std::size_t>(factors());
    auto trimmed = text;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front())))
        trimmed.remove_prefix(1);
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
        trimmed.remove_suffix(1);

    auto is_binary = [](std::string_view s) {
        return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c == '0' || c == '1'; });
    };

    if (is_binary(trimmed)) {
        if (trimmed.size() != width) {
            throw InputError("label '" + std::string(text) + "' has length " +
                             std::to_string(trimmed.size()) + ", expected " + std::to_string(width));
        }
        BasisIndex index = 0;
        for (char c : trimmed) index = (index << 1) | static_cast<BasisIndex>(c == '1');
        return index;
    }

    // Tokenized alias form, e.g. "L1 R2 H1 H2".
    if (trimmed.find(' ') != std::string_view::npos) {
        std::vector<int> path(static_cast<std::size_t>(photons_), -1);
        std::vector<int> pol(static_cast<std::size_t>(photons_), -1);
        std::istringstream tokens{std::string(trimmed)};
        std::string token;
        while (tokens >> token) {
            if (token.size() < 2) throw InputError("bad label token '" + token + "'");
            const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(token[0])));
            const int photon = parse_int(std::string_view(token).substr(1), "label token");
            check_photon(*this, photon);
            auto& slot = (letter == 'L' || letter == 'R') ? path : pol;
            if (letter != 'L' && letter != 'R' && letter != 'H' && letter != 'V') {
                throw InputError("bad label token '" + token + "'");
            }
            auto& value = slot[static_cast<std::size_t>(photon - 1)];
            if (value != -1) throw InputError("label assigns photon " + std::to_string(photon) + " twice");
            value = (letter == 'R' || letter == 'V') ? 1 : 0;
        }
        BasisIndex index = 0;
        for (int i = 1; i <= photons_; ++i) {
            const int p = path[static_cast<std::size_t>(i - 1)];
            const int q = pol[static_cast<std::size_t>(i - 1)];
            if (p < 0 || q < 0) {
                throw InputError("label '" + std::string(text) + "' misses photon " + std::to_string(i));
            }
            index |= static_cast<BasisIndex>(p) << path_bit(i);
            index |= static_cast<BasisIndex>(q) << pol_bit(i);
        }
        return index;
    }

    // Compact alias form, e.g. "LRHH".
    if (trimmed.size() != width) {
        throw InputError("label '" + std::string(text) + "' has length " + std::to_string(trimmed.size()) +
                         ", expected " + std::to_string(width));
    }
    BasisIndex index = 0;
    for (std::size_t f = 0; f < width; ++f) {
        const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(trimmed[f])));
        const bool path_part = f < static_cast<std::size_t>(photons_);
        int bit = -1;
        if (path_part && (c == 'L' || c == 'R')) bit = c == 'R';
        if (!path_part && (c == 'H' || c == 'V')) bit = c == 'V';
        if (bit < 0) throw InputError("label '" + std::string(text) + "' has invalid character '" + c + "'");
        index = (index << 1) | static_cast<BasisIndex>(bit);
    }
    return index;
}

std::vector<std::string> BasisConvention::factor_names() const {
    std::vector<std::string> names;
    for (int i = 1; i <= photons_; ++i) names.push_back("path" + std::to_string(i));
    for (int i = 1; i <= photons_; ++i) names.push_back("pol" + std::to_string(i));
    return names;
}

// ---------------------------------------------------------------------------
// Ket

Ket::Ket(BasisConvention convention, Amplitudes amplitudes)
    : convention_(convention), amplitudes_(std::move(amplitudes)) {
    const BasisIndex dim = convention_.dimension();
    double norm2 = 0.0;
    for (auto it = amplitudes_.begin(); it != amplitudes_.end();) {
        if (it->first >= dim) throw InputError("amplitude index outside the Hilbert space");
        if (!std::isfinite(it->second.real()) || !std::isfinite(it->second.imag())) {
            throw InputError("non-finite amplitude");
        }
        if (std::abs(it->second) < kPruneThreshold) {
            it = amplitudes_.erase(it);
        } else {
            norm2 += std::norm(it->second);
            ++it;
        }
    }
    norm_ = std::sqrt(norm2);
    normalized_ = std::abs(norm2 - 1.0) <= kNormTolerance;
}

Complex Ket::amplitude(BasisIndex index) const {
    auto it = amplitudes_.find(index);
    return it == amplitudes_.end() ? Complex{} : it->second;
}

// ---------------------------------------------------------------------------
// Operator

Operator::Operator(BasisConvention convention, std::vector<Entry> entries)
    : convention_(convention), entries_(std::move(entries)) {
    const BasisIndex dim = convention_.dimension();
    auto key_less = [](const Entry& a, const Entry& b) {
        return a.col != b.col ? a.col < b.col : a.row < b.row;
    };
    if (!std::is_sorted(entries_.begin(), entries_.end(), key_less)) {
        std::stable_sort(entries_.begin(), entries_.end(), key_less);
    }
    std::vector<Entry> merged;
    merged.reserve(entries_.size());
    for (const auto& e : entries_) {
        if (e.col >= dim || e.row >= dim) throw InputError("operator entry outside the Hilbert space");
        if (!merged.empty() && merged.back().col == e.col && merged.back().row == e.row) {
            merged.back().value += e.value;
        } else {
            merged.push_back(e);
        }
    }
    std::erase_if(merged, [](const Entry& e) { return std::abs(e.value) < kPruneThreshold; });
    entries_ = std::move(merged);
}

Operator Operator::identity(const BasisConvention& convention) {
    std::vector<Entry> entries;
    entries.reserve(convention.dimension());
    for (BasisIndex k = 0; k < convention.dimension(); ++k) entries.push_back({k, k, 1.0});
    return Operator(convention, std::move(entries));
}

Operator Operator::zero(const BasisConvention& convention) { return Operator(convention, {}); }

Operator Operator::on_factor(const BasisConvention& convention, int factor, const Mat2& matrix) {
    const int bit = convention.factor_bit(factor);
    const BasisIndex mask = BasisIndex{1} << bit;
    std::vector<Entry> entries;
    entries.reserve(convention.dimension() * 2);
    for (BasisIndex col = 0; col < convention.dimension(); ++col) {
        const auto b = static_cast<std::size_t>((col >> bit) & 1U);
        const BasisIndex base = col & ~mask;
        for (std::size_t r = 0; r < 2; ++r) {
            const Complex v = matrix[r][b];
            if (v != Complex{}) entries.push_back({col, base | (r ? mask : 0), v});
        }
    }
    return Operator(convention, std::move(entries));
}

std::span<const Operator::Entry> Operator::column(BasisIndex col) const {
    auto lo = std::lower_bound(entries_.begin(), entries_.end(), col,
                               [](const Entry& e, BasisIndex c) { return e.col < c; });
    auto hi = lo;
    while (hi != entries_.end() && hi->col == col) ++hi;
    return {lo, hi};
}

Complex Operator::element(BasisIndex row, BasisIndex col) const {
    for (const auto& e : column(col)) {
        if (e.row == row) return e.value;
    }
    return {};
}

Operator Operator::adjoint() const {
    std::vector<Entry> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back({e.row, e.col, std::conj(e.value)});
    return Operator(convention_, std::move(out));
}

bool Operator::is_hermitian(double tolerance) const {
    return max_abs_difference(*this, adjoint()) <= tolerance;
}

Operator operator*(const Operator& lhs, const Operator& rhs) {
    require_same(lhs.convention_, rhs.convention_, "operator product");
    std::vector<Operator::Entry> out;
    for (const auto& e : rhs.entries_) {
        for (const auto& f : lhs.column(e.row)) out.push_back({e.col, f.row, f.value * e.value});
    }
    return Operator(lhs.convention_, std::move(out));
}

Operator operator+(const Operator& lhs, const Operator& rhs) {
    require_same(lhs.convention_, rhs.convention_, "operator sum");
    std::vector<Operator::Entry> out = lhs.entries_;
    out.insert(out.end(), rhs.entries_.begin(), rhs.entries_.end());
    return Operator(lhs.convention_, std::move(out));
}

Operator operator-(const Operator& lhs, const Operator& rhs) { return lhs + Complex{-1.0} * rhs; }

Operator operator*(Complex scalar, const Operator& op) {
    std::vector<Operator::Entry> out = op.entries_;
    for (auto& e : out) e.value *= scalar;
    return Operator(op.convention_, std::move(out));
}

double max_abs_difference(const Operator& a, const Operator& b) {
    double worst = 0.0;
    for (const auto& e : (a - b).entries()) worst = std::max(worst, std::abs(e.value));
    return worst;
}

// ---------------------------------------------------------------------------
// Ket operations

Ket basis_ket(const BasisConvention& convention, std::string_view label) {
    return basis_ket(convention, convention.parse_label(label));
}

Ket basis_ket(const BasisConvention& convention, BasisIndex index) {
    return Ket(convention, {{index, Complex{1.0}}});
}

Ket superpose(std::span<const std::pair<Complex, Ket>> terms) {
    if (terms.empty()) throw InputError("superpose: no terms");
    const BasisConvention& convention = terms.front().second.convention();
    Ket::Amplitudes sum;
    for (const auto& [coefficient, ket] : terms) {
        require_same(convention, ket.convention(), "superpose");
        for (const auto& [index, amp] : ket.amplitudes()) sum[index] += coefficient * amp;
    }
    return Ket(convention, std::move(sum));
}

Ket superpose(std::initializer_list<std::pair<Complex, Ket>> terms) {
    return superpose(std::span<const std::pair<Complex, Ket>>(terms.begin(), terms.size()));
}

Ket scale(Complex factor, const Ket& ket) {
    Ket::Amplitudes out;
    for (const auto& [index, amp] : ket.amplitudes()) out.emplace(index, factor * amp);
    return Ket(ket.convention(), std::move(out));
}

Complex inner(const Ket& bra_side, const Ket& ket_side) {
    require_same(bra_side.convention(), ket_side.convention(), "inner");
    const auto& small = bra_side.support_size() <= ket_side.support_size() ? bra_side : ket_side;
    const auto& large = &small == &bra_side ? ket_side : bra_side;
    Complex sum{};
    for (const auto& [index, amp] : small.amplitudes()) {
        const Complex other = large.amplitude(index);
        if (other == Complex{}) continue;
        sum += &small == &bra_side ? std::conj(amp) * other : std::conj(other) * amp;
    }
    return sum;
}

Ket apply(const Operator& op, const Ket& state) {
    require_same(op.convention(), state.convention(), "apply");
    Ket::Amplitudes out;
    for (const auto& [col, amp] : state.amplitudes()) {
        for (const auto& e : op.column(col)) out[e.row] += e.value * amp;
    }
    return Ket(state.convention(), std::move(out));
}

Ket normalize(const Ket& state) {
    if (state.is_zero() || state.norm() == 0.0) throw DegenerateInputError("cannot normalize the zero vector");
    return scale(1.0 / state.norm(), state);
}

double fidelity(const Ket& a, const Ket& b) {
    if (a.is_zero() || b.is_zero()) throw DegenerateInputError("fidelity with the zero vector");
    return std::norm(inner(a, b)) / (a.norm() * a.norm() * b.norm() * b.norm());
}

bool approx_equal(const Ket& a, const Ket& b, double tolerance) {
    if (!(a.convention() == b.convention())) return false;
    Ket::Amplitudes diff = a.amplitudes();
    for (const auto& [index, amp] : b.amplitudes()) diff[index] -= amp;
    return std::all_of(diff.begin(), diff.end(),
                       [&](const auto& kv) { return std::abs(kv.second) <= tolerance; });
}

bool equal_up_to_phase(const Ket& a, const Ket& b, double tolerance) {
    if (!(a.convention() == b.convention())) return false;
    const Complex overlap = inner(a, b);
    if (std::abs(overlap) == 0.0) return approx_equal(a, b, tolerance);
    return approx_equal(scale(overlap / std::abs(overlap), a), b, tolerance);
}

// ---------------------------------------------------------------------------
// Observables

Operator path_projector(const BasisConvention& convention, int photon, Arm arm) {
    check_photon(convention, photon);
    Mat2 m{};
    m[arm == Arm::L ? 0 : 1][arm == Arm::L ? 0 : 1] = 1.0;
    return Operator::on_factor(convention, photon - 1, m);
}

Operator circular_sigma_z(const BasisConvention& convention, int photon) {
    check_photon(convention, photon);
    // |up><up| - |down><down| with |up/down> = (|H> +/- i|V>)/sqrt(2), in the {H, V} basis.
    const Mat2 m{{{Complex{0.0}, -kI}, {kI, Complex{0.0}}}};
    return Operator::on_factor(convention, convention.photons() + photon - 1, m);
}

Operator grin_observable(const BasisConvention& convention, int photon, Arm arm) {
    return circular_sigma_z(convention, photon) * path_projector(convention, photon, arm);
}

Operator parse_observable(const BasisConvention& convention, std::string_view descriptor) {
    if (descriptor == "identity" || descriptor == "I") return Operator::identity(convention);
    const auto parts = split(descriptor, ':');
    const auto kind = parts.front();
    if (kind == "sigma" && parts.size() == 2) {
        return circular_sigma_z(convention, parse_int(parts[1], "observable descriptor"));
    }
    if ((kind == "path" || kind == "grin") && parts.size() == 3) {
        const int photon = parse_int(parts[1], "observable descriptor");
        const Arm arm = parse_arm(parts[2]);
        return kind == "path" ? path_projector(convention, photon, arm)
                              : grin_observable(convention, photon, arm);
    }
    throw InputError("unknown observable descriptor '" + std::string(descriptor) +
                     "' (expected path:i:L|R, grin:i:L|R, sigma:i or identity)");
}

}  // namespace cheshire
