#pragma once

// State vectors and operators on n photons, each carrying a path qubit
// (L=0, R=1) and a polarization qubit (H=0, V=1).
//
// Factor order is path_1 ... path_n, pol_1 ... pol_n. A basis index is the
// 2n-bit string read in that order, most significant bit first, so for n=2
// the label "0100" is |L1 R2 H1 H2> with index 4.

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cheshire {

using Complex = std::complex<double>;
using BasisIndex = std::uint64_t;

/// Amplitudes and matrix entries smaller than this are dropped after arithmetic.
inline constexpr double kPruneThreshold = 1e-14;
/// A ket is flagged normalized when its norm is within this of one.
inline constexpr double kNormTolerance = 1e-12;
/// 2n bits must fit a BasisIndex.
inline constexpr int kMaxPhotons = 31;

enum class Arm { L, R };
enum class Polarization { H, V };

char arm_letter(Arm arm);
Arm parse_arm(std::string_view text);

class BasisConvention {
public:
    explicit BasisConvention(int photons);

    int photons() const noexcept { return photons_; }
    int factors() const noexcept { return 2 * photons_; }
    BasisIndex dimension() const noexcept { return BasisIndex{1} << factors(); }

    /// Bit position (LSB = 0) of the path / polarization qubit of a 1-based photon.
    int path_bit(int photon) const;
    int pol_bit(int photon) const;

    /// Bit position of a 0-based factor in factor order.
    int factor_bit(int factor) const;

    std::string label(BasisIndex index) const;

    /// Accepts "0100", the compact alias "LRHH", or tokens "L1 R2 H1 H2".
    BasisIndex parse_label(std::string_view text) const;

    std::vector<std::string> factor_names() const;

    friend bool operator==(const BasisConvention&, const BasisConvention&) = default;

private:
    int photons_;
};

class Ket {
public:
    using Amplitudes = std::map<BasisIndex, Complex>;

    Ket(BasisConvention convention, Amplitudes amplitudes);

    const BasisConvention& convention() const noexcept { return convention_; }
    const Amplitudes& amplitudes() const noexcept { return amplitudes_; }
    Complex amplitude(BasisIndex index) const;

    double norm() const noexcept { return norm_; }
    bool normalized() const noexcept { return normalized_; }
    bool is_zero() const noexcept { return amplitudes_.empty(); }
    std::size_t support_size() const noexcept { return amplitudes_.size(); }

private:
    BasisConvention convention_;
    Amplitudes amplitudes_;
    double norm_ = 0.0;
    bool normalized_ = false;
};

using Mat2 = std::array<std::array<Complex, 2>, 2>;

class Operator {
public:
    struct Entry {
        BasisIndex col;
        BasisIndex row;
        Complex value;
    };

    /// Entries may arrive in any order; duplicates are summed and tiny values pruned.
    Operator(BasisConvention convention, std::vector<Entry> entries);

    static Operator identity(const BasisConvention& convention);
    static Operator zero(const BasisConvention& convention);

    /// `matrix` on the 0-based factor `factor`, identity on every other factor.
    static Operator on_factor(const BasisConvention& convention, int factor, const Mat2& matrix);

    const BasisConvention& convention() const noexcept { return convention_; }
    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::span<const Entry> column(BasisIndex col) const;
    Complex element(BasisIndex row, BasisIndex col) const;

    Operator adjoint() const;
    bool is_hermitian(double tolerance = 1e-12) const;

    friend Operator operator*(const Operator& lhs, const Operator& rhs);
    friend Operator operator+(const Operator& lhs, const Operator& rhs);
    friend Operator operator-(const Operator& lhs, const Operator& rhs);
    friend Operator operator*(Complex scalar, const Operator& op);

private:
    BasisConvention convention_;
    std::vector<Entry> entries_;  // sorted by (col, row)
};

/// Largest absolute entrywise difference between two operators.
double max_abs_difference(const Operator& a, const Operator& b);

Ket basis_ket(const BasisConvention& convention, std::string_view label);
Ket basis_ket(const BasisConvention& convention, BasisIndex index);

Ket superpose(std::span<const std::pair<Complex, Ket>> terms);
Ket superpose(std::initializer_list<std::pair<Complex, Ket>> terms);
Ket scale(Complex factor, const Ket& ket);

/// <bra_side|ket_side>, conjugate-linear in the first argument.
Complex inner(const Ket& bra_side, const Ket& ket_side);

Ket apply(const Operator& op, const Ket& state);

/// Unit-norm copy; the global phase is left alone.
Ket normalize(const Ket& state);

/// |<a|b>|^2 / (<a|a><b|b>).
double fidelity(const Ket& a, const Ket& b);

/// Entrywise comparison, global phase included.
bool approx_equal(const Ket& a, const Ket& b, double tolerance = 1e-12);

/// Comparison after removing the best global phase (scale is not removed).
bool equal_up_to_phase(const Ket& a, const Ket& b, double tolerance = 1e-12);

Operator path_projector(const BasisConvention& convention, int photon, Arm arm);
Operator circular_sigma_z(const BasisConvention& convention, int photon);
Operator grin_observable(const BasisConvention& convention, int photon, Arm arm);

/// Observable descriptors: "path:i:L", "grin:i:R", "sigma:i", "identity".
Operator parse_observable(const BasisConvention& convention, std::string_view descriptor);

}  // namespace cheshire
