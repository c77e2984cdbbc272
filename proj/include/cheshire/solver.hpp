#pragma once

// Post-selection synthesis: find |post> such that the weak values of a list of
// observables between |pre> and |post> hit prescribed targets.
//
// Each target (O, w) is multiplied out into <post|(O - w)|pre> = 0, which is
// linear in the conjugated post amplitudes m_k = conj(<k|post>):
//
//     sum_k m_k <k|(O - w)|pre> = 0.
//
// The denominator <post|pre> != 0 is re-imposed when picking a nullspace vector.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cheshire/hilbert.hpp"
#include "cheshire/scenarios.hpp"

namespace cheshire {

struct WeakValueTarget {
    Operator observable;
    Complex target;
    /// Free-form label used in reports ("path:1:L", ...).
    std::string descriptor;
};

/// Singular values below this fraction of the largest count as zero.
inline constexpr double kRankCutoff = 1e-10;

class ConstraintSystem {
public:
    ConstraintSystem(Eigen::MatrixXcd matrix, Ket pre) : matrix_(std::move(matrix)), pre_(std::move(pre)) {}

    /// One row per target, one column per basis index; acts on conj(post amplitudes).
    const Eigen::MatrixXcd& matrix() const noexcept { return matrix_; }
    const Ket& pre() const noexcept { return pre_; }

private:
    Eigen::MatrixXcd matrix_;
    Ket pre_;
};

ConstraintSystem assemble(const Ket& pre, const std::vector<WeakValueTarget>& targets);

/// Returns an unnormalized post-selected state from the constraint nullspace:
/// nonzero overlap with the pre-state, fewest nonzero amplitudes among the
/// pivot-derived nullspace basis, and amplitude exactly -i on the pre-state's
/// lowest-index term when that amplitude is nonzero.
Ket solve_post(const ConstraintSystem& system);

/// max over targets of |weak value - target|.
double verify(const Ket& pre, const Ket& post, const std::vector<WeakValueTarget>& targets);

/// One target per pattern entry, observables built from the pattern keys.
std::vector<WeakValueTarget> targets_from_pattern(const BasisConvention& convention, const ExpectedPattern& pattern);

}  // namespace cheshire
