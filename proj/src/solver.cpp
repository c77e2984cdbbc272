#include "cheshire/solver.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "cheshire/dense.hpp"
#include "cheshire/errors.hpp"
#include "cheshire/weakval.hpp"

namespace cheshire {

namespace {

constexpr Complex kMinusI{0.0, -1.0};

struct Candidate {
    Eigen::VectorXcd m;  // conjugated post amplitudes
    std::size_t support;
};

// Pivot columns chosen left to right: a column is a pivot when it is not in
// the span of the pivots before it.
std::vector<Eigen::Index> lexicographic_pivots(const Eigen::MatrixXcd& a, Eigen::Index rank, double tolerance) {
    std::vector<Eigen::Index> pivots;
    Eigen::MatrixXcd basis(a.rows(), 0);
    for (Eigen::Index j = 0; j < a.cols() && static_cast<Eigen::Index>(pivots.size()) < rank; ++j) {
        Eigen::VectorXcd residual = a.col(j);
        for (int pass = 0; pass < 2; ++pass) {
            if (basis.cols() > 0) residual -= basis * (basis.adjoint() * residual);
        }
        const double length = residual.norm();
        if (length > tolerance) {
            basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
            basis.col(basis.cols() - 1) = residual / length;
            pivots.push_back(j);
        }
    }
    return pivots;
}

}  // namespace

ConstraintSystem assemble(const Ket& pre, const std::vector<WeakValueTarget>& targets) {
    if (pre.is_zero()) throw DegenerateInputError("pre-selected state is the zero vector");
    if (targets.empty()) throw InputError("no weak-value targets given");
    const auto& convention = pre.convention();
    const auto dim = static_cast<Eigen::Index>(to_dense(pre).size());

    Eigen::MatrixXcd matrix(static_cast<Eigen::Index>(targets.size()), dim);
    for (std::size_t r = 0; r < targets.size(); ++r) {
        const auto& t = targets[r];
        if (!(t.observable.convention() == convention)) {
            throw InputError("target " + t.descriptor + " lives on a different convention");
        }
        if (!t.observable.is_hermitian(1e-12)) throw InputError("target observable " + t.descriptor + " is not Hermitian");
        const Ket row = superpose({{1.0, apply(t.observable, pre)}, {-t.target, pre}});
        matrix.row(static_cast<Eigen::Index>(r)) = to_dense(row).transpose();
    }
    return {std::move(matrix), pre};
}

Ket solve_post(const ConstraintSystem& system) {
    const Eigen::MatrixXcd& a = system.matrix();
    const Eigen::VectorXcd pre = to_dense(system.pre());
    const Eigen::Index n = a.cols();

    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
    const Eigen::VectorXd& singular = svd.singularValues();
    const double largest = singular.size() > 0 ? singular(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index k = 0; k < singular.size(); ++k) {
        if (singular(k) > kRankCutoff * largest) ++rank;
    }
    if (n - rank == 0) throw InfeasibleTargetsError("weak-value constraints have only the trivial solution");

    const auto pivots = lexicographic_pivots(a, rank, kRankCutoff * largest);
    std::vector<bool> is_pivot(static_cast<std::size_t>(n), false);
    for (auto p : pivots) is_pivot[static_cast<std::size_t>(p)] = true;

    Eigen::MatrixXcd pivot_block(a.rows(), static_cast<Eigen::Index>(pivots.size()));
    for (std::size_t k = 0; k < pivots.size(); ++k) pivot_block.col(static_cast<Eigen::Index>(k)) = a.col(pivots[k]);
    std::optional<Eigen::ColPivHouseholderQR<Eigen::MatrixXcd>> qr;
    if (!pivots.empty()) qr.emplace(pivot_block);  // a zero system has no pivots
    const double a_norm = a.norm();

    std::optional<Candidate> best;
    bool any_null = false;
    for (Eigen::Index f = 0; f < n; ++f) {
        if (is_pivot[static_cast<std::size_t>(f)]) continue;
        Eigen::VectorXcd m = Eigen::VectorXcd::Zero(n);
        m(f) = 1.0;
        if (!pivots.empty()) {
            const Eigen::VectorXcd x = qr->solve(Eigen::VectorXcd(-a.col(f)));
            for (std::size_t k = 0; k < pivots.size(); ++k) m(pivots[k]) = x(static_cast<Eigen::Index>(k));
        }
        const double scale = m.cwiseAbs().maxCoeff();
        for (Eigen::Index k = 0; k < n; ++k) {
            if (std::abs(m(k)) <= 1e-12 * scale) m(k) = 0.0;
        }
        if ((a * m).norm() > 1e-10 * std::max(a_norm, 1.0) * m.norm()) continue;
        any_null = true;

        const Complex overlap = m.transpose() * pre;  // <post|pre> with post = conj(m)
        if (std::abs(overlap) <= kOverlapThreshold * m.norm() * pre.norm()) continue;

        const auto support = static_cast<std::size_t>((m.array() != Complex{}).count());
        if (!best || support < best->support) best = Candidate{m, support};
    }
    if (!any_null) throw InfeasibleTargetsError("weak-value constraints have only the trivial solution");
    if (!best) {
        throw VacuousSelectionError("every post-selected state allowed by the targets is orthogonal to the pre-state");
    }

    Eigen::VectorXcd post = best->m.conjugate();
    const auto first_term = static_cast<Eigen::Index>(system.pre().amplitudes().begin()->first);
    Complex factor{1.0};
    if (post(first_term) != Complex{}) {
        factor = kMinusI / post(first_term);
    } else {
        for (Eigen::Index k = 0; k < n; ++k) {
            if (post(k) != Complex{}) {
                factor = 1.0 / post(k);
                break;
            }
        }
    }
    post *= factor;
    return ket_from_dense(system.pre().convention(), post);
}

double verify(const Ket& pre, const Ket& post, const std::vector<WeakValueTarget>& targets) {
    const PrePostPair pair(pre, post);
    double worst = 0.0;
    for (const auto& t : targets) worst = std::max(worst, std::abs(weak_value(t.observable, pair) - t.target));
    return worst;
}

std::vector<WeakValueTarget> targets_from_pattern(const BasisConvention& convention, const ExpectedPattern& pattern) {
    std::vector<WeakValueTarget> targets;
    for (const auto& [key, value] : pattern) {
        targets.push_back({make_observable(convention, key), Complex{static_cast<double>(value)}, key.descriptor()});
    }
    return targets;
}

}  // namespace cheshire
