#include "cheshire/dense.hpp"

#include "cheshire/errors.hpp"

namespace cheshire {

namespace {

Eigen::Index checked_dimension(const BasisConvention& convention) {
    if (convention.dimension() > kMaxDenseDimension) {
        throw InputError("dimension " + std::to_string(convention.dimension()) +
                         " too large for a dense representation");
    }
    return static_cast<Eigen::Index>(convention.dimension());
}

}  // namespace

Eigen::VectorXcd to_dense(const Ket& ket) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(checked_dimension(ket.convention()));
    for (const auto& [index, amp] : ket.amplitudes()) out(static_cast<Eigen::Index>(index)) = amp;
    return out;
}

Eigen::MatrixXcd to_dense(const Operator& op) {
    const auto dim = checked_dimension(op.convention());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& e : op.entries()) {
        out(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) = e.value;
    }
    return out;
}

Ket ket_from_dense(const BasisConvention& convention, const Eigen::VectorXcd& amplitudes) {
    if (amplitudes.size() != checked_dimension(convention)) throw InputError("dense ket has wrong size");
    Ket::Amplitudes out;
    for (Eigen::Index k = 0; k < amplitudes.size(); ++k) {
        if (amplitudes(k) != Complex{}) out.emplace(static_cast<BasisIndex>(k), amplitudes(k));
    }
    return Ket(convention, std::move(out));
}

Operator operator_from_dense(const BasisConvention& convention, const Eigen::MatrixXcd& matrix) {
    const auto dim = checked_dimension(convention);
    if (matrix.rows() != dim || matrix.cols() != dim) throw InputError("dense operator has wrong shape");
    std::vector<Operator::Entry> entries;
    for (Eigen::Index c = 0; c < dim; ++c) {
        for (Eigen::Index r = 0; r < dim; ++r) {
            if (matrix(r, c) != Complex{}) {
                entries.push_back({static_cast<BasisIndex>(c), static_cast<BasisIndex>(r), matrix(r, c)});
            }
        }
    }
    return Operator(convention, std::move(entries));
}

}  // namespace cheshire
