#pragma once

// Dense Eigen views of kets and operators, for the small systems where a
// factorization is needed (solver, pointer simulation, tests).

#include <Eigen/Dense>

#include "cheshire/hilbert.hpp"

namespace cheshire {

/// Refuse to densify spaces larger than this (4^6).
inline constexpr BasisIndex kMaxDenseDimension = 4096;

Eigen::VectorXcd to_dense(const Ket& ket);
Eigen::MatrixXcd to_dense(const Operator& op);

Ket ket_from_dense(const BasisConvention& convention, const Eigen::VectorXcd& amplitudes);
Operator operator_from_dense(const BasisConvention& convention, const Eigen::MatrixXcd& matrix);

}  // namespace cheshire
