#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace vsl {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Violated precondition or broken internal contract (programming error,
// malformed call).
struct ContractViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed input file; message carries the field/line context.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical search did not reach its target (failed refinement, no kernel
// at the requested point, ...).
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested point is not an eigenvalue at the working tolerance.
struct NotAnEigenvalue : SolverError {
    using SolverError::SolverError;
};

// Target residue matrix rejected by the transform admissibility conditions;
// the message names the failed condition.
struct RejectedTarget : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Contour placement conflicts with the eigenvalue layout.
struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A linear solve hit an unexpectedly ill-conditioned matrix.
struct ConditioningError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double frobenius(const CMatrix& m) { return m.norm(); }

// Relative Hermiticity defect ||M - M*|| / (1 + ||M||).
inline double hermitian_defect(const CMatrix& m) {
    return (m - m.adjoint()).norm() / (1.0 + m.norm());
}

inline bool is_hermitian(const CMatrix& m, double tol = 1e-12) {
    return m.rows() == m.cols() && hermitian_defect(m) <= tol;
}

// (M + M*)/2; the nearest Hermitian matrix in Frobenius norm.
inline CMatrix hermitian_part(const CMatrix& m) {
    return 0.5 * (m + m.adjoint());
}

inline void require(bool cond, const std::string& what) {
    if (!cond) throw ContractViolation(what);
}

}  // namespace vsl
