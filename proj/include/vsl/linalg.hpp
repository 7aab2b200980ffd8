#pragma once

#include <utility>
#include <vector>

#include "vsl/types.hpp"

namespace vsl {

// Orthonormal column frame spanning a subspace of C^N.  dim == 0 (no
// columns) is the zero subspace; dim == N the full space.
class SubspaceBasis {
public:
    SubspaceBasis() = default;

    // Columns must already be orthonormal (Gram within 1e-10 of identity).
    explicit SubspaceBasis(CMatrix columns);

    static SubspaceBasis zero(Index ambient);
    static SubspaceBasis full(Index ambient);

    // Orthonormal basis of the column span of `spanning`; rank decided at
    // sv <= tol * max(sv_max, 1).
    static SubspaceBasis span_of(const CMatrix& spanning, double tol = 1e-10);

    Index ambient_dim() const { return columns_.rows(); }
    Index dim() const { return columns_.cols(); }
    const CMatrix& columns() const { return columns_; }

private:
    CMatrix columns_;  // ambient x dim, orthonormal
};

// Eigenvalues (ascending) and orthonormal eigenvector columns of a
// Hermitian matrix.  Throws ContractViolation on non-square or
// non-Hermitian input.
std::pair<RVector, CMatrix> hermitian_eig(const CMatrix& m);

// Singular values, descending.
RVector singular_values(const CMatrix& m);

// Orthonormal basis of {h : ||M h|| <= tol * max(sv_max, 1) * ||h||}.
// The sv_max floor of 1 keeps the threshold meaningful for near-zero M.
SubspaceBasis null_space(const CMatrix& m, double tol);

// Orthogonal projector E E* onto the subspace.
CMatrix projector(const SubspaceBasis& e);

// Orthogonal complement within the ambient space.
SubspaceBasis subspace_complement(const SubspaceBasis& e);

// Orthonormal basis of M(span e); directions with singular value below
// 1e-10 * ||M|| are treated as killed.
SubspaceBasis subspace_image(const CMatrix& m, const SubspaceBasis& e);

// Number of principal angles between the subspaces with cos > 1 - tol,
// i.e. the dimension of the (numerical) intersection.
int intersection_dim(const SubspaceBasis& a, const SubspaceBasis& b,
                     double tol = 1e-6);

// Largest principal angle between two subspaces of equal dimension
// (radians); 0 iff the spans coincide.  Returns pi/2 if dimensions differ.
double max_principal_angle(const SubspaceBasis& a, const SubspaceBasis& b);

}  // namespace vsl
