#include "vsl/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace vsl {

SubspaceBasis::SubspaceBasis(CMatrix columns) : columns_(std::move(columns)) {
    require(columns_.cols() <= columns_.rows(),
            "SubspaceBasis: more vectors than ambient dimension");
    if (columns_.cols() > 0) {
        const CMatrix gram = columns_.adjoint() * columns_;
        const double defect =
            (gram - CMatrix::Identity(gram.rows(), gram.cols())).norm();
        require(defect <= 1e-10 * std::sqrt(double(gram.rows())) + 1e-10,
                "SubspaceBasis: columns are not orthonormal");
    }
}

SubspaceBasis SubspaceBasis::zero(Index ambient) {
    SubspaceBasis b;
    b.columns_ = CMatrix::Zero(ambient, 0);
    return b;
}

SubspaceBasis SubspaceBasis::full(Index ambient) {
    SubspaceBasis b;
    b.columns_ = CMatrix::Identity(ambient, ambient);
    return b;
}

SubspaceBasis SubspaceBasis::span_of(const CMatrix& spanning, double tol) {
    if (spanning.cols() == 0) return zero(spanning.rows());
    Eigen::JacobiSVD<CMatrix> svd(spanning, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    const double thr = tol * std::max(sv.size() > 0 ? sv(0) : 0.0, 1.0);
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > thr) ++rank;
    SubspaceBasis b;
    b.columns_ = svd.matrixU().leftCols(rank);
    return b;
}

std::pair<RVector, CMatrix> hermitian_eig(const CMatrix& m) {
    require(m.rows() == m.cols(), "hermitian_eig: matrix is not square");
    require(is_hermitian(m), "hermitian_eig: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m));
    require(es.info() == Eigen::Success, "hermitian_eig: solver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

RVector singular_values(const CMatrix& m) {
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues();
}

SubspaceBasis null_space(const CMatrix& m, double tol) {
    require(tol > 0, "null_space: tol must be positive");
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double sv_max = sv.size() > 0 ? sv(0) : 0.0;
    const double thr = tol * std::max(sv_max, 1.0);
    Index kept = 0;  // count of singular directions at or below threshold
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) <= thr) ++kept;
    // Right singular vectors are ordered by descending sv; the kernel ones
    // are at the tail.  Columns of V beyond sv.size() (wide matrices) span
    // directions with exact zero.
    const Index extra = m.cols() - sv.size();
    SubspaceBasis b;
    CMatrix cols = svd.matrixV().rightCols(kept + extra);
    return SubspaceBasis(std::move(cols));
}

CMatrix projector(const SubspaceBasis& e) {
    return e.columns() * e.columns().adjoint();
}

SubspaceBasis subspace_complement(const SubspaceBasis& e) {
    const Index n = e.ambient_dim();
    if (e.dim() == 0) return SubspaceBasis::full(n);
    Eigen::JacobiSVD<CMatrix> svd(e.columns(), Eigen::ComputeFullU);
    return SubspaceBasis(CMatrix(svd.matrixU().rightCols(n - e.dim())));
}

SubspaceBasis subspace_image(const CMatrix& m, const SubspaceBasis& e) {
    require(m.rows() == m.cols(), "subspace_image: matrix is not square");
    require(m.rows() == e.ambient_dim(),
            "subspace_image: ambient dimension mismatch");
    if (e.dim() == 0) return SubspaceBasis::zero(e.ambient_dim());
    const CMatrix image = m * e.columns();
    Eigen::JacobiSVD<CMatrix> svd(image, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    const double thr = 1e-10 * singular_values(m)(0);
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > thr) ++rank;
    return SubspaceBasis(CMatrix(svd.matrixU().leftCols(rank)));
}

int intersection_dim(const SubspaceBasis& a, const SubspaceBasis& b,
                     double tol) {
    require(a.ambient_dim() == b.ambient_dim(),
            "intersection_dim: ambient dimension mismatch");
    if (a.dim() == 0 || b.dim() == 0) return 0;
    const RVector cos = singular_values(a.columns().adjoint() * b.columns());
    int dim = 0;
    for (Index i = 0; i < cos.size(); ++i)
        if (cos(i) > 1.0 - tol) ++dim;
    return dim;
}

double max_principal_angle(const SubspaceBasis& a, const SubspaceBasis& b) {
    require(a.ambient_dim() == b.ambient_dim(),
            "max_principal_angle: ambient dimension mismatch");
    if (a.dim() != b.dim()) return std::asin(1.0);
    if (a.dim() == 0) return 0.0;
    const RVector cos = singular_values(a.columns().adjoint() * b.columns());
    const double c = std::clamp(cos(cos.size() - 1), -1.0, 1.0);
    return std::acos(c);
}

}  // namespace vsl
