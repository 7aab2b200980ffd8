#pragma once

#include <string>
#include <vector>

#include "vsl/propagator.hpp"
#include "vsl/spectrum.hpp"

namespace vsl {

// One isospectral move: replace the residue matrix of the alpha-th
// eigenvalue group with B, leaving every other group's data fixed.
struct TransformSpec {
    int alpha_index = 1;  // 1-based position in the ordered spectrum
    CMatrix b;            // target residue matrix, Hermitian PSD, rank k_alpha
};

struct TargetDiagnostics {
    bool hermitian_ok = false;
    bool psd_ok = false;
    bool rank_ok = false;
    bool transversal_ok = false;
    double min_eigenvalue = 0;    // of B, scaled by ||B||
    int rank = 0;                 // numerical rank of B
    double smallest_kept_sv = 0;  // margin of the rank decision
    double transversal_angle = 0; // smallest principal angle E^(B) vs F_alpha
    std::string failure;          // empty when all conditions hold

    bool passed() const {
        return hermitian_ok && psd_ok && rank_ok && transversal_ok;
    }
};

// Residue matrix B = e g^{-1} e* encoding the pair (subspace, norming
// operator); E^(B) recovers the subspace and B restricted to it is g^{-1}.
CMatrix target_from_pair(const SubspaceBasis& e, const CMatrix& g);

// Eigenspace of a prospective target: the orthogonal complement of Ker B.
SubspaceBasis target_eigenspace(const CMatrix& b, double tol = 1e-8);

// Check the admissibility of the target against the attached group:
// B = B* >= 0, rank B = k_alpha, and E^(B) transversal to the forbidden
// subspace.  Near-degenerate rank (smallest kept singular value under
// 1e-6 of the largest) is rejected: it destroys the conditioning of K.
TargetDiagnostics validate_target(const TransformSpec& spec,
                                  const EigenGroup& group);

// Build the transformed potential as a darboux-kind Potential whose
// evaluation uses the derivative-free closed form.  Throws RejectedTarget
// when validate_target fails.
Potential build_transform(const Potential& v, const TransformSpec& spec,
                          const EigenGroup& group, int grid_steps = 4096);

// Closed-form solution under the transformed potential,
//   phi~ = phi - phi_alpha K T,   S~ = S - T* K T,
// assembled from base-potential propagation only (no integration against
// the transformed potential).  steps must match the transform's cache grid.
MatrixSolution transformed_phi(const Potential& transform, Complex lambda,
                               int steps);

// Apply the moves in order; each stage is validated against the spectral
// data of the previous stage's potential.  lambda_max must cover the
// largest alpha_index referenced.
Potential compose(const Potential& v, const std::vector<TransformSpec>& specs,
                  double lambda_max, const SolverOptions& opt = {});

}  // namespace vsl
