#pragma once

#include <string>
#include <vector>

#include "vsl/linalg.hpp"
#include "vsl/potential.hpp"
#include "vsl/types.hpp"

namespace vsl {

struct SolverOptions {
    int steps = 4096;          // propagation steps (even)
    int mesh = 256;            // coarse finite-difference mesh
    double sv_tol = 1e-6;      // relative kernel threshold on phi(1, lambda)
    double cluster_tol = 1e-6; // relative gap merging eigenvalue guesses
    int jobs = 1;              // parallel refinements / attachments
};

// One eigenvalue with its multiplicity and eigenspace data.  The fields
// after `e` are filled by attach_group_data (spectral-data module).
struct EigenGroup {
    double lambda = 0;
    int k = 0;
    SubspaceBasis e;  // kernel of phi(1, lambda)

    CMatrix s_alpha;   // S(1, lambda), N x N Hermitian positive definite
    CMatrix g_alpha;   // e* S e, k x k in the stored basis
    CMatrix b_alpha;   // e (e* S e)^{-1} e*, the residue matrix
    CMatrix d_alpha;   // S^{-1} - B
    CMatrix z_alpha;   // phidot(1) P + phi(1) (I - P)
    SubspaceBasis f_alpha;  // forbidden subspace: complement of Ker D
    SubspaceBasis e_sharp;  // Ker phi*(1, lambda)
    bool attached = false;
};

struct SpectrumDiagnostics {
    int steps = 0;
    int mesh = 0;
    double sv_tol = 0;
    double cluster_tol = 0;
    int weyl_count = 0;     // sum of multiplicities found
    int weyl_expected = 0;  // N * (free counting function at the cutoff)
    std::vector<std::string> notes;
};

struct Spectrum {
    std::vector<EigenGroup> groups;  // strictly increasing lambda
    double lambda_max = 0;
    SpectrumDiagnostics diagnostics;
};

// Eigenvalues of the symmetric block-tridiagonal Dirichlet discretization,
// ascending, up to lambda_max * 1.2 (margin keeps the last group intact).
// Clustered guesses are preserved as-is.
std::vector<double> coarse_spectrum(const Potential& v, double lambda_max,
                                    int mesh);

// Locate the local minimizer of sigma_min(phi(1, lambda)) near the guess:
// coarse scan, golden-section, then parabolic polish.  Throws
// NotAnEigenvalue when no minimum below threshold exists in the bracket.
double refine_eigenvalue(const Potential& v, double guess,
                         const SolverOptions& opt = {},
                         double bracket_radius = 0.8);

// Multiplicity = number of singular values of phi(1, lambda) below
// sv_tol * max(sv_max, 1); kernel basis at the same threshold.
std::pair<int, SubspaceBasis> multiplicity_and_kernel(
    const Potential& v, double lambda, const SolverOptions& opt = {});

// Full pipeline: coarse guesses -> cluster -> refine -> merge duplicates ->
// multiplicity from kernel.  Throws SolverError listing failed clusters.
Spectrum compute_spectrum(const Potential& v, double lambda_max,
                          const SolverOptions& opt = {});

}  // namespace vsl
