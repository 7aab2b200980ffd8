#pragma once

#include <vector>

#include "vsl/propagator.hpp"
#include "vsl/spectrum.hpp"

namespace vsl {

// One sample of the Weyl-Titchmarsh function m(lambda) = (chi' chi^{-1})(0).
struct WeylSample {
    Complex lambda{0.0, 0.0};
    CMatrix m;
};

// Fill the per-group data: S, g, B, D, Z, the forbidden subspace F
// (complement of Ker D) and the adjoint kernel Ker phi*(1).  The group must
// carry a refined lambda and its kernel basis.
void attach_group_data(const Potential& v, EigenGroup& g,
                       const SolverOptions& opt = {});

// Attach every group; independent across groups (opt.jobs workers).
void attach_all(const Potential& v, Spectrum& spectrum,
                const SolverOptions& opt = {});

// m(lambda); throws SolverError near a pole (chi(0, lambda) singular).
WeylSample weyl_m(const Potential& v, Complex lambda, int steps);

// Trapezoid contour quadrature of m over |lambda - lambda_alpha| = radius,
// divided by 2 pi i.  The residue restricted to E_alpha equals -g_alpha^{-1}
// and vanishes on the orthogonal complement.  `other_eigenvalues` guards the
// contour geometry: the circle must stay clear of every other eigenvalue.
CMatrix m_residue(const Potential& v, const EigenGroup& g, double radius,
                  int nodes, int steps,
                  const std::vector<double>& other_eigenvalues = {});

}  // namespace vsl
