#pragma once

#include <utility>
#include <vector>

#include "vsl/potential.hpp"
#include "vsl/types.hpp"

namespace vsl {

// Trajectory of the matrix initial value problem
//   -phi'' + V phi = lambda phi,  phi(0) = 0,  phi'(0) = I
// on the uniform grid x_i = i/steps, together with the running Gram
// S(x) = int_0^x phi* phi.  When requested, the lambda-derivative pair
// (phidot, dphidot) solves -phidot'' + V phidot = lambda phidot + phi with
// zero initial data.
struct MatrixSolution {
    Complex lambda{0.0, 0.0};
    int steps = 0;
    std::vector<CMatrix> phi, dphi;        // size steps+1
    std::vector<CMatrix> phidot, dphidot;  // empty unless requested
    std::vector<CMatrix> s;                // running Gram, size steps+1

    double x_at(int i) const { return double(i) / steps; }
    const CMatrix& phi1() const { return phi.back(); }
    const CMatrix& dphi1() const { return dphi.back(); }
    bool has_lambda_derivative() const { return !phidot.empty(); }
};

// Cross Gram T(x) = int_0^x phi_alpha*(t) phi(t, lambda) dt on the grid of
// the eigenvalue trajectory.
struct CrossGram {
    Complex lambda{0.0, 0.0};
    double lambda_alpha = 0;
    int steps = 0;
    std::vector<CMatrix> t;

    const CMatrix& t1() const { return t.back(); }
};

// Classical 4th-order fixed-step integration; steps must be even and >= 16
// so the Simpson accumulation of S shares the grid.  Complex lambda is
// allowed (used for contour work on the Weyl function).
MatrixSolution propagate(const Potential& v, Complex lambda, int steps,
                         bool with_lambda_derivative = false);

// (chi, chi')(x, lambda) for the terminal-condition solution chi(1) = 0,
// chi'(1) = I, computed through the reflection identity
// chi(x, lambda, V) = -phi(1-x, lambda, V reflected).
std::pair<CMatrix, CMatrix> chi_at(const Potential& v, Complex lambda,
                                   double x, int steps);

// Simpson accumulation of phi_alpha* phi on the shared grid; group_phi must
// be the trajectory at the eigenvalue lambda_alpha with matching steps.
CrossGram cross_gram(const Potential& v, Complex lambda,
                     const MatrixSolution& group_phi, int steps);

// ||phi_h(1) - phi_{h/2}(1)|| step-doubling estimate of the propagation
// error at the coarser step count.
double propagation_error_estimate(const Potential& v, Complex lambda,
                                  int steps);

// Max over grid nodes of the relative Wronskian defect
// ||phi* phi' - phi'* phi|| (zero in exact arithmetic for real lambda).
double wronskian_defect(const MatrixSolution& sol);

}  // namespace vsl
