#include "vsl/propagator.hpp"

#include <algorithm>
#include <cmath>

namespace vsl {

namespace {

// One RK4 trajectory over [0, x_end] with the given number of (even) steps.
// State: phi, dphi and optionally phidot, dphidot.
struct State {
    CMatrix p, dp, pd, dpd;
};

State axpy(const State& y, double c, const State& k, bool with_dot) {
    State r;
    r.p = y.p + c * k.p;
    r.dp = y.dp + c * k.dp;
    if (with_dot) {
        r.pd = y.pd + c * k.pd;
        r.dpd = y.dpd + c * k.dpd;
    }
    return r;
}

MatrixSolution integrate(const Potential& v, Complex lambda, double x_end,
                         int steps, bool with_dot) {
    const Index n = v.n();
    const CMatrix id = CMatrix::Identity(n, n);
    const CMatrix zero = CMatrix::Zero(n, n);
    const double h = x_end / steps;

    MatrixSolution sol;
    sol.lambda = lambda;
    sol.steps = steps;
    sol.phi.reserve(steps + 1);
    sol.dphi.reserve(steps + 1);
    if (with_dot) {
        sol.phidot.reserve(steps + 1);
        sol.dphidot.reserve(steps + 1);
    }

    State y{zero, id, zero, zero};
    sol.phi.push_back(y.p);
    sol.dphi.push_back(y.dp);
    if (with_dot) {
        sol.phidot.push_back(y.pd);
        sol.dphidot.push_back(y.dpd);
    }

    auto deriv = [&](double x, const State& s) {
        State d;
        const CMatrix w = v.eval(x) - lambda * id;
        d.p = s.dp;
        d.dp = w * s.p;
        if (with_dot) {
            d.pd = s.dpd;
            d.dpd = w * s.pd - s.p;
        }
        return d;
    };

    for (int i = 0; i < steps; ++i) {
        const double x = i * h;
        const State k1 = deriv(x, y);
        const State k2 = deriv(x + h / 2, axpy(y, h / 2, k1, with_dot));
        const State k3 = deriv(x + h / 2, axpy(y, h / 2, k2, with_dot));
        const State k4 = deriv(x + h, axpy(y, h, k3, with_dot));
        y.p = y.p + (h / 6) * (k1.p + 2 * k2.p + 2 * k3.p + k4.p);
        y.dp = y.dp + (h / 6) * (k1.dp + 2 * k2.dp + 2 * k3.dp + k4.dp);
        if (with_dot) {
            y.pd = y.pd + (h / 6) * (k1.pd + 2 * k2.pd + 2 * k3.pd + k4.pd);
            y.dpd = y.dpd + (h / 6) * (k1.dpd + 2 * k2.dpd + 2 * k3.dpd + k4.dpd);
        }
        sol.phi.push_back(y.p);
        sol.dphi.push_back(y.dp);
        if (with_dot) {
            sol.phidot.push_back(y.pd);
            sol.dphidot.push_back(y.dpd);
        }
    }
    return sol;
}

// Composite Simpson over node values f_i with spacing h: exact pair rule at
// even nodes, the 5/8/-1 half rule at odd nodes (same order, applied once).
std::vector<CMatrix> simpson_running(const std::vector<CMatrix>& f, double h) {
    const int steps = int(f.size()) - 1;
    const Index n = f[0].rows();
    std::vector<CMatrix> acc(steps + 1, CMatrix::Zero(n, n));
    for (int j = 0; j + 2 <= steps; j += 2) {
        acc[j + 2] = acc[j] + (h / 3) * (f[j] + 4 * f[j + 1] + f[j + 2]);
        acc[j + 1] = acc[j] + (h / 12) * (5 * f[j] + 8 * f[j + 1] - f[j + 2]);
    }
    return acc;
}

void check_steps(int steps) {
    require(steps >= 16 && steps % 2 == 0,
            "propagate: steps must be even and >= 16");
}

}  // namespace

MatrixSolution propagate(const Potential& v, Complex lambda, int steps,
                         bool with_lambda_derivative) {
    check_steps(steps);
    MatrixSolution sol = integrate(v, lambda, 1.0, steps, with_lambda_derivative);
    std::vector<CMatrix> f(steps + 1);
    for (int i = 0; i <= steps; ++i) f[i] = sol.phi[i].adjoint() * sol.phi[i];
    sol.s = simpson_running(f, 1.0 / steps);
    return sol;
}

std::pair<CMatrix, CMatrix> chi_at(const Potential& v, Complex lambda,
                                   double x, int steps) {
    require(x >= 0.0 && x <= 1.0, "chi_at: x outside [0,1]");
    check_steps(steps);
    const Index n = v.n();
    const double span = 1.0 - x;
    if (span <= 0.0)
        return {CMatrix::Zero(n, n), CMatrix::Identity(n, n)};
    // Integrate the reflected problem over [0, 1-x] at the nominal density.
    int sub = std::max(16, 2 * int(std::ceil(steps * span / 2.0)));
    MatrixSolution sol = integrate(reflect(v), lambda, span, sub, false);
    return {-sol.phi.back(), sol.dphi.back()};
}

CrossGram cross_gram(const Potential& v, Complex lambda,
                     const MatrixSolution& group_phi, int steps) {
    require(steps == group_phi.steps,
            "cross_gram: grid mismatch with the eigenvalue trajectory");
    check_steps(steps);
    MatrixSolution sol = integrate(v, lambda, 1.0, steps, false);
    std::vector<CMatrix> f(steps + 1);
    for (int i = 0; i <= steps; ++i)
        f[i] = group_phi.phi[i].adjoint() * sol.phi[i];
    CrossGram cg;
    cg.lambda = lambda;
    cg.lambda_alpha = group_phi.lambda.real();
    cg.steps = steps;
    cg.t = simpson_running(f, 1.0 / steps);
    return cg;
}

double propagation_error_estimate(const Potential& v, Complex lambda,
                                  int steps) {
    check_steps(steps);
    const CMatrix coarse = integrate(v, lambda, 1.0, steps, false).phi.back();
    const CMatrix fine = integrate(v, lambda, 1.0, 2 * steps, false).phi.back();
    return (coarse - fine).norm();
}

double wronskian_defect(const MatrixSolution& sol) {
    double worst = 0.0;
    double scale = 0.0;
    for (size_t i = 0; i < sol.phi.size(); ++i) {
        const CMatrix w = sol.phi[i].adjoint() * sol.dphi[i] -
                          sol.dphi[i].adjoint() * sol.phi[i];
        worst = std::max(worst, w.norm());
        scale = std::max(scale,
                         std::max(sol.phi[i].norm(), sol.dphi[i].norm()));
    }
    return worst / std::max(scale * scale, 1e-300);
}

}  // namespace vsl
