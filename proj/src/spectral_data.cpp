#include "vsl/spectral_data.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <atomic>
#include <cmath>
#include <functional>
#include <sstream>
#include <thread>

namespace vsl {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

void attach_group_data(const Potential& v, EigenGroup& g,
                       const SolverOptions& opt) {
    require(g.k >= 1 && g.e.dim() == g.k,
            "attach_group_data: group lacks a kernel basis");
    const Index n = v.n();
    const MatrixSolution sol = propagate(v, g.lambda, opt.steps, true);

    g.s_alpha = hermitian_part(sol.s.back());
    const CMatrix e = g.e.columns();
    g.g_alpha = hermitian_part(e.adjoint() * g.s_alpha * e);

    // e* S e inherits positivity from S > 0; a singular value here means the
    // pipeline fed us an inconsistent kernel.
    Eigen::PartialPivLU<CMatrix> lu(g.g_alpha);
    const RVector gsv = singular_values(g.g_alpha);
    if (gsv(gsv.size() - 1) <= 1e-12 * std::max(gsv(0), 1.0))
        throw SolverError(
            "attach_group_data: compressed Gram e* S e is singular");
    g.b_alpha = hermitian_part(e * lu.solve(e.adjoint()).eval());
    g.d_alpha = hermitian_part(g.s_alpha.partialPivLu().inverse() - g.b_alpha);

    const CMatrix p = projector(g.e);
    g.z_alpha = sol.phidot.back() * p +
                sol.phi1() * (CMatrix::Identity(n, n) - p);

    // Kernel thresholds follow the solver's sv_tol so that a rank decision
    // made once stays consistent across the attached fields.
    g.f_alpha = subspace_complement(null_space(g.d_alpha, opt.sv_tol));
    g.e_sharp = null_space(sol.phi1().adjoint(), opt.sv_tol);
    g.attached = true;
}

void attach_all(const Potential& v, Spectrum& spectrum,
                const SolverOptions& opt) {
    std::vector<std::string> errors(spectrum.groups.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= spectrum.groups.size()) return;
            try {
                attach_group_data(v, spectrum.groups[i], opt);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    if (opt.jobs <= 1 || spectrum.groups.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const int nt = std::min<int>(opt.jobs, int(spectrum.groups.size()));
        for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (!e.empty()) throw SolverError("attach_all: " + e);
}

WeylSample weyl_m(const Potential& v, Complex lambda, int steps) {
    const auto [chi0, dchi0] = chi_at(v, lambda, 0.0, steps);
    const RVector sv = singular_values(chi0);
    if (sv(sv.size() - 1) <= 1e-10 * std::max(sv(0), 1.0)) {
        std::ostringstream os;
        os << "weyl_m: chi(0, lambda) is numerically singular at lambda = ("
           << lambda.real() << ", " << lambda.imag()
           << "); lambda is at or near a Dirichlet eigenvalue";
        throw SolverError(os.str());
    }
    WeylSample w;
    w.lambda = lambda;
    w.m = dchi0 * chi0.partialPivLu().inverse();
    return w;
}

CMatrix m_residue(const Potential& v, const EigenGroup& g, double radius,
                  int nodes, int steps,
                  const std::vector<double>& other_eigenvalues) {
    require(radius > 0, "m_residue: radius must be positive");
    require(nodes >= 32, "m_residue: need at least 32 contour nodes");
    for (double mu : other_eigenvalues) {
        if (std::abs(mu - g.lambda) < 1e-9) continue;  // the group itself
        if (std::abs(mu - g.lambda) <= radius + 1e-6) {
            std::ostringstream os;
            os << "m_residue: contour of radius " << radius << " around "
               << g.lambda << " intersects the exclusion zone of eigenvalue "
               << mu;
            throw GeometryError(os.str());
        }
    }
    const Index n = v.n();
    CMatrix acc = CMatrix::Zero(n, n);
    for (int j = 0; j < nodes; ++j) {
        const double theta = 2.0 * kPi * j / nodes;
        const Complex offset = radius * Complex(std::cos(theta), std::sin(theta));
        const WeylSample w = weyl_m(v, g.lambda + offset, steps);
        // (1/2*pi*i) * integral m dlambda on the circle reduces to the mean
        // of m(lambda_j) * (lambda_j - lambda_alpha) over the nodes.
        acc += w.m * offset;
    }
    return acc / double(nodes);
}

}  // namespace vsl
