#include "vsl/darboux.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

#include "vsl/spectral_data.hpp"

namespace vsl {

namespace {

// The cached eigenvalue frame as a trajectory, for the cross-Gram grid.
MatrixSolution group_trajectory(const DarbouxData& d) {
    MatrixSolution sol;
    sol.lambda = d.lambda_alpha;
    sol.steps = d.steps();
    sol.phi = d.phi;
    sol.dphi = d.dphi;
    sol.s = d.s;
    return sol;
}

}  // namespace

CMatrix target_from_pair(const SubspaceBasis& e, const CMatrix& g) {
    require(g.rows() == g.cols() && g.rows() == e.dim(),
            "target_from_pair: g must act on the subspace");
    require(is_hermitian(g, 1e-10), "target_from_pair: g is not Hermitian");
    if (e.dim() == 0) return CMatrix::Zero(e.ambient_dim(), e.ambient_dim());
    const auto [eig, vecs] = hermitian_eig(g);
    if (eig(0) <= 1e-12 * std::max(eig(eig.size() - 1), 1.0))
        throw RejectedTarget(
            "target_from_pair: norming operator is not positive definite");
    return hermitian_part(e.columns() * g.partialPivLu().inverse() *
                          e.columns().adjoint());
}

SubspaceBasis target_eigenspace(const CMatrix& b, double tol) {
    return subspace_complement(null_space(b, tol));
}

TargetDiagnostics validate_target(const TransformSpec& spec,
                                  const EigenGroup& group) {
    require(group.attached, "validate_target: group data not attached");
    TargetDiagnostics d;
    const CMatrix& b = spec.b;
    if (b.rows() != b.cols() || b.rows() != group.e.ambient_dim()) {
        d.failure = "target matrix has the wrong shape";
        return d;
    }
    d.hermitian_ok = is_hermitian(b, 1e-10);
    if (!d.hermitian_ok) {
        d.failure = "target matrix is not Hermitian";
        return d;
    }

    const auto [eig, vecs] = hermitian_eig(b);
    const double scale = std::max(eig.cwiseAbs().maxCoeff(), 1e-300);
    d.min_eigenvalue = eig(0);
    d.psd_ok = eig(0) >= -1e-10 * scale;

    const RVector sv = singular_values(b);
    const double sv_max = sv(0);
    int rank = 0;
    double smallest_kept = 0;
    for (Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > 1e-8 * sv_max) {
            ++rank;
            smallest_kept = sv(i);
        }
    }
    d.rank = rank;
    d.smallest_kept_sv = smallest_kept / sv_max;
    d.rank_ok = (rank == group.k) && (d.smallest_kept_sv >= 1e-6);

    const SubspaceBasis eb = target_eigenspace(b);
    const int overlap = intersection_dim(eb, group.f_alpha);
    d.transversal_ok = (overlap == 0) && (eb.dim() == group.k);
    if (eb.dim() > 0 && group.f_alpha.dim() > 0) {
        const RVector cos =
            singular_values(eb.columns().adjoint() * group.f_alpha.columns());
        d.transversal_angle = std::acos(std::clamp(cos(0), -1.0, 1.0));
    } else {
        d.transversal_angle = std::asin(1.0);
    }

    if (!d.psd_ok)
        d.failure = "condition B >= 0 failed (min eigenvalue " +
                    std::to_string(eig(0)) + ")";
    else if (!d.rank_ok && rank != group.k)
        d.failure = "condition rank B = k_alpha failed (rank " +
                    std::to_string(rank) + ", k_alpha " +
                    std::to_string(group.k) + ")";
    else if (!d.rank_ok)
        d.failure =
            "condition rank B = k_alpha holds only marginally (smallest kept "
            "singular value " +
            std::to_string(d.smallest_kept_sv) + " of the largest)";
    else if (!d.transversal_ok)
        d.failure =
            "condition E^(B) transversal to F_alpha failed (intersection "
            "dimension " +
            std::to_string(overlap) + ")";
    return d;
}

Potential build_transform(const Potential& v, const TransformSpec& spec,
                          const EigenGroup& group, int grid_steps) {
    require(grid_steps >= 16 && grid_steps % 2 == 0,
            "build_transform: grid_steps must be even and >= 16");
    const TargetDiagnostics diag = validate_target(spec, group);
    if (!diag.passed())
        throw RejectedTarget("build_transform: " + diag.failure);

    const Index n = v.n();
    const CMatrix id = CMatrix::Identity(n, n);
    const MatrixSolution sol = propagate(v, group.lambda, grid_steps);

    DarbouxData data;
    data.lambda_alpha = group.lambda;
    data.alpha_index = spec.alpha_index;
    data.b_target = hermitian_part(spec.b);
    data.b_alpha = group.b_alpha;
    data.a = hermitian_part(spec.b - group.b_alpha);

    const int m = grid_steps;
    data.phi = sol.phi;
    data.dphi = sol.dphi;
    data.s.resize(m + 1);
    data.ddphi.resize(m + 1);
    data.k.resize(m + 1);
    double herm_worst = 0, cond_worst = 0;
    for (int i = 0; i <= m; ++i) {
        data.s[i] = hermitian_part(sol.s[i]);
        data.ddphi[i] =
            (v.eval(double(i) / m) - group.lambda * id) * sol.phi[i];
        const CMatrix mtx = id + data.s[i] * data.a;
        const RVector sv = singular_values(mtx);
        const double cond = sv(0) / std::max(sv(sv.size() - 1), 1e-300);
        cond_worst = std::max(cond_worst, cond);
        if (cond > 1e12) {
            std::ostringstream os;
            os << "build_transform: I + S(x)A ill-conditioned at x = "
               << double(i) / m << " (cond " << cond << ")";
            throw ConditioningError(os.str());
        }
        const CMatrix k = data.a * mtx.partialPivLu().inverse();
        herm_worst = std::max(herm_worst, (k - k.adjoint()).norm());
        data.k[i] = hermitian_part(k);
    }
    data.k_hermitian_residual = herm_worst;
    data.max_condition = cond_worst;
    data.k_boundary_norm =
        (data.phi.back() * data.k.back() * data.phi.back().adjoint()).norm();

    return Potential::darboux(v, std::move(data));
}

MatrixSolution transformed_phi(const Potential& transform, Complex lambda,
                               int steps) {
    const DarbouxData* d = transform.darboux_data();
    require(d != nullptr, "transformed_phi: potential is not a transform");
    require(steps == d->steps(),
            "transformed_phi: steps must match the transform cache grid");
    const Potential& base = *transform.base();

    MatrixSolution sol = propagate(base, lambda, steps);
    const CrossGram cg = cross_gram(base, lambda, group_trajectory(*d), steps);
    MatrixSolution out;
    out.lambda = lambda;
    out.steps = steps;
    out.phi.resize(steps + 1);
    out.dphi.resize(steps + 1);
    out.s.resize(steps + 1);
    for (int i = 0; i <= steps; ++i) {
        const CMatrix kt = d->k[i] * cg.t[i];
        out.phi[i] = sol.phi[i] - d->phi[i] * kt;
        out.dphi[i] = sol.dphi[i] - d->dphi[i] * kt -
                      d->phi[i] * d->k[i] * d->phi[i].adjoint() * out.phi[i];
        out.s[i] = sol.s[i] - cg.t[i].adjoint() * d->k[i] * cg.t[i];
    }
    return out;
}

Potential compose(const Potential& v, const std::vector<TransformSpec>& specs,
                  double lambda_max, const SolverOptions& opt) {
    Potential current = v;
    for (size_t stage = 0; stage < specs.size(); ++stage) {
        const TransformSpec& spec = specs[stage];
        require(spec.alpha_index >= 1,
                "compose: alpha index must be 1-based positive");
        Spectrum s;
        try {
            s = compute_spectrum(current, lambda_max, opt);
        } catch (const SolverError& e) {
            throw SolverError("compose: stage " + std::to_string(stage + 1) +
                              ": " + e.what());
        }
        if (size_t(spec.alpha_index) > s.groups.size()) {
            std::ostringstream os;
            os << "compose: stage " << stage + 1 << ": alpha index "
               << spec.alpha_index << " beyond the " << s.groups.size()
               << " group(s) below lambda_max " << lambda_max;
            throw RejectedTarget(os.str());
        }
        EigenGroup& g = s.groups[spec.alpha_index - 1];
        attach_group_data(current, g, opt);
        try {
            current = build_transform(current, spec, g, opt.steps);
        } catch (const RejectedTarget& e) {
            throw RejectedTarget("compose: stage " + std::to_string(stage + 1) +
                                 ": " + e.what());
        }
    }
    return current;
}

}  // namespace vsl
