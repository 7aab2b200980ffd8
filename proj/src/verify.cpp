#include "vsl/verify.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace vsl {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

double override_tol(const VerifyOptions& opt, const std::string& name,
                    double fallback) {
    auto it = opt.tolerances.find(name);
    return it == opt.tolerances.end() ? fallback : it->second;
}

CMatrix quad_integral(const Potential& v, int intervals = 512) {
    // Composite Simpson of V over [0,1].
    const Index n = v.n();
    CMatrix acc = CMatrix::Zero(n, n);
    const double h = 1.0 / intervals;
    for (int j = 0; j < intervals; j += 2)
        acc += (h / 3) *
               (v.eval(j * h) + 4 * v.eval((j + 1) * h) + v.eval((j + 2) * h));
    return acc;
}

}  // namespace

CheckReport CheckReport::make(std::string name, double residual, double tol,
                              json context) {
    CheckReport r;
    r.name = std::move(name);
    r.residual = residual;
    r.tolerance = tol;
    r.passed = residual <= tol;
    r.context = std::move(context);
    return r;
}

CheckReport CheckReport::skip(std::string name, std::string why) {
    CheckReport r;
    r.name = std::move(name);
    r.skipped = true;
    r.passed = true;
    r.context = json{{"skipped", why}};
    return r;
}

std::vector<CheckReport> check_wronskian(const Potential& v,
                                         const std::vector<double>& lambdas,
                                         int steps) {
    std::vector<CheckReport> out;
    for (double lam : lambdas) {
        const MatrixSolution sol = propagate(v, lam, steps);
        out.push_back(CheckReport::make("wronskian", wronskian_defect(sol),
                                        1e-8, json{{"lambda", lam}}));
    }
    return out;
}

std::vector<CheckReport> check_connection(const Potential& v,
                                          const std::vector<double>& lambdas,
                                          int steps) {
    std::vector<CheckReport> out;
    const Potential refl = reflect(v);
    for (double lam : lambdas) {
        const MatrixSolution sol = propagate(v, lam, steps);
        const MatrixSolution rsol = propagate(refl, lam, steps);
        const CMatrix phi1 = sol.phi1();
        double worst = 0;
        for (int i = 0; i <= steps; i += std::max(1, steps / 64)) {
            const CMatrix chi = -rsol.phi[steps - i];
            const CMatrix dchi = rsol.dphi[steps - i];
            const CMatrix res = chi.adjoint() * sol.dphi[i] -
                                dchi.adjoint() * sol.phi[i] + phi1;
            worst = std::max(worst, res.norm());
        }
        out.push_back(CheckReport::make("connection_identity", worst, 1e-7,
                                        json{{"lambda", lam}}));
    }
    return out;
}

std::vector<CheckReport> check_norming(const Potential& v,
                                       const Spectrum& spectrum, int steps) {
    std::vector<CheckReport> out;
    for (size_t gi = 0; gi < spectrum.groups.size(); ++gi) {
        const EigenGroup& g = spectrum.groups[gi];
        const MatrixSolution sol = propagate(v, g.lambda, steps, true);
        const CMatrix e = g.e.columns();
        const CMatrix via_boundary =
            e.adjoint() * (sol.phidot.back().adjoint() * sol.dphi.back()) * e;
        const CMatrix via_gram = e.adjoint() * sol.s.back() * e;
        const double rel = (via_boundary - via_gram).norm() /
                           std::max(via_gram.norm(), 1e-300);
        out.push_back(CheckReport::make(
            "norming_agreement", rel, 1e-6,
            json{{"group", gi + 1}, {"lambda", g.lambda}}));
    }
    return out;
}

CheckReport check_asymptotics(const Potential& v, const std::vector<int>& ns,
                              int steps) {
    require(ns.size() >= 2, "check_asymptotics: need at least two orders");
    const CMatrix iv = quad_integral(v);
    const Index n = v.n();
    std::vector<double> residuals;
    for (int order : ns) {
        const double z = kPi * (order + 0.5);
        const MatrixSolution sol = propagate(v, z * z, steps);
        const CMatrix lead = std::sin(z) / z * CMatrix::Identity(n, n);
        const CMatrix corr = -std::cos(z) / (2 * z * z) * iv;
        residuals.push_back(z * z * (sol.phi1() - lead - corr).norm());
    }
    json ctx;
    ctx["orders"] = ns;
    ctx["residuals"] = residuals;
    // The remainder of the expansion is o(1), not quantified; a decay trend
    // is the strongest honest acceptance.  A tail below the integrator noise
    // at the largest order (which grows like z^5 h^4 per unit length and is
    // well under 1e-3 at the default step count) counts as converged: there
    // the truncation term has already vanished into round-off.
    const double first = residuals.front(), last = residuals.back();
    ctx["negligible_tail_floor"] = 1e-3;
    const double ratio = last <= 1e-3 ? 0.0 : last / std::max(first, 1e-300);
    return CheckReport::make("asymptotic_expansion", ratio, 0.5, ctx);
}

std::vector<CheckReport> check_group_data(const Potential& v,
                                          const Spectrum& spectrum,
                                          const SolverOptions& opt) {
    std::vector<CheckReport> out;
    const Index n = v.n();
    const CMatrix id = CMatrix::Identity(n, n);
    std::mt19937_64 gen(20240401u);
    std::normal_distribution<double> dist(0.0, 1.0);

    std::vector<double> lambdas;
    for (const auto& g : spectrum.groups) lambdas.push_back(g.lambda);

    for (size_t gi = 0; gi < spectrum.groups.size(); ++gi) {
        const EigenGroup& g = spectrum.groups[gi];
        require(g.attached, "check_group_data: group not attached");
        const json ctx{{"group", gi + 1}, {"lambda", g.lambda}};
        const CMatrix p = projector(g.e);
        const MatrixSolution sol = propagate(v, g.lambda, opt.steps, true);

        // chi'(0) phi'(1) P = P
        const auto [chi0, dchi0] = chi_at(v, g.lambda, 0.0, opt.steps);
        out.push_back(CheckReport::make(
            "boundary_projector",
            (dchi0 * sol.dphi.back() * p - p).norm(), 1e-6, ctx));

        // D = S^{-1} - B is positive semidefinite.
        const auto [deig, dvec] = hermitian_eig(g.d_alpha);
        const double dscale =
            std::max(g.d_alpha.norm(),
                     1e-6 * g.s_alpha.partialPivLu().inverse().norm());
        out.push_back(CheckReport::make(
            "d_positive_semidefinite",
            std::max(0.0, -deig(0)) / std::max(dscale, 1e-300), 1e-8, ctx));

        // dim F = N - k and E transversal to F.
        out.push_back(CheckReport::make(
            "forbidden_dimension",
            std::abs(double(g.f_alpha.dim()) - double(n - g.k)), 0.5, ctx));
        out.push_back(CheckReport::make(
            "eigenspace_forbidden_transversal",
            double(intersection_dim(g.e, g.f_alpha)), 0.5, ctx));

        // Second construction of F through the adjoint kernel.
        const SubspaceBasis f_cross = subspace_complement(
            subspace_image(sol.phidot.back().adjoint(), g.e_sharp));
        out.push_back(CheckReport::make(
            "forbidden_cross_construction",
            max_principal_angle(g.f_alpha, f_cross), 1e-5, ctx));

        // Residue matrix is invariant under a change of kernel basis.
        {
            CMatrix c(g.k, g.k);
            for (Index i = 0; i < g.k; ++i)
                for (Index j = 0; j < g.k; ++j)
                    c(i, j) = Complex(dist(gen), dist(gen)) +
                              (i == j ? Complex(2.0, 0.0) : Complex(0.0, 0.0));
            const CMatrix e2 = g.e.columns() * c;
            const CMatrix gram = e2.adjoint() * g.s_alpha * e2;
            const CMatrix b2 = e2 * gram.partialPivLu().solve(e2.adjoint());
            out.push_back(CheckReport::make(
                "residue_basis_invariance",
                (b2 - g.b_alpha).norm() / std::max(g.b_alpha.norm(), 1e-300),
                1e-9, ctx));
        }

        // det phi(1, .) has a root of multiplicity exactly k.
        {
            double worst = 0;
            std::vector<double> logs;
            for (double delta : {1e-3, 1e-4, 1e-5}) {
                const MatrixSolution ds = propagate(v, g.lambda + delta,
                                                    opt.steps);
                logs.push_back(std::log10(std::abs(ds.phi1().determinant())));
            }
            for (size_t i = 0; i + 1 < logs.size(); ++i)
                worst = std::max(worst,
                                 std::abs((logs[i] - logs[i + 1]) - g.k));
            json c2 = ctx;
            c2["log_det"] = logs;
            out.push_back(
                CheckReport::make("det_root_multiplicity", worst, 0.1, c2));
        }

        // Z = phidot(1) P + phi(1) (I-P) stays uniformly invertible.
        {
            const RVector sv = singular_values(g.z_alpha);
            out.push_back(CheckReport::make(
                "kernel_frame_nonsingular",
                sv(0) / std::max(sv(sv.size() - 1), 1e-300), 1e6, ctx));
        }

        // Leading term of the inverse: phi^{-1}(1, l+d) Z ~ d^{-1} P + (I-P),
        // with a bounded remainder stable under shrinking d.
        {
            auto remainder = [&](double delta) {
                const MatrixSolution ds =
                    propagate(v, g.lambda + delta, opt.steps);
                const CMatrix lhs =
                    ds.phi1().partialPivLu().solve(g.z_alpha).eval();
                return (lhs - (p / delta + (id - p))).norm();
            };
            const double c1 = remainder(1e-4);
            const double c2 = remainder(1e-5);
            json c = ctx;
            c["residual_1e-4"] = c1;
            c["residual_1e-5"] = c2;
            out.push_back(CheckReport::make("inverse_pole_expansion",
                                            c2 / (3 * c1 + 1.0), 1.0, c));
        }

        // Contour residue of m against -g^{-1}; only the two lowest groups
        // (the contour needs a known clear gap on both sides).
        if (gi < 2) {
            double gap = std::max(1.0, std::abs(g.lambda) + 1.0);
            if (gi > 0) gap = std::min(gap, g.lambda - lambdas[gi - 1]);
            if (gi + 1 < lambdas.size())
                gap = std::min(gap, lambdas[gi + 1] - g.lambda);
            const double radius = std::min(2.0, 0.25 * gap);
            const CMatrix r =
                m_residue(v, g, radius, 64, opt.steps, lambdas);
            const CMatrix ginv = g.g_alpha.partialPivLu().inverse();
            const CMatrix e = g.e.columns();
            const double on_space =
                (e.adjoint() * (-r) * e - ginv).norm() / ginv.norm();
            double off_space = 0;
            const SubspaceBasis perp = subspace_complement(g.e);
            if (perp.dim() > 0)
                off_space = (r * perp.columns()).norm();
            json c = ctx;
            c["radius"] = radius;
            c["on_space_rel"] = on_space;
            c["off_space"] = off_space;
            out.push_back(CheckReport::make(
                "residue_norming", std::max(on_space, off_space), 1e-4, c));
        }
    }
    return out;
}

std::vector<CheckReport> check_transform(const Potential& v,
                                         const TransformSpec& spec,
                                         const VerifyOptions& opt) {
    std::vector<CheckReport> out;
    SolverOptions sopt;
    sopt.steps = opt.steps;
    sopt.jobs = opt.jobs;

    Spectrum base = compute_spectrum(v, opt.lambda_max, sopt);
    require(spec.alpha_index >= 1 &&
                size_t(spec.alpha_index) <= base.groups.size(),
            "check_transform: alpha index out of range");
    attach_all(v, base, sopt);
    const EigenGroup& group = base.groups[spec.alpha_index - 1];

    const TargetDiagnostics td = validate_target(spec, group);
    out.push_back(CheckReport::make("target_admissible", td.passed() ? 0 : 1,
                                    0.5, json{{"failure", td.failure}}));
    if (!td.passed()) return out;

    const Potential vt = build_transform(v, spec, group, opt.steps);
    const DarbouxData& cache = *vt.darboux_data();
    out.push_back(CheckReport::make("transform_kernel_hermitian",
                                    cache.k_hermitian_residual, 1e-9));
    out.push_back(CheckReport::make("transform_kernel_boundary",
                                    cache.k_boundary_norm, 1e-7));

    // Hermiticity of the transformed potential across the grid.
    {
        double worst = 0;
        for (int i = 0; i <= 64; ++i) {
            const CMatrix m = vt.eval(i / 64.0);
            worst = std::max(worst, (m - m.adjoint()).norm());
        }
        out.push_back(
            CheckReport::make("transform_hermitian", worst, 1e-9));
    }

    Spectrum after = compute_spectrum(vt, opt.lambda_max, sopt);
    attach_all(vt, after, sopt);

    {
        double lam_worst = 0;
        bool mult_ok = after.groups.size() == base.groups.size();
        for (size_t i = 0; mult_ok && i < base.groups.size(); ++i) {
            lam_worst = std::max(lam_worst, std::abs(after.groups[i].lambda -
                                                     base.groups[i].lambda));
            if (after.groups[i].k != base.groups[i].k) mult_ok = false;
        }
        out.push_back(CheckReport::make(
            "spectrum_preserved", mult_ok ? lam_worst : 1.0, 1e-5,
            json{{"groups", base.groups.size()},
                 {"multiplicities_match", mult_ok}}));
    }

    const size_t ai = size_t(spec.alpha_index) - 1;
    if (ai < after.groups.size()) {
        const EigenGroup& tg = after.groups[ai];
        out.push_back(CheckReport::make(
            "residue_target",
            (tg.b_alpha - spec.b).norm() / std::max(spec.b.norm(), 1e-300),
            1e-4));
        out.push_back(CheckReport::make(
            "eigenspace_target",
            max_principal_angle(tg.e, target_eigenspace(spec.b)), 1e-4));
        out.push_back(CheckReport::make(
            "forbidden_preserved",
            max_principal_angle(tg.f_alpha, group.f_alpha), 1e-4));
    }
    {
        double b_worst = 0, e_worst = 0;
        for (size_t i = 0;
             i < std::min(base.groups.size(), after.groups.size()); ++i) {
            if (i == ai) continue;
            b_worst = std::max(
                b_worst, (after.groups[i].b_alpha - base.groups[i].b_alpha)
                                 .norm() /
                             std::max(base.groups[i].b_alpha.norm(), 1e-300));
            e_worst = std::max(e_worst, max_principal_angle(
                                            after.groups[i].e,
                                            base.groups[i].e));
        }
        out.push_back(
            CheckReport::make("residue_others_preserved", b_worst, 1e-4));
        out.push_back(
            CheckReport::make("eigenspace_others_preserved", e_worst, 1e-4));
    }

    // Closed-form solution vs direct integration under the transform.
    {
        std::mt19937_64 gen(opt.seed);
        std::uniform_real_distribution<double> lam_dist(-5.0, 80.0);
        double worst = 0;
        json lams = json::array();
        for (int trial = 0; trial < 3; ++trial) {
            const double lam = lam_dist(gen);
            lams.push_back(lam);
            const MatrixSolution closed =
                transformed_phi(vt, lam, cache.steps());
            const MatrixSolution direct = propagate(vt, lam, cache.steps());
            for (int i = 0; i <= cache.steps(); i += 8)
                worst = std::max(worst,
                                 (closed.phi[i] - direct.phi[i]).norm());
        }
        out.push_back(CheckReport::make("closed_form_solution", worst, 1e-5,
                                        json{{"lambdas", lams}}));
    }
    return out;
}

CheckReport check_example_n2(const Potential& v, const Spectrum& spectrum) {
    if (v.n() != 2)
        return CheckReport::skip("two_channel_forbidden_pattern",
                                 "requires N = 2");
    if (spectrum.groups.size() < 2)
        return CheckReport::skip("two_channel_forbidden_pattern",
                                 "fewer than two groups below the cutoff");
    const EigenGroup& g1 = spectrum.groups[0];
    const EigenGroup& g2 = spectrum.groups[1];
    if (g1.k != 1 || g2.k != 1)
        return CheckReport::skip("two_channel_forbidden_pattern",
                                 "lowest two groups are not both simple");
    // The conclusion needs the remaining spectrum fully degenerate; any
    // visible simple group beyond the second voids the hypothesis.  Run
    // with a cutoff just above the second group to test the two-group case.
    for (size_t i = 2; i < spectrum.groups.size(); ++i)
        if (spectrum.groups[i].k != 2)
            return CheckReport::skip(
                "two_channel_forbidden_pattern",
                "group " + std::to_string(i + 1) +
                    " below the cutoff is not doubly degenerate");
    require(g1.attached && g2.attached,
            "check_example_n2: groups not attached");
    const double a12 = max_principal_angle(g1.f_alpha, g2.e);
    const double a21 = max_principal_angle(g2.f_alpha, g1.e);
    const int overlap = intersection_dim(g1.e, g2.e);
    json ctx{{"angle_f1_e2", a12},
             {"angle_f2_e1", a21},
             {"e1_e2_intersection", overlap}};
    const double residual = overlap > 0 ? 1.0 : std::max(a12, a21);
    return CheckReport::make("two_channel_forbidden_pattern", residual, 1e-4,
                             ctx);
}

CheckReport check_uniqueness_roundtrip(const Potential& v,
                                       const TransformSpec& spec,
                                       const VerifyOptions& opt) {
    SolverOptions sopt;
    sopt.steps = opt.steps;
    sopt.jobs = opt.jobs;

    Spectrum base = compute_spectrum(v, opt.lambda_max, sopt);
    require(spec.alpha_index >= 1 &&
                size_t(spec.alpha_index) <= base.groups.size(),
            "check_uniqueness_roundtrip: alpha index out of range");
    EigenGroup& group = base.groups[spec.alpha_index - 1];
    attach_group_data(v, group, sopt);
    const CMatrix b_original = group.b_alpha;

    const Potential forward = build_transform(v, spec, group, opt.steps);

    Spectrum mid = compute_spectrum(forward, opt.lambda_max, sopt);
    require(size_t(spec.alpha_index) <= mid.groups.size(),
            "check_uniqueness_roundtrip: group lost after transform");
    EigenGroup& mid_group = mid.groups[spec.alpha_index - 1];
    attach_group_data(forward, mid_group, sopt);

    TransformSpec inverse;
    inverse.alpha_index = spec.alpha_index;
    inverse.b = b_original;
    const Potential back = build_transform(forward, inverse, mid_group,
                                           opt.steps);

    double sup = 0;
    for (int i = 0; i <= 100; ++i) {
        const double x = i / 100.0;
        sup = std::max(sup, (back.eval(x) - v.eval(x)).norm());
    }
    return CheckReport::make("uniqueness_roundtrip", sup, 1e-4,
                             json{{"alpha", spec.alpha_index}});
}

std::vector<CheckReport> run_verify_suite(const Potential& v,
                                          const VerifyOptions& opt) {
    SolverOptions sopt;
    sopt.steps = opt.steps;
    sopt.jobs = opt.jobs;

    std::mt19937_64 gen(opt.seed);
    std::uniform_real_distribution<double> lam_dist(-5.0, 90.0);
    std::vector<double> lambdas = {-3.0, 2.0, 17.0, 41.0, 77.0};
    for (int i = 0; i < 3; ++i) lambdas.push_back(lam_dist(gen));

    std::vector<CheckReport> out;
    auto append = [&out](std::vector<CheckReport> more) {
        for (auto& r : more) out.push_back(std::move(r));
    };

    append(check_wronskian(v, lambdas, opt.steps));
    append(check_connection(v, lambdas, opt.steps));
    append({check_asymptotics(v, {5, 10, 20, 40}, opt.steps)});

    Spectrum spectrum = compute_spectrum(v, opt.lambda_max, sopt);
    attach_all(v, spectrum, sopt);
    append(check_norming(v, spectrum, opt.steps));
    append(check_group_data(v, spectrum, sopt));
    append({check_example_n2(v, spectrum)});

    if (opt.transform) {
        append(check_transform(v, *opt.transform, opt));
        append({check_uniqueness_roundtrip(v, *opt.transform, opt)});
    }

    for (auto& r : out) {
        const double tol = override_tol(opt, r.name, r.tolerance);
        if (tol != r.tolerance && !r.skipped) {
            r.tolerance = tol;
            r.passed = r.residual <= tol;
        }
    }
    return out;
}

json reports_to_json(const std::vector<CheckReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) {
        json j;
        j["name"] = r.name;
        j["residual"] = r.residual;
        j["tolerance"] = r.tolerance;
        j["passed"] = r.passed;
        j["skipped"] = r.skipped;
        if (!r.context.is_null()) j["context"] = r.context;
        arr.push_back(std::move(j));
    }
    return arr;
}

bool all_passed(const std::vector<CheckReport>& reports) {
    return std::all_of(reports.begin(), reports.end(), [](const CheckReport& r) {
        return r.skipped || r.passed;
    });
}

}  // namespace vsl
