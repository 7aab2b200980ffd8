#include "vsl/spectrum.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "vsl/propagator.hpp"

namespace vsl {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sigma_min_at_one(const Potential& v, double lambda, int steps,
                        double* sigma_max = nullptr) {
    const MatrixSolution sol = propagate(v, lambda, steps);
    const RVector sv = singular_values(sol.phi1());
    if (sigma_max) *sigma_max = sv(0);
    return sv(sv.size() - 1);
}

// Run tasks with at most `jobs` worker threads; results land in caller-owned
// slots so assembly order is deterministic.
void run_tasks(int jobs, std::vector<std::function<void()>>& tasks) {
    if (jobs <= 1 || tasks.size() <= 1) {
        for (auto& t : tasks) t();
        return;
    }
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            tasks[i]();
        }
    };
    const int nt = std::min<int>(jobs, int(tasks.size()));
    std::vector<std::thread> pool;
    for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace

std::vector<double> coarse_spectrum(const Potential& v, double lambda_max,
                                    int mesh) {
    require(mesh >= 64, "coarse_spectrum: mesh must be >= 64");
    const Index n = v.n();
    const double h = 1.0 / mesh;
    const Index dim = Index(mesh - 1) * n;
    CMatrix fd = CMatrix::Zero(dim, dim);
    const double inv_h2 = 1.0 / (h * h);
    for (Index j = 0; j < mesh - 1; ++j) {
        const CMatrix vx = v.eval((double(j) + 1) * h);
        fd.block(j * n, j * n, n, n) =
            vx + 2.0 * inv_h2 * CMatrix::Identity(n, n);
        if (j + 1 < mesh - 1) {
            fd.block(j * n, (j + 1) * n, n, n) =
                -inv_h2 * CMatrix::Identity(n, n);
            fd.block((j + 1) * n, j * n, n, n) =
                -inv_h2 * CMatrix::Identity(n, n);
        }
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(fd, Eigen::EigenvaluesOnly);
    require(es.info() == Eigen::Success, "coarse_spectrum: eigensolver failed");
    std::vector<double> out;
    const double cutoff = lambda_max * 1.2;
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double mu = es.eigenvalues()(i);
        if (mu <= cutoff) out.push_back(mu);
    }
    return out;
}

double refine_eigenvalue(const Potential& v, double guess,
                         const SolverOptions& opt, double bracket_radius) {
    const int steps = opt.steps;
    double a = guess - bracket_radius;
    double b = guess + bracket_radius;

    auto objective = [&](double lam) {
        return sigma_min_at_one(v, lam, steps);
    };

    // Coarse scan; re-widen once if the minimum sits on the boundary.
    const int scan_points = 33;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::vector<double> lams(scan_points), vals(scan_points);
        for (int i = 0; i < scan_points; ++i) {
            lams[i] = a + (b - a) * i / (scan_points - 1);
            vals[i] = objective(lams[i]);
        }
        const int best =
            int(std::min_element(vals.begin(), vals.end()) - vals.begin());
        if (best > 0 && best < scan_points - 1) {
            a = lams[best - 1];
            b = lams[best + 1];
            break;
        }
        if (attempt == 1) {
            std::ostringstream os;
            os << "refine_eigenvalue: no interior minimum near " << guess;
            throw NotAnEigenvalue(os.str());
        }
        const double mid = lams[best];
        a = mid - 2 * bracket_radius;
        b = mid + 2 * bracket_radius;
    }

    // Golden-section narrowing on the V-shaped objective.
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = objective(c), fd = objective(d);
    const double width_tol = 1e-10 * (1.0 + std::abs(guess));
    while (b - a > width_tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = objective(d);
        }
    }
    double best = fc < fd ? c : d;
    double best_val = std::min(fc, fd);

    // Parabolic polish on sigma_min^2 (smooth and quadratic at the root).
    {
        const double dl = std::max(8 * width_tol, 1e-9 * (1 + std::abs(best)));
        const double f0 = objective(best - dl), f1 = best_val,
                     f2 = objective(best + dl);
        const double y0 = f0 * f0, y1 = f1 * f1, y2 = f2 * f2;
        const double denom = y0 - 2 * y1 + y2;
        if (denom > 0) {
            const double shift = 0.5 * dl * (y0 - y2) / denom;
            if (std::abs(shift) < dl) {
                const double cand = best + shift;
                const double fv = objective(cand);
                if (fv < best_val) {
                    best = cand;
                    best_val = fv;
                }
            }
        }
    }

    double sigma_max = 0;
    const double fmin = sigma_min_at_one(v, best, steps, &sigma_max);
    if (fmin > 1e-7 * std::max(sigma_max, 1.0)) {
        std::ostringstream os;
        os << "refine_eigenvalue: sigma_min " << fmin << " above threshold at "
           << best << " (started from " << guess << ")";
        throw NotAnEigenvalue(os.str());
    }
    return best;
}

std::pair<int, SubspaceBasis> multiplicity_and_kernel(const Potential& v,
                                                      double lambda,
                                                      const SolverOptions& opt) {
    const MatrixSolution sol = propagate(v, lambda, opt.steps);
    const RVector sv = singular_values(sol.phi1());
    const double thr = opt.sv_tol * std::max(sv(0), 1.0);
    int k = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) <= thr) ++k;
    if (k == 0) {
        std::ostringstream os;
        os << "multiplicity_and_kernel: no kernel at lambda = " << lambda
           << " (sigma_min = " << sv(sv.size() - 1) << ")";
        throw NotAnEigenvalue(os.str());
    }
    return {k, null_space(sol.phi1(), opt.sv_tol)};
}

Spectrum compute_spectrum(const Potential& v, double lambda_max,
                          const SolverOptions& opt) {
    const std::vector<double> coarse = coarse_spectrum(v, lambda_max, opt.mesh);

    // Cluster coarse guesses by relative gap; the representative is the
    // running mean of its cluster.
    std::vector<double> reps;
    std::vector<int> cluster_sizes;
    double cluster_last = 0;
    for (double mu : coarse) {
        if (!reps.empty() &&
            mu - cluster_last <= opt.cluster_tol * (1.0 + std::abs(mu))) {
            reps.back() = (reps.back() * cluster_sizes.back() + mu) /
                          (cluster_sizes.back() + 1);
            ++cluster_sizes.back();
        } else {
            reps.push_back(mu);
            cluster_sizes.push_back(1);
        }
        cluster_last = mu;
    }

    // Refinement bracket per representative: clear of the neighbours, wide
    // enough to absorb the O(mesh^-2) discretization bias.
    const double h = 1.0 / opt.mesh;
    std::vector<double> refined(reps.size(),
                                std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> failures(reps.size());
    std::vector<std::function<void()>> tasks;
    for (size_t i = 0; i < reps.size(); ++i) {
        tasks.push_back([&, i] {
            const double lam = reps[i];
            const double fd_err = lam * lam * h * h / 12.0 + 1e-3;
            double radius = std::max(0.5, 8.0 * fd_err);
            double gap = std::numeric_limits<double>::infinity();
            if (i > 0) gap = std::min(gap, lam - reps[i - 1]);
            if (i + 1 < reps.size()) gap = std::min(gap, reps[i + 1] - lam);
            if (std::isfinite(gap)) radius = std::min(radius, 0.45 * gap);
            radius = std::max(radius, 1e-5 * (1.0 + std::abs(lam)));
            try {
                refined[i] = refine_eigenvalue(v, lam, opt, radius);
            } catch (const SolverError& e) {
                failures[i] = e.what();
            }
        });
    }
    run_tasks(opt.jobs, tasks);

    std::vector<std::string> failed;
    for (size_t i = 0; i < reps.size(); ++i)
        if (!failures[i].empty())
            failed.push_back("cluster near " + std::to_string(reps[i]) + ": " +
                             failures[i]);
    if (!failed.empty()) {
        std::string msg = "compute_spectrum: refinement failed for " +
                          std::to_string(failed.size()) + " cluster(s):";
        for (const auto& f : failed) msg += "\n  " + f;
        throw SolverError(msg);
    }

    // Distinct FD copies of one multiplicity-k eigenvalue converge to the
    // same root; merge refined duplicates before deciding multiplicities.
    std::sort(refined.begin(), refined.end());
    std::vector<double> unique_lambdas;
    for (double lam : refined) {
        if (lam > lambda_max) continue;
        if (!unique_lambdas.empty() &&
            lam - unique_lambdas.back() <=
                opt.cluster_tol * (1.0 + std::abs(lam)))
            continue;
        unique_lambdas.push_back(lam);
    }

    Spectrum spec;
    spec.lambda_max = lambda_max;
    spec.groups.resize(unique_lambdas.size());
    std::vector<std::function<void()>> gtasks;
    std::vector<std::string> gfail(unique_lambdas.size());
    for (size_t i = 0; i < unique_lambdas.size(); ++i) {
        gtasks.push_back([&, i] {
            try {
                auto [k, e] = multiplicity_and_kernel(v, unique_lambdas[i], opt);
                spec.groups[i].lambda = unique_lambdas[i];
                spec.groups[i].k = k;
                spec.groups[i].e = std::move(e);
            } catch (const SolverError& e) {
                gfail[i] = e.what();
            }
        });
    }
    run_tasks(opt.jobs, gtasks);
    for (const auto& f : gfail)
        if (!f.empty()) throw SolverError(std::string("compute_spectrum: ") + f);

    // Loose Weyl-count sanity for the diagnostics block.
    spec.diagnostics.steps = opt.steps;
    spec.diagnostics.mesh = opt.mesh;
    spec.diagnostics.sv_tol = opt.sv_tol;
    spec.diagnostics.cluster_tol = opt.cluster_tol;
    int count = 0;
    for (const auto& g : spec.groups) count += g.k;
    spec.diagnostics.weyl_count = count;
    double vbar = 0;
    for (int i = 0; i <= 16; ++i)
        vbar += v.eval(i / 16.0).trace().real() / v.n() / 17.0;
    const double shifted = std::max(lambda_max - vbar, 0.0);
    spec.diagnostics.weyl_expected =
        int(v.n()) * int(std::floor(std::sqrt(shifted) / kPi));
    if (std::abs(spec.diagnostics.weyl_count - spec.diagnostics.weyl_expected) >
        int(v.n())) {
        spec.diagnostics.notes.push_back(
            "eigenvalue count deviates from the free Weyl estimate by more "
            "than N");
    }
    return spec;
}

}  // namespace vsl
