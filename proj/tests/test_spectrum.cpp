#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "test_util.hpp"
#include "vsl/propagator.hpp"
#include "vsl/spectrum.hpp"

using namespace vsl;
using namespace vsl::testing;

namespace {

SolverOptions fast_options() {
    SolverOptions opt;
    opt.steps = 2048;
    opt.mesh = 128;
    return opt;
}

}  // namespace

TEST_CASE("coarse spectrum of the free problem") {
    const auto mus = coarse_spectrum(zero2(), 100.0, 512);
    // Pairs near (n pi)^2, n = 1..3, each twice (two identical channels).
    REQUIRE(mus.size() >= 6);
    const double tol = 0.05;  // O(mesh^-2)
    CHECK(std::abs(mus[0] - kPi2) <= tol);
    CHECK(std::abs(mus[1] - kPi2) <= tol);
    CHECK(std::abs(mus[2] - 4 * kPi2) <= 4 * tol);
    CHECK(std::abs(mus[3] - 4 * kPi2) <= 4 * tol);
    CHECK(std::abs(mus[4] - 9 * kPi2) <= 9 * tol);
    CHECK(std::abs(mus[5] - 9 * kPi2) <= 9 * tol);
}

TEST_CASE("coarse spectrum shifts per channel for a constant diagonal") {
    const auto mus = coarse_spectrum(diag2(0, 10), 60.0, 512);
    REQUIRE(mus.size() >= 4);
    CHECK(std::abs(mus[0] - kPi2) <= 0.05);
    CHECK(std::abs(mus[1] - (kPi2 + 10)) <= 0.05);
    CHECK(std::abs(mus[2] - 4 * kPi2) <= 0.2);
    CHECK(std::abs(mus[3] - (4 * kPi2 + 10)) <= 0.2);
}

TEST_CASE("coarse spectrum scalar case") {
    RVector d(1);
    d << 0.0;
    const auto mus = coarse_spectrum(Potential::constant_diagonal(d), 100.0,
                                     512);
    REQUIRE(mus.size() >= 3);
    CHECK(std::abs(mus[0] - kPi2) <= 0.05);
    CHECK(std::abs(mus[1] - 4 * kPi2) <= 0.1);
    CHECK(std::abs(mus[2] - 9 * kPi2) <= 0.3);
}

TEST_CASE("coarse guesses converge at second order in the mesh") {
    auto err = [](int mesh) {
        return std::abs(coarse_spectrum(zero2(), 20.0, mesh)[0] - kPi2);
    };
    const double e128 = err(128), e256 = err(256);
    CHECK(e128 / e256 >= 3.0);  // ~4 for O(mesh^-2)
    CHECK(e128 / e256 <= 5.0);
}

TEST_CASE("refine_eigenvalue locates roots sharply") {
    const SolverOptions opt = fast_options();
    CHECK(std::abs(refine_eigenvalue(zero2(), 9.5, opt) - kPi2) <= 1e-7);
    CHECK(std::abs(refine_eigenvalue(diag2(0, 10), 19.5, opt) -
                   (kPi2 + 10)) <= 1e-6);
}

TEST_CASE("refine_eigenvalue rejects a gap region") {
    CHECK_THROWS_AS(refine_eigenvalue(zero2(), 25.0, fast_options(), 0.8),
                    NotAnEigenvalue);
}

TEST_CASE("multiplicity and kernel") {
    const SolverOptions opt = fast_options();
    SUBCASE("full kernel for the free problem") {
        auto [k, e] = multiplicity_and_kernel(zero2(), kPi2, opt);
        CHECK(k == 2);
        CHECK(e.dim() == 2);
    }
    SUBCASE("decoupled channels give simple eigenvalues") {
        auto [k, e] = multiplicity_and_kernel(diag2(0, 10), kPi2, opt);
        CHECK(k == 1);
        REQUIRE(e.dim() == 1);
        CHECK(std::abs(e.columns()(0, 0)) == doctest::Approx(1.0));
    }
    SUBCASE("no kernel off the spectrum") {
        CHECK_THROWS_AS(multiplicity_and_kernel(zero2(), 20.0, opt),
                        NotAnEigenvalue);
    }
}

TEST_CASE("kernel vectors annihilate phi(1)") {
    const SolverOptions opt = fast_options();
    const double lam = refine_eigenvalue(diag2(0, 10), 9.8, opt);
    auto [k, e] = multiplicity_and_kernel(diag2(0, 10), lam, opt);
    const CMatrix phi1 = propagate(diag2(0, 10), lam, opt.steps).phi1();
    for (Index j = 0; j < e.dim(); ++j)
        CHECK((phi1 * e.columns().col(j)).norm() <= 1e-6);
}

TEST_CASE("compute_spectrum on the free potential") {
    const Spectrum s = compute_spectrum(zero2(), 100.0, fast_options());
    REQUIRE(s.groups.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(s.groups[i].k == 2);
        CHECK(std::abs(s.groups[i].lambda - (i + 1) * (i + 1) * kPi2) <= 1e-6);
    }
    CHECK(s.diagnostics.weyl_count == 6);
    for (size_t i = 1; i < s.groups.size(); ++i)
        CHECK(s.groups[i].lambda > s.groups[i - 1].lambda);
}

TEST_CASE("compute_spectrum on the constant diagonal") {
    const Spectrum s = compute_spectrum(diag2(0, 10), 60.0, fast_options());
    REQUIRE(s.groups.size() == 4);
    const double expected[] = {kPi2, kPi2 + 10, 4 * kPi2, 4 * kPi2 + 10};
    for (size_t i = 0; i < 4; ++i) {
        CHECK(s.groups[i].k == 1);
        CHECK(std::abs(s.groups[i].lambda - expected[i]) <= 1e-6);
    }
}

TEST_CASE("near-degenerate channels merge below resolution") {
    // Split below the solver resolution: reported as one group with the
    // kernel dimension deciding the multiplicity.
    const Spectrum s = compute_spectrum(diag2(0, 1e-9), 20.0, fast_options());
    REQUIRE(s.groups.size() == 1);
    CHECK(s.groups[0].k == 2);
    CHECK(std::abs(s.groups[0].lambda - kPi2) <= 1e-6);
}

TEST_CASE("parallel refinement matches sequential") {
    SolverOptions seq = fast_options();
    SolverOptions par = fast_options();
    par.jobs = 4;
    const Spectrum a = compute_spectrum(diag2(0, 10), 60.0, seq);
    const Spectrum b = compute_spectrum(diag2(0, 10), 60.0, par);
    REQUIRE(a.groups.size() == b.groups.size());
    for (size_t i = 0; i < a.groups.size(); ++i) {
        CHECK(a.groups[i].lambda == b.groups[i].lambda);
        CHECK(a.groups[i].k == b.groups[i].k);
    }
}

TEST_CASE("det root order matches the multiplicity") {
    const SolverOptions opt = fast_options();
    struct Case {
        Potential v;
        double guess;
        int k;
    };
    const Case cases[] = {{zero2(), 9.8, 2}, {diag2(0, 10), 19.6, 1}};
    for (const auto& c : cases) {
        const double lam = refine_eigenvalue(c.v, c.guess, opt);
        std::vector<double> logs;
        for (double delta : {1e-3, 1e-4, 1e-5}) {
            const CMatrix phi1 = propagate(c.v, lam + delta, opt.steps).phi1();
            logs.push_back(std::log10(std::abs(phi1.determinant())));
        }
        // |det| ~ C delta^k: consecutive decades drop by k.
        CHECK(std::abs((logs[0] - logs[1]) - c.k) <= 0.1);
        CHECK(std::abs((logs[1] - logs[2]) - c.k) <= 0.1);
    }
}

TEST_CASE("eigenvalue error drops at least 8x per step halving") {
    // Truncation-dominated regime: coarse steps.
    const SolverOptions coarse{.steps = 64, .mesh = 128};
    const SolverOptions fine{.steps = 128, .mesh = 128};
    const double lam_coarse = refine_eigenvalue(zero2(), 9.8, coarse);
    const double lam_fine = refine_eigenvalue(zero2(), 9.8, fine);
    const double e_coarse = std::abs(lam_coarse - kPi2);
    const double e_fine = std::abs(lam_fine - kPi2);
    CHECK(e_coarse / e_fine >= 8.0);
}
