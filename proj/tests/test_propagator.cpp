#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"
#include "vsl/linalg.hpp"
#include "vsl/propagator.hpp"

using namespace vsl;
using namespace vsl::testing;

TEST_CASE("free propagation matches the closed form") {
    const MatrixSolution sol = propagate(zero2(), kPi2, 4096);
    CHECK(sol.phi1().norm() <= 1e-8);
    CHECK((sol.dphi1() + CMatrix::Identity(2, 2)).norm() <= 1e-8);

    // Initial conditions are exact at the first node.
    CHECK(sol.phi[0].norm() == 0.0);
    CHECK((sol.dphi[0] - CMatrix::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("lambda = 0 free solution is polynomial, integrator exact") {
    const MatrixSolution sol = propagate(zero2(), 0.0, 64);
    for (int i = 0; i <= 64; ++i) {
        CHECK((sol.phi[i] - sol.x_at(i) * CMatrix::Identity(2, 2)).norm() <=
              1e-14);
        CHECK((sol.dphi[i] - CMatrix::Identity(2, 2)).norm() <= 1e-14);
    }
}

TEST_CASE("constant diagonal propagation decouples per channel") {
    const double lam = kPi2 + 10.0;
    const MatrixSolution sol = propagate(diag2(0, 10), lam, 4096);
    // Channel 1 sees lambda, channel 2 sees lambda - 10 = pi^2 (a root).
    CHECK(std::abs(sol.phi1()(0, 0) - free_phi(1.0, lam)) <= 1e-8);
    CHECK(std::abs(sol.phi1()(1, 1)) <= 1e-8);
    CHECK(std::abs(sol.phi1()(0, 1)) <= 1e-14);
    CHECK(std::abs(sol.phi1()(1, 0)) <= 1e-14);
}

TEST_CASE("running Gram matches the free closed form") {
    const MatrixSolution sol = propagate(zero2(), kPi2, 2048);
    // S(1) = int_0^1 sin^2(pi t)/pi^2 = 1/(2 pi^2) per channel.
    CHECK((sol.s.back() - CMatrix::Identity(2, 2) / (2 * kPi2)).norm() <= 1e-10);
    // S is Hermitian PSD and nondecreasing in the Loewner order.
    for (int i : {100, 500, 1000, 2000}) {
        CHECK(hermitian_defect(sol.s[i]) <= 1e-12);
        auto [lo, vecs] = hermitian_eig(
            CMatrix(sol.s[i] - sol.s[i / 2]));
        CHECK(lo(0) >= -1e-12);
    }
}

TEST_CASE("step doubling shows 4th order convergence") {
    std::vector<CMatrix> coeffs = {mat2(1, 0, 0, -1), mat2(2, 1, 1, 0)};
    const Potential v = Potential::fourier(coeffs);
    const double lam = 23.0;
    const CMatrix c64 = propagate(v, lam, 64).phi1();
    const CMatrix c128 = propagate(v, lam, 128).phi1();
    const CMatrix c256 = propagate(v, lam, 256).phi1();
    const double ratio = (c64 - c128).norm() / (c128 - c256).norm();
    CHECK(ratio >= 16.0 * 0.7);
    CHECK(ratio <= 16.0 * 1.3);

    CHECK(propagation_error_estimate(v, lam, 64) ==
          doctest::Approx((c64 - c128).norm()));
}

TEST_CASE("wronskian conservation for real lambda") {
    const Potential v = random_fourier(2, 3, 2.0, 17);
    for (double lam : {-4.0, 3.0, 45.0, 97.0}) {
        const MatrixSolution sol = propagate(v, lam, 4096);
        CHECK(wronskian_defect(sol) <= 1e-8);
    }
}

TEST_CASE("wronskian defect flags a non-self-adjoint trajectory") {
    // Hand-integrated problem with V deliberately non-Hermitian: the
    // identity genuinely fails, and the defect must see it.
    const CMatrix bad = mat2(0, 3, 0, 0);  // not Hermitian
    const int steps = 512;
    const double h = 1.0 / steps;
    const double lam = 5.0;
    MatrixSolution sol;
    sol.lambda = lam;
    sol.steps = steps;
    CMatrix p = CMatrix::Zero(2, 2), dp = CMatrix::Identity(2, 2);
    sol.phi.push_back(p);
    sol.dphi.push_back(dp);
    const CMatrix w = bad - lam * CMatrix::Identity(2, 2);
    auto f = [&](const CMatrix& pp) { return (w * pp).eval(); };
    for (int i = 0; i < steps; ++i) {
        // RK4 on the same first-order system
        const CMatrix k1p = dp, k1d = f(p);
        const CMatrix k2p = dp + h / 2 * k1d, k2d = f(p + h / 2 * k1p);
        const CMatrix k3p = dp + h / 2 * k2d, k3d = f(p + h / 2 * k2p);
        const CMatrix k4p = dp + h * k3d, k4d = f(p + h * k3p);
        p += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
        dp += h / 6 * (k1d + 2 * k2d + 2 * k3d + k4d);
        sol.phi.push_back(p);
        sol.dphi.push_back(dp);
    }
    CHECK(wronskian_defect(sol) > 1e-3);
}

TEST_CASE("lambda derivative consistent with finite differences") {
    const Potential v = diag2(0, 10);
    const double lam = 7.0, delta = 1e-4;
    const MatrixSolution sol = propagate(v, lam, 2048, true);
    const CMatrix plus = propagate(v, lam + delta, 2048).phi1();
    const CMatrix minus = propagate(v, lam - delta, 2048).phi1();
    const CMatrix fd = (plus - minus) / (2 * delta);
    CHECK((fd - sol.phidot.back()).norm() <= 1e-5);
    CHECK(sol.phidot.front().norm() == 0.0);
    CHECK(sol.dphidot.front().norm() == 0.0);
}

TEST_CASE("chi via reflection matches the free closed form") {
    const double lam = kPi2 / 4;
    const auto [chi0, dchi0] = chi_at(zero2(), lam, 0.0, 2048);
    // chi(x) = -sin(sqrt(l)(1-x))/sqrt(l) I; at x=0: -(2/pi) I.
    CHECK((chi0 + (2.0 / kPi) * CMatrix::Identity(2, 2)).norm() <= 1e-10);
    CHECK((dchi0 - free_dphi(1.0, lam) * CMatrix::Identity(2, 2)).norm() <=
          1e-10);

    // Terminal condition at x=1, any potential.
    const auto [chi1, dchi1] = chi_at(random_fourier(2, 2, 1.0, 5), 11.0, 1.0,
                                      2048);
    CHECK(chi1.norm() <= 1e-9);
    CHECK((dchi1 - CMatrix::Identity(2, 2)).norm() <= 1e-9);

    // Constant diagonal: per-channel scalar closed form.
    const double mu = 13.0;
    const auto [chid, dchid] = chi_at(diag2(0, 10), mu, 0.4, 2048);
    CHECK(std::abs(chid(0, 0) + free_phi(0.6, mu)) <= 1e-9);
    CHECK(std::abs(chid(1, 1) + free_phi(0.6, mu - 10)) <= 1e-9);
    CHECK(std::abs(dchid(0, 0) - free_dphi(0.6, mu)) <= 1e-9);
}

TEST_CASE("connection identity over the grid") {
    const Potential v = random_fourier(2, 3, 1.5, 23);
    const int steps = 2048;
    for (double lam : {2.0, 31.0, 64.0}) {
        const MatrixSolution sol = propagate(v, lam, steps);
        const MatrixSolution rsol = propagate(reflect(v), lam, steps);
        double worst = 0;
        for (int i = 0; i <= steps; i += 64) {
            const CMatrix chi = -rsol.phi[steps - i];
            const CMatrix dchi = rsol.dphi[steps - i];
            worst = std::max(worst, (chi.adjoint() * sol.dphi[i] -
                                     dchi.adjoint() * sol.phi[i] + sol.phi1())
                                        .norm());
        }
        CHECK(worst <= 1e-7);
    }
}

TEST_CASE("cross gram on the eigenvalue diagonal equals the running Gram") {
    const MatrixSolution group = propagate(zero2(), kPi2, 2048);
    const CrossGram cg = cross_gram(zero2(), kPi2, group, 2048);
    CHECK((cg.t1() - CMatrix::Identity(2, 2) / (2 * kPi2)).norm() <= 1e-10);
}

TEST_CASE("cross gram orthogonality and quadrature value") {
    const MatrixSolution group = propagate(zero2(), kPi2, 2048);
    // sin(pi t) vs sin(2 pi t): orthogonal on [0,1].
    const CrossGram cg_orth = cross_gram(zero2(), 4 * kPi2, group, 2048);
    CHECK(cg_orth.t1().norm() <= 1e-10);
    // lambda = 0: int_0^1 (sin(pi t)/pi) t dt = 1/pi^2 per channel.
    const CrossGram cg_zero = cross_gram(zero2(), 0.0, group, 2048);
    CHECK((cg_zero.t1() - CMatrix::Identity(2, 2) / kPi2).norm() <= 1e-10);
}

TEST_CASE("cross gram boundary formula off the diagonal") {
    const Potential v = random_fourier(2, 3, 2.0, 31);
    const double lam_a = 12.0, lam = 35.0;  // any two distinct reals work
    const MatrixSolution a = propagate(v, lam_a, 2048);
    const MatrixSolution b = propagate(v, lam, 2048);
    const CrossGram cg = cross_gram(v, lam, a, 2048);
    const CMatrix boundary = (a.phi1().adjoint() * b.dphi1() -
                              a.dphi1().adjoint() * b.phi1()) /
                             (lam_a - lam);
    CHECK((cg.t1() - boundary).norm() <= 1e-7);
}

TEST_CASE("cross gram rejects mismatched grids") {
    const MatrixSolution group = propagate(zero2(), kPi2, 1024);
    CHECK_THROWS_AS(cross_gram(zero2(), 1.0, group, 2048), ContractViolation);
}

TEST_CASE("propagate validates the step count") {
    CHECK_THROWS_AS(propagate(zero2(), 1.0, 15), ContractViolation);
    CHECK_THROWS_AS(propagate(zero2(), 1.0, 33), ContractViolation);
}
