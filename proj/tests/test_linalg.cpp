#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "test_util.hpp"
#include "vsl/linalg.hpp"

using namespace vsl;
using namespace vsl::testing;

namespace {

CMatrix random_hermitian(Index n, std::mt19937_64& gen) {
    std::normal_distribution<double> dist;
    CMatrix r(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) r(i, j) = Complex(dist(gen), dist(gen));
    return hermitian_part(r);
}

}  // namespace

TEST_CASE("hermitian_eig on simple matrices") {
    auto [ev_id, vec_id] = hermitian_eig(CMatrix::Identity(2, 2));
    CHECK(ev_id(0) == doctest::Approx(1.0));
    CHECK(ev_id(1) == doctest::Approx(1.0));

    auto [ev_diag, vec_diag] = hermitian_eig(mat2(1, 0, 0, 3));
    CHECK(ev_diag(0) == doctest::Approx(1.0));
    CHECK(ev_diag(1) == doctest::Approx(3.0));
    CHECK(std::abs(vec_diag(0, 0)) == doctest::Approx(1.0));

    // [[2,1],[1,2]]: characteristic polynomial (2-mu)^2 - 1 = 0.
    auto [ev, vec] = hermitian_eig(mat2(2, 1, 1, 2));
    CHECK(ev(0) == doctest::Approx(1.0));
    CHECK(ev(1) == doctest::Approx(3.0));
    const CVector lo = vec.col(0), hi = vec.col(1);
    CHECK(std::abs(lo.dot(unit2(1, -1))) == doctest::Approx(1.0));
    CHECK(std::abs(hi.dot(unit2(1, 1))) == doctest::Approx(1.0));
}

TEST_CASE("hermitian_eig rejects bad input") {
    CHECK_THROWS_AS(hermitian_eig(CMatrix::Zero(2, 3)), ContractViolation);
    CHECK_THROWS_AS(hermitian_eig(mat2(0, 1, 0, 0)), ContractViolation);
}

TEST_CASE("singular_values") {
    const RVector z = singular_values(CMatrix::Zero(2, 2));
    CHECK(z(0) == doctest::Approx(0.0));
    CHECK(z(1) == doctest::Approx(0.0));

    const RVector d = singular_values(mat2(3, 0, 0, -4));
    CHECK(d(0) == doctest::Approx(4.0));
    CHECK(d(1) == doctest::Approx(3.0));

    const RVector nil = singular_values(mat2(0, 1, 0, 0));
    CHECK(nil(0) == doctest::Approx(1.0));
    CHECK(nil(1) == doctest::Approx(0.0));
}

TEST_CASE("null_space") {
    CHECK(null_space(CMatrix::Zero(2, 2), 1e-8).dim() == 2);

    const SubspaceBasis e2 = null_space(mat2(1, 0, 0, 0), 1e-8);
    REQUIRE(e2.dim() == 1);
    CHECK(std::abs(e2.columns()(1, 0)) == doctest::Approx(1.0));

    // phi(1, pi^2) for the free two-channel problem vanishes identically.
    const double f = free_phi(1.0, kPi2);
    CHECK(null_space(f * CMatrix::Identity(2, 2), 1e-6).dim() == 2);
}

TEST_CASE("projector") {
    const CMatrix p1 = projector(SubspaceBasis(CMatrix(unit2(1, 0))));
    CHECK((p1 - mat2(1, 0, 0, 0)).norm() == doctest::Approx(0.0));

    CHECK((projector(SubspaceBasis::full(2)) - CMatrix::Identity(2, 2)).norm() ==
          doctest::Approx(0.0));

    const CMatrix ph = projector(SubspaceBasis(CMatrix(unit2(1, 1))));
    CHECK((ph - mat2(0.5, 0.5, 0.5, 0.5)).norm() == doctest::Approx(0.0));
}

TEST_CASE("subspace_complement") {
    const SubspaceBasis c1 =
        subspace_complement(SubspaceBasis(CMatrix(unit2(1, 0))));
    REQUIRE(c1.dim() == 1);
    CHECK(std::abs(c1.columns()(1, 0)) == doctest::Approx(1.0));

    CHECK(subspace_complement(SubspaceBasis::full(2)).dim() == 0);

    const SubspaceBasis ch =
        subspace_complement(SubspaceBasis(CMatrix(unit2(1, 1))));
    REQUIRE(ch.dim() == 1);
    CHECK(std::abs(ch.columns().col(0).dot(unit2(1, -1))) ==
          doctest::Approx(1.0));
}

TEST_CASE("subspace_image") {
    const SubspaceBasis e1(CMatrix(unit2(1, 0)));
    CHECK(max_principal_angle(subspace_image(CMatrix::Identity(2, 2), e1), e1) ==
          doctest::Approx(0.0));
    CHECK(max_principal_angle(subspace_image(mat2(2, 0, 0, 3), e1), e1) ==
          doctest::Approx(0.0));

    const SubspaceBasis swapped = subspace_image(mat2(0, 1, 1, 0), e1);
    REQUIRE(swapped.dim() == 1);
    CHECK(std::abs(swapped.columns()(1, 0)) == doctest::Approx(1.0));

    // Rank drops when the map kills the subspace.
    CHECK(subspace_image(mat2(0, 0, 0, 1), e1).dim() == 0);
}

TEST_CASE("intersection_dim") {
    const SubspaceBasis e1(CMatrix(unit2(1, 0)));
    const SubspaceBasis e2(CMatrix(unit2(0, 1)));
    const SubspaceBasis diag(CMatrix(unit2(1, 1)));
    CHECK(intersection_dim(e1, e2) == 0);
    CHECK(intersection_dim(e1, e1) == 1);
    CHECK(intersection_dim(e1, diag) == 0);  // principal cosine 1/sqrt(2)
    CHECK(intersection_dim(e1, SubspaceBasis::full(2)) == 1);
    CHECK(intersection_dim(diag, diag, 1e-12) == 1);
}

TEST_CASE("intersection_dim is symmetric") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix a = random_hermitian(4, gen);
        const CMatrix b = random_hermitian(4, gen);
        const SubspaceBasis sa = SubspaceBasis::span_of(a.leftCols(2));
        const SubspaceBasis sb = SubspaceBasis::span_of(b.leftCols(3));
        CHECK(intersection_dim(sa, sb) == intersection_dim(sb, sa));
    }
}

TEST_CASE("eigendecomposition reconstructs the matrix") {
    std::mt19937_64 gen(7);
    for (Index n : {2, 3, 5, 8}) {
        for (int trial = 0; trial < 10; ++trial) {
            const CMatrix m = random_hermitian(n, gen);
            auto [ev, vec] = hermitian_eig(m);
            CMatrix rebuilt = CMatrix::Zero(n, n);
            for (Index i = 0; i < n; ++i)
                rebuilt += ev(i) * vec.col(i) * vec.col(i).adjoint();
            CHECK((rebuilt - m).norm() <= 1e-9 * (1.0 + m.norm()));
            const CMatrix gram = vec.adjoint() * vec;
            CHECK((gram - CMatrix::Identity(n, n)).norm() <= 1e-10 * n);
        }
    }
}

TEST_CASE("projector of complement completes the identity") {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 10; ++trial) {
        const CMatrix m = random_hermitian(5, gen);
        const SubspaceBasis e = SubspaceBasis::span_of(m.leftCols(2));
        const CMatrix sum = projector(e) + projector(subspace_complement(e));
        CHECK((sum - CMatrix::Identity(5, 5)).norm() <= 1e-9);
    }
}

TEST_CASE("null_space vectors are annihilated") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 10; ++trial) {
        CMatrix m = random_hermitian(4, gen);
        // Flatten two directions to create a kernel.
        auto [ev, vec] = hermitian_eig(m);
        CMatrix squashed = CMatrix::Zero(4, 4);
        for (Index i = 2; i < 4; ++i)
            squashed += ev(i) * vec.col(i) * vec.col(i).adjoint();
        const double tol = 1e-9;
        const SubspaceBasis kernel = null_space(squashed, tol);
        REQUIRE(kernel.dim() == 2);
        const double scale = singular_values(squashed)(0);
        for (Index j = 0; j < kernel.dim(); ++j)
            CHECK((squashed * kernel.columns().col(j)).norm() <=
                  tol * std::max(scale, 1.0));
    }
}

TEST_CASE("singular values consistent with the Gram spectrum") {
    std::mt19937_64 gen(13);
    std::normal_distribution<double> dist;
    CMatrix m(3, 3);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 3; ++j) m(i, j) = Complex(dist(gen), dist(gen));
    const RVector sv = singular_values(m);
    auto [ev, vec] = hermitian_eig((m.adjoint() * m).eval());
    for (Index i = 0; i < 3; ++i)
        CHECK(sv(i) * sv(i) == doctest::Approx(ev(2 - i)).epsilon(1e-10));
}
