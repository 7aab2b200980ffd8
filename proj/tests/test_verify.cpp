#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"
#include "vsl/verify.hpp"

using namespace vsl;
using namespace vsl::testing;

namespace {

SolverOptions fast_options() {
    SolverOptions opt;
    opt.steps = 2048;
    opt.mesh = 128;
    return opt;
}

const CheckReport& find(const std::vector<CheckReport>& reports,
                        const std::string& name) {
    for (const auto& r : reports)
        if (r.name == name) return r;
    REQUIRE_MESSAGE(false, "missing report: " << name);
    static CheckReport dummy;
    return dummy;
}

}  // namespace

TEST_CASE("wronskian check passes on self-adjoint problems") {
    for (const auto& r : check_wronskian(zero2(), {5.0}, 1024))
        CHECK(r.residual <= 1e-12);
    for (const auto& r : check_wronskian(diag2(0, 10), {17.0}, 2048)) {
        CHECK(r.passed);
        CHECK(r.residual <= 1e-8);
    }
}

TEST_CASE("connection check on closed-form and generic potentials") {
    for (const auto& r : check_connection(zero2(), {2.0}, 1024))
        CHECK(r.residual <= 1e-10);
    for (const auto& r :
         check_connection(random_fourier(2, 3, 2.0, 4), {3.0, 20.0, 71.0}, 2048))
        CHECK(r.passed);
}

TEST_CASE("asymptotics trend on a constant diagonal") {
    const CheckReport r = check_asymptotics(diag2(0, 10), {5, 10, 20, 40}, 2048);
    CHECK(r.passed);
    const auto& residuals = r.context["residuals"];
    CHECK(residuals.size() == 4);
    CHECK(residuals[3].get<double>() < residuals[0].get<double>());
}

TEST_CASE("asymptotics check flags an under-resolved trajectory") {
    // Negative control: at 64 steps the large orders are integrated with
    // O(1) error, the scaled residual grows with z, and the decay trend
    // must fail.  The tolerance is therefore demonstrably discriminating.
    const CheckReport broken = check_asymptotics(zero2(), {5, 10, 20, 40}, 64);
    CHECK_FALSE(broken.passed);
}

TEST_CASE("transform checks pass on the rotation move") {
    VerifyOptions opt;
    opt.steps = 2048;
    opt.lambda_max = 60.0;
    const CVector u = unit2(std::cos(kPi / 6), std::sin(kPi / 6));
    TransformSpec spec{1, CMatrix(4 * kPi2 * u * u.adjoint())};
    const auto reports = check_transform(diag2(0, 10), spec, opt);
    for (const auto& r : reports) CHECK_MESSAGE(r.passed, r.name);
    CHECK(find(reports, "spectrum_preserved").residual <= 1e-5);
    CHECK(find(reports, "residue_target").residual <= 1e-4);
    CHECK(find(reports, "eigenspace_target").residual <= 1e-4);
    CHECK(find(reports, "forbidden_preserved").residual <= 1e-4);
    CHECK(find(reports, "closed_form_solution").residual <= 1e-5);
}

TEST_CASE("identity transform produces near-zero residuals") {
    VerifyOptions opt;
    opt.steps = 2048;
    opt.lambda_max = 20.0;
    SolverOptions sopt = fast_options();
    Spectrum s = compute_spectrum(zero2(), 20.0, sopt);
    attach_all(zero2(), s, sopt);
    TransformSpec spec{1, s.groups[0].b_alpha};
    const auto reports = check_transform(zero2(), spec, opt);
    for (const auto& r : reports) CHECK_MESSAGE(r.passed, r.name);
    CHECK(find(reports, "transform_kernel_boundary").residual <= 1e-12);
}

TEST_CASE("uniqueness roundtrip residual is tiny") {
    VerifyOptions opt;
    opt.steps = 2048;
    opt.lambda_max = 20.0;
    TransformSpec spec{1, CMatrix(mat2(2 * kPi2, 0, 0, 8 * kPi2))};
    const CheckReport r = check_uniqueness_roundtrip(zero2(), spec, opt);
    CHECK(r.passed);
    CHECK(r.residual <= 1e-6);
}

TEST_CASE("n2 pattern check outcomes") {
    SolverOptions sopt = fast_options();
    SUBCASE("skipped when the lowest group is degenerate") {
        Spectrum s = compute_spectrum(zero2(), 20.0, sopt);
        attach_all(zero2(), s, sopt);
        const CheckReport r = check_example_n2(zero2(), s);
        CHECK(r.skipped);
    }
    SUBCASE("passes on the truncated two-group window") {
        Spectrum s = compute_spectrum(diag2(0, 10), 30.0, sopt);
        attach_all(diag2(0, 10), s, sopt);
        REQUIRE(s.groups.size() == 2);
        const CheckReport r = check_example_n2(diag2(0, 10), s);
        CHECK_FALSE(r.skipped);
        CHECK(r.passed);
        CHECK(r.residual <= 1e-6);
    }
    SUBCASE("skipped when visible higher groups are simple") {
        Spectrum s = compute_spectrum(diag2(0, 10), 60.0, sopt);
        attach_all(diag2(0, 10), s, sopt);
        REQUIRE(s.groups.size() == 4);
        const CheckReport r = check_example_n2(diag2(0, 10), s);
        CHECK(r.skipped);
    }
}

TEST_CASE("full suite passes on the reference potentials") {
    VerifyOptions opt;
    opt.steps = 2048;
    opt.lambda_max = 30.0;
    for (const Potential& v : {zero2(), diag2(0, 10)}) {
        const auto reports = run_verify_suite(v, opt);
        for (const auto& r : reports) {
            const bool ok = r.skipped || r.passed;
            CHECK_MESSAGE(ok, r.name << " residual " << r.residual);
        }
        CHECK(all_passed(reports));
    }
}

TEST_CASE("suite is deterministic for a fixed seed") {
    VerifyOptions opt;
    opt.steps = 1024;
    opt.lambda_max = 20.0;
    opt.seed = 5;
    const auto a = run_verify_suite(zero2(), opt);
    const auto b = run_verify_suite(zero2(), opt);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].name == b[i].name);
        CHECK(a[i].residual == b[i].residual);
    }
    CHECK(reports_to_json(a).dump() == reports_to_json(b).dump());
}

TEST_CASE("tolerance overrides flip outcomes") {
    VerifyOptions opt;
    opt.steps = 1024;
    opt.lambda_max = 20.0;
    opt.tolerances["wronskian"] = 1e-30;  // impossible
    const auto reports = run_verify_suite(zero2(), opt);
    const CheckReport& w = find(reports, "wronskian");
    CHECK(w.tolerance == 1e-30);
    CHECK_FALSE(all_passed(reports));
}

TEST_CASE("reports serialize with all fields") {
    const CheckReport r = CheckReport::make("demo", 0.5, 1.0,
                                            nlohmann::json{{"k", 3}});
    const nlohmann::json j = reports_to_json({r});
    CHECK(j[0]["name"] == "demo");
    CHECK(j[0]["residual"] == 0.5);
    CHECK(j[0]["passed"] == true);
    CHECK(j[0]["context"]["k"] == 3);
}
