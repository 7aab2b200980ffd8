#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "vsl/darboux.hpp"
#include "vsl/spectral_data.hpp"
#include "vsl/spectrum.hpp"

namespace vsl {

// Outcome of one named numerical identity check.
struct CheckReport {
    std::string name;
    double residual = 0;
    double tolerance = 0;
    bool passed = false;
    bool skipped = false;  // hypothesis of the check not met
    nlohmann::json context;

    static CheckReport make(std::string name, double residual, double tol,
                            nlohmann::json context = {});
    static CheckReport skip(std::string name, std::string why);
};

struct VerifyOptions {
    int steps = 4096;
    double lambda_max = 100;
    unsigned seed = 1;
    int jobs = 1;
    std::optional<TransformSpec> transform;
    // Per-check tolerance overrides keyed by report name.
    std::map<std::string, double> tolerances;
};

// Wronskian identity phi* phi' = phi'* phi at every node, per lambda.
std::vector<CheckReport> check_wronskian(const Potential& v,
                                         const std::vector<double>& lambdas,
                                         int steps);

// Connection identity chi* phi' - chi'* phi = -phi(1) over the grid.
std::vector<CheckReport> check_connection(const Potential& v,
                                          const std::vector<double>& lambdas,
                                          int steps);

// Agreement of the two norming computations e* S e and e* [phidot* phi'](1) e.
std::vector<CheckReport> check_norming(const Potential& v,
                                       const Spectrum& spectrum, int steps);

// Decay trend of z^2 ||phi(1, z^2) - sin z / z I + cos z/(2 z^2) int V||
// along z = pi (n + 1/2).
CheckReport check_asymptotics(const Potential& v, const std::vector<int>& ns,
                              int steps);

// Per-group identities: boundary projector, D >= 0, dim F = N - k,
// E transversal to F, the two constructions of F, residue-matrix basis
// invariance, det-root multiplicity, Z nonsingular, inverse pole expansion,
// contour residue vs -g^{-1}.
std::vector<CheckReport> check_group_data(const Potential& v,
                                          const Spectrum& spectrum,
                                          const SolverOptions& opt);

// Transform postconditions for one move (spectrum preservation, residue
// retarget, untouched groups, eigenspace target, forbidden subspace,
// closed-form solution agreement, cache invariants).
std::vector<CheckReport> check_transform(const Potential& v,
                                         const TransformSpec& spec,
                                         const VerifyOptions& opt);

// The N=2 pattern with two simple lowest groups: F_1 = E_2, F_2 = E_1 and
// E_1 transversal to E_2; skipped when the multiplicity pattern is absent.
CheckReport check_example_n2(const Potential& v, const Spectrum& spectrum);

// Transform followed by the inverse move (target = re-measured original
// residue matrix) returns the potential, sup-norm over 101 sample points.
CheckReport check_uniqueness_roundtrip(const Potential& v,
                                       const TransformSpec& spec,
                                       const VerifyOptions& opt);

// Full batch; deterministic given (potential, seed, tolerances).
std::vector<CheckReport> run_verify_suite(const Potential& v,
                                          const VerifyOptions& opt);

nlohmann::json reports_to_json(const std::vector<CheckReport>& reports);
bool all_passed(const std::vector<CheckReport>& reports);

}  // namespace vsl
