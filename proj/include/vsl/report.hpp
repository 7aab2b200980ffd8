#pragma once

#include <json.hpp>

#include <vector>

#include "vsl/darboux.hpp"
#include "vsl/potential.hpp"
#include "vsl/spectrum.hpp"

namespace vsl {

// {"potential_hash", "lambda_max", "groups":[{"lambda","k","e"}, ...],
//  "diagnostics": {...}}
nlohmann::json spectrum_report(const Potential& v, const Spectrum& spectrum);

// Spectrum report extended with the attached per-group data (S, g, B, D, Z,
// F, adjoint kernel) and named residual checks, including the contour
// residue cross-check on the lowest groups.
nlohmann::json data_report(const Potential& v, const Spectrum& spectrum,
                           const SolverOptions& opt);

// TransformSpec file: {"alpha": int, "B": matrix} or an ordered list of
// such objects.
std::vector<TransformSpec> load_transform_specs(const std::string& path,
                                                Index n);
nlohmann::json transform_spec_to_json(const TransformSpec& spec);

}  // namespace vsl
