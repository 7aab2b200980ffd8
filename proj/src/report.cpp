#include "vsl/report.hpp"

#include <fstream>
#include <sstream>

#include "vsl/json_io.hpp"
#include "vsl/verify.hpp"

namespace vsl {

using nlohmann::json;

namespace {

json diagnostics_json(const SpectrumDiagnostics& d) {
    json j;
    j["steps"] = d.steps;
    j["mesh"] = d.mesh;
    j["sv_tol"] = d.sv_tol;
    j["cluster_tol"] = d.cluster_tol;
    j["weyl_count"] = d.weyl_count;
    j["weyl_expected"] = d.weyl_expected;
    j["notes"] = d.notes;
    return j;
}

}  // namespace

json spectrum_report(const Potential& v, const Spectrum& spectrum) {
    json j;
    j["potential_hash"] = potential_hash(v);
    j["lambda_max"] = spectrum.lambda_max;
    json groups = json::array();
    for (const auto& g : spectrum.groups) {
        json gj;
        gj["lambda"] = g.lambda;
        gj["k"] = g.k;
        gj["e"] = basis_to_json(g.e);
        groups.push_back(std::move(gj));
    }
    j["groups"] = std::move(groups);
    j["diagnostics"] = diagnostics_json(spectrum.diagnostics);
    return j;
}

json data_report(const Potential& v, const Spectrum& spectrum,
                 const SolverOptions& opt) {
    json j = spectrum_report(v, spectrum);

    for (size_t i = 0; i < spectrum.groups.size(); ++i) {
        const EigenGroup& g = spectrum.groups[i];
        require(g.attached, "data_report: group data not attached");
        json& gj = j["groups"][i];
        gj["S_alpha"] = matrix_to_json(g.s_alpha);
        gj["g_alpha"] = matrix_to_json(g.g_alpha);
        gj["B_alpha"] = matrix_to_json(g.b_alpha);
        gj["D_alpha"] = matrix_to_json(g.d_alpha);
        gj["Z_alpha"] = matrix_to_json(g.z_alpha);
        gj["F_alpha"] = basis_to_json(g.f_alpha);
        gj["E_sharp"] = basis_to_json(g.e_sharp);
        gj["checks"] = json::object();
    }

    // Named residuals per group, folded in from the check suite.
    auto fold = [&](const std::vector<CheckReport>& reports) {
        for (const auto& r : reports) {
            if (!r.context.contains("group")) continue;
            const size_t gi = r.context["group"].get<size_t>() - 1;
            if (gi >= spectrum.groups.size()) continue;
            j["groups"][gi]["checks"][r.name] = r.residual;
        }
    };
    fold(check_norming(v, spectrum, opt.steps));
    fold(check_group_data(v, spectrum, opt));
    return j;
}

std::vector<TransformSpec> load_transform_specs(const std::string& path,
                                                Index n) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open transform spec file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    json j = json::parse(buf.str(), nullptr, false);
    if (j.is_discarded())
        throw ParseError("transform spec file: invalid JSON [" + path + "]");

    json list = j.is_array() ? j : json::array({j});
    std::vector<TransformSpec> specs;
    for (size_t i = 0; i < list.size(); ++i) {
        const json& item = list[i];
        const std::string where = "transform spec " + std::to_string(i + 1);
        if (!item.is_object() || !item.contains("alpha") ||
            !item["alpha"].is_number_integer())
            throw ParseError(where + ": needs integer \"alpha\"");
        if (!item.contains("B"))
            throw ParseError(where + ": needs matrix \"B\"");
        TransformSpec spec;
        spec.alpha_index = item["alpha"].get<int>();
        if (spec.alpha_index < 1)
            throw ParseError(where + ": \"alpha\" is 1-based and positive");
        spec.b = matrix_from_json(item["B"], n, n, where + ": B");
        specs.push_back(std::move(spec));
    }
    if (specs.empty()) throw ParseError("transform spec file: empty list");
    return specs;
}

json transform_spec_to_json(const TransformSpec& spec) {
    json j;
    j["alpha"] = spec.alpha_index;
    j["B"] = matrix_to_json(spec.b);
    return j;
}

}  // namespace vsl
