// Command-line front end: spectrum | data | transform | verify | plot.
//
// Exit codes: 0 success, 1 usage, 2 parse error, 3 solver error,
// 4 rejected transform, 5 verification failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "vsl/darboux.hpp"
#include "vsl/report.hpp"
#include "vsl/spectral_data.hpp"
#include "vsl/verify.hpp"

namespace {

using nlohmann::json;

struct RunConfig {
    int steps = 4096;
    int mesh = 256;
    double lambda_max = 100.0;
    double sv_tol = 1e-6;
    double cluster_tol = 1e-6;
    int contour_nodes = 64;
    int jobs = 1;
    unsigned seed = 1;
    std::string out;
};

struct SharedFlags {
    CLI::Option* steps = nullptr;
    CLI::Option* mesh = nullptr;
    CLI::Option* lambda_max = nullptr;
    CLI::Option* sv_tol = nullptr;
    CLI::Option* cluster_tol = nullptr;
    CLI::Option* jobs = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* config = nullptr;
    std::string config_path;
};

SharedFlags add_shared(CLI::App* cmd, RunConfig& cfg) {
    SharedFlags f;
    f.steps = cmd->add_option("--steps", cfg.steps,
                              "Propagation steps (even, >= 16)");
    f.mesh = cmd->add_option("--mesh", cfg.mesh,
                             "Coarse finite-difference mesh (>= 64)");
    f.lambda_max =
        cmd->add_option("--lambda-max", cfg.lambda_max, "Spectral cutoff");
    f.sv_tol =
        cmd->add_option("--sv-tol", cfg.sv_tol, "Relative kernel threshold");
    f.cluster_tol = cmd->add_option("--cluster-tol", cfg.cluster_tol,
                                    "Relative eigenvalue cluster gap");
    f.jobs = cmd->add_option("--jobs", cfg.jobs, "Parallel worker cap");
    f.seed = cmd->add_option("--seed", cfg.seed, "Seed for randomized probes");
    f.out = cmd->add_option("--out", cfg.out, "Output path (default stdout)");
    f.config = cmd->add_option("--config", f.config_path,
                               "JSON config file (flags take precedence)");
    return f;
}

// Precedence: flags > config file > defaults.
void merge_config(RunConfig& cfg, const SharedFlags& f) {
    if (f.config_path.empty()) return;
    std::ifstream in(f.config_path);
    if (!in)
        throw vsl::ParseError("cannot open config file: " + f.config_path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw vsl::ParseError("config file: invalid JSON object [" +
                              f.config_path + "]");
    auto take = [&](const char* key, auto& slot, const CLI::Option* opt) {
        if (opt->count() == 0 && j.contains(key))
            slot = j[key].get<std::decay_t<decltype(slot)>>();
    };
    take("steps", cfg.steps, f.steps);
    take("mesh", cfg.mesh, f.mesh);
    take("lambda_max", cfg.lambda_max, f.lambda_max);
    take("sv_tol", cfg.sv_tol, f.sv_tol);
    take("cluster_tol", cfg.cluster_tol, f.cluster_tol);
    take("jobs", cfg.jobs, f.jobs);
    take("seed", cfg.seed, f.seed);
}

void validate_config(const RunConfig& cfg) {
    vsl::require(cfg.steps >= 16 && cfg.steps % 2 == 0,
                 "config: steps must be even and >= 16");
    vsl::require(cfg.mesh >= 64, "config: mesh must be >= 64");
    vsl::require(cfg.sv_tol > 0 && cfg.cluster_tol > 0,
                 "config: tolerances must be positive");
    vsl::require(cfg.contour_nodes >= 32, "config: contour nodes >= 32");
    vsl::require(cfg.jobs >= 1, "config: jobs must be >= 1");
}

vsl::SolverOptions solver_options(const RunConfig& cfg) {
    vsl::SolverOptions o;
    o.steps = cfg.steps;
    o.mesh = cfg.mesh;
    o.sv_tol = cfg.sv_tol;
    o.cluster_tol = cfg.cluster_tol;
    o.jobs = cfg.jobs;
    return o;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw vsl::ParseError("cannot open for writing: " + out_path);
    out << text << "\n";
}

std::string csv_complex_header(const std::string& prefix, vsl::Index n) {
    std::string h;
    for (vsl::Index i = 0; i < n; ++i)
        for (vsl::Index j = 0; j < n; ++j) {
            const std::string entry =
                prefix + std::to_string(i + 1) + std::to_string(j + 1);
            h += "," + entry + "_re," + entry + "_im";
        }
    return h;
}

void append_matrix_csv(std::string& row, const vsl::CMatrix& m) {
    char buf[80];
    for (vsl::Index i = 0; i < m.rows(); ++i)
        for (vsl::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g", m(i, j).real(),
                          m(i, j).imag());
            row += buf;
        }
}

std::string sigma_scan_csv(const vsl::Potential& v, double lambda_min,
                           double lambda_max, int points, int steps) {
    std::string csv = "lambda,sigma_min,abs_det\n";
    char buf[128];
    for (int i = 0; i < points; ++i) {
        const double lam =
            lambda_min + (lambda_max - lambda_min) * i / (points - 1);
        const vsl::MatrixSolution sol = vsl::propagate(v, lam, steps);
        const vsl::RVector sv = vsl::singular_values(sol.phi1());
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", lam,
                      sv(sv.size() - 1), std::abs(sol.phi1().determinant()));
        csv += buf;
    }
    csv.pop_back();
    return csv;
}

int run(int argc, char** argv) {
    CLI::App app{
        "Spectral data and isospectral transforms of matrix Sturm-Liouville "
        "operators with Dirichlet boundary conditions on [0,1]"};
    app.require_subcommand(1);

    RunConfig cfg;

    // ------------------------------------------------------------ spectrum
    auto* cmd_spectrum = app.add_subcommand(
        "spectrum", "Locate eigenvalues with multiplicities and eigenspaces");
    std::string spectrum_file;
    std::string scan_csv;
    cmd_spectrum->add_option("potential", spectrum_file, "Potential file")
        ->required();
    cmd_spectrum->add_option("--scan-csv", scan_csv,
                             "Also write a lambda/sigma_min/det scan CSV");
    auto spectrum_flags = add_shared(cmd_spectrum, cfg);

    // ---------------------------------------------------------------- data
    auto* cmd_data = app.add_subcommand(
        "data",
        "Spectrum plus norming operators, residue matrices and forbidden "
        "subspaces");
    std::string data_file;
    cmd_data->add_option("potential", data_file, "Potential file")->required();
    auto data_flags = add_shared(cmd_data, cfg);

    // ----------------------------------------------------------- transform
    auto* cmd_transform = app.add_subcommand(
        "transform", "Apply isospectral moves from a transform spec file");
    std::string transform_file, spec_file, transform_report;
    cmd_transform->add_option("potential", transform_file, "Potential file")
        ->required();
    cmd_transform->add_option("spec", spec_file, "Transform spec file")
        ->required();
    cmd_transform->add_option("--report", transform_report,
                              "Write diagnostics JSON here (default stdout)");
    auto transform_flags = add_shared(cmd_transform, cfg);

    // -------------------------------------------------------------- verify
    auto* cmd_verify =
        app.add_subcommand("verify", "Run the named identity checks as a batch");
    std::string verify_file, verify_spec;
    cmd_verify->add_option("potential", verify_file, "Potential file")
        ->required();
    cmd_verify->add_option(
        "--spec", verify_spec,
        "Also check transform postconditions for this spec file");
    auto verify_flags = add_shared(cmd_verify, cfg);

    // ---------------------------------------------------------------- plot
    auto* cmd_plot =
        app.add_subcommand("plot", "Emit CSV data for external plotting");
    std::string plot_file;
    int plot_samples = 201;
    bool plot_sigma = false;
    double plot_lambda_min = 0.0;
    double plot_trajectory = 0.0;
    CLI::Option* plot_trajectory_opt = nullptr;
    cmd_plot->add_option("potential", plot_file, "Potential file")->required();
    cmd_plot->add_option("--samples", plot_samples, "Sample count");
    cmd_plot->add_flag("--sigma-scan", plot_sigma,
                       "lambda vs sigma_min(phi(1,lambda)) scan");
    cmd_plot->add_option("--lambda-min", plot_lambda_min,
                         "Scan start (with --sigma-scan)");
    plot_trajectory_opt =
        cmd_plot->add_option("--trajectory", plot_trajectory,
                             "Dump the phi/phi' trajectory at this lambda");
    auto plot_flags = add_shared(cmd_plot, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // --help is a success; anything else usage
    }

    if (cmd_spectrum->parsed()) {
        merge_config(cfg, spectrum_flags);
        validate_config(cfg);
        const vsl::Potential v = vsl::load_potential(spectrum_file);
        const vsl::Spectrum s =
            vsl::compute_spectrum(v, cfg.lambda_max, solver_options(cfg));
        emit(vsl::spectrum_report(v, s).dump(2), cfg.out);
        if (!scan_csv.empty())
            emit(sigma_scan_csv(v, 0.0, cfg.lambda_max, 400, cfg.steps),
                 scan_csv);
        return 0;
    }

    if (cmd_data->parsed()) {
        merge_config(cfg, data_flags);
        validate_config(cfg);
        const vsl::Potential v = vsl::load_potential(data_file);
        const vsl::SolverOptions opt = solver_options(cfg);
        vsl::Spectrum s = vsl::compute_spectrum(v, cfg.lambda_max, opt);
        vsl::attach_all(v, s, opt);
        emit(vsl::data_report(v, s, opt).dump(2), cfg.out);
        return 0;
    }

    if (cmd_transform->parsed()) {
        merge_config(cfg, transform_flags);
        validate_config(cfg);
        const vsl::Potential v = vsl::load_potential(transform_file);
        const auto specs = vsl::load_transform_specs(spec_file, v.n());
        const vsl::SolverOptions opt = solver_options(cfg);

        json diagnostics;
        diagnostics["stages"] = json::array();
        vsl::Potential current = v;
        for (size_t stage = 0; stage < specs.size(); ++stage) {
            vsl::Spectrum s = vsl::compute_spectrum(current, cfg.lambda_max, opt);
            const auto& spec = specs[stage];
            if (size_t(spec.alpha_index) > s.groups.size())
                throw vsl::RejectedTarget(
                    "transform: alpha index " +
                    std::to_string(spec.alpha_index) + " beyond the " +
                    std::to_string(s.groups.size()) +
                    " group(s) below lambda_max");
            vsl::EigenGroup& g = s.groups[spec.alpha_index - 1];
            vsl::attach_group_data(current, g, opt);
            const vsl::TargetDiagnostics td = vsl::validate_target(spec, g);
            json stage_json;
            stage_json["alpha"] = spec.alpha_index;
            stage_json["lambda_alpha"] = g.lambda;
            stage_json["validation"] = {{"hermitian_ok", td.hermitian_ok},
                                        {"psd_ok", td.psd_ok},
                                        {"rank_ok", td.rank_ok},
                                        {"transversal_ok", td.transversal_ok},
                                        {"min_eigenvalue", td.min_eigenvalue},
                                        {"rank", td.rank},
                                        {"smallest_kept_sv", td.smallest_kept_sv},
                                        {"transversal_angle",
                                         td.transversal_angle},
                                        {"failure", td.failure}};
            if (!td.passed()) {
                diagnostics["stages"].push_back(std::move(stage_json));
                diagnostics["rejected"] = true;
                emit(diagnostics.dump(2), transform_report);
                throw vsl::RejectedTarget("transform stage " +
                                          std::to_string(stage + 1) + ": " +
                                          td.failure);
            }
            current = vsl::build_transform(current, spec, g, cfg.steps);
            const vsl::DarbouxData& cache = *current.darboux_data();
            stage_json["cache"] = {
                {"k_hermitian_residual", cache.k_hermitian_residual},
                {"k_boundary_norm", cache.k_boundary_norm},
                {"max_condition", cache.max_condition}};
            diagnostics["stages"].push_back(std::move(stage_json));
        }

        const std::string out_path =
            cfg.out.empty() ? "transformed_potential.json" : cfg.out;
        vsl::save_potential(current, out_path);
        diagnostics["rejected"] = false;
        diagnostics["output"] = out_path;
        emit(diagnostics.dump(2), transform_report);
        return 0;
    }

    if (cmd_verify->parsed()) {
        merge_config(cfg, verify_flags);
        validate_config(cfg);
        const vsl::Potential v = vsl::load_potential(verify_file);
        vsl::VerifyOptions vopt;
        vopt.steps = cfg.steps;
        vopt.lambda_max = cfg.lambda_max;
        vopt.seed = cfg.seed;
        vopt.jobs = cfg.jobs;
        if (!verify_spec.empty()) {
            const auto specs = vsl::load_transform_specs(verify_spec, v.n());
            vopt.transform = specs.front();
        }
        const auto reports = vsl::run_verify_suite(v, vopt);
        json out;
        out["potential_hash"] = vsl::potential_hash(v);
        out["checks"] = vsl::reports_to_json(reports);
        out["passed"] = vsl::all_passed(reports);
        emit(out.dump(2), cfg.out);
        return vsl::all_passed(reports) ? 0 : 5;
    }

    if (cmd_plot->parsed()) {
        merge_config(cfg, plot_flags);
        validate_config(cfg);
        const vsl::Potential v = vsl::load_potential(plot_file);
        vsl::require(plot_samples >= 2, "plot: need at least two samples");
        if (plot_trajectory_opt->count() > 0) {
            const vsl::MatrixSolution sol =
                vsl::propagate(v, plot_trajectory, cfg.steps);
            std::string csv = "x" + csv_complex_header("phi", v.n()) +
                              csv_complex_header("dphi", v.n()) + "\n";
            char buf[32];
            const int stride = std::max(1, cfg.steps / (plot_samples - 1));
            for (int i = 0; i <= cfg.steps; i += stride) {
                std::snprintf(buf, sizeof buf, "%.17g", sol.x_at(i));
                std::string row = buf;
                append_matrix_csv(row, sol.phi[i]);
                append_matrix_csv(row, sol.dphi[i]);
                csv += row + "\n";
            }
            csv.pop_back();
            emit(csv, cfg.out);
        } else if (plot_sigma) {
            emit(sigma_scan_csv(v, plot_lambda_min, cfg.lambda_max,
                                plot_samples, cfg.steps),
                 cfg.out);
        } else {
            std::string csv = "x" + csv_complex_header("V", v.n()) + "\n";
            char buf[32];
            for (int i = 0; i < plot_samples; ++i) {
                const double x = double(i) / (plot_samples - 1);
                std::snprintf(buf, sizeof buf, "%.17g", x);
                std::string row = buf;
                append_matrix_csv(row, v.eval(x));
                csv += row + "\n";
            }
            csv.pop_back();
            emit(csv, cfg.out);
        }
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const vsl::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const vsl::RejectedTarget& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const vsl::ContractViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        // solver, conditioning, geometry and anything unexpected
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
