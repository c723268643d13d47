// corm: check, tabulate, verify and simulate compound-random-measure
// specifications from JSON spec files. See the README for the file schema,
// report formats and exit codes.

#include "corm/core.hpp"
#include "corm/errors.hpp"
#include "corm/expcorm.hpp"
#include "corm/integrability.hpp"
#include "corm/sim.hpp"
#include "corm/spec_io.hpp"
#include "corm/tails.hpp"
#include "corm/version.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitWellPosed = 0;
constexpr int kExitIllPosed = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitUsage = 64;
constexpr int kExitInternal = 70;

struct CommonOpts {
    std::string spec_path;
    std::string out_dir = ".";
    double rel_tol = 1e-8;
    std::uint64_t seed = 0;
};

corm::quad::QuadConfig quad_config(const CommonOpts& o) {
    corm::quad::QuadConfig cfg;
    cfg.rel_tol = o.rel_tol;
    return cfg;
}

std::string out_path(const CommonOpts& o, const std::string& name) {
    std::filesystem::create_directories(o.out_dir);
    return (std::filesystem::path(o.out_dir) / name).string();
}

void write_manifest(const CommonOpts& o, const std::string& command) {
    corm::io::RunManifest m;
    m.command = command;
    m.spec_path = o.spec_path;
    m.spec_hash = corm::io::fnv1a64_hex(corm::io::read_file(o.spec_path));
    m.tool_version = corm::kToolVersion;
    m.seed = o.seed;
    m.quad = quad_config(o);
    m.timestamp = corm::io::current_utc_timestamp();
    corm::io::write_file_atomic(out_path(o, "manifest.json"),
                                corm::io::manifest_json(m));
}

int exit_code_for(corm::integrability::Overall v) {
    switch (v) {
        case corm::integrability::Overall::WellPosed: return kExitWellPosed;
        case corm::integrability::Overall::IllPosed: return kExitIllPosed;
        default: return kExitInconclusive;
    }
}

// Refusal gate shared by tails/simulate: returns the exit code to use, or 0.
int refuse_unless_well_posed(const corm::CormSpec& spec, bool force,
                             const corm::quad::QuadConfig& cfg) {
    if (force) return 0;
    const auto verdict = corm::integrability::check_corm(spec, {cfg});
    if (verdict.multivariate == corm::integrability::Overall::WellPosed) return 0;
    std::cerr << "specification is "
              << corm::integrability::to_string(verdict.multivariate)
              << "; rerun with --force to proceed anyway\n";
    return exit_code_for(verdict.multivariate);
}

int cmd_check(const CommonOpts& o, bool direct, const std::string& cmdline) {
    const corm::CormSpec spec = corm::io::load_spec_file(o.spec_path);
    corm::integrability::CheckOptions opts;
    opts.quad = quad_config(o);
    opts.direct_check = direct;
    const auto verdict = corm::integrability::check_corm(spec, opts);
    corm::io::write_file_atomic(out_path(o, "verdict_report.json"),
                                corm::io::verdict_report_json(spec, verdict));
    write_manifest(o, cmdline);
    std::cout << corm::integrability::to_string(verdict.multivariate) << "\n";
    return exit_code_for(verdict.multivariate);
}

int cmd_tails(const CommonOpts& o, const std::string& grid_spec, int component,
              bool force, const std::string& cmdline) {
    const corm::CormSpec spec = corm::io::load_spec_file(o.spec_path);
    if (component < 0 || component >= spec.d) {
        std::cerr << "component index out of range\n";
        return kExitUsage;
    }
    const auto cfg = quad_config(o);
    if (int rc = refuse_unless_well_posed(spec, force, cfg)) return rc;

    corm::tails::TailGrid grid;
    if (!grid_spec.empty()) {
        std::istringstream ss(grid_spec);
        char c1, c2;
        if (!(ss >> grid.y_min >> c1 >> grid.y_max >> c2 >> grid.n) || c1 != ':' ||
            c2 != ':' || grid.n < 2 || !(grid.y_min > 0.0) ||
            !(grid.y_min < grid.y_max)) {
            std::cerr << "--grid must be ymin:ymax:n with 0 < ymin < ymax, n >= 2\n";
            return kExitUsage;
        }
    }

    const auto& score = spec.score.marginals[component];
    corm::tails::MarginalIntensity mi(score, spec.directing, cfg);
    const std::vector<double> ys = corm::tails::log_grid(grid);
    std::vector<corm::io::TailTableRow> rows;
    for (double y : ys) {
        const double us = spec.directing.tail(y);
        const double uj = mi.tail(y);
        rows.push_back({y, us, uj, uj / us});
    }
    corm::io::write_file_atomic(out_path(o, "tail_table.csv"),
                                corm::io::tail_table_csv(rows));

    if (spec.directing.rv_index.has_value()) {
        const auto report =
            corm::tails::verify_index_transfer(score, spec.directing, grid, cfg);
        corm::io::write_file_atomic(out_path(o, "index_diagnostic.json"),
                                    corm::io::index_transfer_json(report));
    } else {
        // No regular-variation metadata; still run the estimator for the record.
        auto tail_fn = [&mi](double y) { return mi.tail(y); };
        corm::tails::IndexTransferReport report;
        report.diagnostic = corm::tails::estimate_rv_index(tail_fn, ys);
        corm::io::write_file_atomic(out_path(o, "index_diagnostic.json"),
                                    corm::io::index_transfer_json(report));
    }
    write_manifest(o, cmdline);
    return kExitWellPosed;
}

int cmd_verify_derivative(const CommonOpts& o, const std::vector<int>& d_list,
                          int points, double tol, const std::string& cmdline) {
    const corm::CormSpec spec = corm::io::load_spec_file(o.spec_path);
    if (!spec.score.all_exponential())
        throw corm::NonExponentialScores(
            "the derivative representation holds for iid standard-exponential "
            "scores only");
    const auto report = corm::expcorm::verify_derivative_representation(
        spec.directing, d_list, points, o.seed, tol, quad_config(o));
    corm::io::write_file_atomic(out_path(o, "derivative_report.csv"),
                                corm::io::derivative_report_csv(report));
    write_manifest(o, cmdline);
    std::cout << (report.pass ? "pass" : "fail")
              << " max_rel_dev=" << corm::io::format_double(report.max_rel_dev)
              << " tol=" << corm::io::format_double(report.tol) << "\n";
    return report.pass ? kExitWellPosed : kExitIllPosed;
}

int cmd_simulate(const CommonOpts& o, int reps, double eps,
                 std::size_t max_atoms, int component,
                 std::vector<double> thresholds, bool force,
                 const std::string& cmdline) {
    const corm::CormSpec spec = corm::io::load_spec_file(o.spec_path);
    if (component < 0 || component >= spec.d) {
        std::cerr << "component index out of range\n";
        return kExitUsage;
    }
    const auto cfg = quad_config(o);
    if (int rc = refuse_unless_well_posed(spec, force, cfg)) return rc;

    corm::sim::Truncation trunc;
    trunc.eps = eps;
    trunc.max_atoms = max_atoms;

    const auto draw = corm::sim::sample_corm(spec, trunc, o.seed, true, cfg);
    corm::io::write_file_atomic(out_path(o, "draw.csv"), corm::io::draw_csv(draw));

    if (thresholds.empty()) thresholds = {0.5, 1.0, 2.0, 5.0};
    const auto report =
        corm::sim::validate_tails(spec, thresholds, reps, o.seed, component,
                                  trunc, cfg, true);
    corm::io::write_file_atomic(out_path(o, "sim_report.csv"),
                                corm::io::sim_report_csv(report));
    write_manifest(o, cmdline);
    return kExitWellPosed;
}

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"compound random measure toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    bool force = false;

    auto add_common = [&](CLI::App* cmd, bool needs_spec = true) {
        auto* s = cmd->add_option("--spec", opts.spec_path, "spec file (JSON)");
        if (needs_spec) s->required();
        cmd->add_option("--out", opts.out_dir, "output directory");
        cmd->add_option("--tol", opts.rel_tol, "relative quadrature tolerance");
        cmd->add_option("--seed", opts.seed, "master RNG seed");
    };

    auto* check = app.add_subcommand("check", "integrability verdict");
    bool direct = false;
    add_common(check);
    check->add_flag("--direct", direct,
                    "also run the direct d-variate probe (d <= 3)");

    auto* tails_cmd = app.add_subcommand("tails", "tail table and index diagnostic");
    std::string grid_spec;
    int component = 0;
    add_common(tails_cmd);
    tails_cmd->add_option("--grid", grid_spec, "y grid as ymin:ymax:n");
    tails_cmd->add_option("--component", component, "marginal index (default 0)");
    tails_cmd->add_flag("--force", force, "proceed on ill-posed specs");

    auto* verify = app.add_subcommand(
        "verify-derivative",
        "cross-check the exponential-score intensity against its derivative form");
    std::vector<int> d_list{2, 3, 4};
    int points = 20;
    double vtol = 1e-5;
    add_common(verify);
    verify->add_option("--d", d_list, "dimensions to test")->delimiter(',');
    verify->add_option("--points", points, "random points per dimension");
    verify->add_option("--vtol", vtol, "max relative deviation");

    auto* simulate = app.add_subcommand("simulate", "draw and validate tails");
    int reps = 0;
    double eps = 1e-8;
    std::size_t max_atoms = 100000;
    std::vector<double> thresholds;
    add_common(simulate);
    simulate->add_option("--reps", reps, "replications")->required();
    simulate->add_option("--truncation", eps, "smallest retained jump");
    simulate->add_option("--max-atoms", max_atoms, "atom budget per draw");
    simulate->add_option("--component", component, "marginal index (default 0)");
    simulate->add_option("--thresholds", thresholds, "tail thresholds")
        ->delimiter(',');
    simulate->add_flag("--force", force, "proceed on ill-posed specs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints the message
        return kExitUsage;
    }

    const std::string cmdline = join_args(argc, argv);
    try {
        if (check->parsed()) return cmd_check(opts, direct, cmdline);
        if (tails_cmd->parsed())
            return cmd_tails(opts, grid_spec, component, force, cmdline);
        if (verify->parsed())
            return cmd_verify_derivative(opts, d_list, points, vtol, cmdline);
        if (simulate->parsed()) {
            if (reps < 2) {
                std::cerr << "--reps must be at least 2\n";
                return kExitUsage;
            }
            return cmd_simulate(opts, reps, eps, max_atoms, component,
                                thresholds, force, cmdline);
        }
    } catch (const corm::SpecParseError& e) {
        std::cerr << "spec error";
        if (e.line > 0) std::cerr << " (line " << e.line << ")";
        std::cerr << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const corm::UnsupportedFamily& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const corm::NonExponentialScores& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const corm::IllPosedSpec& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIllPosed;
    } catch (const corm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
