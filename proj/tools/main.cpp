#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "epdiff/config.hpp"
#include "epdiff/errors.hpp"
#include "epdiff/harness.hpp"
#include "epdiff/trajectory.hpp"
#include "epdiff/verify.hpp"

namespace {

/** Options shared by the run and compare subcommands. */
struct CommonOptions {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::string scheme;
    double dt = 0.0;
    double t_final = 0.0;
    int n_modes = 0;
    double alpha = 0.0;

    bool has_dt = false;
    bool has_t_final = false;
    bool has_n_modes = false;
    bool has_alpha = false;
};

void add_common_options(CLI::App* cmd, CommonOptions& options) {
    auto* config = cmd->add_option("--config", options.config_path,
                                   "Configuration file (INI format; see README)");
    auto* preset =
        cmd->add_option("--preset", options.preset,
                        "Built-in experiment preset (see `epdiff run --preset help`)");
    config->excludes(preset);
    preset->excludes(config);
    cmd->add_option("--out", options.out_dir, "Output directory (overrides the config)");
    cmd->add_option("--scheme", options.scheme,
                    "Time rule: explicit, implicit, average, or reference");
    cmd->add_option("--dt", options.dt, "Step size (must divide the final time)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tfinal", options.t_final, "Final time")->check(CLI::PositiveNumber);
    cmd->add_option("--nmodes", options.n_modes, "Positive modes N (P = 2N+1 grid points)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", options.alpha, "Helmholtz coefficient (positive)")
        ->check(CLI::PositiveNumber);
}

void record_presence(const CLI::App* cmd, CommonOptions& options) {
    options.has_dt = cmd->count("--dt") > 0;
    options.has_t_final = cmd->count("--tfinal") > 0;
    options.has_n_modes = cmd->count("--nmodes") > 0;
    options.has_alpha = cmd->count("--alpha") > 0;
}

std::string preset_listing() {
    std::string listing;
    for (const std::string& name : epdiff::preset_names()) {
        if (!listing.empty()) listing += ", ";
        listing += name;
    }
    return listing;
}

/** Builds the effective configuration: file or preset (defaults when
 * neither), then the command-line overrides, then a full re-validation. */
epdiff::RunConfig effective_config(const CommonOptions& options) {
    epdiff::RunConfig config;
    if (!options.config_path.empty()) {
        config = epdiff::parse_config_file(options.config_path);
    } else if (!options.preset.empty()) {
        config = epdiff::preset_config(options.preset);
    }
    if (!options.out_dir.empty()) config.output.directory = options.out_dir;
    if (!options.scheme.empty()) config.scheme = epdiff::run_scheme_from_name(options.scheme);
    if (options.has_dt) config.dt = options.dt;
    if (options.has_t_final) config.t_final = options.t_final;
    if (options.has_n_modes) config.n_modes = options.n_modes;
    if (options.has_alpha) config.alpha = options.alpha;
    epdiff::validate_config(config);
    return config;
}

/** `--preset help` lists the presets instead of running. */
bool wants_preset_listing(const CommonOptions& options) {
    if (options.preset != "help") return false;
    std::printf("available presets: %s\n", preset_listing().c_str());
    return true;
}

int do_run(const CommonOptions& options) {
    if (wants_preset_listing(options)) return 0;
    const epdiff::RunConfig config = effective_config(options);
    const epdiff::TrajectoryRecord record = epdiff::cmd_run(config);
    std::printf("wrote %s (%zu snapshots, %zu energy samples)\n", config.output.directory.c_str(),
                record.snapshots.size(), record.energy_trace.size());
    for (const std::string& warning : record.metadata.warnings) {
        std::fprintf(stderr, "warning: %s\n", warning.c_str());
    }
    if (!record.energy_trace.empty()) {
        std::printf("energy %.17g -> %.17g, max solver iterations %d, wall %.3f s\n",
                    record.energy_trace.front().energy, record.energy_trace.back().energy,
                    record.metadata.max_iterations_used, record.metadata.wall_time_seconds);
    }
    if (!record.metadata.completed) {
        std::fprintf(stderr, "run failed: %s\n", record.metadata.failure_reason.c_str());
        return 2;
    }
    return 0;
}

int do_compare(const CommonOptions& options) {
    if (wants_preset_listing(options)) return 0;
    const epdiff::RunConfig config = effective_config(options);
    const epdiff::CompareReport report = epdiff::cmd_compare(config);
    std::printf("%-10s %-10s %-12s %-12s %-9s %-9s\n", "scheme", "dt", "error_inf", "error_l2",
                "order_inf", "order_l2");
    for (const epdiff::CompareCell& cell : report.cells) {
        if (cell.completed && report.reference_completed) {
            std::printf("%-10s %-10.5g %-12.4e %-12.4e", cell.scheme.c_str(), cell.dt,
                        cell.error_inf, cell.error_l2);
            if (cell.has_order) {
                std::printf(" %-9.3f %-9.3f\n", cell.order_inf, cell.order_l2);
            } else {
                std::printf(" %-9s %-9s\n", "-", "-");
            }
        } else {
            std::printf("%-10s %-10.5g failed: %s\n", cell.scheme.c_str(), cell.dt,
                        cell.failure_reason.c_str());
        }
    }
    if (!report.reference_completed) {
        std::fprintf(stderr, "reference run failed: %s\n", report.reference_failure.c_str());
    }
    if (!report.note.empty()) std::printf("note: %s\n", report.note.c_str());
    std::printf("wrote %s (errors.csv, combined_energy.csv, compare_report.json)\n",
                config.output.directory.c_str());
    return report.all_completed ? 0 : 2;
}

int do_verify(const std::vector<int>& n_modes) {
    const epdiff::VerifyReport report =
        n_modes.empty() ? epdiff::run_verification() : epdiff::run_verification(n_modes);
    std::printf("%s\n", epdiff::verify_report_json(report).c_str());
    return report.all_passed ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structure-preserving spectral simulator for the 1D shallow-water "
                 "peakon equation"};
    app.set_version_flag("--version", epdiff::code_version());
    app.require_subcommand(1);

    CommonOptions run_options;
    CLI::App* run_cmd = app.add_subcommand("run", "Integrate one experiment and write artifacts");
    add_common_options(run_cmd, run_options);

    CommonOptions compare_options;
    CLI::App* compare_cmd =
        app.add_subcommand("compare", "Error-vs-dt sweep against the reference solver");
    add_common_options(compare_cmd, compare_options);

    std::vector<int> verify_modes;
    CLI::App* verify_cmd = app.add_subcommand("verify", "Run the built-in self-checks");
    verify_cmd
        ->add_option("--nmodes", verify_modes,
                     "Grid sizes (positive modes N) for the dense-tensor check; repeatable")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& error) {
        const int code = app.exit(error);
        return code == 0 ? 0 : 1;  // help/version exit 0, bad arguments are validation errors
    }
    record_presence(run_cmd, run_options);
    record_presence(compare_cmd, compare_options);

    try {
        if (run_cmd->parsed()) return do_run(run_options);
        if (compare_cmd->parsed()) return do_compare(compare_options);
        return do_verify(verify_modes);
    } catch (const epdiff::config_error& error) {
        std::fprintf(stderr, "error: %s\n", error.what());
        return 1;
    } catch (const epdiff::io_error& error) {
        std::fprintf(stderr, "error: %s\n", error.what());
        return 3;
    } catch (const epdiff::resource_limit_error& error) {
        std::fprintf(stderr, "error: %s\n", error.what());
        return 1;
    } catch (const epdiff::step_failure& error) {
        std::fprintf(stderr, "error: %s\n", error.what());
        return 2;
    } catch (const epdiff::divergence_error& error) {
        std::fprintf(stderr, "error: %s\n", error.what());
        return 2;
    } catch (const epdiff::internal_error& error) {
        std::fprintf(stderr, "internal error: %s\n", error.what());
        return 2;
    } catch (const std::invalid_argument& error) {
        std::fprintf(stderr, "error: %s\n", error.what());
        return 1;
    } catch (const std::exception& error) {
        std::fprintf(stderr, "error: %s\n", error.what());
        return 2;
    }
}
