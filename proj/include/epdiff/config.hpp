#ifndef EPDIFF_CONFIG_HPP
#define EPDIFF_CONFIG_HPP

#include <string>
#include <vector>

#include "epdiff/integrator.hpp"
#include "epdiff/scenarios.hpp"

namespace epdiff {

/** Time-stepping back end for a run: one of the three variational update
 * rules, or the independent Runge-Kutta reference path. */
enum class RunScheme { explicit_euler, implicit_euler, average, reference };

struct OutputConfig {
    std::string directory = "out";
    /** Snapshot stride in steps; the energy trace always keeps every step. */
    int stride = 1;
    /** Subset of {csv, json, plot}; controls which artifacts cmd_run writes. */
    std::vector<std::string> formats = {"csv", "json", "plot"};

    bool operator==(const OutputConfig&) const = default;
};

/** Step-size sweep for cmd_compare. */
struct CompareConfig {
    std::vector<double> dts = {0.02, 0.01, 0.005};
    /** Step of the Runge-Kutta reference run errors are measured against. */
    double reference_dt = 1e-4;
    /** Variational schemes included in the sweep. */
    std::vector<std::string> schemes = {"explicit", "implicit", "average"};

    bool operator==(const CompareConfig&) const = default;
};

/** Complete description of one experiment. */
struct RunConfig {
    int n_modes = 256;
    double alpha = 1.0;
    RunScheme scheme = RunScheme::average;
    double dt = 0.01;
    double t_final = 1.0;
    /** 2/3-rule dealiasing for the reference scheme (ignored by the
     * variational schemes, which never dealias). */
    bool dealias = true;
    ScenarioSpec scenario;
    SolverOptions solver;
    OutputConfig output;
    CompareConfig compare;

    bool operator==(const RunConfig&) const = default;
};

/** Parses the INI-style configuration text:
 *
 *   [section]
 *   key = value        # full-line comments start with '#' or ';'
 *
 * Sections/keys: [grid] n_modes, alpha; [run] scheme, dt, t_final, dealias;
 * [scenario] kind, amplitude, center, sigma, amplitude2, center2;
 * [solver] tolerance, max_iterations, method; [output] directory, stride,
 * formats; [compare] dts, reference_dt, schemes. Unknown sections or keys,
 * duplicate keys, and type mismatches raise config_error with the line
 * (and column where meaningful); validation failures name the field. */
RunConfig parse_config_text(const std::string& text);

/** Reads and parses a configuration file; io_error when unreadable. */
RunConfig parse_config_file(const std::string& path);

/** Emits a configuration as text the parser accepts, with doubles printed
 * to 17 significant digits so parse(emit(c)) == c exactly. */
std::string emit_config(const RunConfig& config);

/** Built-in experiment presets; throws std::invalid_argument for unknown
 * names. */
RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

/** Re-checks every RunConfig invariant (grid bounds, dt/t_final
 * compatibility, scenario and solver sanity); throws config_error naming
 * the offending field. parse/preset outputs are already validated; call
 * again after overriding fields by hand. */
void validate_config(const RunConfig& config);

/** Number of steps a run takes: t_final / dt, which must be a whole number
 * (to 1e-9 relative) — enforced by validate_config. */
int run_n_steps(const RunConfig& config);

const char* run_scheme_name(RunScheme scheme);

/** Parses a scheme name. "midpoint" is recognized and rejected with an
 * explanation; other unknown names list the accepted ones. */
RunScheme run_scheme_from_name(const std::string& name);

}  // namespace epdiff

#endif
