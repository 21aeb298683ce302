#ifndef EPDIFF_TRAJECTORY_HPP
#define EPDIFF_TRAJECTORY_HPP

#include <string>
#include <vector>

#include "epdiff/grid.hpp"

namespace epdiff {

/** State snapshot at a recorded time. */
struct Snapshot {
    double t = 0.0;
    GridField u;
};

/** Energy-trace sample recorded at every accepted step: the time, the
 * energy, and the solver effort that produced the state at that time (zero
 * for solvers with no inner iteration). */
struct EnergySample {
    double t = 0.0;
    double energy = 0.0;
    int iterations = 0;
    double residual_norm = 0.0;
};

/** Provenance attached to a persisted trajectory. The producing run fills
 * what it knows; the harness completes the rest before writing. */
struct RunMetadata {
    /** Full configuration echo in the same text format the parser accepts. */
    std::string config_text;
    std::string code_version;
    double wall_time_seconds = 0.0;
    bool completed = true;
    /** 1-based step index of the first failed step; -1 when none failed. */
    int failed_step = -1;
    std::string failure_reason;
    /** Largest per-step solver effort seen over the whole run. */
    int max_iterations_used = 0;
    /** Non-fatal notices worth keeping with the data (e.g. an initial
     * condition too narrow for the grid to resolve). */
    std::vector<std::string> warnings;
};

/** Persisted output of one run: metadata, state snapshots at the output
 * stride, and the per-step energy trace. Times are strictly increasing and
 * every snapshot has the grid's length. */
struct TrajectoryRecord {
    RunMetadata metadata;
    std::vector<Snapshot> snapshots;
    std::vector<EnergySample> energy_trace;
};

/** Library version string recorded in run metadata. */
const char* code_version();

/** The 17-significant-digit formatting every CSV writer uses; reruns with
 * identical inputs produce identical bytes. */
std::string format_double(double value);

/** Writes one row per snapshot: t, then the P state values. Header row
 * names the columns (t,u0,...,u{P-1}). Throws io_error on write failure
 * and internal_error if the record violates its own invariants (times not
 * strictly increasing, ragged snapshot lengths). */
void write_trajectory_csv(const std::string& path, const TrajectoryRecord& record);

/** Writes the per-step energy trace (t,energy,iterations,residual_norm). */
void write_energy_csv(const std::string& path, const TrajectoryRecord& record);

/** Writes the metadata sidecar: configuration echo, code version, wall
 * time, completion status, and an energy summary. */
void write_metadata_json(const std::string& path, const TrajectoryRecord& record);

/** Writes a standalone matplotlib script that renders the waterfall and
 * energy plots from the CSVs beside it. */
void write_plot_script(const std::string& path);

}  // namespace epdiff

#endif
