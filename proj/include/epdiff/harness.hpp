#ifndef EPDIFF_HARNESS_HPP
#define EPDIFF_HARNESS_HPP

#include <string>
#include <vector>

#include "epdiff/config.hpp"
#include "epdiff/trajectory.hpp"

namespace epdiff {

/** Runs the configured experiment and writes its artifacts into the output
 * directory (created as needed):
 *
 *   trajectory.csv   one row per snapshot: t, then the P state values
 *   energy.csv       t, energy, iterations, residual_norm per step
 *   metadata.json    config echo, code version, wall time, outcome
 *   plot.py          renders waterfall + energy plots from the CSVs
 *
 * The formats list in the config selects which of csv/json/plot to write.
 * A step failure or reference blow-up is recorded in the metadata
 * (completed = false) with all partial outputs kept; the record is
 * returned either way, and the caller decides the exit status. */
TrajectoryRecord cmd_run(const RunConfig& config);

/** One (scheme, dt) entry of a comparison sweep. */
struct CompareCell {
    std::string scheme;
    double dt = 0.0;
    bool completed = false;
    std::string failure_reason;
    /** Final-time errors against the fine-step reference run. */
    double error_inf = 0.0;
    double error_l2 = 0.0;
    /** Observed order between this dt and the next coarser one in the
     * sweep; meaningful only when has_order is set. */
    double order_inf = 0.0;
    double order_l2 = 0.0;
    bool has_order = false;
};

struct CompareReport {
    std::vector<CompareCell> cells;
    bool reference_completed = false;
    std::string reference_failure;
    /** Set for peakon initial data, whose limited smoothness makes the
     * order column informational. */
    bool nonsmooth = false;
    std::string note;
    bool all_completed = false;
};

/** Runs every configured variational scheme at every step size in
 * compare.dts plus one Runge-Kutta reference run at compare.reference_dt,
 * all from the same initial condition, fanning the independent runs out
 * across worker threads (capped by the EPDIFF_WORKERS environment
 * variable). Writes into the output directory:
 *
 *   errors.csv           error-vs-dt table with observed orders
 *   combined_energy.csv  per-step energy of each scheme at the finest dt
 *   compare_report.json  the full report, machine-readable
 *
 * Cells for runs that fail mid-sweep carry the failure reason instead of
 * error values; the reference's own outcome is reported separately. */
CompareReport cmd_compare(const RunConfig& config);

std::string compare_report_json(const CompareReport& report);

/** Worker cap honored by cmd_compare: the EPDIFF_WORKERS environment
 * variable when set to a positive integer, otherwise the hardware
 * concurrency (at least 1). */
int worker_cap();

}  // namespace epdiff

#endif
