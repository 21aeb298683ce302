#include "epdiff/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <climits>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <thread>
#include <utility>

#include "epdiff/errors.hpp"
#include "epdiff/fast_ops.hpp"
#include "epdiff/integrator.hpp"
#include "epdiff/reference.hpp"
#include "epdiff/scenarios.hpp"
#include "epdiff/spectral.hpp"

namespace epdiff {

namespace {

Scheme variational_scheme(RunScheme scheme) {
    switch (scheme) {
        case RunScheme::explicit_euler:
            return Scheme::explicit_euler;
        case RunScheme::implicit_euler:
            return Scheme::implicit_euler;
        case RunScheme::average:
            return Scheme::average;
        case RunScheme::reference:
            break;
    }
    throw internal_error("variational_scheme: the reference back end has no update rule");
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/** Step count for a (t_final, dt) pair that validate_config has already
 * certified as a whole division. */
int whole_steps(double t_final, double dt) {
    return static_cast<int>(std::llround(t_final / dt));
}

/** Shared outcome shape for the variational and reference back ends. */
struct RunOutcome {
    std::vector<Snapshot> snapshots;
    std::vector<EnergySample> energy_trace;
    GridField final_state;
    bool completed = false;
    int failed_step = -1;
    std::string failure_reason;
    int max_iterations_used = 0;
};

/** Runs one back end to completion or failure. A reference blow-up is
 * converted into a failed outcome that still carries the initial state,
 * so partial artifacts can be written. Never throws for the failure modes
 * the run itself can produce; resource and logic errors propagate. */
RunOutcome execute_run(const Grid& grid, const RunConfig& config, RunScheme scheme, double dt,
                       int n_steps, int stride, const GridField& u0) {
    RunOutcome outcome;
    if (scheme == RunScheme::reference) {
        ReferenceOptions options;
        options.dealias = config.dealias;
        options.dt = dt;
        options.n_steps = n_steps;
        options.output_stride = stride;
        try {
            TrajectoryRecord record = rk4_run(grid, apply_helmholtz(grid, u0), options);
            outcome.snapshots = std::move(record.snapshots);
            outcome.energy_trace = std::move(record.energy_trace);
            outcome.final_state = outcome.snapshots.back().u;
            outcome.completed = true;
        } catch (const divergence_error& error) {
            // Keep what is known before the first step; the blown-up
            // intermediate states are not meaningful data.
            outcome.snapshots.push_back({0.0, u0});
            outcome.energy_trace.push_back({0.0, energy(grid, u0), 0, 0.0});
            outcome.final_state = u0;
            outcome.completed = false;
            outcome.failure_reason = error.what();
        }
        return outcome;
    }
    RunOptions options;
    options.dt = dt;
    options.n_steps = n_steps;
    options.output_stride = stride;
    options.solver = config.solver;
    IntegrationResult result = run(grid, variational_scheme(scheme), u0, options);
    outcome.snapshots = std::move(result.snapshots);
    outcome.energy_trace = std::move(result.energy_trace);
    outcome.final_state = std::move(result.final_state);
    outcome.completed = result.completed;
    outcome.failed_step = result.failed_step;
    outcome.failure_reason = std::move(result.failure_reason);
    outcome.max_iterations_used = result.max_iterations_used;
    return outcome;
}

bool wants_format(const OutputConfig& output, const char* name) {
    return std::find(output.formats.begin(), output.formats.end(), name) != output.formats.end();
}

std::filesystem::path ensure_output_directory(const std::string& directory) {
    const std::filesystem::path dir(directory);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw io_error("cannot create output directory " + directory + ": " + ec.message());
    }
    return dir;
}

std::ofstream open_artifact(const std::filesystem::path& path) {
    std::ofstream stream(path, std::ios::binary);  // binary: identical bytes everywhere
    if (!stream) throw io_error("cannot open for writing: " + path.string());
    return stream;
}

void finish_artifact(std::ofstream& stream, const std::filesystem::path& path) {
    stream.flush();
    if (!stream) throw io_error("write failed: " + path.string());
}

/** Quotes a CSV cell if it contains a delimiter, quote, or newline. */
std::string csv_quote(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string quoted = "\"";
    for (char c : cell) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

double final_error_inf(const GridField& a, const GridField& b) {
    double worst = 0.0;
    for (size_t j = 0; j < a.size(); ++j) {
        const double d = std::abs(a[j] - b[j]);
        if (!std::isfinite(d)) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, d);
    }
    return worst;
}

double final_error_l2(const GridField& a, const GridField& b) {
    double sum = 0.0;
    for (size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        sum += d * d;
    }
    return std::sqrt(sum);
}

void write_errors_csv(const std::filesystem::path& path, const CompareReport& report) {
    std::ofstream stream = open_artifact(path);
    stream << "scheme,dt,error_inf,error_l2,order_inf,order_l2,completed,failure_reason\n";
    for (const CompareCell& cell : report.cells) {
        stream << cell.scheme << "," << format_double(cell.dt) << ",";
        if (cell.completed && report.reference_completed) {
            stream << format_double(cell.error_inf) << "," << format_double(cell.error_l2);
        } else {
            stream << ",";
        }
        stream << ",";
        if (cell.has_order) {
            stream << format_double(cell.order_inf) << "," << format_double(cell.order_l2);
        } else {
            stream << ",";
        }
        stream << "," << (cell.completed ? "true" : "false") << ","
               << csv_quote(cell.failure_reason) << "\n";
    }
    finish_artifact(stream, path);
}

void write_combined_energy_csv(const std::filesystem::path& path,
                               const std::vector<std::string>& scheme_names,
                               const std::vector<const std::vector<EnergySample>*>& traces) {
    std::ofstream stream = open_artifact(path);
    stream << "t";
    for (const std::string& name : scheme_names) stream << "," << name;
    stream << "\n";
    size_t n_rows = 0;
    size_t longest = 0;
    for (size_t s = 0; s < traces.size(); ++s) {
        if (traces[s]->size() > n_rows) {
            n_rows = traces[s]->size();
            longest = s;
        }
    }
    for (size_t row = 0; row < n_rows; ++row) {
        stream << format_double((*traces[longest])[row].t);
        for (const auto* trace : traces) {
            stream << ",";
            if (row < trace->size()) stream << format_double((*trace)[row].energy);
        }
        stream << "\n";
    }
    finish_artifact(stream, path);
}

}  // namespace

int worker_cap() {
    if (const char* text = std::getenv("EPDIFF_WORKERS")) {
        char* end = nullptr;
        const long value = std::strtol(text, &end, 10);
        if (end != text && *end == '\0' && value > 0 && value <= INT_MAX) {
            return static_cast<int>(value);
        }
    }
    const unsigned hardware = std::thread::hardware_concurrency();
    return hardware == 0 ? 1 : static_cast<int>(hardware);
}

TrajectoryRecord cmd_run(const RunConfig& config) {
    validate_config(config);
    const auto started = std::chrono::steady_clock::now();
    const Grid grid = make_grid(config.n_modes, config.alpha);
    bool aliased = false;
    const GridField u0 = build_scenario(grid, config.scenario, &aliased);

    TrajectoryRecord record;
    record.metadata.config_text = emit_config(config);
    record.metadata.code_version = code_version();
    if (aliased) {
        record.metadata.warnings.push_back(
            "scenario width is narrower than 8 grid spacings; the grid underresolves it and "
            "the spectrum does not decay at the band edge");
    }

    RunOutcome outcome = execute_run(grid, config, config.scheme, config.dt, run_n_steps(config),
                                     config.output.stride, u0);
    record.snapshots = std::move(outcome.snapshots);
    record.energy_trace = std::move(outcome.energy_trace);
    record.metadata.completed = outcome.completed;
    record.metadata.failed_step = outcome.failed_step;
    record.metadata.failure_reason = std::move(outcome.failure_reason);
    record.metadata.max_iterations_used = outcome.max_iterations_used;
    record.metadata.wall_time_seconds = elapsed_seconds(started);

    const auto dir = ensure_output_directory(config.output.directory);
    if (wants_format(config.output, "csv")) {
        write_trajectory_csv((dir / "trajectory.csv").string(), record);
        write_energy_csv((dir / "energy.csv").string(), record);
    }
    if (wants_format(config.output, "json")) {
        write_metadata_json((dir / "metadata.json").string(), record);
    }
    if (wants_format(config.output, "plot")) {
        write_plot_script((dir / "plot.py").string());
    }
    return record;
}

CompareReport cmd_compare(const RunConfig& config) {
    validate_config(config);
    const Grid grid = make_grid(config.n_modes, config.alpha);
    const GridField u0 = build_scenario(grid, config.scenario);

    // One task per (scheme, dt) cell, plus the trailing reference run.
    // Everything integrates the same initial condition to the same final
    // time; errors are final-state distances to the reference.
    struct Task {
        RunScheme scheme;
        double dt;
    };
    std::vector<Task> tasks;
    for (const std::string& name : config.compare.schemes) {
        for (double dt : config.compare.dts) {
            tasks.push_back({run_scheme_from_name(name), dt});
        }
    }
    tasks.push_back({RunScheme::reference, config.compare.reference_dt});

    // Independent runs fan out over a small pool; results land in
    // index-addressed slots, so the report order is deterministic no
    // matter how the pool schedules them.
    std::vector<RunOutcome> outcomes(tasks.size());
    std::atomic<size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& task = tasks[i];
            const int n_steps = whole_steps(config.t_final, task.dt);
            const int stride = std::max(1, n_steps);  // first and last snapshots only
            try {
                outcomes[i] = execute_run(grid, config, task.scheme, task.dt, n_steps, stride, u0);
            } catch (const std::exception& error) {
                outcomes[i].completed = false;
                outcomes[i].failure_reason = error.what();
            }
        }
    };
    const int n_workers =
        std::max(1, std::min(worker_cap(), static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_workers) - 1);
    for (int w = 1; w < n_workers; ++w) pool.emplace_back(work);
    work();
    for (std::thread& thread : pool) thread.join();

    CompareReport report;
    const RunOutcome& reference = outcomes.back();
    report.reference_completed = reference.completed;
    report.reference_failure = reference.failure_reason;
    if (config.scenario.kind != ScenarioKind::gaussian) {
        report.nonsmooth = true;
        report.note = "nonsmooth initial data: order not asserted";
    }

    report.all_completed = reference.completed;
    for (size_t i = 0; i + 1 < outcomes.size(); ++i) {
        const RunOutcome& outcome = outcomes[i];
        CompareCell cell;
        cell.scheme = run_scheme_name(tasks[i].scheme);
        cell.dt = tasks[i].dt;
        cell.completed = outcome.completed;
        cell.failure_reason = outcome.failure_reason;
        if (outcome.completed && reference.completed) {
            cell.error_inf = final_error_inf(outcome.final_state, reference.final_state);
            cell.error_l2 = final_error_l2(outcome.final_state, reference.final_state);
        }
        report.all_completed = report.all_completed && outcome.completed;
        report.cells.push_back(std::move(cell));
    }

    // Observed order between consecutive step sizes of the same scheme,
    // attached to the finer-dt cell. Needs both errors finite and
    // positive; a failed or saturated pair leaves the cell orderless.
    const size_t n_dts = config.compare.dts.size();
    for (size_t s = 0; s < config.compare.schemes.size(); ++s) {
        for (size_t d = 1; d < n_dts; ++d) {
            CompareCell& prev = report.cells[s * n_dts + d - 1];
            CompareCell& cur = report.cells[s * n_dts + d];
            if (!prev.completed || !cur.completed || !report.reference_completed) continue;
            const double ratio = prev.dt / cur.dt;
            if (!(ratio > 0.0) || ratio == 1.0) continue;
            const bool usable = std::isfinite(prev.error_inf) && std::isfinite(cur.error_inf) &&
                                prev.error_inf > 0.0 && cur.error_inf > 0.0 &&
                                prev.error_l2 > 0.0 && cur.error_l2 > 0.0;
            if (!usable) continue;
            cur.order_inf = std::log(prev.error_inf / cur.error_inf) / std::log(ratio);
            cur.order_l2 = std::log(prev.error_l2 / cur.error_l2) / std::log(ratio);
            cur.has_order = true;
        }
    }

    const auto dir = ensure_output_directory(config.output.directory);
    write_errors_csv(dir / "errors.csv", report);

    // Combined per-step energy of every scheme at the finest step size
    // (the column set most comparable across schemes).
    const double finest = *std::min_element(config.compare.dts.begin(), config.compare.dts.end());
    size_t finest_index = 0;
    for (size_t d = 0; d < n_dts; ++d) {
        if (config.compare.dts[d] == finest) finest_index = d;
    }
    std::vector<const std::vector<EnergySample>*> traces;
    for (size_t s = 0; s < config.compare.schemes.size(); ++s) {
        traces.push_back(&outcomes[s * n_dts + finest_index].energy_trace);
    }
    write_combined_energy_csv(dir / "combined_energy.csv", config.compare.schemes, traces);

    const std::string json = compare_report_json(report);
    const auto report_path = dir / "compare_report.json";
    std::ofstream stream = open_artifact(report_path);
    stream << json << "\n";
    finish_artifact(stream, report_path);
    return report;
}

std::string compare_report_json(const CompareReport& report) {
    nlohmann::json cells = nlohmann::json::array();
    for (const CompareCell& cell : report.cells) {
        nlohmann::json entry = {
            {"scheme", cell.scheme},
            {"dt", cell.dt},
            {"completed", cell.completed},
            {"failure_reason", cell.failure_reason},
            {"error_inf", nullptr},
            {"error_l2", nullptr},
            {"order_inf", nullptr},
            {"order_l2", nullptr},
        };
        if (cell.completed && report.reference_completed) {
            entry["error_inf"] = cell.error_inf;
            entry["error_l2"] = cell.error_l2;
        }
        if (cell.has_order) {
            entry["order_inf"] = cell.order_inf;
            entry["order_l2"] = cell.order_l2;
        }
        cells.push_back(std::move(entry));
    }
    const nlohmann::json doc = {
        {"cells", cells},
        {"reference",
         {{"completed", report.reference_completed}, {"failure_reason", report.reference_failure}}},
        {"nonsmooth", report.nonsmooth},
        {"note", report.note},
        {"all_completed", report.all_completed},
    };
    return doc.dump(2);
}

}  // namespace epdiff
