#include "epdiff/trajectory.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "epdiff/errors.hpp"

#ifndef EPDIFF_VERSION
#define EPDIFF_VERSION "dev"
#endif

namespace epdiff {

namespace {

std::ofstream open_for_write(const std::string& path) {
    std::ofstream stream(path, std::ios::binary);  // binary: identical bytes everywhere
    if (!stream) throw io_error("cannot open for writing: " + path);
    return stream;
}

void finish_write(std::ofstream& stream, const std::string& path) {
    stream.flush();
    if (!stream) throw io_error("write failed: " + path);
}

void check_record(const TrajectoryRecord& record) {
    const size_t p = record.snapshots.empty() ? 0 : record.snapshots.front().u.size();
    for (size_t i = 0; i < record.snapshots.size(); ++i) {
        if (record.snapshots[i].u.size() != p) {
            throw internal_error("trajectory record has ragged snapshot lengths");
        }
        if (i > 0 && !(record.snapshots[i].t > record.snapshots[i - 1].t)) {
            throw internal_error("trajectory snapshot times are not strictly increasing");
        }
    }
    for (size_t i = 1; i < record.energy_trace.size(); ++i) {
        if (!(record.energy_trace[i].t > record.energy_trace[i - 1].t)) {
            throw internal_error("energy trace times are not strictly increasing");
        }
    }
}

}  // namespace

const char* code_version() { return "epdiff1d " EPDIFF_VERSION; }

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

void write_trajectory_csv(const std::string& path, const TrajectoryRecord& record) {
    check_record(record);
    std::ofstream stream = open_for_write(path);
    const size_t p = record.snapshots.empty() ? 0 : record.snapshots.front().u.size();
    stream << "t";
    for (size_t j = 0; j < p; ++j) stream << ",u" << j;
    stream << "\n";
    for (const auto& snapshot : record.snapshots) {
        stream << format_double(snapshot.t);
        for (double v : snapshot.u) stream << "," << format_double(v);
        stream << "\n";
    }
    finish_write(stream, path);
}

void write_energy_csv(const std::string& path, const TrajectoryRecord& record) {
    check_record(record);
    std::ofstream stream = open_for_write(path);
    stream << "t,energy,iterations,residual_norm\n";
    for (const auto& sample : record.energy_trace) {
        stream << format_double(sample.t) << "," << format_double(sample.energy) << ","
               << sample.iterations << "," << format_double(sample.residual_norm) << "\n";
    }
    finish_write(stream, path);
}

void write_metadata_json(const std::string& path, const TrajectoryRecord& record) {
    check_record(record);
    nlohmann::json energy_summary;
    if (!record.energy_trace.empty()) {
        double lo = record.energy_trace.front().energy;
        double hi = lo;
        for (const auto& sample : record.energy_trace) {
            lo = std::min(lo, sample.energy);
            hi = std::max(hi, sample.energy);
        }
        energy_summary = {{"initial", record.energy_trace.front().energy},
                          {"final", record.energy_trace.back().energy},
                          {"min", lo},
                          {"max", hi}};
    }
    const nlohmann::json doc = {
        {"config", record.metadata.config_text},
        {"code_version", record.metadata.code_version},
        {"wall_time_seconds", record.metadata.wall_time_seconds},
        {"completed", record.metadata.completed},
        {"failed_step", record.metadata.failed_step},
        {"failure_reason", record.metadata.failure_reason},
        {"max_iterations_used", record.metadata.max_iterations_used},
        {"warnings", record.metadata.warnings},
        {"n_snapshots", record.snapshots.size()},
        {"n_energy_samples", record.energy_trace.size()},
        {"energy", energy_summary},
    };
    std::ofstream stream = open_for_write(path);
    stream << doc.dump(2) << "\n";
    finish_write(stream, path);
}

void write_plot_script(const std::string& path) {
    static const char* kScript = R"PY(#!/usr/bin/env python3
"""Renders the run artifacts beside this script:

  trajectory.csv -> waterfall.png   (u(x, t) snapshots, vertically offset)
  energy.csv     -> energy.png      (energy trace and solver effort)
"""
import csv
import math
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = pathlib.Path(__file__).resolve().parent


def read_csv(name):
    with open(here / name, newline="") as f:
        rows = list(csv.reader(f))
    return rows[0], [[float(v) for v in row] for row in rows[1:]]


header, rows = read_csv("trajectory.csv")
if rows:
    n = len(rows[0]) - 1
    x = [-math.pi + 2 * math.pi * j / n for j in range(n)]
    ts = [row[0] for row in rows]
    span = max(abs(v) for row in rows for v in row[1:]) or 1.0
    offset = 0.8 * span
    fig, ax = plt.subplots(figsize=(8, 10))
    for i, row in enumerate(rows):
        ax.plot(x, [v + i * offset for v in row[1:]], lw=0.8, color="tab:blue")
    ax.set_xlabel("x")
    ax.set_yticks([i * offset for i in range(0, len(rows), max(1, len(rows) // 10))])
    ax.set_yticklabels([f"t={ts[i]:g}" for i in range(0, len(rows), max(1, len(rows) // 10))])
    ax.set_title("u(x, t) waterfall")
    fig.tight_layout()
    fig.savefig(here / "waterfall.png", dpi=150)
    print(f"wrote {here / 'waterfall.png'}")

header, rows = read_csv("energy.csv")
if rows:
    ts = [row[0] for row in rows]
    energy = [row[1] for row in rows]
    iterations = [row[2] for row in rows]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    ax1.plot(ts, energy, lw=1.0)
    ax1.set_ylabel("energy")
    ax1.set_title("energy trace")
    ax2.plot(ts, iterations, lw=0.8, color="tab:orange")
    ax2.set_ylabel("solver iterations")
    ax2.set_xlabel("t")
    fig.tight_layout()
    fig.savefig(here / "energy.png", dpi=150)
    print(f"wrote {here / 'energy.png'}")
)PY";
    std::ofstream stream = open_for_write(path);
    stream << kScript;
    finish_write(stream, path);
}

}  // namespace epdiff
