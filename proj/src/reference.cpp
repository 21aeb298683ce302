#include "epdiff/reference.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "epdiff/errors.hpp"
#include "epdiff/spectral.hpp"

namespace epdiff {

namespace {

void require_state(const Grid& grid, const GridField& m, const char* what) {
    if (static_cast<int>(m.size()) != grid.n_points) {
        throw std::invalid_argument(std::string(what) + ": state length " +
                                    std::to_string(m.size()) + " does not match grid size " +
                                    std::to_string(grid.n_points));
    }
}

constexpr double kBlowUpThreshold = 1e12;

double infinity_norm(const GridField& f) {
    double m = 0.0;
    for (double v : f) {
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        m = std::max(m, std::abs(v));
    }
    return m;
}

/** E = (pi/P) sum_j u_j m_j — computed locally so the reference path
 * depends on nothing but the spectral core. */
double reference_energy(const Grid& grid, const GridField& u, const GridField& m) {
    double s = 0.0;
    for (int j = 0; j < grid.n_points; ++j) s += u[j] * m[j];
    return std::numbers::pi * s / grid.n_points;
}

}  // namespace

GridField dealias_mask(const Grid& grid, const GridField& field) {
    const int cut = (2 * grid.n_modes) / 3;
    SpectralCoeffs coeffs = dft(grid, field);
    for (int i = 0; i < grid.n_points; ++i) {
        if (std::abs(grid.mode(i)) > cut) coeffs[i] = 0.0;
    }
    return idft(grid, coeffs);
}

GridField ch_rhs(const Grid& grid, const GridField& m, bool dealias) {
    require_state(grid, m, "ch_rhs");
    const int p = grid.n_points;
    GridField r(p);
    if (!dealias) {
        const GridField u = invert_helmholtz(grid, m);
        const GridField m_x = spectral_derivative(grid, m);
        const GridField u_x = spectral_derivative(grid, u);
        for (int j = 0; j < p; ++j) r[j] = -(u[j] * m_x[j] + 2.0 * m[j] * u_x[j]);
        return r;
    }
    const GridField u = dealias_mask(grid, invert_helmholtz(grid, m));
    const GridField m_ = dealias_mask(grid, m);
    const GridField m_x = dealias_mask(grid, spectral_derivative(grid, m_));
    const GridField u_x = dealias_mask(grid, spectral_derivative(grid, u));
    for (int j = 0; j < p; ++j) r[j] = -(u[j] * m_x[j] + 2.0 * m_[j] * u_x[j]);
    return dealias_mask(grid, r);
}

TrajectoryRecord rk4_run(const Grid& grid, const GridField& m0, const ReferenceOptions& options) {
    require_state(grid, m0, "rk4_run");
    if (!(options.dt > 0.0)) throw std::invalid_argument("rk4_run: dt must be > 0");
    if (options.n_steps < 0) throw std::invalid_argument("rk4_run: n_steps must be >= 0");
    if (options.output_stride < 1) {
        throw std::invalid_argument("rk4_run: output_stride must be >= 1");
    }

    const int p = grid.n_points;
    const double dt = options.dt;
    const bool dealias = options.dealias;

    TrajectoryRecord record;
    GridField m = m0;
    GridField u = invert_helmholtz(grid, m);
    record.snapshots.push_back({0.0, u});
    record.energy_trace.push_back({0.0, reference_energy(grid, u, m), 0, 0.0});

    GridField stage(p), k1, k2, k3, k4;
    for (int k = 1; k <= options.n_steps; ++k) {
        k1 = ch_rhs(grid, m, dealias);
        for (int j = 0; j < p; ++j) stage[j] = m[j] + 0.5 * dt * k1[j];
        k2 = ch_rhs(grid, stage, dealias);
        for (int j = 0; j < p; ++j) stage[j] = m[j] + 0.5 * dt * k2[j];
        k3 = ch_rhs(grid, stage, dealias);
        for (int j = 0; j < p; ++j) stage[j] = m[j] + dt * k3[j];
        k4 = ch_rhs(grid, stage, dealias);
        for (int j = 0; j < p; ++j) {
            m[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        const double t = k * dt;
        if (infinity_norm(m) > kBlowUpThreshold) {
            char reason[128];
            std::snprintf(reason, sizeof reason,
                          "rk4_run: momentum infinity norm passed 1e12 at step %d (t = %g)", k, t);
            throw divergence_error(reason);
        }
        u = invert_helmholtz(grid, m);
        record.energy_trace.push_back({t, reference_energy(grid, u, m), 0, 0.0});
        if (k % options.output_stride == 0 || k == options.n_steps) {
            record.snapshots.push_back({t, u});
        }
    }
    record.metadata.completed = true;
    return record;
}

}  // namespace epdiff
