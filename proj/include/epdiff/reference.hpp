#ifndef EPDIFF_REFERENCE_HPP
#define EPDIFF_REFERENCE_HPP

#include "epdiff/grid.hpp"
#include "epdiff/trajectory.hpp"

namespace epdiff {

/** Method-of-lines reference run configuration. */
struct ReferenceOptions {
    /** 2/3-rule mask on pointwise products (standard pseudospectral
     * practice for a best-effort reference; the variational path never
     * dealiases, so the two stay independent). */
    bool dealias = true;
    double dt = 0.0;
    int n_steps = 0;
    /** Snapshots are kept every `output_stride` steps (first and last
     * always included); the energy trace is kept at every step. */
    int output_stride = 1;
};

/** Zeroes the modes with |k| > floor(2N/3) of a grid field — the 2/3-rule
 * guard applied around pointwise products in the reference right-hand
 * side. */
GridField dealias_mask(const Grid& grid, const GridField& field);

/** Right-hand side of the momentum evolution
 *
 *   dm/dt = -(u * m_x + 2 * m * u_x),   u = invert_helmholtz(m),
 *
 * the conservative grouping of the shallow-water peakon equation. With
 * `dealias` set, u and m are masked before the products, the derivatives
 * are masked after differentiation, and the assembled result is masked
 * once more. */
GridField ch_rhs(const Grid& grid, const GridField& m, bool dealias);

/** Classical 4-stage Runge-Kutta on ch_rhs starting from the momentum m0.
 * Snapshots store the velocity u = invert_helmholtz(m); the momentum is
 * exactly recoverable from any snapshot by applying the Helmholtz
 * operator. The energy trace records E = (pi/P) * sum_j u_j m_j at every
 * step with zero solver-effort fields (RK4 has no inner iteration).
 *
 * Throws divergence_error as soon as the momentum's infinity norm passes
 * 1e12 (or stops being finite). */
TrajectoryRecord rk4_run(const Grid& grid, const GridField& m0, const ReferenceOptions& options);

}  // namespace epdiff

#endif
