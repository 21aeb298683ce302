#ifndef EPDIFF_SCENARIOS_HPP
#define EPDIFF_SCENARIOS_HPP

#include <string>

#include "epdiff/grid.hpp"

namespace epdiff {

enum class ScenarioKind { gaussian, peakon, peakon_pair };

/** Initial-condition description, buildable from a parsed configuration.
 * Centers are reduced mod 2*pi into [-pi, pi) when the field is built. */
struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::gaussian;
    /** Bump height (gaussian) or peak velocity c (peakon, first of pair). */
    double amplitude = 1.0;
    double center = 0.0;
    /** Gaussian width; must be positive. Ignored by the peakon kinds. */
    double sigma = 1.0;
    /** Second peak velocity (peakon_pair only). */
    double amplitude2 = 0.0;
    double center2 = 0.0;

    bool operator==(const ScenarioSpec&) const = default;
};

/** Reduces an angle mod 2*pi into [-pi, pi). */
double reduce_angle(double x);

/** Smooth periodic Gaussian bump: the 2*pi-periodization
 *
 *   X_j = A * sum_n exp(-(x_j - x0 + 2*pi*n)^2 / sigma^2),
 *
 * summed until additional images fall below round-off. The summation keeps
 * the field analytic in x, so its spectrum decays below 1e-10 at the grid
 * edge whenever sigma >= 8 * spacing; narrower bumps underresolve, which
 * sets *aliased (a warning flag, not an error). */
GridField gaussian(const Grid& grid, double amplitude, double center, double sigma,
                   bool* aliased = nullptr);

/** Periodic peakon: the grid's own Helmholtz unit bump — the field whose
 * momentum is a one-point impulse — scaled so the interpolant equals
 * `amplitude` at `center`. It matches the classical exponential-peak
 * profile
 *
 *   c * cosh((pi - |x - x0|_2pi) / sqrt(alpha)) / cosh(pi / sqrt(alpha))
 *
 * to the grid's spectral truncation (about 0.5% at 257 points, shrinking
 * with resolution), while keeping the defining impulse property exact:
 * apply_helmholtz concentrates all of the momentum at the center. */
GridField peakon(const Grid& grid, double amplitude, double center);

/** Pointwise sum of two peakons. */
GridField peakon_pair(const Grid& grid, double c1, double x1, double c2, double x2);

/** Builds the field a spec describes (centers reduced into [-pi, pi)).
 * The aliased flag is set only by the gaussian kind. */
GridField build_scenario(const Grid& grid, const ScenarioSpec& spec, bool* aliased = nullptr);

const char* scenario_kind_name(ScenarioKind kind);

/** Inverse of scenario_kind_name; throws std::invalid_argument for
 * unrecognized names. */
ScenarioKind scenario_kind_from_name(const std::string& name);

}  // namespace epdiff

#endif
