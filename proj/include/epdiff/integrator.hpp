#ifndef EPDIFF_INTEGRATOR_HPP
#define EPDIFF_INTEGRATOR_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "epdiff/grid.hpp"
#include "epdiff/trajectory.hpp"

namespace epdiff {

/** One-step update rules of the variational integrator. The residual of a
 * step (see scheme_residual) uses the same 1/P scaling as the dense tensor
 * oracle, so the two agree entry by entry. The midpoint rule is
 * deliberately absent here; see diffeo.hpp. */
enum class Scheme { explicit_euler, implicit_euler, average };

/** Per-step nonlinear solver configuration. */
struct SolverOptions {
    /** Infinity-norm residual target. */
    double tolerance = 1e-12;
    /** Hard cap on solver sweeps per step. */
    int max_iterations = 50;
    enum class Method {
        newton,  ///< dense LU on the analytic Jacobian (default)
        picard   ///< Helmholtz-preconditioned fixed point; FFT-only, no dense algebra
    };
    Method method = Method::newton;
    /** Step used by the central finite-difference Jacobian check. */
    double fd_epsilon = 1e-7;

    bool operator==(const SolverOptions&) const = default;
};

/** Outcome of one nonlinear solve. */
struct StepReport {
    int iterations = 0;
    double residual_norm = 0.0;
    bool converged = false;
};

/** Residual of the one-step update equation, a real length-P field:
 *
 *   explicit:  e(Xn) - e(Xo) + dt * ( c(Xo) - d(Xn) )
 *   implicit:  e(Xn) - e(Xo) + dt * ( c(Xn) - d(Xo) )
 *   average:   arithmetic mean of the two
 *
 * built from the fast grid-space terms (fast_ops.hpp) and identical, to
 * reality tolerance, to the dense tensor contraction residual. A step is
 * accepted when this vanishes to solver tolerance in the infinity norm. */
GridField scheme_residual(const Grid& grid, Scheme scheme, const GridField& x_new,
                          const GridField& x_old, double dt);

/** Analytic Jacobian of scheme_residual with respect to X_new: a dense real
 * P x P matrix assembled from the circulant derivative and Helmholtz
 * matrices plus diagonal scalings. Validated against central finite
 * differences by fd_jacobian. */
Eigen::MatrixXd scheme_jacobian(const Grid& grid, Scheme scheme, const GridField& x_new,
                                double dt);

/** Central finite-difference Jacobian of scheme_residual with respect to
 * X_new, for solver-health checks. */
Eigen::MatrixXd fd_jacobian(const Grid& grid, Scheme scheme, const GridField& x_new,
                            const GridField& x_old, double dt, double epsilon);

/** One-step nonlinear solver with per-grid cached dense operators.
 *
 * Newton builds the Jacobian once per step at the predictor (the previous
 * state) and reuses its factorization across sweeps — the residual is
 * quadratic, so the slightly lagged Jacobian still contracts at O(dt) per
 * sweep; if the iteration stalls the Jacobian is rebuilt at the current
 * iterate (at most twice per step). Picard iterates
 *   X <- Xo - dt * P * H^{-1}(quadratic terms)
 * and needs no dense algebra at all. Both methods measure convergence on
 * the true residual's infinity norm. */
class Stepper {
  public:
    Stepper(const Grid& grid, Scheme scheme, const SolverOptions& options);

    /** Solves the update equation for x_new given x_old. On failure the
     * report has converged = false; x_new then holds the last iterate. */
    StepReport step(const GridField& x_old, double dt, GridField& x_new);

    const Grid& grid() const { return grid_; }
    Scheme scheme() const { return scheme_; }

  private:
    StepReport newton_step(const GridField& x_old, double dt, GridField& x_new);
    StepReport picard_step(const GridField& x_old, double dt, GridField& x_new);

    Grid grid_;
    Scheme scheme_;
    SolverOptions options_;
    /** Circulant dense d/dx and Helmholtz matrices, built once (Newton). */
    Eigen::MatrixXd derivative_;
    Eigen::MatrixXd helmholtz_;
    bool dense_ready_ = false;
    void ensure_dense_operators();
};

/** Full integration record. When a step fails the run halts early:
 * `completed` is false, `failed_step` and `failure_reason` say where and
 * why, and everything recorded up to the failure is kept. */
struct IntegrationResult {
    std::vector<Snapshot> snapshots;
    std::vector<EnergySample> energy_trace;
    GridField final_state;
    bool completed = false;
    int failed_step = -1;
    std::string failure_reason;
    /** Largest per-step solver effort seen (the solver-health headline). */
    int max_iterations_used = 0;
};

struct RunOptions {
    double dt = 0.01;
    int n_steps = 0;
    /** Snapshots are kept every `output_stride` steps (first and last
     * always included); the energy trace is kept at every step. */
    int output_stride = 1;
    SolverOptions solver;
};

/** Integrates n_steps of the chosen scheme from x0, recording the energy
 * at every step and snapshots at the configured stride. */
IntegrationResult run(const Grid& grid, Scheme scheme, const GridField& x0,
                      const RunOptions& options);

/** Name <-> enum helpers shared by the configuration and report layers. */
const char* scheme_name(Scheme scheme);

}  // namespace epdiff

#endif
