#include "epdiff/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "epdiff/errors.hpp"
#include "epdiff/fast_ops.hpp"
#include "epdiff/spectral.hpp"

namespace epdiff {

namespace {

double infinity_norm(const GridField& f) {
    double m = 0.0;
    for (double v : f) {
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        m = std::max(m, std::abs(v));
    }
    return m;
}

Eigen::Map<const Eigen::VectorXd> as_vector(const GridField& f) {
    return {f.data(), static_cast<Eigen::Index>(f.size())};
}

void require_state(const Grid& grid, const GridField& x, const char* what) {
    if (static_cast<int>(x.size()) != grid.n_points) {
        throw std::invalid_argument(std::string(what) + ": state length " +
                                    std::to_string(x.size()) + " does not match grid size " +
                                    std::to_string(grid.n_points));
    }
}

/** Dense circulant matrix whose action equals `apply` on the grid: built
 * from the image of a single indicator column, then wrapped around. */
Eigen::MatrixXd circulant_from_column(const Grid& grid, GridField (*apply)(const Grid&, const GridField&)) {
    const int p = grid.n_points;
    GridField indicator(p, 0.0);
    indicator[0] = 1.0;
    const GridField column = apply(grid, indicator);
    Eigen::MatrixXd m(p, p);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            m(i, j) = column[(i - j + p) % p];
        }
    }
    return m;
}

}  // namespace

const char* scheme_name(Scheme scheme) {
    switch (scheme) {
        case Scheme::explicit_euler: return "explicit";
        case Scheme::implicit_euler: return "implicit";
        case Scheme::average: return "average";
    }
    return "unknown";
}

GridField scheme_residual(const Grid& grid, Scheme scheme, const GridField& x_new,
                          const GridField& x_old, double dt) {
    require_state(grid, x_new, "scheme_residual");
    require_state(grid, x_old, "scheme_residual");
    if (!(dt > 0.0)) throw std::invalid_argument("scheme_residual: dt must be > 0");
    const GridField e_new = e_term(grid, x_new);
    const GridField e_old = e_term(grid, x_old);
    GridField quad(grid.n_points, 0.0);
    switch (scheme) {
        case Scheme::explicit_euler: {
            const GridField c_old = c_term(grid, x_old);
            const GridField d_new = d_term(grid, x_new);
            for (int j = 0; j < grid.n_points; ++j) quad[j] = c_old[j] - d_new[j];
            break;
        }
        case Scheme::implicit_euler: {
            const GridField c_new = c_term(grid, x_new);
            const GridField d_old = d_term(grid, x_old);
            for (int j = 0; j < grid.n_points; ++j) quad[j] = c_new[j] - d_old[j];
            break;
        }
        case Scheme::average: {
            const GridField c_old = c_term(grid, x_old);
            const GridField d_new = d_term(grid, x_new);
            const GridField c_new = c_term(grid, x_new);
            const GridField d_old = d_term(grid, x_old);
            for (int j = 0; j < grid.n_points; ++j) {
                quad[j] = 0.5 * (c_old[j] - d_new[j] + c_new[j] - d_old[j]);
            }
            break;
        }
    }
    GridField residual(grid.n_points);
    for (int j = 0; j < grid.n_points; ++j) {
        residual[j] = e_new[j] - e_old[j] + dt * quad[j];
    }
    return residual;
}

namespace {

/** d(c_term)/dX and d(d_term)/dX at X, assembled from the dense circulant
 * operators Dx (derivative) and Hm (Helmholtz):
 *   c(X) =  (1/P) (Dx X) .* (Hm X)  =>  Jc = (1/P)(diag(Hm X) Dx + diag(Dx X) Hm)
 *   d(X) = -(1/P) Dx (X .* Hm X)    =>  Jd = -(1/P) Dx (diag(Hm X) + diag(X) Hm)
 */
Eigen::MatrixXd c_jacobian(const Grid& grid, const Eigen::MatrixXd& dx, const Eigen::MatrixXd& hm,
                           const GridField& x) {
    const Eigen::VectorXd xv = as_vector(x);
    const Eigen::VectorXd hx = hm * xv;
    const Eigen::VectorXd dxx = dx * xv;
    return (hx.asDiagonal() * dx + dxx.asDiagonal() * hm) / grid.n_points;
}

Eigen::MatrixXd d_jacobian(const Grid& grid, const Eigen::MatrixXd& dx, const Eigen::MatrixXd& hm,
                           const GridField& x) {
    const Eigen::VectorXd xv = as_vector(x);
    const Eigen::VectorXd hx = hm * xv;
    Eigen::MatrixXd inner = xv.asDiagonal() * hm;
    inner += Eigen::MatrixXd(hx.asDiagonal());
    return -(dx * inner) / grid.n_points;
}

Eigen::MatrixXd jacobian_from_dense(const Grid& grid, Scheme scheme, const Eigen::MatrixXd& dx,
                                    const Eigen::MatrixXd& hm, const GridField& x_new, double dt) {
    switch (scheme) {
        case Scheme::explicit_euler:
            return hm / grid.n_points - dt * d_jacobian(grid, dx, hm, x_new);
        case Scheme::implicit_euler:
            return hm / grid.n_points + dt * c_jacobian(grid, dx, hm, x_new);
        case Scheme::average:
            return hm / grid.n_points +
                   0.5 * dt *
                       (c_jacobian(grid, dx, hm, x_new) - d_jacobian(grid, dx, hm, x_new));
    }
    throw std::logic_error("jacobian_from_dense: unreachable");
}

}  // namespace

Eigen::MatrixXd scheme_jacobian(const Grid& grid, Scheme scheme, const GridField& x_new,
                                double dt) {
    require_state(grid, x_new, "scheme_jacobian");
    const Eigen::MatrixXd dx = circulant_from_column(grid, &spectral_derivative);
    const Eigen::MatrixXd hm = circulant_from_column(grid, &apply_helmholtz);
    return jacobian_from_dense(grid, scheme, dx, hm, x_new, dt);
}

Eigen::MatrixXd fd_jacobian(const Grid& grid, Scheme scheme, const GridField& x_new,
                            const GridField& x_old, double dt, double epsilon) {
    require_state(grid, x_new, "fd_jacobian");
    const int p = grid.n_points;
    Eigen::MatrixXd j(p, p);
    GridField perturbed = x_new;
    for (int col = 0; col < p; ++col) {
        perturbed[col] = x_new[col] + epsilon;
        const GridField plus = scheme_residual(grid, scheme, perturbed, x_old, dt);
        perturbed[col] = x_new[col] - epsilon;
        const GridField minus = scheme_residual(grid, scheme, perturbed, x_old, dt);
        perturbed[col] = x_new[col];
        for (int row = 0; row < p; ++row) {
            j(row, col) = (plus[row] - minus[row]) / (2.0 * epsilon);
        }
    }
    return j;
}

Stepper::Stepper(const Grid& grid, Scheme scheme, const SolverOptions& options)
    : grid_(grid), scheme_(scheme), options_(options) {
    if (!(options_.tolerance > 0.0)) {
        throw std::invalid_argument("Stepper: tolerance must be > 0");
    }
    if (options_.max_iterations < 1) {
        throw std::invalid_argument("Stepper: max_iterations must be >= 1");
    }
}

void Stepper::ensure_dense_operators() {
    if (dense_ready_) return;
    derivative_ = circulant_from_column(grid_, &spectral_derivative);
    helmholtz_ = circulant_from_column(grid_, &apply_helmholtz);
    dense_ready_ = true;
}

StepReport Stepper::step(const GridField& x_old, double dt, GridField& x_new) {
    require_state(grid_, x_old, "Stepper::step");
    if (!(dt > 0.0)) throw std::invalid_argument("Stepper::step: dt must be > 0");
    if (options_.method == SolverOptions::Method::newton) {
        return newton_step(x_old, dt, x_new);
    }
    return picard_step(x_old, dt, x_new);
}

StepReport Stepper::newton_step(const GridField& x_old, double dt, GridField& x_new) {
    ensure_dense_operators();
    x_new = x_old;
    StepReport report;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(
        jacobian_from_dense(grid_, scheme_, derivative_, helmholtz_, x_new, dt));
    int rebuilds = 0;
    double previous_norm = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep <= options_.max_iterations; ++sweep) {
        const GridField residual = scheme_residual(grid_, scheme_, x_new, x_old, dt);
        report.residual_norm = infinity_norm(residual);
        report.iterations = sweep;
        if (report.residual_norm <= options_.tolerance) {
            report.converged = true;
            return report;
        }
        if (sweep == options_.max_iterations) break;
        // The factorization is reused across sweeps; when it stops making
        // progress (stall or overshoot), refresh it at the current iterate.
        if (report.residual_norm > 0.25 * previous_norm && rebuilds < 2 && sweep > 0) {
            lu.compute(jacobian_from_dense(grid_, scheme_, derivative_, helmholtz_, x_new, dt));
            ++rebuilds;
        }
        previous_norm = report.residual_norm;
        const Eigen::VectorXd delta = lu.solve(as_vector(residual));
        if (!delta.allFinite()) {
            report.converged = false;
            return report;
        }
        for (int j = 0; j < grid_.n_points; ++j) x_new[j] -= delta[j];
    }
    report.converged = false;
    return report;
}

StepReport Stepper::picard_step(const GridField& x_old, double dt, GridField& x_new) {
    // The update equation says H(Xn - Xo)/P = -dt * (quadratic terms), so
    // iterate Xn <- Xo - dt * P * H^{-1}(quadratic terms at the current
    // iterate). Contraction needs dt * |u| below order one, which the
    // acceptance-scale runs satisfy.
    x_new = x_old;
    StepReport report;
    const GridField c_old = c_term(grid_, x_old);
    const GridField d_old = d_term(grid_, x_old);
    for (int sweep = 0; sweep <= options_.max_iterations; ++sweep) {
        const GridField residual = scheme_residual(grid_, scheme_, x_new, x_old, dt);
        report.residual_norm = infinity_norm(residual);
        report.iterations = sweep;
        if (report.residual_norm <= options_.tolerance) {
            report.converged = true;
            return report;
        }
        if (sweep == options_.max_iterations) break;
        GridField quad(grid_.n_points);
        switch (scheme_) {
            case Scheme::explicit_euler: {
                const GridField d_new = d_term(grid_, x_new);
                for (int j = 0; j < grid_.n_points; ++j) quad[j] = c_old[j] - d_new[j];
                break;
            }
            case Scheme::implicit_euler: {
                const GridField c_new = c_term(grid_, x_new);
                for (int j = 0; j < grid_.n_points; ++j) quad[j] = c_new[j] - d_old[j];
                break;
            }
            case Scheme::average: {
                const GridField d_new = d_term(grid_, x_new);
                const GridField c_new = c_term(grid_, x_new);
                for (int j = 0; j < grid_.n_points; ++j) {
                    quad[j] = 0.5 * (c_old[j] - d_new[j] + c_new[j] - d_old[j]);
                }
                break;
            }
        }
        for (auto& v : quad) v *= dt * grid_.n_points;
        const GridField correction = invert_helmholtz(grid_, quad);
        for (int j = 0; j < grid_.n_points; ++j) x_new[j] = x_old[j] - correction[j];
    }
    report.converged = false;
    return report;
}

IntegrationResult run(const Grid& grid, Scheme scheme, const GridField& x0,
                      const RunOptions& options) {
    require_state(grid, x0, "run");
    if (options.n_steps < 0) throw std::invalid_argument("run: n_steps must be >= 0");
    if (options.output_stride < 1) throw std::invalid_argument("run: output_stride must be >= 1");

    Stepper stepper(grid, scheme, options.solver);
    IntegrationResult result;
    GridField state = x0;
    result.snapshots.push_back({0.0, state});
    result.energy_trace.push_back({0.0, energy(grid, state), 0, 0.0});

    for (int k = 1; k <= options.n_steps; ++k) {
        GridField next;
        const StepReport report = stepper.step(state, options.dt, next);
        const double t = k * options.dt;
        result.max_iterations_used = std::max(result.max_iterations_used, report.iterations);
        if (!report.converged) {
            result.completed = false;
            result.failed_step = k;
            char reason[256];
            std::snprintf(reason, sizeof reason,
                          "%s step %d (t = %g): solver reached %d iterations with residual %g "
                          "above tolerance %g",
                          scheme_name(scheme), k, t, report.iterations, report.residual_norm,
                          options.solver.tolerance);
            result.failure_reason = reason;
            result.final_state = state;
            return result;
        }
        state = std::move(next);
        result.energy_trace.push_back({t, energy(grid, state), report.iterations,
                                       report.residual_norm});
        if (k % options.output_stride == 0 || k == options.n_steps) {
            result.snapshots.push_back({t, state});
        }
    }
    result.completed = true;
    result.final_state = std::move(state);
    return result;
}

}  // namespace epdiff
