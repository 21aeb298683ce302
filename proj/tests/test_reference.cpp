#include <doctest.h>

#include <cmath>
#include <numbers>

#include "epdiff/errors.hpp"
#include "epdiff/reference.hpp"
#include "epdiff/spectral.hpp"

using namespace epdiff;
using std::numbers::pi;

namespace {

double max_abs(const GridField& f) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
}

double max_diff(const GridField& a, const GridField& b) {
    double m = 0.0;
    for (size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

GridField scaled_sin(const Grid& g, double amplitude) {
    GridField f(g.n_points);
    for (int j = 0; j < g.n_points; ++j) f[j] = amplitude * std::sin(g.points[j]);
    return f;
}

}  // namespace

TEST_CASE("dealias mask zeroes exactly the top third of modes") {
    Grid g = make_grid(9, 1.0);  // cut = floor(18/3) = 6
    GridField field(g.n_points);
    for (int j = 0; j < g.n_points; ++j) {
        field[j] = std::cos(6.0 * g.points[j]) + std::sin(7.0 * g.points[j]);
    }
    const GridField masked = dealias_mask(g, field);
    for (int j = 0; j < g.n_points; ++j) {
        CHECK(std::abs(masked[j] - std::cos(6.0 * g.points[j])) < 1e-12);
    }
    // Fields inside the kept band pass through unchanged.
    const GridField smooth = scaled_sin(g, 0.3);
    CHECK(max_diff(dealias_mask(g, smooth), smooth) < 1e-13);
}

TEST_CASE("rhs vanishes for zero and constant momentum") {
    Grid g = make_grid(10, 1.0);
    for (bool dealias : {false, true}) {
        CHECK(max_abs(ch_rhs(g, GridField(g.n_points, 0.0), dealias)) == 0.0);
        // Constants are equilibria: u = c, both derivatives vanish.
        CHECK(max_abs(ch_rhs(g, GridField(g.n_points, 3.5), dealias)) < 1e-13);
    }
}

TEST_CASE("rhs of m = 2 sin x is -3 sin 2x") {
    // alpha = 1 makes u = sin x, so
    //   -(sin x * 2 cos x + 2 * 2 sin x * cos x) = -3 sin 2x.
    // The product modes live at |k| = 2, inside the 2/3 band for N = 10,
    // so the masked and unmasked paths agree here.
    Grid g = make_grid(10, 1.0);
    const GridField m = scaled_sin(g, 2.0);
    for (bool dealias : {false, true}) {
        const GridField r = ch_rhs(g, m, dealias);
        for (int j = 0; j < g.n_points; ++j) {
            CHECK(std::abs(r[j] + 3.0 * std::sin(2.0 * g.points[j])) < 1e-12);
        }
    }
}

TEST_CASE("rk4_run validates inputs and handles the zero trajectory") {
    Grid g = make_grid(6, 1.0);
    ReferenceOptions options;
    options.dt = 0.01;
    options.n_steps = 5;
    CHECK_THROWS_AS(rk4_run(g, GridField(3, 0.0), options), std::invalid_argument);
    ReferenceOptions bad = options;
    bad.dt = 0.0;
    CHECK_THROWS_AS(rk4_run(g, GridField(g.n_points, 0.0), bad), std::invalid_argument);
    bad = options;
    bad.output_stride = 0;
    CHECK_THROWS_AS(rk4_run(g, GridField(g.n_points, 0.0), bad), std::invalid_argument);

    const TrajectoryRecord record = rk4_run(g, GridField(g.n_points, 0.0), options);
    REQUIRE(record.snapshots.size() == 6);
    REQUIRE(record.energy_trace.size() == 6);
    for (const auto& snapshot : record.snapshots) CHECK(max_abs(snapshot.u) == 0.0);
    for (const auto& sample : record.energy_trace) CHECK(sample.energy == 0.0);
}

TEST_CASE("constant momentum stays constant to round-off") {
    Grid g = make_grid(8, 1.0);
    ReferenceOptions options;
    options.dt = 0.01;
    options.n_steps = 100;
    options.output_stride = 100;
    const TrajectoryRecord record = rk4_run(g, GridField(g.n_points, 2.0), options);
    const GridField& final_u = record.snapshots.back().u;
    for (double v : final_u) CHECK(std::abs(v - 2.0) < 1e-12);
}

TEST_CASE("snapshot stride keeps first, strided, and final states") {
    Grid g = make_grid(6, 1.0);
    ReferenceOptions options;
    options.dt = 0.01;
    options.n_steps = 10;
    options.output_stride = 4;
    const TrajectoryRecord record = rk4_run(g, scaled_sin(g, 0.1), options);
    REQUIRE(record.snapshots.size() == 4);  // steps 0, 4, 8, 10
    CHECK(record.snapshots[0].t == doctest::Approx(0.0));
    CHECK(record.snapshots[1].t == doctest::Approx(0.04));
    CHECK(record.snapshots[2].t == doctest::Approx(0.08));
    CHECK(record.snapshots[3].t == doctest::Approx(0.10));
    REQUIRE(record.energy_trace.size() == 11);
}

TEST_CASE("self-convergence at fourth order on a smooth run") {
    // u0 = 0.1 sin x (so m0 = 0.2 sin x at alpha = 1), 129 points, T = 1.
    // The order is measured where truncation error is resolvable in double
    // precision (the step-halving differences are ~1e-12 at dt = 0.04; by
    // dt = 1e-3 they sit below round-off, where a ratio measures noise).
    Grid g = make_grid(64, 1.0);
    GridField u0 = scaled_sin(g, 0.1);
    const GridField m0 = apply_helmholtz(g, u0);

    auto final_u = [&](double dt, int n_steps) {
        ReferenceOptions options;
        options.dt = dt;
        options.n_steps = n_steps;
        options.output_stride = n_steps;
        return rk4_run(g, m0, options).snapshots.back().u;
    };
    const GridField coarse = final_u(0.04, 25);
    const GridField medium = final_u(0.02, 50);
    const GridField fine = final_u(0.01, 100);

    const double e1 = max_diff(coarse, medium);
    const double e2 = max_diff(medium, fine);
    const double order = std::log2(e1 / e2);
    CHECK(order == doctest::Approx(4.0).epsilon(0.05));

    // At dt = 1e-3 the run is converged to round-off: halving the step
    // changes the final state by less than 1e-13 in the infinity norm.
    const GridField fine_a = final_u(1e-3, 1000);
    const GridField fine_b = final_u(5e-4, 2000);
    CHECK(max_diff(fine_a, fine_b) < 1e-13);
}

TEST_CASE("energy drift on the smooth run stays below 1e-8 relative") {
    Grid g = make_grid(64, 1.0);
    const GridField m0 = apply_helmholtz(g, scaled_sin(g, 0.1));
    ReferenceOptions options;
    options.dt = 1e-3;
    options.n_steps = 1000;
    options.output_stride = 1000;
    const TrajectoryRecord record = rk4_run(g, m0, options);
    const double e0 = record.energy_trace.front().energy;
    double worst = 0.0;
    for (const auto& sample : record.energy_trace) {
        worst = std::max(worst, std::abs(sample.energy - e0));
    }
    CHECK(worst / std::abs(e0) < 1e-8);
}

TEST_CASE("blow-up raises divergence_error instead of returning junk") {
    // A huge step on an order-one state makes RK4 overshoot explosively
    // within a few steps.
    Grid g = make_grid(8, 1.0);
    const GridField m0 = scaled_sin(g, 10.0);
    ReferenceOptions options;
    options.dt = 10.0;
    options.n_steps = 50;
    options.dealias = false;
    CHECK_THROWS_AS(rk4_run(g, m0, options), divergence_error);
}
