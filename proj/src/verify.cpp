#include "epdiff/verify.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>

#include "epdiff/diffeo.hpp"
#include "epdiff/fast_ops.hpp"
#include "epdiff/grid.hpp"
#include "epdiff/integrator.hpp"
#include "epdiff/spectral.hpp"

namespace epdiff {

namespace {

using cplx = std::complex<double>;

GridField random_field(const Grid& grid, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    GridField x(grid.n_points);
    for (double& v : x) v = uniform(rng);
    return x;
}

double max_abs(const GridField& x) {
    double worst = 0.0;
    for (double v : x) worst = std::max(worst, std::abs(v));
    return worst;
}

std::string number(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.3g", value);
    return buffer;
}

/** DFT round trip and Parseval on a 33-point grid. */
VerifyCheck check_dft_unitarity() {
    VerifyCheck check{"dft-unitarity", false, ""};
    const Grid grid = make_grid(16, 1.0);
    double worst_trip = 0.0;
    double worst_parseval = 0.0;
    for (unsigned seed : {101u, 102u, 103u}) {
        const GridField x = random_field(grid, seed);
        const SpectralCoeffs coeffs = dft(grid, x);
        const GridField back = idft(grid, coeffs);
        double field_sq = 0.0;
        double coeff_sq = 0.0;
        for (int j = 0; j < grid.n_points; ++j) {
            worst_trip = std::max(worst_trip, std::abs(back[j] - x[j]));
            field_sq += x[j] * x[j];
            coeff_sq += std::norm(coeffs[j]);
        }
        worst_parseval = std::max(worst_parseval, std::abs(coeff_sq - field_sq));
    }
    check.passed = worst_trip <= 1e-12 && worst_parseval <= 1e-12;
    check.detail = "round trip " + number(worst_trip) + ", Parseval gap " +
                   number(worst_parseval) + " (tolerance 1e-12, 33 points)";
    return check;
}

/** Fast grid-space terms against the dense tensor contractions. */
VerifyCheck check_tensor_equivalence(const std::vector<int>& mode_counts) {
    VerifyCheck check{"tensor-contraction-equivalence", false, ""};
    double worst = 0.0;
    std::string sizes;
    for (int n_modes : mode_counts) {
        const Grid grid = make_grid(n_modes, 0.8);
        const TensorCDE t = tensors(grid);
        for (unsigned seed = 1; seed <= 10; ++seed) {
            const GridField x = random_field(grid, 1000u * static_cast<unsigned>(n_modes) + seed);
            Eigen::VectorXcd xc(grid.n_points);
            for (int j = 0; j < grid.n_points; ++j) xc[j] = x[j];
            const GridField fe = e_term(grid, x);
            const GridField fc = c_term(grid, x);
            const GridField fd = d_term(grid, x);
            const Eigen::VectorXcd e_contract = t.e.transpose() * xc;
            const double scale =
                std::max({1.0, max_abs(fe), max_abs(fc), max_abs(fd)});
            for (int q = 0; q < grid.n_points; ++q) {
                const cplx c_contract = (xc.adjoint() * t.c[q] * xc).value();
                const cplx d_contract = (xc.transpose() * t.d[q] * xc.conjugate()).value();
                worst = std::max(worst, std::abs(e_contract[q] - cplx(fe[q], 0.0)) / scale);
                worst = std::max(worst, std::abs(c_contract - cplx(fc[q], 0.0)) / scale);
                worst = std::max(worst, std::abs(d_contract - cplx(fd[q], 0.0)) / scale);
            }
        }
        if (!sizes.empty()) sizes += ",";
        sizes += std::to_string(grid.n_points);
    }
    check.passed = worst <= 1e-10;
    check.detail = "worst relative mismatch " + number(worst) +
                   " over 10 random fields at P=" + sizes + " (tolerance 1e-10)";
    return check;
}

/** A deliberately sign-flipped derivative must be caught by the dense
 * oracle while the true fast path agrees — exercises the detector, not
 * just the happy path. */
VerifyCheck check_mutation_sensitivity() {
    VerifyCheck check{"mutation-sensitivity", false, ""};
    const Grid grid = make_grid(4, 1.0);
    const TensorCDE t = tensors(grid);
    const GridField x = random_field(grid, 77u);
    Eigen::VectorXcd xc(grid.n_points);
    for (int j = 0; j < grid.n_points; ++j) xc[j] = x[j];

    // Mutant c-term: derivative applied with the conjugated symbol -ik.
    SpectralCoeffs coeffs = dft(grid, x);
    for (int idx = 0; idx < grid.n_points; ++idx) {
        coeffs[idx] *= cplx(0.0, -static_cast<double>(grid.mode(idx)));
    }
    const GridField ux_mutant = idft(grid, coeffs);
    const GridField m = apply_helmholtz(grid, x);
    const GridField fc = c_term(grid, x);

    double true_gap = 0.0;
    double mutant_gap = 0.0;
    double scale = 0.0;
    for (int q = 0; q < grid.n_points; ++q) {
        const cplx c_contract = (xc.adjoint() * t.c[q] * xc).value();
        const double mutant = ux_mutant[q] * m[q] / grid.n_points;
        true_gap = std::max(true_gap, std::abs(c_contract - cplx(fc[q], 0.0)));
        mutant_gap = std::max(mutant_gap, std::abs(c_contract - cplx(mutant, 0.0)));
        scale = std::max(scale, std::abs(c_contract));
    }
    check.passed = true_gap <= 1e-10 * std::max(1.0, scale) && mutant_gap > 1e-2 * scale;
    check.detail = "true path off by " + number(true_gap) + ", seeded sign defect off by " +
                   number(mutant_gap) + " (must exceed " + number(1e-2 * scale) + ")";
    return check;
}

/** Analytic update-equation Jacobians against central differences. */
VerifyCheck check_jacobian_fd() {
    VerifyCheck check{"jacobian-fd-agreement", false, ""};
    const Grid grid = make_grid(8, 0.7);
    const GridField x_old = random_field(grid, 11u);
    GridField x_new = random_field(grid, 12u);
    for (int j = 0; j < grid.n_points; ++j) x_new[j] = x_old[j] + 0.05 * x_new[j];
    const double dt = 0.01;
    double worst = 0.0;
    for (Scheme scheme : {Scheme::explicit_euler, Scheme::implicit_euler, Scheme::average}) {
        const Eigen::MatrixXd analytic = scheme_jacobian(grid, scheme, x_new, dt);
        const Eigen::MatrixXd numeric = fd_jacobian(grid, scheme, x_new, x_old, dt, 1e-7);
        worst = std::max(worst, (analytic - numeric).norm() / analytic.norm());
    }
    check.passed = worst <= 1e-6;
    check.detail = "worst relative Frobenius gap " + number(worst) +
                   " across the three rules (tolerance 1e-6, 17 points)";
    return check;
}

/** Closed-form energies and the single-mode values of the update terms. */
VerifyCheck check_energy_identities() {
    VerifyCheck check{"energy-identities", false, ""};
    const double pi = std::numbers::pi;
    double worst = 0.0;

    // energy(sin) = (1/2)(int sin^2 + int sin'^2) = pi at alpha = 1.
    const Grid grid = make_grid(10, 1.0);
    GridField sin_field(grid.n_points);
    for (int j = 0; j < grid.n_points; ++j) sin_field[j] = std::sin(grid.points[j]);
    worst = std::max(worst, std::abs(energy(grid, sin_field) - pi) / pi);

    // energy = pi * <U^flat, U> on random fields.
    const Grid small = make_grid(4, 0.8);
    for (unsigned seed : {21u, 22u, 23u}) {
        const GridField x = random_field(small, seed);
        const OperatorMatrix u = vector_field_matrix(small, x);
        const double via_pairing = pi * flat_pairing(small, u, u).real();
        worst = std::max(worst,
                         std::abs(energy(small, x) - via_pairing) / std::max(1.0, via_pairing));
    }

    // Single mode X = sin: P*e = 2 sin x, P*c = sin 2x, P*d = -2 sin 2x.
    const GridField fe = e_term(grid, sin_field);
    const GridField fc = c_term(grid, sin_field);
    const GridField fd = d_term(grid, sin_field);
    const double p = grid.n_points;
    for (int j = 0; j < grid.n_points; ++j) {
        const double xj = grid.points[j];
        worst = std::max(worst, std::abs(p * fe[j] - 2.0 * std::sin(xj)));
        worst = std::max(worst, std::abs(p * fc[j] - std::sin(2.0 * xj)));
        worst = std::max(worst, std::abs(p * fd[j] + 2.0 * std::sin(2.0 * xj)));
    }

    check.passed = worst <= 1e-10;
    check.detail = "worst deviation " + number(worst) +
                   " across closed-form energy and single-mode term values (tolerance 1e-10)";
    return check;
}

/** Runs one check, converting any escape into a failed result so the
 * report always carries every check's name. */
template <typename Fn>
VerifyCheck guarded(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& error) {
        return VerifyCheck{name, false, error.what()};
    }
}

}  // namespace

VerifyReport run_verification(const std::vector<int>& tensor_mode_counts) {
    VerifyReport report;
    report.checks.push_back(guarded("dft-unitarity", check_dft_unitarity));
    report.checks.push_back(guarded("tensor-contraction-equivalence", [&] {
        return check_tensor_equivalence(tensor_mode_counts);
    }));
    report.checks.push_back(guarded("mutation-sensitivity", check_mutation_sensitivity));
    report.checks.push_back(guarded("jacobian-fd-agreement", check_jacobian_fd));
    report.checks.push_back(guarded("energy-identities", check_energy_identities));
    report.all_passed = true;
    for (const VerifyCheck& check : report.checks) {
        report.all_passed = report.all_passed && check.passed;
    }
    return report;
}

std::string verify_report_json(const VerifyReport& report) {
    nlohmann::json checks = nlohmann::json::array();
    for (const VerifyCheck& check : report.checks) {
        checks.push_back({{"name", check.name}, {"passed", check.passed}, {"detail", check.detail}});
    }
    const nlohmann::json doc = {{"checks", checks}, {"all_passed", report.all_passed}};
    return doc.dump(2);
}

}  // namespace epdiff
