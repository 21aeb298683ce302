#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "epdiff/diffeo.hpp"
#include "epdiff/errors.hpp"
#include "epdiff/fast_ops.hpp"
#include "epdiff/spectral.hpp"

using namespace epdiff;
using std::numbers::pi;
using cplx = std::complex<double>;

namespace {

GridField random_field(const Grid& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    GridField field(g.n_points);
    for (auto& v : field) v = dist(rng);
    return field;
}

GridField sampled(const Grid& g, double (*f)(double)) {
    GridField field(g.n_points);
    for (int j = 0; j < g.n_points; ++j) field[j] = f(g.points[j]);
    return field;
}

/** Mode-space derivative matrix D = diag(ik). */
Eigen::MatrixXcd derivative_matrix(const Grid& g) {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(g.n_points, g.n_points);
    for (int idx = 0; idx < g.n_points; ++idx) d(idx, idx) = cplx(0.0, g.mode(idx));
    return d;
}

Eigen::VectorXcd to_vector(const SpectralCoeffs& c) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(c.size()));
    for (size_t i = 0; i < c.size(); ++i) v[static_cast<Eigen::Index>(i)] = c[i];
    return v;
}

}  // namespace

TEST_CASE("basis matrices kill constants and live in the zero-column space") {
    Grid g = make_grid(3, 1.0);
    SpectralCoeffs constant = dft(g, GridField(g.n_points, 2.0));
    for (int j = 0; j < g.n_points; ++j) {
        OperatorMatrix b = basis_matrix(g, j);
        Eigen::VectorXcd image = b.entries * to_vector(constant);
        CHECK(image.cwiseAbs().maxCoeff() < 1e-12);
        // The column at mode 0 vanishes because the rightmost factor is the
        // derivative, whose symbol is zero at k = 0.
        CHECK(b.entries.col(g.index(0)).cwiseAbs().maxCoeff() == 0.0);
        CHECK(b.role == OperatorRole::basis);
        CHECK(b.stripped_row.has_value());
    }
    CHECK_THROWS_AS(basis_matrix(g, -1), std::out_of_range);
    CHECK_THROWS_AS(basis_matrix(g, g.n_points), std::out_of_range);
}

TEST_CASE("the generators sum to minus the derivative matrix") {
    // sum_j I_j = Id, so sum_j B_j = -F Id F^{-1} D = -D under this
    // library's orientation (generators realize minus the Lie derivative).
    Grid g = make_grid(4, 1.0);
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(g.n_points, g.n_points);
    for (int j = 0; j < g.n_points; ++j) sum += basis_matrix(g, j).entries;
    CHECK((sum + derivative_matrix(g)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("vector_field_matrix of an indicator is the matching generator") {
    Grid g = make_grid(2, 1.0);
    for (int j = 0; j < g.n_points; ++j) {
        GridField indicator(g.n_points, 0.0);
        indicator[j] = 1.0;
        OperatorMatrix u = vector_field_matrix(g, indicator);
        OperatorMatrix b = basis_matrix(g, j);
        CHECK((u.entries - b.entries).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((*u.stripped_row - *b.stripped_row).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("vector_field_matrix is linear and zero at zero") {
    Grid g = make_grid(5, 1.0);
    GridField x = random_field(g, 21);
    GridField y = random_field(g, 22);
    GridField combo(g.n_points);
    for (int j = 0; j < g.n_points; ++j) combo[j] = 2.0 * x[j] - 0.5 * y[j];
    Eigen::MatrixXcd lhs = vector_field_matrix(g, combo).entries;
    Eigen::MatrixXcd rhs =
        2.0 * vector_field_matrix(g, x).entries - 0.5 * vector_field_matrix(g, y).entries;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);

    OperatorMatrix zero = vector_field_matrix(g, GridField(g.n_points, 0.0));
    CHECK(zero.entries.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(vector_field_matrix(g, GridField(g.n_points - 1, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("vector field acts on a single mode as advection by -u") {
    // For u = sin x the product u * e^{ix} stays inside the band at N >= 2,
    // so U applied to the coefficients of e^{ix} must exactly equal the
    // coefficients of -u * d/dx e^{ix} = -i sin(x) e^{ix}.
    Grid g = make_grid(4, 1.0);
    OperatorMatrix u = vector_field_matrix(g, sampled(g, [](double x) { return std::sin(x); }));
    SpectralCoeffs mode1 = discretize(g, [](double x) { return std::exp(cplx(0.0, x)); });
    Eigen::VectorXcd image = u.entries * to_vector(mode1);
    SpectralCoeffs expected = discretize(g, [](double x) {
        return cplx(0.0, -1.0) * std::sin(x) * std::exp(cplx(0.0, x));
    });
    CHECK((image - to_vector(expected)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("flat pairing: frozen single-mode and constant values") {
    Grid g = make_grid(6, 1.0);
    OperatorMatrix u_sin = vector_field_matrix(g, sampled(g, [](double x) { return std::sin(x); }));
    OperatorMatrix u_cos = vector_field_matrix(g, sampled(g, [](double x) { return std::cos(x); }));

    // sin x: stripped row has +-i/2 at modes -+1, weight 1 + alpha = 2 each,
    // so the pairing is 2 * (1/4) + 2 * (1/4) = 1.
    cplx p_sin = flat_pairing(g, u_sin, u_sin);
    CHECK(std::abs(p_sin - cplx(1.0, 0.0)) < 1e-12);

    // A constant c has only the k = 0 stripped coefficient, weight 1, so the
    // pairing is c^2 — the 2*pi-normalized integral of c*c.
    OperatorMatrix u_const = vector_field_matrix(g, GridField(g.n_points, 3.0));
    cplx p_const = flat_pairing(g, u_const, u_const);
    CHECK(std::abs(p_const - cplx(9.0, 0.0)) < 1e-12);

    // Distinct single modes are orthogonal.
    CHECK(std::abs(flat_pairing(g, u_sin, u_cos)) < 1e-12);
}

TEST_CASE("flat pairing is positive on nonzero real fields") {
    Grid g = make_grid(5, 1.0);
    for (unsigned seed : {1u, 2u, 3u, 4u, 5u}) {
        GridField x = random_field(g, seed);
        OperatorMatrix u = vector_field_matrix(g, x);
        cplx p = flat_pairing(g, u, u);
        CHECK(std::abs(p.imag()) < 1e-12);
        CHECK(p.real() > 0.0);
    }
}

TEST_CASE("flat pairing rejects operands without a stripped row") {
    Grid g = make_grid(3, 1.0);
    OperatorMatrix q = identity_diffeo(g);
    OperatorMatrix u = vector_field_matrix(g, random_field(g, 9));
    CHECK_THROWS_AS(flat_pairing(g, q, u), unsupported_operand);
    CHECK_THROWS_AS(flat_pairing(g, u, q), unsupported_operand);
}

TEST_CASE("energy equals pi times the self flat-pairing") {
    // The constant linking the quadrature form of the energy to the flat
    // pairing is pi: E = (1/2) integral (u^2 + alpha u_x^2) equals
    // pi * <U^flat, U> on every real field.
    Grid g = make_grid(7, 0.7);
    for (unsigned seed : {11u, 12u, 13u}) {
        GridField x = random_field(g, seed);
        OperatorMatrix u = vector_field_matrix(g, x);
        const double via_pairing = pi * flat_pairing(g, u, u).real();
        CHECK(std::abs(energy(g, x) - via_pairing) < 1e-12 * std::max(1.0, via_pairing));
    }
}

TEST_CASE("basis products carry stripped rows and the zero column") {
    Grid g = make_grid(2, 1.0);
    for (int i = 0; i < g.n_points; ++i) {
        for (int p = 0; p < g.n_points; ++p) {
            OperatorMatrix bp = basis_product(g, i, p);
            CHECK(bp.role == OperatorRole::product);
            CHECK(bp.stripped_row.has_value());
            CHECK(bp.entries.col(g.index(0)).cwiseAbs().maxCoeff() == 0.0);
            // The stripped row restores the product when multiplied back by
            // the derivative symbol on its mode-0 row.
            for (int col = 0; col < g.n_points; ++col) {
                cplx restored = (*bp.stripped_row)(col) * cplx(0.0, g.mode(col));
                CHECK(std::abs(restored - bp.entries(g.index(0), col)) < 1e-12);
            }
        }
    }
}

TEST_CASE("commutators of generators leave their span") {
    // The generators do not close under commutation: project [B_i, B_j]
    // onto span{B_k} by least squares and measure the relative residual.
    // If the span were closed the residual would vanish; it is order one.
    Grid g = make_grid(2, 1.0);
    const int p = g.n_points;
    Eigen::MatrixXcd span(p * p, p);
    std::vector<Eigen::MatrixXcd> b(p);
    for (int k = 0; k < p; ++k) {
        b[k] = basis_matrix(g, k).entries;
        span.col(k) = Eigen::Map<const Eigen::VectorXcd>(b[k].data(), p * p);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(span);
    double worst = 0.0;
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            Eigen::MatrixXcd comm = b[i] * b[j] - b[j] * b[i];
            Eigen::VectorXcd y = Eigen::Map<const Eigen::VectorXcd>(comm.data(), p * p);
            if (y.norm() < 1e-14) continue;
            Eigen::VectorXcd fit = span * qr.solve(y);
            worst = std::max(worst, (y - fit).norm() / y.norm());
        }
    }
    CHECK(worst > 1e-6);
}

TEST_CASE("tensor assembly enforces the brute-force size guard") {
    CHECK_THROWS_AS(tensors(make_grid(16, 1.0)), resource_limit_error);  // P = 33
    TensorCDE t = tensors(make_grid(2, 1.0));                            // P = 5
    CHECK(t.n_points == 5);
    CHECK(static_cast<int>(t.c.size()) == 5);
    CHECK(static_cast<int>(t.d.size()) == 5);
    CHECK(t.e.rows() == 5);
}

TEST_CASE("E is Hermitian and its quadratic form is nonnegative") {
    Grid g = make_grid(3, 1.0);
    TensorCDE t = tensors(g);
    CHECK((t.e - t.e.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    for (unsigned seed : {41u, 42u, 43u}) {
        Eigen::VectorXd x(g.n_points);
        GridField f = random_field(g, seed);
        for (int j = 0; j < g.n_points; ++j) x[j] = f[j];
        cplx quad = (x.cast<cplx>().adjoint() * t.e * x.cast<cplx>()).value();
        CHECK(std::abs(quad.imag()) < 1e-12);
        CHECK(quad.real() >= 0.0);
    }
}

TEST_CASE("tensor contractions against sin x match the fast path") {
    Grid g = make_grid(2, 1.0);
    TensorCDE t = tensors(g);
    GridField x = sampled(g, [](double v) { return std::sin(v); });
    Eigen::VectorXcd xc(g.n_points);
    for (int j = 0; j < g.n_points; ++j) xc[j] = x[j];
    Eigen::VectorXcd e_contract = t.e.transpose() * xc;
    GridField e_fast = e_term(g, x);
    for (int j = 0; j < g.n_points; ++j) {
        CHECK(std::abs(e_contract[j] - cplx(e_fast[j], 0.0)) < 1e-10);
    }
}

TEST_CASE("all three contractions match the fast path on random fields") {
    for (int n : {2, 3, 4}) {  // P = 5, 7, 9
        Grid g = make_grid(n, 1.0);
        TensorCDE t = tensors(g);
        for (unsigned trial = 0; trial < 10; ++trial) {
            GridField x = random_field(g, 100 * n + trial);
            Eigen::VectorXcd xc(g.n_points);
            for (int j = 0; j < g.n_points; ++j) xc[j] = x[j];
            GridField ce = e_term(g, x), cc = c_term(g, x), cd = d_term(g, x);
            double scale_e = 0.0, scale_c = 0.0, scale_d = 0.0;
            for (int j = 0; j < g.n_points; ++j) {
                scale_e = std::max(scale_e, std::abs(ce[j]));
                scale_c = std::max(scale_c, std::abs(cc[j]));
                scale_d = std::max(scale_d, std::abs(cd[j]));
            }
            Eigen::VectorXcd e_contract = t.e.transpose() * xc;
            for (int q = 0; q < g.n_points; ++q) {
                const cplx c_contract = (xc.adjoint() * t.c[q] * xc).value();
                const cplx d_contract = (xc.transpose() * t.d[q] * xc.conjugate()).value();
                CHECK(std::abs(e_contract[q] - cplx(ce[q], 0.0)) <= 1e-10 * scale_e);
                CHECK(std::abs(c_contract - cplx(cc[q], 0.0)) <= 1e-10 * scale_c);
                CHECK(std::abs(d_contract - cplx(cd[q], 0.0)) <= 1e-10 * scale_d);
            }
        }
    }
}

TEST_CASE("oracle residual: zero states, fixed points, and scheme algebra") {
    Grid g = make_grid(4, 1.0);  // P = 9
    TensorCDE t = tensors(g);
    GridField zero(g.n_points, 0.0);
    CHECK(oracle_residual(g, t, TimeRule::explicit_euler, zero, zero, 0.01)
              .cwiseAbs()
              .maxCoeff() < 1e-14);

    // With X_new = X_old = sin x the E-difference telescopes away and the
    // residual is dt * (c - d) = dt * (1/P)(sin 2x + 2 sin 2x): the d-term
    // contraction is -(1/P) * 2 sin 2x, so the difference is 3 sin 2x / P.
    GridField x = sampled(g, [](double v) { return std::sin(v); });
    const double dt = 0.01;
    for (TimeRule rule : {TimeRule::explicit_euler, TimeRule::implicit_euler, TimeRule::average}) {
        Eigen::VectorXcd r = oracle_residual(g, t, rule, x, x, dt);
        for (int j = 0; j < g.n_points; ++j) {
            const double expected = dt * 3.0 * std::sin(2.0 * g.points[j]) / g.n_points;
            CHECK(std::abs(r[j] - cplx(expected, 0.0)) < 1e-12);
        }
    }
}

TEST_CASE("oracle residual equals the FFT-path residual for all rules") {
    Grid g = make_grid(3, 1.0);  // P = 7
    TensorCDE t = tensors(g);
    GridField xo = random_field(g, 71);
    GridField xn = random_field(g, 72);
    const double dt = 0.02;
    auto fast_residual = [&](const GridField& a, const GridField& b) {
        // e(Xn) - e(Xo) + dt * (c(Xa) - d(Xb)) with (a, b) per rule.
        GridField en = e_term(g, xn), eo = e_term(g, xo);
        GridField ca = c_term(g, a), db = d_term(g, b);
        Eigen::VectorXcd r(g.n_points);
        for (int j = 0; j < g.n_points; ++j) {
            r[j] = en[j] - eo[j] + dt * (ca[j] - db[j]);
        }
        return r;
    };
    Eigen::VectorXcd r_exp = oracle_residual(g, t, TimeRule::explicit_euler, xn, xo, dt);
    Eigen::VectorXcd r_imp = oracle_residual(g, t, TimeRule::implicit_euler, xn, xo, dt);
    Eigen::VectorXcd r_avg = oracle_residual(g, t, TimeRule::average, xn, xo, dt);
    CHECK((r_exp - fast_residual(xo, xn)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((r_imp - fast_residual(xn, xo)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((r_avg - 0.5 * (fast_residual(xo, xn) + fast_residual(xn, xo))).cwiseAbs().maxCoeff() <
          1e-10);
}

TEST_CASE("oracle residual rejects bad inputs") {
    Grid g = make_grid(2, 1.0);
    TensorCDE t = tensors(g);
    GridField x(g.n_points, 0.1);
    CHECK_THROWS_AS(oracle_residual(g, t, TimeRule::midpoint, x, x, 0.01), unsupported_scheme);
    CHECK_THROWS_AS(oracle_residual(g, t, TimeRule::average, x, x, 0.0), std::invalid_argument);
    Grid g7 = make_grid(3, 1.0);
    GridField x7(g7.n_points, 0.1);
    CHECK_THROWS_AS(oracle_residual(g7, t, TimeRule::average, x7, x7, 0.01),
                    std::invalid_argument);
}

TEST_CASE("evolve_q: identity velocity and per-rule defining relations") {
    Grid g = make_grid(2, 1.0);
    OperatorMatrix q0 = identity_diffeo(g);
    OperatorMatrix u = vector_field_matrix(g, random_field(g, 77));
    const double dt = 0.05;
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(g.n_points, g.n_points);

    OperatorMatrix zero_u = vector_field_matrix(g, GridField(g.n_points, 0.0));
    for (TimeRule rule : {TimeRule::explicit_euler, TimeRule::implicit_euler, TimeRule::midpoint,
                          TimeRule::average}) {
        OperatorMatrix still = evolve_q(q0, zero_u, dt, rule);
        CHECK((still.entries - q0.entries).cwiseAbs().maxCoeff() < 1e-12);
    }

    OperatorMatrix q_exp = evolve_q(q0, u, dt, TimeRule::explicit_euler);
    // Reconstructing the velocity from the explicit update is exact.
    Eigen::MatrixXcd recon =
        (q_exp.entries - q0.entries) / dt * q0.entries.inverse();
    CHECK((recon - u.entries).cwiseAbs().maxCoeff() < 1e-12);

    OperatorMatrix q_imp = evolve_q(q0, u, dt, TimeRule::implicit_euler);
    CHECK((((id - dt * u.entries) * q_imp.entries) - q0.entries).cwiseAbs().maxCoeff() < 1e-12);

    OperatorMatrix q_mid = evolve_q(q0, u, dt, TimeRule::midpoint);
    CHECK((((id - 0.5 * dt * u.entries) * q_mid.entries) -
           ((id + 0.5 * dt * u.entries) * q0.entries))
              .cwiseAbs()
              .maxCoeff() < 1e-12);

    OperatorMatrix q_avg = evolve_q(q0, u, dt, TimeRule::average);
    Eigen::MatrixXcd relation = 0.5 * (q_avg.entries - q0.entries) *
                                (q0.entries.inverse() + q_avg.entries.inverse());
    CHECK((relation - dt * u.entries).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("evolve_q surfaces singular solves as step failures") {
    Grid g = make_grid(1, 1.0);
    OperatorMatrix q0 = identity_diffeo(g);
    OperatorMatrix u;
    u.role = OperatorRole::vector_field;
    u.entries = Eigen::MatrixXcd::Identity(g.n_points, g.n_points);
    // (Id - dt U) with dt = 1 and U = Id is the zero matrix.
    CHECK_THROWS_AS(evolve_q(q0, u, 1.0, TimeRule::implicit_euler), step_failure);
}

TEST_CASE("tensor dump: JSON header plus raw little-endian payload") {
    Grid g = make_grid(2, 1.0);
    TensorCDE t = tensors(g);
    const int p = g.n_points;
    const auto path = std::filesystem::temp_directory_path() / "epdiff_tensors_test.cde";
    dump_tensors(t, path.string());

    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::string header_line;
    std::getline(in, header_line);
    nlohmann::json header = nlohmann::json::parse(header_line);
    CHECK(header["format"] == "cde-tensor-dump");
    CHECK(header["n_points"] == p);
    CHECK(header["dtype"] == "complex128");
    CHECK(header["byte_order"] == "little");
    CHECK(header["arrays"]["c"] == nlohmann::json({p, p, p}));
    CHECK(header["arrays"]["e"] == nlohmann::json({p, p}));

    const std::streampos payload_start = in.tellg();
    in.seekg(0, std::ios::end);
    const size_t payload_bytes = static_cast<size_t>(in.tellg() - payload_start);
    CHECK(payload_bytes == 16u * (2u * p * p * p + p * p));

    // First payload value is c[i=0][j=0][p=0]; last is e[P-1][P-1].
    in.seekg(payload_start);
    double re = 0.0, im = 0.0;
    in.read(reinterpret_cast<char*>(&re), sizeof re);
    in.read(reinterpret_cast<char*>(&im), sizeof im);
    CHECK(std::abs(cplx(re, im) - t.c[0](0, 0)) < 1e-15);
    in.seekg(-16, std::ios::end);
    in.read(reinterpret_cast<char*>(&re), sizeof re);
    in.read(reinterpret_cast<char*>(&im), sizeof im);
    CHECK(std::abs(cplx(re, im) - t.e(p - 1, p - 1)) < 1e-15);

    std::filesystem::remove(path);
}
