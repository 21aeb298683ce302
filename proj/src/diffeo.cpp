#include "epdiff/diffeo.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "epdiff/errors.hpp"

namespace epdiff {

namespace {

using cplx = std::complex<double>;

/** Largest point count the dense tensor assembly accepts. The assembly is
 * O(P^5); P = 33 is already refused (the guard is strict so the failure
 * mode is an error message, not a runaway allocation). */
constexpr int kTensorPointLimit = 33;

/** M_j = F I_j F^{-1}: conjugation of the j-th sample projector into mode
 * space, (M_j)_{k,s} = (1/P) e^{i (s-k) x_j}. */
Eigen::MatrixXcd sample_projector(const Grid& grid, int j) {
    const int p = grid.n_points;
    Eigen::MatrixXcd m(p, p);
    const double xj = grid.points[j];
    for (int row = 0; row < p; ++row) {
        for (int col = 0; col < p; ++col) {
            const double phase = (grid.mode(col) - grid.mode(row)) * xj;
            m(row, col) = std::polar(1.0 / p, phase);
        }
    }
    return m;
}

/** Right-multiplication by D = diag(ik) in mode space (column scaling). */
void apply_derivative_columns(const Grid& grid, Eigen::MatrixXcd& m) {
    for (int col = 0; col < m.cols(); ++col) {
        m.col(col) *= cplx(0.0, grid.mode(col));
    }
}

void require_point_index(const Grid& grid, int j, const char* what) {
    if (j < 0 || j >= grid.n_points) {
        throw std::out_of_range(std::string(what) + ": point index " + std::to_string(j) +
                                " outside 0.." + std::to_string(grid.n_points - 1));
    }
}

const Eigen::RowVectorXcd& stripped_or_throw(const OperatorMatrix& m, const char* which) {
    if (!m.stripped_row) {
        throw unsupported_operand(std::string("flat_pairing: ") + which +
                                  " operand carries no stripped row; the pairing is defined "
                                  "only on factored vector-field/basis/product matrices");
    }
    return *m.stripped_row;
}

Eigen::VectorXcd to_complex(const GridField& x) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(x.size()));
    for (size_t i = 0; i < x.size(); ++i) v[static_cast<Eigen::Index>(i)] = x[i];
    return v;
}

/** Condition estimate ||A||_1 * ||A^{-1}||_1 for the small dense solves;
 * infinity when the factorization says the matrix is singular. */
double condition_estimate(const Eigen::MatrixXcd& a) {
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(a);
    if (!lu.isInvertible()) return std::numeric_limits<double>::infinity();
    return a.cwiseAbs().colwise().sum().maxCoeff() *
           lu.inverse().cwiseAbs().colwise().sum().maxCoeff();
}

/** Solves a q = b, throwing step_failure when a is numerically singular. */
Eigen::MatrixXcd solve_or_fail(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b,
                               const char* what) {
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(a);
    if (!lu.isInvertible()) {
        throw step_failure(std::string(what) + ": singular linear system", condition_estimate(a));
    }
    return lu.solve(b);
}

void write_matrix_payload(std::ofstream& out, const Eigen::MatrixXcd& m) {
    // Row-major (C-order) stream of little-endian complex128 values.
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double re = m(i, j).real();
            const double im = m(i, j).imag();
            out.write(reinterpret_cast<const char*>(&re), sizeof(double));
            out.write(reinterpret_cast<const char*>(&im), sizeof(double));
        }
    }
}

}  // namespace

OperatorMatrix basis_matrix(const Grid& grid, int j) {
    require_point_index(grid, j, "basis_matrix");
    OperatorMatrix b;
    b.role = OperatorRole::basis;
    b.entries = -sample_projector(grid, j);
    // Stripped row before the derivative factor is applied: mode-0 row of
    // -M_j, i.e. -(1/P) e^{i s x_j}.
    b.stripped_row = b.entries.row(grid.index(0));
    apply_derivative_columns(grid, b.entries);
    return b;
}

OperatorMatrix vector_field_matrix(const Grid& grid, const GridField& x) {
    const int p = grid.n_points;
    if (static_cast<int>(x.size()) != p) {
        throw std::invalid_argument("vector_field_matrix: field length " +
                                    std::to_string(x.size()) + " does not match grid size " +
                                    std::to_string(p));
    }
    // (sum_j X_j M_j)_{k,s} depends only on the mode difference s - k:
    // t[d] = (1/P) sum_j X_j e^{i d x_j}, d = -2N..2N. Assembling through
    // t keeps the construction O(P^2) without changing its meaning.
    const int n = grid.n_modes;
    std::vector<cplx> t(4 * n + 1);
    for (int d = -2 * n; d <= 2 * n; ++d) {
        cplx sum = 0.0;
        for (int j = 0; j < p; ++j) sum += x[j] * std::polar(1.0, d * grid.points[j]);
        t[d + 2 * n] = sum / static_cast<double>(p);
    }
    OperatorMatrix u;
    u.role = OperatorRole::vector_field;
    u.entries.resize(p, p);
    for (int row = 0; row < p; ++row) {
        for (int col = 0; col < p; ++col) {
            const int d = grid.mode(col) - grid.mode(row);
            u.entries(row, col) = -t[d + 2 * n] * cplx(0.0, grid.mode(col));
        }
    }
    u.stripped_row = Eigen::RowVectorXcd(p);
    for (int col = 0; col < p; ++col) {
        (*u.stripped_row)(col) = -t[grid.mode(col) + 2 * n];
    }
    return u;
}

OperatorMatrix basis_product(const Grid& grid, int i, int p) {
    require_point_index(grid, i, "basis_product");
    require_point_index(grid, p, "basis_product");
    OperatorMatrix bi = basis_matrix(grid, i);
    OperatorMatrix bp = basis_matrix(grid, p);
    OperatorMatrix out;
    out.role = OperatorRole::product;
    out.entries = bi.entries * bp.entries;
    // B_i B_p = (-B_i M_p) D, so the stripped row is the mode-0 row of
    // -B_i M_p.
    out.stripped_row = -(bi.entries.row(grid.index(0)) * sample_projector(grid, p));
    return out;
}

std::complex<double> flat_pairing(const Grid& grid, const OperatorMatrix& u,
                                  const OperatorMatrix& v) {
    const Eigen::RowVectorXcd& su = stripped_or_throw(u, "first");
    const Eigen::RowVectorXcd& sv = stripped_or_throw(v, "second");
    if (su.size() != grid.n_points || sv.size() != grid.n_points) {
        throw std::invalid_argument("flat_pairing: stripped row length does not match grid");
    }
    cplx sum = 0.0;
    for (int idx = 0; idx < grid.n_points; ++idx) {
        sum += grid.helmholtz_weights[idx] * su(idx) * std::conj(sv(idx));
    }
    return sum;
}

TensorCDE tensors(const Grid& grid) {
    const int p = grid.n_points;
    if (p >= kTensorPointLimit) {
        throw resource_limit_error(
            "tensors: P = " + std::to_string(p) + " exceeds the brute-force limit (P < " +
            std::to_string(kTensorPointLimit) + "); the dense assembly cost grows like P^5");
    }
    // Stripped rows of every generator and every pairwise product; the
    // pairings below consume nothing else.
    std::vector<Eigen::RowVectorXcd> strip_b(p);
    std::vector<Eigen::MatrixXcd> projector(p);
    std::vector<Eigen::MatrixXcd> generator(p);
    for (int j = 0; j < p; ++j) {
        projector[j] = sample_projector(grid, j);
        OperatorMatrix b = basis_matrix(grid, j);
        strip_b[j] = *b.stripped_row;
        generator[j] = std::move(b.entries);
    }
    const int mode0 = grid.index(0);
    std::vector<std::vector<Eigen::RowVectorXcd>> strip_bb(p, std::vector<Eigen::RowVectorXcd>(p));
    for (int i = 0; i < p; ++i) {
        const Eigen::RowVectorXcd bi_row0 = generator[i].row(mode0);
        for (int q = 0; q < p; ++q) {
            strip_bb[i][q] = -(bi_row0 * projector[q]);
        }
    }
    Eigen::VectorXd w(p);
    for (int idx = 0; idx < p; ++idx) w[idx] = grid.helmholtz_weights[idx];
    auto pair = [&](const Eigen::RowVectorXcd& su, const Eigen::RowVectorXcd& sv) {
        return (su.array() * sv.conjugate().array() * w.transpose().array().cast<cplx>()).sum();
    };

    TensorCDE t;
    t.n_points = p;
    t.alpha = grid.alpha;
    t.e.resize(p, p);
    for (int i = 0; i < p; ++i) {
        for (int q = 0; q < p; ++q) t.e(i, q) = pair(strip_b[i], strip_b[q]);
    }
    t.c.assign(p, Eigen::MatrixXcd(p, p));
    t.d.assign(p, Eigen::MatrixXcd(p, p));
    for (int q = 0; q < p; ++q) {
        for (int i = 0; i < p; ++i) {
            for (int j = 0; j < p; ++j) {
                t.c[q](i, j) = pair(strip_b[j], strip_bb[i][q]);
                t.d[q](i, j) = pair(strip_b[i], strip_bb[q][j]);
            }
        }
    }
    return t;
}

Eigen::VectorXcd oracle_residual(const Grid& grid, const TensorCDE& t, TimeRule rule,
                                 const GridField& x_new, const GridField& x_old, double dt) {
    const int p = grid.n_points;
    if (t.n_points != p) {
        throw std::invalid_argument("oracle_residual: tensors were assembled for P = " +
                                    std::to_string(t.n_points) + ", grid has P = " +
                                    std::to_string(p));
    }
    if (static_cast<int>(x_new.size()) != p || static_cast<int>(x_old.size()) != p) {
        throw std::invalid_argument("oracle_residual: state length does not match grid");
    }
    if (!(dt > 0.0)) {
        throw std::invalid_argument("oracle_residual: dt must be > 0");
    }
    if (rule == TimeRule::midpoint) {
        throw unsupported_scheme(
            "oracle_residual: the midpoint rule is recognized but unsupported (its update "
            "carries third-order velocity terms); use explicit, implicit, or average");
    }
    const Eigen::VectorXcd xn = to_complex(x_new);
    const Eigen::VectorXcd xo = to_complex(x_old);
    const Eigen::VectorXcd dx = xn - xo;

    Eigen::VectorXcd residual = t.e.transpose() * dx;
    auto quadratic = [&](const Eigen::VectorXcd& xa, const Eigen::VectorXcd& xb, int q) {
        // sum_ij c[i,j,q] conj(xa_i) xa_j - sum_ij d[i,j,q] xb_i conj(xb_j)
        const cplx c_term = (xa.adjoint() * t.c[q] * xa).value();
        const cplx d_term = (xb.transpose() * t.d[q] * xb.conjugate()).value();
        return c_term - d_term;
    };
    for (int q = 0; q < p; ++q) {
        cplx quad;
        switch (rule) {
            case TimeRule::explicit_euler:
                quad = quadratic(xo, xn, q);
                break;
            case TimeRule::implicit_euler:
                quad = quadratic(xn, xo, q);
                break;
            default:  // average
                quad = 0.5 * (quadratic(xo, xn, q) + quadratic(xn, xo, q));
                break;
        }
        residual[q] += dt * quad;
    }
    return residual;
}

OperatorMatrix identity_diffeo(const Grid& grid) {
    OperatorMatrix q;
    q.role = OperatorRole::diffeomorphism;
    q.entries = Eigen::MatrixXcd::Identity(grid.n_points, grid.n_points);
    return q;
}

OperatorMatrix evolve_q(const OperatorMatrix& q, const OperatorMatrix& u, double dt,
                        TimeRule rule) {
    const Eigen::Index p = q.entries.rows();
    if (u.entries.rows() != p || u.entries.cols() != p || q.entries.cols() != p) {
        throw std::invalid_argument("evolve_q: dimension mismatch between q and U");
    }
    const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(p, p);
    OperatorMatrix next;
    next.role = OperatorRole::diffeomorphism;
    switch (rule) {
        case TimeRule::explicit_euler:
            next.entries = q.entries + dt * u.entries * q.entries;
            return next;
        case TimeRule::implicit_euler:
            next.entries = solve_or_fail(identity - dt * u.entries, q.entries, "evolve_q(implicit)");
            return next;
        case TimeRule::midpoint:
            next.entries = solve_or_fail(identity - 0.5 * dt * u.entries,
                                         (identity + 0.5 * dt * u.entries) * q.entries,
                                         "evolve_q(midpoint)");
            return next;
        case TimeRule::average:
            break;
    }
    // Average rule: fixed-point iteration on the defining relation
    //   (q+ - q)(q^{-1} + q+^{-1})/2 = dt U,
    // rearranged to q+ = q + 2 dt U (q^{-1} + q+^{-1})^{-1}, seeded with the
    // explicit step.
    const Eigen::MatrixXcd q_inverse =
        solve_or_fail(q.entries, identity, "evolve_q(average): q is singular;");
    Eigen::MatrixXcd q_next = q.entries + dt * u.entries * q.entries;
    constexpr int kMaxSweeps = 50;
    constexpr double kRelationTol = 1e-10;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        const Eigen::MatrixXcd q_next_inverse =
            solve_or_fail(q_next, identity, "evolve_q(average): iterate is singular;");
        const Eigen::MatrixXcd relation =
            0.5 * (q_next - q.entries) * (q_inverse + q_next_inverse) - dt * u.entries;
        if (relation.cwiseAbs().maxCoeff() <= kRelationTol) {
            next.entries = std::move(q_next);
            return next;
        }
        q_next = q.entries +
                 2.0 * dt * u.entries *
                     solve_or_fail(q_inverse + q_next_inverse, identity,
                                   "evolve_q(average): inverse sum is singular;");
    }
    throw step_failure("evolve_q(average): fixed-point iteration did not reach 1e-10 in 50 sweeps",
                       condition_estimate(q_next));
}

void dump_tensors(const TensorCDE& t, const std::string& path) {
    static_assert(sizeof(double) == 8);
    if constexpr (std::endian::native != std::endian::little) {
        throw io_error("dump_tensors: only little-endian hosts are supported");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("dump_tensors: cannot open '" + path + "' for writing");
    const int p = t.n_points;
    nlohmann::json header = {
        {"format", "cde-tensor-dump"},
        {"version", 1},
        {"n_points", p},
        {"alpha", t.alpha},
        {"dtype", "complex128"},
        {"byte_order", "little"},
        {"order", "C"},
        {"arrays",
         {{"c", {p, p, p}}, {"d", {p, p, p}}, {"e", {p, p}}}},
    };
    out << header.dump() << '\n';
    // C-order (i, j, p) for the rank-3 tensors: p is the fastest index, so
    // stream entry (i,j) of every p-slice in sequence.
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            for (int q = 0; q < p; ++q) {
                const double re = t.c[q](i, j).real();
                const double im = t.c[q](i, j).imag();
                out.write(reinterpret_cast<const char*>(&re), sizeof(double));
                out.write(reinterpret_cast<const char*>(&im), sizeof(double));
            }
        }
    }
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            for (int q = 0; q < p; ++q) {
                const double re = t.d[q](i, j).real();
                const double im = t.d[q](i, j).imag();
                out.write(reinterpret_cast<const char*>(&re), sizeof(double));
                out.write(reinterpret_cast<const char*>(&im), sizeof(double));
            }
        }
    }
    write_matrix_payload(out, t.e);
    if (!out) throw io_error("dump_tensors: write to '" + path + "' failed");
}

}  // namespace epdiff
