#ifndef EPDIFF_DIFFEO_HPP
#define EPDIFF_DIFFEO_HPP

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "epdiff/grid.hpp"

namespace epdiff {

/** What a dense operator matrix represents. */
enum class OperatorRole {
    diffeomorphism,  ///< group element q acting on coefficients
    vector_field,    ///< U = sum_j X_j B_j, tangent "velocity" of a q-path
    basis,           ///< one of the point-indexed generators B_j
    product          ///< a product such as B_i * B_p
};

/** Dense P x P complex matrix acting on spectral coefficients. Rows and
 * columns are mode-indexed: storage index i corresponds to mode i - N.
 *
 * Vector-field, basis, and product matrices additionally carry their
 * "stripped" row: the mode-0 row of the matrix with its rightmost
 * differentiation factor removed. The flat pairing is defined on stripped
 * rows only, so matrices without one (e.g. diffeomorphisms, or matrices
 * assembled by hand) cannot be paired. */
struct OperatorMatrix {
    Eigen::MatrixXcd entries;
    OperatorRole role = OperatorRole::product;
    std::optional<Eigen::RowVectorXcd> stripped_row;
};

/** The four one-step rules for evolving a diffeomorphism path. The time
 * integrator itself supports only explicit/implicit/average; midpoint is
 * recognized but rejected there (its update carries third-order terms in
 * the velocity, outside this library's scope). */
enum class TimeRule { explicit_euler, implicit_euler, midpoint, average };

/** Brute-force rank-3 tensors of the update equation,
 *   c[i,j,p] = <B_j^flat, B_i B_p>,
 *   d[i,j,p] = <B_i^flat, B_p B_j>,
 *   e[i,p]   = <B_i^flat, B_p>,
 * stored as c[p](i,j), d[p](i,j) and e(i,p). Contracting them against a
 * real state X reproduces (to reality tolerance) the grid-space terms the
 * fast FFT path computes in O(P log P); these dense tensors are the ground
 * truth that pins every sign and normalization. */
struct TensorCDE {
    std::vector<Eigen::MatrixXcd> c;
    std::vector<Eigen::MatrixXcd> d;
    Eigen::MatrixXcd e;
    int n_points = 0;
    double alpha = 0.0;
};

/** Generator attached to grid point j: B_j = -F I_j F^{-1} D, where I_j
 * picks out the j-th sample, F is the unitary transform and D = diag(ik).
 * The minus sign makes sum_j u(x_j) B_j act as minus the Lie derivative
 * (advection by u), which is the convention under which the assembled
 * update converges to the Camassa-Holm equation; see vector_field_matrix.
 * Throws std::out_of_range for a bad index. */
OperatorMatrix basis_matrix(const Grid& grid, int j);

/** U = sum_j X_j B_j, the matrix realization of the vector field u with
 * samples X. Applied to the coefficients of a function phi it approximates
 * the advection -u * phi_x (band-limit permitting); linear in X. */
OperatorMatrix vector_field_matrix(const Grid& grid, const GridField& x);

/** The product B_i * B_p together with its stripped row (mode-0 row of
 * -B_i M_p, the product with its rightmost differentiation factor
 * removed), which is what the flat pairing needs. */
OperatorMatrix basis_product(const Grid& grid, int i, int p);

/** Flat pairing <U^flat, V> = sum_k w_k * su_k * conj(sv_k) over stripped
 * rows su, sv with weights w_k = 1 + alpha k^2. The weight at k = 0 is 1,
 * matching the Helmholtz symbol, which regularizes the pairing and makes
 * it positive definite (constant fields carry energy). Throws
 * unsupported_operand if either matrix lacks a stripped row. */
std::complex<double> flat_pairing(const Grid& grid, const OperatorMatrix& u,
                                  const OperatorMatrix& v);

/** Assembles the dense tensors from basis products and flat pairings
 * alone — no FFT shortcuts — so they are an independent oracle for the
 * fast path. Cost grows like P^5; requests with P >= 33 throw
 * resource_limit_error. */
TensorCDE tensors(const Grid& grid);

/** One-step update-equation residual evaluated by brute-force tensor
 * contraction (length-P complex vector, index p):
 *
 *   explicit:  sum_i e[i,p] dX_i + dt * ( sum_ij c[i,j,p] conj(Xo_i) Xo_j
 *                                       - sum_ij d[i,j,p] Xn_i conj(Xn_j) )
 *   implicit:  same with the roles of Xo (old) and Xn (new) swapped in the
 *              quadratic terms,
 *   average:   arithmetic mean of the two,
 *
 * where dX = Xn - Xo. The midpoint rule throws unsupported_scheme. */
Eigen::VectorXcd oracle_residual(const Grid& grid, const TensorCDE& tensors, TimeRule rule,
                                 const GridField& x_new, const GridField& x_old, double dt);

/** Identity diffeomorphism (starting point for q-paths). */
OperatorMatrix identity_diffeo(const Grid& grid);

/** Advances a diffeomorphism q one step under velocity U:
 *   explicit:  q+ = q + dt U q
 *   implicit:  (Id - dt U) q+ = q
 *   midpoint:  (Id - dt/2 U) q+ = (Id + dt/2 U) q
 *   average:   (q+ - q)(q^{-1} + q+^{-1})/2 = dt U, solved by fixed-point
 *              iteration from the explicit step (tolerance 1e-10 on the
 *              defining relation, at most 50 sweeps).
 * Singular solves and stalled iterations throw step_failure with a
 * condition estimate. */
OperatorMatrix evolve_q(const OperatorMatrix& q, const OperatorMatrix& u, double dt,
                        TimeRule rule);

/** Writes the tensors to `path` as a single-line JSON header followed by
 * the raw little-endian complex128 payload (c, then d, then e, each in
 * C order). A debugging/fixture format, stable within this repository. */
void dump_tensors(const TensorCDE& tensors, const std::string& path);

}  // namespace epdiff

#endif
