#ifndef EPDIFF_FAST_OPS_HPP
#define EPDIFF_FAST_OPS_HPP

#include "epdiff/grid.hpp"

namespace epdiff {

/** O(P log P) grid-space evaluation of the three tensor contractions that
 * make up the update equation, plus the energy functional. Each function
 * equals the corresponding dense contraction from diffeo-algebra to
 * reality tolerance — that equivalence, not any printed formula, fixes all
 * conjugation conventions and the 1/P normalization. The 1/P factor is
 * kept (matching the tensors) rather than pre-multiplied away; the
 * integrator uses the same scaling throughout, so it cancels from the
 * dynamics. Products are formed pointwise on the P-point grid with no
 * dealiasing: the contraction identities are exact for the discrete
 * tensors, aliasing included, and dealiasing would break the equivalence. */

/** sum_i X_i e[i,p] = (1/P) m_p with m = X - alpha X_xx. */
GridField e_term(const Grid& grid, const GridField& x);

/** sum_ij conj(X_i) X_j c[i,j,p] = (1/P) (u_x * m)_p, the elementwise
 * product of the spectral derivative and the momentum of X. */
GridField c_term(const Grid& grid, const GridField& x);

/** sum_ij X_i conj(X_j) d[i,j,p] = -(1/P) d/dx (u * m)_p: minus the
 * spectral derivative of the pointwise product of X with its momentum. */
GridField d_term(const Grid& grid, const GridField& x);

/** (1/2) (2 pi / P) sum_j X_j m_j — the spectrally exact quadrature of
 * (1/2) integral (u^2 + alpha u_x^2) dx, the conserved quantity whose
 * drift distinguishes the time rules. Equals pi times the flat pairing of
 * the vector field of X with itself. */
double energy(const Grid& grid, const GridField& x);

}  // namespace epdiff

#endif
