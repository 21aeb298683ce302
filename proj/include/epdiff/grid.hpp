#ifndef EPDIFF_GRID_HPP
#define EPDIFF_GRID_HPP

#include <complex>
#include <vector>

namespace epdiff {

/** Real velocity samples u(x_j) at the collocation points. Operations that
 * formally produce complex values check the imaginary part against the
 * reality tolerance and drop it; see spectral.hpp. */
using GridField = std::vector<double>;

/** Complex Fourier coefficients indexed by mode k in {-N..N}; storage index
 * is k + N. A real field round-trips through dft/idft and its coefficients
 * satisfy coeff[-k] = conj(coeff[k]). */
using SpectralCoeffs = std::vector<std::complex<double>>;

/** Periodic collocation grid on [-pi, pi) with an odd point count
 * P = 2N+1, plus the Helmholtz coefficient alpha (the operator is
 * H = Id - alpha * d^2/dx^2, diagonal in mode space with entries
 * 1 + alpha*k^2). Immutable after construction; the precomputed tables make
 * the struct safe to share across threads. */
struct Grid {
    /** Number of positive modes N; modes run k = -N..N. */
    int n_modes;
    /** Number of collocation points P = 2N+1 (always odd). */
    int n_points;
    /** Helmholtz coefficient multiplying u_xx; strictly positive. */
    double alpha;
    /** Collocation points x_j = -pi + j*2*pi/P, j = 0..P-1. */
    std::vector<double> points;
    /** Diagonal of H in mode space: weights[k+N] = 1 + alpha*k^2. */
    std::vector<double> helmholtz_weights;

    /** Mode number for a coefficient storage index (0..P-1 -> -N..N). */
    int mode(int index) const { return index - n_modes; }
    /** Storage index for a mode number (-N..N -> 0..P-1). */
    int index(int mode) const { return mode + n_modes; }
    /** Grid spacing 2*pi/P. */
    double spacing() const { return points[1] - points[0]; }
};

/** Builds the P = 2N+1 point grid starting at -pi.
 * Throws std::invalid_argument for n_modes < 1 or alpha <= 0. */
Grid make_grid(int n_modes, double alpha);

}  // namespace epdiff

#endif
