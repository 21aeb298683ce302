#ifndef EPDIFF_SPECTRAL_HPP
#define EPDIFF_SPECTRAL_HPP

#include <complex>
#include <functional>
#include <vector>

#include "epdiff/grid.hpp"

namespace epdiff {

/** Relative reality tolerance: after a spectral round trip the imaginary
 * part must satisfy max|imag| <= tol * max(1, max|real|); anything larger
 * throws internal_error (it means a conjugation convention is broken, and
 * silently truncating would hide the bug). */
inline constexpr double kRealityTolerance = 1e-10;

/** Unitary centered transform: coeff[k] = P^(-1/2) * sum_j field[j] *
 * exp(-i k x_j) for k = -N..N. Unitary, so the l2 norm is preserved.
 * Throws std::invalid_argument on length mismatch. */
SpectralCoeffs dft(const Grid& grid, const GridField& field);

/** Same transform applied to complex samples (used by discretize, whose
 * integrand may be complex-valued). */
SpectralCoeffs dft(const Grid& grid, const std::vector<std::complex<double>>& field);

/** Exact inverse of dft. The result is reality-checked and returned as a
 * real field; passing coefficients without Hermitian symmetry throws
 * internal_error. Throws std::invalid_argument on length mismatch. */
GridField idft(const Grid& grid, const SpectralCoeffs& coeffs);

/** Inverse transform without the reality projection, for intermediates that
 * are genuinely complex. */
std::vector<std::complex<double>> idft_complex(const Grid& grid, const SpectralCoeffs& coeffs);

/** d/dx by diagonal action ik on the coefficients; exact for band-limited
 * fields. */
GridField spectral_derivative(const Grid& grid, const GridField& field);

/** m = u - alpha * u_xx, i.e. multiplication by 1 + alpha*k^2 in mode
 * space. */
GridField apply_helmholtz(const Grid& grid, const GridField& field);

/** u = H^(-1) m, i.e. division by 1 + alpha*k^2 (always positive, so no
 * regularization is needed). */
GridField invert_helmholtz(const Grid& grid, const GridField& field);

/** Collocation discretization: samples f at the grid points and transforms.
 * The function may be complex-valued (e.g. a single exponential mode). */
SpectralCoeffs discretize(const Grid& grid, const std::function<std::complex<double>(double)>& f);

/** Evaluates the truncated series P^(-1/2) * sum_k coeff[k] e^{ikx} at an
 * arbitrary point x (not necessarily a grid point). */
std::complex<double> reconstruct(const Grid& grid, const SpectralCoeffs& coeffs, double x);

/** Reality projection shared by the library: returns the real parts after
 * checking the imaginary parts against kRealityTolerance; `where` names the
 * operation for the internal_error message. */
GridField take_real_checked(const std::vector<std::complex<double>>& values, const char* where);

}  // namespace epdiff

#endif
