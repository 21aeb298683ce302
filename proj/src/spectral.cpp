#include "epdiff/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numbers>

#include "epdiff/errors.hpp"

namespace epdiff {

namespace {

/** Cache of FFTW plans, one forward/backward pair per transform size.
 * FFTW's planner is not thread-safe, so plan creation and destruction are
 * serialized by a mutex; execution uses the new-array interface
 * fftw_execute_dft, which is safe to call concurrently on distinct
 * buffers. Plans are created with FFTW_ESTIMATE (planning never writes the
 * arrays) and FFTW_UNALIGNED (caller buffers are ordinary vectors with no
 * SIMD alignment guarantee). */
class FftwPlanCache {
  public:
    static FftwPlanCache& instance() {
        static FftwPlanCache cache;
        return cache;
    }

    /** out[m] = sum_j in[j] exp(-2*pi*i*m*j/P), unnormalized. */
    void forward(int p, const std::complex<double>* in, std::complex<double>* out) {
        execute(plans(p).first, in, out);
    }

    /** out[j] = sum_m in[m] exp(+2*pi*i*m*j/P), unnormalized. */
    void backward(int p, const std::complex<double>* in, std::complex<double>* out) {
        execute(plans(p).second, in, out);
    }

  private:
    FftwPlanCache() = default;
    ~FftwPlanCache() {
        std::lock_guard<std::mutex> lock(mutex_);
        for (auto& [p, pair] : plans_) {
            fftw_destroy_plan(pair.first);
            fftw_destroy_plan(pair.second);
        }
    }
    FftwPlanCache(const FftwPlanCache&) = delete;
    FftwPlanCache& operator=(const FftwPlanCache&) = delete;

    std::pair<fftw_plan, fftw_plan> plans(int p) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = plans_.find(p);
        if (it != plans_.end()) return it->second;
        fftw_complex* scratch = fftw_alloc_complex(static_cast<size_t>(p));
        unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fftw_plan fwd = fftw_plan_dft_1d(p, scratch, scratch, FFTW_FORWARD, flags);
        fftw_plan bwd = fftw_plan_dft_1d(p, scratch, scratch, FFTW_BACKWARD, flags);
        fftw_free(scratch);
        auto pair = std::make_pair(fwd, bwd);
        plans_.emplace(p, pair);
        return pair;
    }

    static void execute(fftw_plan plan, const std::complex<double>* in, std::complex<double>* out) {
        // fftw_execute_dft does not modify the input array for out-of-place
        // c2c transforms, so the const_cast is safe.
        fftw_execute_dft(plan,
                         reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
    }

    std::mutex mutex_;
    std::map<int, std::pair<fftw_plan, fftw_plan>> plans_;
};

/** (-1)^k, valid for negative k. */
inline double alternating_sign(int k) { return (k & 1) ? -1.0 : 1.0; }

/** k reduced into 0..P-1. */
inline int wrap_mode(int k, int p) { return ((k % p) + p) % p; }

void require_length(size_t got, int expected, const char* what) {
    if (static_cast<int>(got) != expected) {
        throw std::invalid_argument(std::string(what) + ": length " + std::to_string(got) +
                                    " does not match grid size " + std::to_string(expected));
    }
}

/** Core forward transform. The centered unitary transform with grid offset
 * x_j = -pi + 2*pi*j/P differs from FFTW's convention by the factor
 * exp(+i*k*pi) = (-1)^k and the 1/sqrt(P) normalization:
 *   coeff[k] = P^(-1/2) * (-1)^k * FFTW_forward[k mod P]. */
SpectralCoeffs dft_complex_samples(const Grid& grid, const std::vector<std::complex<double>>& samples) {
    const int p = grid.n_points;
    std::vector<std::complex<double>> out(p);
    FftwPlanCache::instance().forward(p, samples.data(), out.data());
    SpectralCoeffs coeffs(p);
    const double scale = 1.0 / std::sqrt(static_cast<double>(p));
    for (int idx = 0; idx < p; ++idx) {
        const int k = grid.mode(idx);
        coeffs[idx] = scale * alternating_sign(k) * out[wrap_mode(k, p)];
    }
    return coeffs;
}

}  // namespace

Grid make_grid(int n_modes, double alpha) {
    if (n_modes < 1) {
        throw std::invalid_argument("make_grid: n_modes must be >= 1, got " + std::to_string(n_modes));
    }
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("make_grid: alpha must be > 0, got " + std::to_string(alpha));
    }
    Grid grid;
    grid.n_modes = n_modes;
    grid.n_points = 2 * n_modes + 1;
    grid.alpha = alpha;
    grid.points.resize(grid.n_points);
    grid.helmholtz_weights.resize(grid.n_points);
    const double pi = std::numbers::pi;
    for (int j = 0; j < grid.n_points; ++j) {
        grid.points[j] = -pi + 2.0 * pi * j / grid.n_points;
    }
    for (int idx = 0; idx < grid.n_points; ++idx) {
        const double k = grid.mode(idx);
        grid.helmholtz_weights[idx] = 1.0 + alpha * k * k;
    }
    return grid;
}

GridField take_real_checked(const std::vector<std::complex<double>>& values, const char* where) {
    double max_imag = 0.0;
    double max_real = 0.0;
    for (const auto& v : values) {
        max_imag = std::max(max_imag, std::abs(v.imag()));
        max_real = std::max(max_real, std::abs(v.real()));
    }
    if (max_imag > kRealityTolerance * std::max(1.0, max_real)) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "%s: imaginary part %.3e exceeds reality tolerance (max real %.3e); "
                      "conjugation conventions are broken",
                      where, max_imag, max_real);
        throw internal_error(buf);
    }
    GridField real_values(values.size());
    for (size_t i = 0; i < values.size(); ++i) real_values[i] = values[i].real();
    return real_values;
}

SpectralCoeffs dft(const Grid& grid, const GridField& field) {
    require_length(field.size(), grid.n_points, "dft");
    std::vector<std::complex<double>> samples(field.begin(), field.end());
    return dft_complex_samples(grid, samples);
}

SpectralCoeffs dft(const Grid& grid, const std::vector<std::complex<double>>& field) {
    require_length(field.size(), grid.n_points, "dft");
    return dft_complex_samples(grid, field);
}

std::vector<std::complex<double>> idft_complex(const Grid& grid, const SpectralCoeffs& coeffs) {
    require_length(coeffs.size(), grid.n_points, "idft");
    const int p = grid.n_points;
    std::vector<std::complex<double>> buf(p);
    for (int idx = 0; idx < p; ++idx) {
        const int k = grid.mode(idx);
        buf[wrap_mode(k, p)] = alternating_sign(k) * coeffs[idx];
    }
    std::vector<std::complex<double>> out(p);
    FftwPlanCache::instance().backward(p, buf.data(), out.data());
    const double scale = 1.0 / std::sqrt(static_cast<double>(p));
    for (auto& v : out) v *= scale;
    return out;
}

GridField idft(const Grid& grid, const SpectralCoeffs& coeffs) {
    return take_real_checked(idft_complex(grid, coeffs), "idft");
}

GridField spectral_derivative(const Grid& grid, const GridField& field) {
    SpectralCoeffs coeffs = dft(grid, field);
    for (int idx = 0; idx < grid.n_points; ++idx) {
        coeffs[idx] *= std::complex<double>(0.0, grid.mode(idx));
    }
    return take_real_checked(idft_complex(grid, coeffs), "spectral_derivative");
}

GridField apply_helmholtz(const Grid& grid, const GridField& field) {
    SpectralCoeffs coeffs = dft(grid, field);
    for (int idx = 0; idx < grid.n_points; ++idx) {
        coeffs[idx] *= grid.helmholtz_weights[idx];
    }
    return take_real_checked(idft_complex(grid, coeffs), "apply_helmholtz");
}

GridField invert_helmholtz(const Grid& grid, const GridField& field) {
    SpectralCoeffs coeffs = dft(grid, field);
    for (int idx = 0; idx < grid.n_points; ++idx) {
        coeffs[idx] /= grid.helmholtz_weights[idx];
    }
    return take_real_checked(idft_complex(grid, coeffs), "invert_helmholtz");
}

SpectralCoeffs discretize(const Grid& grid, const std::function<std::complex<double>(double)>& f) {
    std::vector<std::complex<double>> samples(grid.n_points);
    for (int j = 0; j < grid.n_points; ++j) samples[j] = f(grid.points[j]);
    return dft_complex_samples(grid, samples);
}

std::complex<double> reconstruct(const Grid& grid, const SpectralCoeffs& coeffs, double x) {
    require_length(coeffs.size(), grid.n_points, "reconstruct");
    std::complex<double> sum = 0.0;
    for (int idx = 0; idx < grid.n_points; ++idx) {
        const double k = grid.mode(idx);
        sum += coeffs[idx] * std::exp(std::complex<double>(0.0, k * x));
    }
    return sum / std::sqrt(static_cast<double>(grid.n_points));
}

}  // namespace epdiff
