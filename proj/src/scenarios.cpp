#include "epdiff/scenarios.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "epdiff/errors.hpp"
#include "epdiff/spectral.hpp"

namespace epdiff {

namespace {

using std::numbers::pi;

/** Hard cap on periodization images; widths sane for a 2*pi domain
 * converge within two or three. */
constexpr int kMaxImages = 64;

}  // namespace

double reduce_angle(double x) {
    return x - 2.0 * pi * std::floor((x + pi) / (2.0 * pi));
}

GridField gaussian(const Grid& grid, double amplitude, double center, double sigma,
                   bool* aliased) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian: sigma must be > 0");
    if (aliased) *aliased = sigma < 8.0 * grid.spacing();
    GridField field(grid.n_points);
    for (int j = 0; j < grid.n_points; ++j) {
        const double base = reduce_angle(grid.points[j] - center);
        double sum = std::exp(-(base / sigma) * (base / sigma));
        for (int n = 1; n <= kMaxImages; ++n) {
            const double lo = (base - 2.0 * pi * n) / sigma;
            const double hi = (base + 2.0 * pi * n) / sigma;
            const double term = std::exp(-lo * lo) + std::exp(-hi * hi);
            sum += term;
            if (term < 1e-18) break;
        }
        field[j] = amplitude * sum;
    }
    return field;
}

GridField peakon(const Grid& grid, double amplitude, double center) {
    SpectralCoeffs coeffs(grid.n_points);
    double interpolant_peak = 0.0;
    for (int i = 0; i < grid.n_points; ++i) {
        const double w = grid.helmholtz_weights[i];
        coeffs[i] = std::polar(1.0 / w, -grid.mode(i) * center);
        interpolant_peak += 1.0 / w;
    }
    interpolant_peak /= std::sqrt(static_cast<double>(grid.n_points));
    GridField field = idft(grid, coeffs);
    const double scale = amplitude / interpolant_peak;
    for (double& v : field) v *= scale;
    return field;
}

GridField peakon_pair(const Grid& grid, double c1, double x1, double c2, double x2) {
    GridField field = peakon(grid, c1, x1);
    const GridField second = peakon(grid, c2, x2);
    for (int j = 0; j < grid.n_points; ++j) field[j] += second[j];
    return field;
}

GridField build_scenario(const Grid& grid, const ScenarioSpec& spec, bool* aliased) {
    if (aliased) *aliased = false;
    switch (spec.kind) {
        case ScenarioKind::gaussian:
            return gaussian(grid, spec.amplitude, reduce_angle(spec.center), spec.sigma, aliased);
        case ScenarioKind::peakon:
            return peakon(grid, spec.amplitude, reduce_angle(spec.center));
        case ScenarioKind::peakon_pair:
            return peakon_pair(grid, spec.amplitude, reduce_angle(spec.center), spec.amplitude2,
                               reduce_angle(spec.center2));
    }
    throw std::invalid_argument("build_scenario: unknown scenario kind");
}

const char* scenario_kind_name(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::gaussian: return "gaussian";
        case ScenarioKind::peakon: return "peakon";
        case ScenarioKind::peakon_pair: return "peakon_pair";
    }
    return "unknown";
}

ScenarioKind scenario_kind_from_name(const std::string& name) {
    if (name == "gaussian") return ScenarioKind::gaussian;
    if (name == "peakon") return ScenarioKind::peakon;
    if (name == "peakon_pair") return ScenarioKind::peakon_pair;
    throw std::invalid_argument("unknown scenario kind \"" + name +
                                "\" (expected gaussian, peakon, or peakon_pair)");
}

}  // namespace epdiff
