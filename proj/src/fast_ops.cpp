#include "epdiff/fast_ops.hpp"

#include <numbers>
#include <stdexcept>

#include "epdiff/spectral.hpp"

namespace epdiff {

namespace {

void require_state(const Grid& grid, const GridField& x, const char* what) {
    if (static_cast<int>(x.size()) != grid.n_points) {
        throw std::invalid_argument(std::string(what) + ": field length " +
                                    std::to_string(x.size()) + " does not match grid size " +
                                    std::to_string(grid.n_points));
    }
}

}  // namespace

GridField e_term(const Grid& grid, const GridField& x) {
    require_state(grid, x, "e_term");
    GridField m = apply_helmholtz(grid, x);
    for (auto& v : m) v /= grid.n_points;
    return m;
}

GridField c_term(const Grid& grid, const GridField& x) {
    require_state(grid, x, "c_term");
    const GridField ux = spectral_derivative(grid, x);
    const GridField m = apply_helmholtz(grid, x);
    GridField out(grid.n_points);
    for (int j = 0; j < grid.n_points; ++j) out[j] = ux[j] * m[j] / grid.n_points;
    return out;
}

GridField d_term(const Grid& grid, const GridField& x) {
    require_state(grid, x, "d_term");
    const GridField m = apply_helmholtz(grid, x);
    GridField um(grid.n_points);
    for (int j = 0; j < grid.n_points; ++j) um[j] = x[j] * m[j];
    GridField out = spectral_derivative(grid, um);
    for (auto& v : out) v = -v / grid.n_points;
    return out;
}

double energy(const Grid& grid, const GridField& x) {
    require_state(grid, x, "energy");
    const GridField m = apply_helmholtz(grid, x);
    double sum = 0.0;
    for (int j = 0; j < grid.n_points; ++j) sum += x[j] * m[j];
    return 0.5 * (2.0 * std::numbers::pi / grid.n_points) * sum;
}

}  // namespace epdiff
