#pragma once

// Named initial/background profiles. Densities are the rescaled ones of DensityGrid,
// so rho runs over [surf, surf + 1].

#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlsw/error.hpp"
#include "mlsw/layer_ops.hpp"
#include "mlsw/spectral_grid.hpp"
#include "mlsw/stratification.hpp"

namespace mlsw {

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"study", "small_amplitude", "rho_independent", "layer_uniform",
                                                "rest"};
    return names;
}

/// a sech^2(x - L/2) (1 + cos(pi (rho - surf)) / 2)
inline SeparableField study_deviation(double amplitude, const SpatialGrid& sgrid, const DensityGrid& dgrid) {
    const XSech2 bump{amplitude, 0.5 * sgrid.length(), 1.0};
    const double surf = dgrid.surface_density();
    return SeparableField{{{bump, RhoFunction::constant(1.0)},
                           {bump, RhoCosine{0.5, std::numbers::pi, -std::numbers::pi * surf}}}};
}

/// 1 + 0.2 (bott - rho)
inline Background study_background(const DensityGrid& dgrid) {
    return Background{{Polynomial{{1.0 + 0.2 * dgrid.bottom_density(), -0.2}}}};
}

/// Builds a preset. `amplitude` <= 0 selects the preset's own amplitude.
///   study            h = 0.1 sech^2 (1 + cos/2), hbar = 1 + 0.2 (bott - rho)
///   small_amplitude  as study with amplitude 0.01
///   rho_independent  h = 0.1 sech^2(x - L/2), hbar = 1
///   layer_uniform    h = 1e-6 cos(2 pi x / L) (1 + cos/2), hbar = 1
///   rest             h = u = 0, hbar = 1
inline ContinuousProfile make_preset(const std::string& name, const SpatialGrid& sgrid, const DensityGrid& dgrid,
                                     double amplitude = 0.0) {
    ContinuousProfile p;
    auto amp = [amplitude](double fallback) { return amplitude > 0.0 ? amplitude : fallback; };
    if (name == "study" || name == "small_amplitude") {
        p.hbar = study_background(dgrid);
        p.h = study_deviation(amp(name == "study" ? 0.1 : 0.01), sgrid, dgrid);
    } else if (name == "rho_independent") {
        p.h = SeparableField{{{XSech2{amp(0.1), 0.5 * sgrid.length(), 1.0}, RhoFunction::constant(1.0)}}};
    } else if (name == "layer_uniform") {
        const XCosine wave{amp(1e-6), 2.0 * std::numbers::pi / sgrid.length(), 0.0};
        const double surf = dgrid.surface_density();
        p.h = SeparableField{{{wave, RhoFunction::constant(1.0)},
                              {wave, RhoCosine{0.5, std::numbers::pi, -std::numbers::pi * surf}}}};
    } else if (name == "rest") {
        // defaults
    } else {
        throw ConfigError("unknown profile preset '" + name + "'");
    }
    return p;
}

} // namespace mlsw
