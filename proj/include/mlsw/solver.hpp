#pragma once

// Time integration of the N-layer shallow water system with Gent-McWilliams
// diffusivity (g = 1, unit density range):
//
//   H_t + (Ubar + U) H_x + (Hbar + H) U_x = kappa H_xx
//   U_t + (Ubar + U - kappa H_x / (Hbar + H)) U_x + Gamma H_x = 0
//
// Diffusion of H is integrated exactly in Fourier space (Lawson integrating
// factor); the transport terms use classical RK4 in the transformed variable.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mlsw/error.hpp"
#include "mlsw/layer_field.hpp"
#include "mlsw/layer_ops.hpp"
#include "mlsw/norms.hpp"
#include "mlsw/spectral_grid.hpp"

namespace mlsw {

struct SolverParams {
    DensityGrid dgrid{};
    SpatialGrid sgrid{};
    LayerVector hbar{1.0};
    LayerVector ubar{0.0};
    double kappa = 0.05;
    double h_star = 0.5;
    double cfl = 0.4;
    double t_end = 1.0;
    bool dealias = true;
    /// Sobolev index s of the composite solution norm.
    double sobolev_index = 3.0;
    /// Fixed step; CFL-adaptive when empty.
    std::optional<double> fixed_dt{};
    /// Diagnostics cadence in time units; <= 0 records only the endpoints.
    double output_interval = 0.0;
    /// Accumulate the time-integrated dissipation terms of the solution norm.
    bool track_dissipation = true;

    void validate() const {
        const std::size_t n = dgrid.layers();
        if (!(kappa > 0.0)) throw ConfigError("kappa must be > 0");
        if (!(h_star > 0.0)) throw ConfigError("h_star must be > 0");
        if (!(cfl > 0.0 && cfl < 1.0)) throw ConfigError("cfl must lie in (0, 1)");
        if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be finite and >= 0");
        if (fixed_dt && !(*fixed_dt > 0.0)) throw ConfigError("fixed dt must be > 0");
        if (hbar.size() != n || ubar.size() != n) {
            throw ConfigError("background vectors must have one entry per layer (" + std::to_string(n) + ")");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!(hbar[i] >= h_star)) {
                throw ConfigError("reference depth of layer " + std::to_string(i + 1) + " (" +
                                  std::to_string(hbar[i]) + ") is below h_star (" + std::to_string(h_star) + ")");
            }
            if (!std::isfinite(ubar[i])) throw ConfigError("background velocity must be finite");
        }
    }
};

/// Squared time integrals int_0^t ||.||^2 dt of the dissipation terms.
struct DissipationIntegrals {
    bool tracked = true;
    double dh_sm1_1 = 0.0;
    double dsh_s_2 = 0.0;
    double dtsh_s_0 = 0.0;
    double dh_s_2 = 0.0;

    void add(const DissipationIntegrands& d, double dt) {
        dh_sm1_1 += dt * d.dh_sm1_1;
        dsh_s_2 += dt * d.dsh_s_2;
        dtsh_s_0 += dt * d.dtsh_s_0;
        dh_s_2 += dt * d.dh_s_2;
    }
};

struct SolverState {
    LayerField h;
    LayerField u;
    double t = 0.0;
    DissipationIntegrals diss{};
};

struct Tendency {
    LayerField dh;
    LayerField du;
};

/// Throws CavitationError when Hbar + H < h_star / 2 and BlowUpError on non-finite values.
inline void check_guard(const LayerField& h, const LayerField& u, const SolverParams& p, double t) {
    if (!h.all_finite() || !u.all_finite()) throw BlowUpError(t);
    const double floor = 0.5 * p.h_star;
    for (std::size_t i = 0; i < h.rows(); ++i) {
        auto row = h.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            const double depth = p.hbar[i] + row[j];
            if (depth < floor) throw CavitationError(t, i, j, depth, floor);
        }
    }
}

inline std::pair<double, double> depth_range(const LayerField& h, const SolverParams& p) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < h.rows(); ++i) {
        for (double v : h.row(i)) {
            lo = std::min(lo, p.hbar[i] + v);
            hi = std::max(hi, p.hbar[i] + v);
        }
    }
    return {lo, hi};
}

namespace detail {

inline LayerField ddx_rows(const SpatialGrid& g, const LayerField& f) {
    LayerField out(f.rows(), f.cols());
    for (std::size_t i = 0; i < f.rows(); ++i) {
        const auto d = g.ddx(f.row(i));
        std::copy(d.begin(), d.end(), out.row(i).begin());
    }
    return out;
}

inline LayerField heat_rows(const SpatialGrid& g, const LayerField& f, double kappa, double dt) {
    LayerField out(f.rows(), f.cols());
    for (std::size_t i = 0; i < f.rows(); ++i) {
        const auto d = g.heat_step(f.row(i), kappa, dt);
        std::copy(d.begin(), d.end(), out.row(i).begin());
    }
    return out;
}

inline void dealias_rows(const SpatialGrid& g, LayerField& f) {
    for (std::size_t i = 0; i < f.rows(); ++i) {
        const auto d = g.dealias(f.row(i));
        std::copy(d.begin(), d.end(), f.row(i).begin());
    }
}

} // namespace detail

/// Transport part of the right-hand side; kappa H_xx is excluded (integrating factor).
inline Tendency rhs(const LayerField& h, const LayerField& u, const SolverParams& p, double t = 0.0) {
    check_guard(h, u, p, t);
    const SpatialGrid& g = p.sgrid;
    const LayerField hx = detail::ddx_rows(g, h);
    const LayerField ux = detail::ddx_rows(g, u);
    const LayerField coupling = apply_gamma_fast(p.dgrid, hx);

    Tendency out{LayerField(h.rows(), h.cols()), LayerField(h.rows(), h.cols())};
    for (std::size_t i = 0; i < h.rows(); ++i) {
        const double hb = p.hbar[i];
        const double ub = p.ubar[i];
        auto hr = h.row(i);
        auto ur = u.row(i);
        auto hxr = hx.row(i);
        auto uxr = ux.row(i);
        auto gr = coupling.row(i);
        auto dh = out.dh.row(i);
        auto du = out.du.row(i);
        for (std::size_t j = 0; j < hr.size(); ++j) {
            const double depth = hb + hr[j];
            const double velocity = ub + ur[j];
            dh[j] = -velocity * hxr[j] - depth * uxr[j];
            du[j] = -(velocity - p.kappa * hxr[j] / depth) * uxr[j] - gr[j];
        }
    }
    if (p.dealias) {
        detail::dealias_rows(g, out.dh);
        detail::dealias_rows(g, out.du);
    }
    return out;
}

inline Tendency rhs(const SolverState& s, const SolverParams& p) { return rhs(s.h, s.u, p, s.t); }

/// dt = cfl * dx / (max |Ubar + U| + sqrt(max(Hbar + H))), g = 1.
inline double cfl_dt(const SolverState& s, const SolverParams& p) {
    double max_speed = 0.0;
    for (std::size_t i = 0; i < s.u.rows(); ++i) {
        for (double v : s.u.row(i)) max_speed = std::max(max_speed, std::abs(p.ubar[i] + v));
    }
    const auto [lo, hi] = depth_range(s.h, p);
    (void)lo;
    const double wave = std::sqrt(std::max(hi, 0.0));
    return p.cfl * p.sgrid.dx() / (max_speed + wave);
}

/// 1/2 |CSH|^2 + rho_1/2 |TSH|^2 + 1/2 int <U, rho (Hbar + H) U>, norms in l^2(L^2_x).
inline double energy(const LayerField& h, const LayerField& u, const SolverParams& p) {
    check_guard(h, u, p, 0.0);
    const std::size_t n = p.dgrid.layers();
    const double dx = p.sgrid.dx();
    const double inv_n = 1.0 / static_cast<double>(n);
    const LayerField sh = apply_S(h);
    double interior = 0.0;
    for (std::size_t i = 1; i < n; ++i)
        for (double v : sh.row(i)) interior += v * v;
    double surface = 0.0;
    for (double v : sh.row(0)) surface += v * v;
    // |TSH|^2_{l^2} = (1/N) * N * (SH)_1^2
    double kinetic = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto hr = h.row(i);
        auto ur = u.row(i);
        for (std::size_t j = 0; j < hr.size(); ++j) {
            kinetic += ur[j] * ur[j] * p.dgrid.rho(i) * (p.hbar[i] + hr[j]);
        }
    }
    return 0.5 * dx * inv_n * interior + 0.5 * p.dgrid.rho(0) * dx * surface + 0.5 * dx * inv_n * kinetic;
}

inline double energy(const SolverState& s, const SolverParams& p) { return energy(s.h, s.u, p); }

/// kappa (|d_x CSH|^2 + rho_1 |d_x TSH|^2): the energy dissipation rate of the
/// linearized system with layer-uniform Hbar and Ubar = 0.
inline double energy_dissipation_rate(const LayerField& h, const SolverParams& p) {
    const std::size_t n = p.dgrid.layers();
    const LayerField shx = apply_S(detail::ddx_rows(p.sgrid, h));
    const double dx = p.sgrid.dx();
    double interior = 0.0;
    for (std::size_t i = 1; i < n; ++i)
        for (double v : shx.row(i)) interior += v * v;
    double surface = 0.0;
    for (double v : shx.row(0)) surface += v * v;
    return p.kappa * (dx * interior / static_cast<double>(n) + p.dgrid.rho(0) * dx * surface);
}

/// One Lawson integrating-factor RK4 step. The heat propagator acts on H only.
inline SolverState step(const SolverState& s, const SolverParams& p, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
    const SpatialGrid& g = p.sgrid;
    const double half = 0.5 * dt;
    auto heat = [&](const LayerField& f) { return detail::heat_rows(g, f, p.kappa, half); };

    const Tendency k1 = rhs(s.h, s.u, p, s.t);

    // Stage 2 at t + dt/2.
    LayerField h2 = heat(LayerField(s.h).axpy(half, k1.dh));
    LayerField u2 = LayerField(s.u).axpy(half, k1.du);
    const Tendency k2 = rhs(h2, u2, p, s.t + half);

    // Stage 3 at t + dt/2.
    const LayerField eh = heat(s.h);
    LayerField h3 = LayerField(eh).axpy(half, k2.dh);
    LayerField u3 = LayerField(s.u).axpy(half, k2.du);
    const Tendency k3 = rhs(h3, u3, p, s.t + half);

    // Stage 4 at t + dt.
    LayerField h4 = heat(LayerField(eh).axpy(dt, k3.dh));
    LayerField u4 = LayerField(s.u).axpy(dt, k3.du);
    const Tendency k4 = rhs(h4, u4, p, s.t + dt);

    SolverState next;
    {
        LayerField inner = heat(LayerField(s.h).axpy(dt / 6.0, k1.dh));
        inner.axpy(dt / 3.0, k2.dh).axpy(dt / 3.0, k3.dh);
        next.h = heat(inner).axpy(dt / 6.0, k4.dh);
    }
    next.u = LayerField(s.u)
                 .axpy(dt / 6.0, k1.du)
                 .axpy(dt / 3.0, k2.du)
                 .axpy(dt / 3.0, k3.du)
                 .axpy(dt / 6.0, k4.du);
    next.t = s.t + dt;
    next.diss = s.diss;
    if (p.track_dissipation && next.diss.tracked) {
        // Stage-midpoint quadrature in time.
        next.diss.add(dissipation_integrands(g, h2, p.sobolev_index), dt);
    } else {
        next.diss.tracked = false;
    }
    check_guard(next.h, next.u, p, next.t);
    return next;
}

/// Composite norm: instantaneous terms plus time-integrated dissipation.
struct SolutionNorm {
    SolutionNormTerms terms;
    double instantaneous = 0.0;
    double integrated = 0.0;
    double total = 0.0;
};

inline SolutionNorm solution_norm(const SolverState& s, const SolverParams& p) {
    if (!s.diss.tracked) {
        throw std::logic_error("solution_norm: dissipation integrals were not accumulated");
    }
    SolutionNorm out;
    out.terms = solution_norm_terms(p.sgrid, s.h, s.u, p.sobolev_index);
    out.instantaneous = out.terms.total(p.kappa);
    const double rk = std::sqrt(p.kappa);
    out.integrated = rk * std::sqrt(s.diss.dh_sm1_1) + rk * std::sqrt(s.diss.dsh_s_2) +
                     rk * std::sqrt(s.diss.dtsh_s_0) + p.kappa * std::sqrt(s.diss.dh_s_2);
    out.total = out.instantaneous + out.integrated;
    return out;
}

struct Diagnostics {
    double t = 0.0;
    LayerVector mass;
    double mass_total = 0.0;
    double max_mass_drift = 0.0;
    double energy = 0.0;
    double min_depth = 0.0;
    double max_depth = 0.0;
    double solution_norm = std::numeric_limits<double>::quiet_NaN();
};

inline LayerVector layer_mass(const LayerField& h, const SpatialGrid& g) {
    LayerVector m(h.rows(), 0.0);
    for (std::size_t i = 0; i < h.rows(); ++i) {
        double acc = 0.0;
        for (double v : h.row(i)) acc += v;
        m[i] = g.dx() * acc;
    }
    return m;
}

inline Diagnostics diagnose(const SolverState& s, const SolverParams& p, const LayerVector& initial_mass) {
    Diagnostics d;
    d.t = s.t;
    d.mass = layer_mass(s.h, p.sgrid);
    for (std::size_t i = 0; i < d.mass.size(); ++i) {
        d.mass_total += d.mass[i];
        if (i < initial_mass.size()) {
            d.max_mass_drift = std::max(d.max_mass_drift, std::abs(d.mass[i] - initial_mass[i]));
        }
    }
    d.energy = energy(s, p);
    std::tie(d.min_depth, d.max_depth) = depth_range(s.h, p);
    if (s.diss.tracked) d.solution_norm = solution_norm(s, p).total;
    return d;
}

enum class RunStatus { completed, cavitation, blow_up };

inline const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::completed: return "completed";
        case RunStatus::cavitation: return "cavitation";
        case RunStatus::blow_up: return "blow_up";
    }
    return "unknown";
}

struct SimulationResult {
    RunStatus status = RunStatus::completed;
    std::string message;
    double failure_time = std::numeric_limits<double>::quiet_NaN();
    SolverState final_state;
    std::vector<Diagnostics> series;
    std::size_t steps = 0;
};

/// Per-step hook: (state after the step, dt used).
using StepObserver = std::function<void(const SolverState&, double)>;

/// Evolves (h0, u0) to t_end. Guard trips end the run and are reported in the result.
inline SimulationResult simulate(const SolverParams& p, LayerField h0, LayerField u0,
                                 const StepObserver& observer = {}) {
    p.validate();
    const std::size_t n = p.dgrid.layers();
    const std::size_t m = p.sgrid.size();
    if (h0.rows() != n || u0.rows() != n || h0.cols() != m || u0.cols() != m) {
        throw ConfigError("initial data shape does not match the grids");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (double v : h0.row(i)) {
            if (!(p.hbar[i] + v >= p.h_star)) {
                throw ConfigError("initial total depth below h_star in layer " + std::to_string(i + 1));
            }
        }
    }

    SimulationResult result;
    SolverState s{std::move(h0), std::move(u0), 0.0, {}};
    s.diss.tracked = p.track_dissipation;
    const LayerVector mass0 = layer_mass(s.h, p.sgrid);
    result.series.push_back(diagnose(s, p, mass0));

    const double eps = 1e-12 * std::max(1.0, p.t_end);
    double next_output = p.output_interval > 0.0 ? p.output_interval : std::numeric_limits<double>::infinity();
    try {
        while (s.t < p.t_end - eps) {
            double dt = p.fixed_dt ? *p.fixed_dt : cfl_dt(s, p);
            if (s.t + dt > p.t_end - eps) dt = p.t_end - s.t;
            s = step(s, p, dt);
            ++result.steps;
            if (observer) observer(s, dt);
            if (s.t >= next_output - eps) {
                result.series.push_back(diagnose(s, p, mass0));
                while (next_output <= s.t + eps) next_output += p.output_interval;
            }
        }
    } catch (const CavitationError& e) {
        result.status = RunStatus::cavitation;
        result.message = e.what();
        result.failure_time = e.time;
    } catch (const BlowUpError& e) {
        result.status = RunStatus::blow_up;
        result.message = e.what();
        result.failure_time = e.time;
    }
    if (result.status == RunStatus::completed && result.series.back().t != s.t) {
        result.series.push_back(diagnose(s, p, mass0));
    }
    result.final_state = std::move(s);
    return result;
}

} // namespace mlsw
