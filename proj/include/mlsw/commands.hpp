#pragma once

// Subcommands of the mlsw tool. Each reads an optional INI config, runs one study or
// simulation, writes CSV/JSON into the output directory and returns an exit code:
//   0 ok, 1 check failed (rate window, identity residual, dispersion tolerance),
//   2 configuration, 3 cavitation guard, 4 numeric failure.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mlsw/error.hpp"
#include "mlsw/harness.hpp"
#include "mlsw/identities.hpp"
#include "mlsw/io.hpp"
#include "mlsw/layer_ops.hpp"
#include "mlsw/norms.hpp"
#include "mlsw/presets.hpp"
#include "mlsw/solver.hpp"
#include "mlsw/spectral_grid.hpp"
#include "mlsw/stratification.hpp"

namespace mlsw::cli {

enum ExitCode : int { ok = 0, check_failed = 1, config_error = 2, guard_error = 3, numeric_error = 4 };

struct CommandOptions {
    std::optional<std::string> config;
    std::filesystem::path out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    // identities only
    std::optional<std::size_t> max_layers;
    bool corrupt_oracle = false;
    /// Suppresses the one-line result summary on stdout.
    bool quiet = false;
};

namespace detail {

using io::Json;

inline io::ConfigReader open_config(const CommandOptions& opt) {
    return opt.config ? io::ConfigReader::from_file(*opt.config) : io::ConfigReader{};
}

struct RunSettings {
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

inline RunSettings read_run(io::ConfigReader& cfg, const CommandOptions& opt) {
    RunSettings r;
    r.seed = cfg.integer("run", "seed", 1);
    r.threads = static_cast<unsigned>(cfg.integer("run", "threads", 1));
    if (opt.seed) r.seed = *opt.seed;
    if (opt.threads) r.threads = *opt.threads;
    if (r.threads == 0) throw ConfigError("threads must be >= 1");
    return r;
}

inline SpatialGrid read_grid(io::ConfigReader& cfg) {
    const double length = cfg.number("grid", "length", SpatialGrid::default_length);
    const auto points = cfg.integer("grid", "points", 256);
    try {
        return SpatialGrid(length, static_cast<std::size_t>(points));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

struct DensitySettings {
    std::size_t layers = 2;
    double rho_surf = 1.0;
    double rho_bott = 2.0;
};

inline DensitySettings read_density(io::ConfigReader& cfg, std::size_t default_layers) {
    DensitySettings d;
    d.layers = static_cast<std::size_t>(cfg.integer("density", "layers", default_layers));
    d.rho_surf = cfg.number("density", "rho_surf", 1.0);
    d.rho_bott = cfg.number("density", "rho_bott", 2.0);
    if (d.layers < 1) throw ConfigError("density.layers must be >= 1");
    if (!(d.rho_surf > 0.0) || !(d.rho_bott > d.rho_surf)) throw ConfigError("need rho_bott > rho_surf > 0");
    return d;
}

/// Preset named in [profile], with any of h, u, hbar, ubar replaced by explicit term lists.
inline ContinuousProfile read_profile(io::ConfigReader& cfg, const SpatialGrid& sgrid, const DensityGrid& dgrid,
                                      const std::string& default_preset, std::string& preset_out) {
    preset_out = cfg.text("profile", "preset", default_preset);
    const double amplitude = cfg.number("profile", "amplitude", 0.0);
    ContinuousProfile p = make_preset(preset_out, sgrid, dgrid, amplitude);
    if (auto v = cfg.raw("profile", "h")) p.h = io::parse_field(*v);
    if (auto v = cfg.raw("profile", "u")) p.u = io::parse_field(*v);
    if (auto v = cfg.raw("profile", "hbar")) p.hbar = io::parse_background(*v);
    if (auto v = cfg.raw("profile", "ubar")) p.ubar = io::parse_background(*v);
    return p;
}

inline void read_solver(io::ConfigReader& cfg, SolverParams& p) {
    p.kappa = cfg.number("solver", "kappa", p.kappa);
    p.h_star = cfg.number("solver", "h_star", p.h_star);
    p.cfl = cfg.number("solver", "cfl", p.cfl);
    p.t_end = cfg.number("solver", "t_end", p.t_end);
    p.dealias = cfg.flag("solver", "dealias", p.dealias);
    p.output_interval = cfg.number("solver", "output_interval", p.output_interval);
    p.sobolev_index = cfg.number("solver", "sobolev_index", p.sobolev_index);
    if (auto v = cfg.raw("solver", "dt")) p.fixed_dt = io::parse_double(*v, "solver.dt");
}

inline RateWindow read_window(io::ConfigReader& cfg, RateWindow fallback) {
    RateWindow w;
    w.lo = cfg.number("study", "slope_min", fallback.lo);
    w.hi = cfg.number("study", "slope_max", fallback.hi);
    if (!(w.lo < w.hi)) throw ConfigError("study.slope_min must be < study.slope_max");
    return w;
}

inline Json fit_json(const RateFit& f) {
    Json j;
    j["degenerate"] = f.degenerate;
    j["slope"] = io::number(f.slope);
    j["intercept"] = io::number(f.intercept);
    j["residual"] = io::number(f.residual);
    if (!f.note.empty()) j["note"] = f.note;
    return j;
}

inline Json window_json(const RateWindow& w) { return Json{{"slope_min", w.lo}, {"slope_max", w.hi}}; }

inline Json sizes_json(const std::vector<std::size_t>& v) {
    Json j = Json::array();
    for (auto n : v) j.push_back(n);
    return j;
}

inline void say(const CommandOptions& opt, const std::string& line) {
    if (!opt.quiet) std::cout << line << "\n";
}

} // namespace detail

// ---------------------------------------------------------------------------

inline int cmd_identities(const CommandOptions& opt) {
    auto cfg = detail::open_config(opt);
    const auto run = detail::read_run(cfg, opt);
    IdentityOptions io_opt;
    io_opt.seed = run.seed;
    io_opt.max_layers = static_cast<std::size_t>(cfg.integer("identities", "max_n", 257));
    io_opt.samples = static_cast<std::size_t>(cfg.integer("identities", "samples", 4));
    io_opt.corrupt_oracle = cfg.flag("identities", "corrupt_oracle", false);
    cfg.finish();
    if (opt.max_layers) io_opt.max_layers = *opt.max_layers;
    if (opt.corrupt_oracle) io_opt.corrupt_oracle = true;
    if (io_opt.max_layers < 2) throw ConfigError("identities: max_n must be >= 2");
    if (io_opt.samples < 1) throw ConfigError("identities: samples must be >= 1");

    const IdentityReport rep = run_identities(io_opt);
    detail::Json j;
    j["command"] = "identities";
    j["seed"] = rep.seed;
    j["max_n"] = rep.max_layers;
    j["samples"] = io_opt.samples;
    j["tolerance"] = rep.tolerance;
    j["corrupt_oracle"] = io_opt.corrupt_oracle;
    j["identities"] = detail::Json::array();
    for (const auto& r : rep.results) {
        detail::Json e;
        e["name"] = r.name;
        e["min_n"] = r.min_layers;
        e["cases"] = r.cases;
        e["max_relative_residual"] = r.max_residual;
        e["worst_n"] = r.worst_layers;
        e["skipped"] = detail::Json::array();
        for (auto n : r.skipped) e["skipped"].push_back("skipped: N<3 (N=" + std::to_string(n) + ")");
        e["passed"] = r.passed;
        j["identities"].push_back(e);
    }
    j["passed"] = rep.passed;
    io::write_atomic(opt.out / "identities.json", io::dump(j));
    detail::say(opt, std::string("identities: ") + (rep.passed ? "passed" : "FAILED"));
    return rep.passed ? ok : check_failed;
}

// ---------------------------------------------------------------------------

inline int cmd_simulate(const CommandOptions& opt) {
    auto cfg = detail::open_config(opt);
    const auto run = detail::read_run(cfg, opt);
    const SpatialGrid sgrid = detail::read_grid(cfg);
    const auto dens = detail::read_density(cfg, 2);
    const DensityGrid dgrid(dens.layers, dens.rho_surf, dens.rho_bott);
    std::string preset;
    const ContinuousProfile profile = detail::read_profile(cfg, sgrid, dgrid, "study", preset);
    SolverParams p;
    p.sgrid = sgrid;
    p.dgrid = dgrid;
    detail::read_solver(cfg, p);
    cfg.finish();

    p.hbar = project_PN(profile.hbar, dgrid);
    p.ubar = profile.ubar.parts.empty() ? LayerVector(dgrid.layers(), 0.0) : project_PN(profile.ubar, dgrid);
    LayerField h0 = profile.h.empty() ? LayerField(dgrid.layers(), sgrid.size()) : project_PN(profile.h, sgrid, dgrid);
    LayerField u0 = profile.u.empty() ? LayerField(dgrid.layers(), sgrid.size()) : project_PN(profile.u, sgrid, dgrid);
    p.validate();

    // Existence-time scale (1 + (|D_rho Ubar|^2 + M0^2) / kappa)^{-1}, unit constant.
    const double m0 = solution_norm_terms(sgrid, h0, u0, p.sobolev_index).total(p.kappa);
    const double dubar = dgrid.layers() >= 2 ? lq_norm(apply_Drho(p.ubar), infinity_exponent) : 0.0;
    const double existence_scale = 1.0 / (1.0 + (dubar * dubar + m0 * m0) / p.kappa);

    const auto start = std::chrono::steady_clock::now();
    const SimulationResult res = simulate(p, std::move(h0), std::move(u0));
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::vector<std::string> header{"t", "mass_total", "mass_min", "mass_max", "max_mass_drift",
                                    "energy", "min_depth", "max_depth", "solution_norm"};
    io::CsvTable csv(header);
    for (const auto& d : res.series) {
        double mmin = d.mass.front();
        double mmax = d.mass.front();
        for (double m : d.mass) {
            mmin = std::min(mmin, m);
            mmax = std::max(mmax, m);
        }
        csv.row({d.t, d.mass_total, mmin, mmax, d.max_mass_drift, d.energy, d.min_depth, d.max_depth,
                 d.solution_norm});
    }

    const Diagnostics& last = res.series.back();
    detail::Json j;
    j["command"] = "simulate";
    j["seed"] = run.seed;
    j["preset"] = preset;
    j["layers"] = dgrid.layers();
    j["points"] = sgrid.size();
    j["length"] = sgrid.length();
    j["kappa"] = p.kappa;
    j["h_star"] = p.h_star;
    j["cfl"] = p.cfl;
    j["t_end"] = p.t_end;
    j["status"] = to_string(res.status);
    if (res.status != RunStatus::completed) {
        j["message"] = res.message;
        j["failure_time"] = io::number(res.failure_time);
    }
    j["steps"] = res.steps;
    j["t_final"] = res.final_state.t;
    j["guard_floor"] = 0.5 * p.h_star;
    j["min_depth"] = last.min_depth;
    j["max_depth"] = last.max_depth;
    j["energy_initial"] = res.series.front().energy;
    j["energy_final"] = last.energy;
    j["max_mass_drift"] = last.max_mass_drift;
    detail::Json mass = detail::Json::array();
    for (double m : last.mass) mass.push_back(m);
    j["mass_final"] = mass;
    if (res.status == RunStatus::completed) {
        const SolutionNorm sn = solution_norm(res.final_state, p);
        j["solution_norm"] = {{"h_sm1_1", sn.terms.h_sm1_1}, {"sh_s_2", sn.terms.sh_s_2},
                              {"tsh_s_0", sn.terms.tsh_s_0}, {"u_s_2", sn.terms.u_s_2},
                              {"h_s_2", sn.terms.h_s_2},     {"instantaneous", sn.instantaneous},
                              {"integrated", sn.integrated}, {"total", sn.total}};
    }
    j["existence_time_scale"] = existence_scale;
    j["ran_past_existence_time_scale"] = res.final_state.t >= existence_scale;

    io::write_atomic(opt.out / "diagnostics.csv", csv.str());
    io::write_atomic(opt.out / "summary.json", io::dump(j));
    io::write_atomic(opt.out / "timing.json", io::dump(detail::Json{{"wall_seconds", wall}}));

    switch (res.status) {
        case RunStatus::completed:
            detail::say(opt, "simulate: completed " + std::to_string(res.steps) + " steps");
            return ok;
        case RunStatus::cavitation:
            std::cerr << "simulate: " << res.message << "\n";
            return guard_error;
        case RunStatus::blow_up:
            std::cerr << "simulate: " << res.message << "\n";
            return numeric_error;
    }
    return numeric_error;
}

// ---------------------------------------------------------------------------

inline int cmd_consistency(const CommandOptions& opt) {
    auto cfg = detail::open_config(opt);
    const auto run = detail::read_run(cfg, opt);
    ConsistencyConfig c;
    c.sgrid = detail::read_grid(cfg);
    const auto dens = detail::read_density(cfg, 1);
    c.rho_surf = dens.rho_surf;
    c.rho_bott = dens.rho_bott;
    std::string preset;
    const ContinuousProfile profile =
        detail::read_profile(cfg, c.sgrid, DensityGrid(1, c.rho_surf, c.rho_bott), "study", preset);
    c.h = profile.h;
    c.n_list = cfg.sizes("study", "n_list", c.n_list);
    c.sobolev_index = cfg.number("study", "sobolev_index", c.sobolev_index);
    c.window = detail::read_window(cfg, c.window);
    cfg.finish();

    const ConsistencyReport rep = consistency_study(c);

    io::CsvTable csv({"N", "error", "level0", "level1", "level2"});
    detail::Json per_n = detail::Json::array();
    for (const auto& lv : rep.levels) {
        csv.row({static_cast<double>(lv.layers), lv.total, lv.level0, lv.level1, lv.level2});
        per_n.push_back({{"N", lv.layers},
                         {"error", lv.total},
                         {"level0", lv.level0},
                         {"level1", lv.level1},
                         {"level2", lv.level2}});
    }
    detail::Json j;
    j["command"] = "consistency";
    j["seed"] = run.seed;
    j["preset"] = preset;
    j["points"] = c.sgrid.size();
    j["sobolev_index"] = c.sobolev_index;
    j["n_list"] = detail::sizes_json(c.n_list);
    j["errors"] = per_n;
    j["fit"] = detail::fit_json(rep.fit);
    j["fit_levels"] = {detail::fit_json(rep.fit_level0), detail::fit_json(rep.fit_level1),
                       detail::fit_json(rep.fit_level2)};
    j["window"] = detail::window_json(c.window);
    j["passed"] = rep.passed;
    io::write_atomic(opt.out / "consistency.csv", csv.str());
    io::write_atomic(opt.out / "consistency.json", io::dump(j));
    if (rep.fit.degenerate) {
        detail::say(opt, "consistency: degenerate (" + rep.fit.note + ")");
    } else {
        detail::say(opt, "consistency: slope " + io::format_double(rep.fit.slope) +
                             (rep.passed ? " (in window)" : " (OUT OF WINDOW)"));
    }
    return rep.passed ? ok : check_failed;
}

// ---------------------------------------------------------------------------

inline int cmd_converge(const CommandOptions& opt) {
    auto cfg = detail::open_config(opt);
    const auto run = detail::read_run(cfg, opt);
    ConvergenceConfig c;
    c.base.sgrid = detail::read_grid(cfg);
    const auto dens = detail::read_density(cfg, 1);
    c.rho_surf = dens.rho_surf;
    c.rho_bott = dens.rho_bott;
    std::string preset;
    c.profile = detail::read_profile(cfg, c.base.sgrid, DensityGrid(1, c.rho_surf, c.rho_bott), "small_amplitude",
                                     preset);
    c.base.t_end = 0.5;
    detail::read_solver(cfg, c.base);
    c.n_list = cfg.sizes("study", "n_list", c.n_list);
    c.ratio = static_cast<std::size_t>(cfg.integer("study", "ratio", c.ratio));
    c.n_ref = static_cast<std::size_t>(cfg.integer("study", "n_ref", c.n_ref));
    const std::string metric = cfg.text("study", "metric", "instantaneous");
    if (metric == "instantaneous") {
        c.metric = ConvergenceMetric::instantaneous;
    } else if (metric == "composite") {
        c.metric = ConvergenceMetric::composite;
    } else {
        throw ConfigError("study.metric must be 'instantaneous' or 'composite'");
    }
    c.window = detail::read_window(cfg, c.window);
    cfg.finish();
    c.threads = run.threads;
    // Background vectors are set per run; validate() below checks the per-run hbar.
    c.base.hbar = project_PN(c.profile.hbar, DensityGrid(1, c.rho_surf, c.rho_bott));
    c.base.ubar = LayerVector(1, 0.0);

    const ConvergenceReport rep = convergence_study(c);

    io::CsvTable csv({"N", "error"});
    detail::Json per_n = detail::Json::array();
    for (const auto& e : rep.entries) {
        csv.row({static_cast<double>(e.layers), e.error});
        per_n.push_back({{"N", e.layers},
                         {"error", e.error},
                         {"h_sm1_1", e.terms.h_sm1_1},
                         {"sh_s_2", e.terms.sh_s_2},
                         {"tsh_s_0", e.terms.tsh_s_0},
                         {"u_s_2", e.terms.u_s_2},
                         {"h_s_2", e.terms.h_s_2},
                         {"integrated", e.integrated}});
    }
    detail::Json j;
    j["command"] = "converge";
    j["seed"] = run.seed;
    j["preset"] = preset;
    j["points"] = c.base.sgrid.size();
    j["kappa"] = c.base.kappa;
    j["t_end"] = c.base.t_end;
    j["metric"] = metric;
    j["n_list"] = detail::sizes_json(c.n_list);
    j["ratio"] = c.ratio;
    j["n_ref"] = c.n_ref;
    j["dt"] = rep.dt;
    j["steps"] = rep.steps;
    j["errors"] = per_n;
    j["fit"] = detail::fit_json(rep.fit);
    j["window"] = detail::window_json(c.window);
    j["passed"] = rep.passed;
    io::write_atomic(opt.out / "convergence.csv", csv.str());
    io::write_atomic(opt.out / "convergence.json", io::dump(j));
    if (rep.fit.degenerate) {
        detail::say(opt, "converge: degenerate (" + rep.fit.note + ")");
    } else {
        detail::say(opt, "converge: slope " + io::format_double(rep.fit.slope) +
                             (rep.passed ? " (in window)" : " (OUT OF WINDOW)"));
    }
    return rep.passed ? ok : check_failed;
}

// ---------------------------------------------------------------------------

inline int cmd_dispersion(const CommandOptions& opt) {
    auto cfg = detail::open_config(opt);
    const auto run = detail::read_run(cfg, opt);
    DispersionConfig c;
    c.sgrid = detail::read_grid(cfg);
    c.hbar = cfg.number("dispersion", "hbar", c.hbar);
    c.kappa = cfg.number("dispersion", "kappa", c.kappa);
    c.h_star = cfg.number("dispersion", "h_star", c.h_star);
    c.cfl = cfg.number("dispersion", "cfl", c.cfl);
    c.amplitude = cfg.number("dispersion", "amplitude", c.amplitude);
    c.modes = cfg.sizes("dispersion", "modes", c.modes);
    c.t_end = cfg.number("dispersion", "t_end", c.t_end);
    c.tolerance = cfg.number("dispersion", "tolerance", c.tolerance);
    cfg.finish();

    const DispersionReport rep = dispersion_study(c);

    io::CsvTable csv({"mode", "k", "expected_decay", "measured_decay", "expected_frequency", "measured_frequency",
                      "decay_error", "frequency_error", "overdamped", "passed"});
    detail::Json modes = detail::Json::array();
    for (const auto& e : rep.entries) {
        csv.row({static_cast<double>(e.mode), e.k, e.expected.decay, e.measured_decay, e.expected.frequency,
                 e.measured_frequency, e.decay_error, e.frequency_error, e.expected.overdamped ? 1.0 : 0.0,
                 e.passed ? 1.0 : 0.0});
        modes.push_back({{"mode", e.mode},
                         {"k", e.k},
                         {"overdamped", e.expected.overdamped},
                         {"expected_decay", e.expected.decay},
                         {"measured_decay", e.measured_decay},
                         {"expected_frequency", e.expected.frequency},
                         {"measured_frequency", e.measured_frequency},
                         {"decay_error", e.decay_error},
                         {"frequency_error", e.frequency_error},
                         {"oscillation_detected", e.oscillation_detected},
                         {"passed", e.passed}});
    }
    detail::Json j;
    j["command"] = "dispersion";
    j["seed"] = run.seed;
    j["hbar"] = c.hbar;
    j["kappa"] = c.kappa;
    j["amplitude"] = c.amplitude;
    j["tolerance"] = c.tolerance;
    j["modes"] = modes;
    j["passed"] = rep.passed;
    io::write_atomic(opt.out / "dispersion.csv", csv.str());
    io::write_atomic(opt.out / "dispersion.json", io::dump(j));
    detail::say(opt, std::string("dispersion: ") + (rep.passed ? "passed" : "FAILED"));
    return rep.passed ? ok : check_failed;
}

/// Runs `fn` and maps exceptions onto the exit-code contract.
template <class Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const StudyAborted& e) {
        std::cerr << "study aborted: " << e.what() << "\n";
        return e.status == RunStatus::cavitation ? guard_error : numeric_error;
    } catch (const CavitationError& e) {
        std::cerr << "guard: " << e.what() << "\n";
        return guard_error;
    } catch (const DimensionError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return numeric_error;
    }
}

} // namespace mlsw::cli
