// mlsw: identity checks, simulation and rate studies for the N-layer shallow water system.

#include <cstdint>
#include <string>

#include "CLI11.hpp"
#include "mlsw/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Multi-layer shallow water solver and verification harness"};
    app.require_subcommand(1);

    mlsw::cli::CommandOptions opt;
    std::string config;
    std::string out = ".";
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::size_t max_n = 0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "INI run configuration")->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "random seed (overrides [run] seed)");
        sub->add_option("--threads", threads, "worker threads (overrides [run] threads)")->check(CLI::PositiveNumber);
        sub->add_flag("--quiet", opt.quiet, "no summary line on stdout");
    };

    auto* identities = app.add_subcommand("identities", "exact operator identities on seeded random vectors");
    common(identities);
    identities->add_option("--max-n", max_n, "largest layer count (default 257)")->check(CLI::Range(2, 1 << 20));
    identities->add_flag("--corrupt-oracle", opt.corrupt_oracle, "perturb the reference side (failure-path test)");

    auto* simulate = app.add_subcommand("simulate", "time integration with diagnostics");
    common(simulate);
    auto* consistency = app.add_subcommand("consistency", "consistency-rate study");
    common(consistency);
    auto* converge = app.add_subcommand("converge", "nested self-convergence study");
    common(converge);
    auto* dispersion = app.add_subcommand("dispersion", "single-layer dispersion check");
    common(dispersion);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : mlsw::cli::config_error;
    }

    if (!config.empty()) opt.config = config;
    opt.out = out;
    if (seed != 0 || identities->count("--seed") || simulate->count("--seed") || consistency->count("--seed") ||
        converge->count("--seed") || dispersion->count("--seed")) {
        opt.seed = seed;
    }
    if (threads != 0) opt.threads = threads;
    if (max_n != 0) opt.max_layers = max_n;

    using namespace mlsw::cli;
    if (identities->parsed()) return guarded([&] { return cmd_identities(opt); });
    if (simulate->parsed()) return guarded([&] { return cmd_simulate(opt); });
    if (consistency->parsed()) return guarded([&] { return cmd_consistency(opt); });
    if (converge->parsed()) return guarded([&] { return cmd_converge(opt); });
    return guarded([&] { return cmd_dispersion(opt); });
}
