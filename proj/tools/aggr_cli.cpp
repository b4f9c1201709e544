// aggr: command-line front end for the aggregation solvers.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aggr/harness.hpp"

namespace {

using namespace aggr::harness;

struct Overrides {
    std::string config;
    std::string out;
    std::optional<int> example;
    std::string init = "init1";
    std::optional<std::size_t> cells;
    std::optional<double> gamma;
    std::optional<double> t_end;
    std::optional<std::size_t> particles;
    std::vector<std::size_t> levels;
};

void add_common(CLI::App *sub, Overrides &o) {
    sub->add_option("--config", o.config, "JSON config file");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--example", o.example, "preset 1, 2 or 3")->check(CLI::Range(1, 3));
    sub->add_option("--init", o.init, "builtin initial data for presets (init1, init2)");
    sub->add_option("--cells", o.cells, "number of grid cells");
    sub->add_option("--gamma", o.gamma, "CFL number in (0,1]");
    sub->add_option("--t-end", o.t_end, "final time");
    sub->add_option("--particles", o.particles, "particle count for the oracle");
}

// Preset, then config file, then individual flags.
SimConfig resolve(const Overrides &o, bool converging) {
    SimConfig c = o.example ? preset(*o.example, o.init) : SimConfig{};
    if (!o.config.empty()) c = load_config(o.config, c);
    if (!o.out.empty()) c.output_dir = o.out;
    if (o.cells) c.n_cells = *o.cells;
    if (o.gamma) c.gamma = *o.gamma;
    if (o.t_end) {
        c.t_end = *o.t_end;
        c.sample_times.clear();
    }
    if (o.particles) (converging ? c.converge_particles : c.compare_particles) = *o.particles;
    if (!o.levels.empty()) c.refinements = o.levels;
    if (converging && c.refinements.empty()) c.refinements = {125, 250, 500, 1000};
    return c;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Aggregation equation solvers: finite volumes, sticky particles, W1 diagnostics"};
    app.require_subcommand(1);
    Overrides o;

    auto *sim = app.add_subcommand("simulate", "run the upwind scheme");
    auto *par = app.add_subcommand("particles", "run the sticky-particle system");
    auto *cmp = app.add_subcommand("compare", "W1 distance between scheme and particles over time");
    auto *cnv = app.add_subcommand("converge", "W1 error under grid refinement");
    for (auto *s : {sim, par, cmp, cnv}) add_common(s, o);
    cnv->add_option("--levels", o.levels, "cell counts, each dividing the next");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    SimConfig c;
    try {
        c = resolve(o, cnv->parsed());
    } catch (const ConfigError &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    }

    if (sim->parsed()) return cmd_simulate(c);
    if (par->parsed()) return cmd_particles(c);
    if (cmp->parsed()) return cmd_compare(c);
    return cmd_converge(c);
}
