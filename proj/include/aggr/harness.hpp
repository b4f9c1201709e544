/**
 * @file harness.hpp
 * @brief Experiment configuration, orchestration and artifact output.
 *
 * A run is described by a SimConfig, read from one JSON document (see README)
 * or built from the --example presets. The experiment drivers return plain data;
 * the cmd_* functions write CSV artifacts plus a manifest.json listing every
 * output file with its SHA-256.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "aggr/fv.hpp"
#include "aggr/initial_data.hpp"
#include "aggr/measure.hpp"
#include "aggr/particles.hpp"
#include "aggr/potentials.hpp"

namespace aggr::harness {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum ExitCode : int { kOk = 0, kConfigError = 2, kRuntimeAbort = 3 };

struct PotentialSpec {
    std::string name = "abs_half";
    double sigma = 0.0;  ///< abs_scaled only
};

struct LawSpec {
    std::string name = "identity";
    double k = 0.0;
    double scale = 0.0;
};

struct SimConfig {
    std::string label = "run";
    PotentialSpec potential;
    LawSpec law;
    VelocityMode mode = VelocityMode::linear;
    double x_min = -2.5;
    double x_max = 2.5;
    std::size_t n_cells = 1000;
    double gamma = 0.9;
    double t_end = 1.0;
    std::vector<double> sample_times;
    std::string initial_name = "init1";  ///< empty when given explicitly
    InitialData initial = builtin_initial("init1");
    std::string output_dir = "out";
    std::size_t compare_particles = 256;
    std::size_t converge_particles = 512;
    std::vector<std::size_t> refinements;

    void validate() const {
        if (!(x_max > x_min)) throw ConfigError("domain must be nonempty");
        if (n_cells < 10) throw ConfigError("n_cells must be at least 10");
        if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0,1]");
        if (!(t_end >= 0.0)) throw ConfigError("t_end must be nonnegative");
        for (double t : sample_times)
            if (!(t >= 0.0)) throw ConfigError("sample times must be nonnegative");
        try {
            initial.validate();
            make_potential();
            make_law();
        } catch (const std::invalid_argument &e) {
            throw ConfigError(e.what());
        }
        if (mode == VelocityMode::nonlinear && !make_potential().decomposed())
            throw ConfigError("nonlinear mode needs a decomposed potential");
    }

    PointyPotential make_potential() const { return make_builtin_potential(potential.name, potential.sigma); }
    VelocityLaw make_law() const { return make_velocity_law(law.name, law.k, law.scale); }
    fv::Grid grid() const { return fv::Grid::from_domain(x_min, x_max, n_cells); }
    fv::Grid grid(std::size_t cells) const { return fv::Grid::from_domain(x_min, x_max, cells); }

    /// Requested sample times, or ten evenly spaced ones when none are given.
    std::vector<double> samples() const {
        if (!sample_times.empty()) return sample_times;
        std::vector<double> out;
        for (int k = 0; k <= 10; ++k) out.push_back(t_end * k / 10.0);
        return out;
    }
};

/// Built-in experiments on [-2.5, 2.5] with 1000 cells.
inline SimConfig preset(int example, const std::string &init = "init1") {
    SimConfig c;
    c.initial_name = init;
    c.initial = builtin_initial(init);
    c.x_min = -2.5;
    c.x_max = 2.5;
    c.n_cells = 1000;
    c.gamma = 0.9;
    switch (example) {
    case 1:
        c.label = "example1";
        c.potential = {"exp_pointy", 0.0};
        c.law = {"atan", 50.0, 2.0 / std::numbers::pi};
        c.mode = VelocityMode::nonlinear;
        c.t_end = 3.0;
        break;
    case 2:
        c.label = "example2";
        c.potential = {"abs_scaled", 1.0 / 250.0};
        c.law = {"atan", 50.0, 2.0 / std::numbers::pi};
        c.mode = VelocityMode::nonlinear;
        c.t_end = 25.0;
        break;
    case 3:
        c.label = "example3";
        c.potential = {"abs_scaled", 1.0 / 250.0};
        c.law = {"identity", 0.0, 0.0};
        c.mode = VelocityMode::linear;
        c.t_end = 500.0;
        break;
    default:
        throw ConfigError("unknown example preset " + std::to_string(example));
    }
    c.label += "_" + init;
    return c;
}

// ---------------------------------------------------------------------------
// JSON

inline json to_json(const InitialData &d) {
    json j;
    if (d.atomic()) {
        j["atoms"] = json::array();
        for (const Atom &a : d.atoms) j["atoms"].push_back({a.position, a.mass});
    } else {
        j["bumps"] = json::array();
        for (const Bump &b : d.bumps)
            j["bumps"].push_back({{"amplitude", b.amplitude}, {"center", b.center}, {"width", b.width}});
    }
    j["normalize"] = d.normalize;
    return j;
}

inline json to_json(const SimConfig &c) {
    json j;
    j["label"] = c.label;
    j["potential"] = {{"name", c.potential.name}};
    if (c.potential.name == "abs_scaled") j["potential"]["sigma"] = c.potential.sigma;
    j["velocity_law"] = {{"name", c.law.name}};
    if (c.law.name == "atan") {
        j["velocity_law"]["k"] = c.law.k;
        j["velocity_law"]["scale"] = c.law.scale;
    }
    j["mode"] = to_string(c.mode);
    j["domain"] = {c.x_min, c.x_max};
    j["n_cells"] = c.n_cells;
    j["gamma"] = c.gamma;
    j["t_end"] = c.t_end;
    j["sample_times"] = c.samples();
    if (!c.initial_name.empty()) j["initial"] = c.initial_name;
    else j["initial"] = to_json(c.initial);
    j["output_dir"] = c.output_dir;
    j["compare_particles"] = c.compare_particles;
    j["converge_particles"] = c.converge_particles;
    if (!c.refinements.empty()) j["refinements"] = c.refinements;
    return j;
}

inline InitialData initial_from_json(const json &j) {
    InitialData d;
    if (j.contains("bumps")) {
        for (const json &b : j.at("bumps"))
            d.bumps.push_back({b.value("amplitude", 1.0), b.at("center").get<double>(), b.at("width").get<double>()});
    }
    if (j.contains("atoms")) {
        for (const json &a : j.at("atoms")) d.atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
    }
    d.normalize = j.value("normalize", true);
    return d;
}

/// Missing fields keep their defaults from `base`.
inline SimConfig config_from_json(const json &j, SimConfig base = {}) {
    SimConfig c = std::move(base);
    try {
        c.label = j.value("label", c.label);
        if (j.contains("potential")) {
            const json &p = j.at("potential");
            c.potential.name = p.at("name").get<std::string>();
            c.potential.sigma = p.value("sigma", 0.0);
        }
        if (j.contains("velocity_law")) {
            const json &l = j.at("velocity_law");
            c.law.name = l.at("name").get<std::string>();
            c.law.k = l.value("k", 0.0);
            c.law.scale = l.value("scale", 0.0);
        }
        if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
        if (j.contains("domain")) {
            c.x_min = j.at("domain").at(0).get<double>();
            c.x_max = j.at("domain").at(1).get<double>();
        }
        c.n_cells = j.value("n_cells", c.n_cells);
        c.gamma = j.value("gamma", c.gamma);
        c.t_end = j.value("t_end", c.t_end);
        if (j.contains("sample_times")) c.sample_times = j.at("sample_times").get<std::vector<double>>();
        if (j.contains("initial")) {
            const json &init = j.at("initial");
            if (init.is_string()) {
                c.initial_name = init.get<std::string>();
                c.initial = builtin_initial(c.initial_name);
            } else {
                c.initial_name.clear();
                c.initial = initial_from_json(init);
            }
        }
        c.output_dir = j.value("output_dir", c.output_dir);
        c.compare_particles = j.value("compare_particles", c.compare_particles);
        c.converge_particles = j.value("converge_particles", c.converge_particles);
        if (j.contains("refinements")) c.refinements = j.at("refinements").get<std::vector<std::size_t>>();
    } catch (const json::exception &e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument &e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

inline SimConfig load_config(const std::filesystem::path &path, SimConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception &e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    return config_from_json(j, std::move(base));
}

// ---------------------------------------------------------------------------
// Artifacts

inline std::string sha256_hex(const std::string &data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Writes files under one directory and records each with its checksum.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    void write(const std::string &name, const std::string &content) {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
        out << content;
        files_.push_back({{"name", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
    }

    /// manifest.json: config echo, summary and the file list.
    void finish(const json &config, const json &summary) {
        json m;
        m["config"] = config;
        m["summary"] = summary;
        m["files"] = files_;
        std::ofstream out(dir_ / "manifest.json");
        out << m.dump(2) << '\n';
    }

    const std::filesystem::path &dir() const { return dir_; }
    const json &files() const { return files_; }

private:
    std::filesystem::path dir_;
    json files_ = json::array();
};

inline std::string snapshot_csv(const fv::FVState &st) {
    std::string s = "x,rho\n";
    for (std::size_t i = 0; i < st.rho.size(); ++i)
        s += format_double(st.grid.center(i)) + ',' + format_double(st.rho[i]) + '\n';
    return s;
}

inline std::string diagnostics_csv(const fv::DiagnosticsReport &d) {
    std::string s = "step,time,mass,min_rho,max_abs_a,moment1,support_cells,tv_cumulative,entropy_residual\n";
    for (const auto &r : d.rows) {
        s += std::to_string(r.step) + ',' + format_double(r.time) + ',' + format_double(r.mass) + ',' +
             format_double(r.min_rho) + ',' + format_double(r.max_abs_a) + ',' + format_double(r.moment1) + ',' +
             std::to_string(r.support_cells) + ',' + format_double(r.tv_cumulative) + ',' +
             (std::isnan(r.entropy_residual) ? std::string("nan") : format_double(r.entropy_residual)) + '\n';
    }
    return s;
}

inline std::string atoms_csv(const DiscreteMeasure &m) {
    std::ostringstream os;
    write_atoms_csv(os, m);
    return os.str();
}

// ---------------------------------------------------------------------------
// Analysis helpers

struct Concentration {
    std::size_t peak = 0;    ///< index of the densest cell
    double position = 0.0;   ///< its center
    double mass_near = 0.0;  ///< mass within +-radius cells of the peak
};

/// Mass within `radius` cells of the densest cell, searched over [first, last].
inline Concentration concentration(const fv::FVState &st, std::size_t radius, std::size_t first = 0,
                                   std::size_t last = std::numeric_limits<std::size_t>::max()) {
    last = std::min(last, st.rho.size() - 1);
    Concentration c;
    c.peak = first;
    for (std::size_t i = first; i <= last; ++i)
        if (st.rho[i] > st.rho[c.peak]) c.peak = i;
    c.position = st.grid.center(c.peak);
    const std::size_t lo = c.peak >= radius ? c.peak - radius : 0;
    const std::size_t hi = std::min(st.rho.size() - 1, c.peak + radius);
    for (std::size_t i = lo; i <= hi; ++i) c.mass_near += st.rho[i] * st.grid.dx;
    return c;
}

/// Densest cells left and right of `split` (a cell index), each with its nearby mass.
inline std::pair<Concentration, Concentration> two_clusters(const fv::FVState &st, std::size_t radius,
                                                            std::size_t split) {
    return {concentration(st, radius, 0, split - 1), concentration(st, radius, split, st.rho.size() - 1)};
}

// ---------------------------------------------------------------------------
// Experiments

inline fv::RunResult simulate(const SimConfig &c) {
    c.validate();
    const PointyPotential pot = c.make_potential();
    const VelocityLaw law = c.make_law();
    const fv::FVState st0 = fv::project_initial(c.initial, c.grid());
    fv::RunOptions opts;
    opts.mode = c.mode;
    opts.t_end = c.t_end;
    opts.gamma = c.gamma;
    opts.sample_times = c.samples();
    return fv::run(st0, pot, law, opts);
}

/**
 * n-particle approximation of the initial data: uniform bins over the domain,
 * each bin's mass placed at its barycenter. Atomic data with at most n atoms is
 * used as is.
 */
inline DiscreteMeasure particle_projection(const InitialData &init, double lo, double hi, std::size_t n) {
    init.validate();
    std::vector<Atom> atoms;
    if (init.atomic() && init.atoms.size() <= n) {
        atoms = init.atoms;
    } else {
        const double h = (hi - lo) / static_cast<double>(n);
        std::vector<double> mass(n, 0.0), moment(n, 0.0);
        if (init.atomic()) {
            for (const Atom &a : init.atoms) {
                const auto k = std::min(n - 1, static_cast<std::size_t>(std::max(0.0, std::floor((a.position - lo) / h))));
                mass[k] += a.mass;
                moment[k] += a.mass * a.position;
            }
        } else {
            using Gauss = boost::math::quadrature::gauss<double, 10>;
            for (std::size_t k = 0; k < n; ++k) {
                const double a = lo + static_cast<double>(k) * h;
                mass[k] = Gauss::integrate([&](double x) { return init.density(x); }, a, a + h);
                moment[k] = Gauss::integrate([&](double x) { return x * init.density(x); }, a, a + h);
            }
        }
        for (std::size_t k = 0; k < n; ++k)
            if (mass[k] > 0.0) atoms.push_back({moment[k] / mass[k], mass[k]});
    }
    double total = 0.0;
    for (const Atom &a : atoms) total += a.mass;
    if (!(total > 0.0)) throw ConfigError("initial data has zero mass");
    for (Atom &a : atoms) a.mass /= total;
    return DiscreteMeasure(std::move(atoms));
}

struct ParticleRun {
    particles::TrajectoryLog log;
    std::vector<std::pair<double, DiscreteMeasure>> samples;
    std::size_t final_count = 0;
};

/// Sticky-particle run recording a sample event at each requested time.
inline ParticleRun run_particles(const SimConfig &c, const DiscreteMeasure &initial) {
    c.validate();
    ParticleRun out;
    auto ps = particles::ParticleSystem::from_measure(initial, c.make_potential(), c.make_law(), c.mode);
    std::vector<double> times = c.samples();
    times.push_back(c.t_end);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    for (double t : times) {
        if (t > c.t_end) break;
        ps = particles::advance_to(std::move(ps), t, &out.log);
        out.log.record(t, particles::EventKind::sample, ps.measure());
        out.samples.emplace_back(t, ps.measure());
    }
    out.final_count = ps.size();
    return out;
}

struct ComparisonRow {
    double time = 0.0;
    double w1 = 0.0;
};

/// W1 between the scheme and a particle run from the same initial data at each sample time.
inline std::vector<ComparisonRow> compare(const SimConfig &c, std::size_t n_particles) {
    const fv::RunResult fv_run = simulate(c);
    const ParticleRun pr = run_particles(c, particle_projection(c.initial, c.x_min, c.x_max, n_particles));
    std::vector<ComparisonRow> rows;
    for (const auto &snap : fv_run.snapshots) {
        const auto it = std::find_if(pr.samples.begin(), pr.samples.end(),
                                     [&](const auto &s) { return s.first == snap.time; });
        if (it == pr.samples.end()) continue;
        rows.push_back({snap.time, wasserstein1(snap.measure, it->second)});
    }
    return rows;
}

struct ConvergenceRow {
    double dx = 0.0;
    std::size_t n_cells = 0;
    double w1_error = 0.0;
    double runtime_s = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    std::vector<double> ratios;  ///< error[k+1] / error[k]
};

/// Worker count for sweeps: AGGR_THREADS if set, otherwise the hardware concurrency.
inline std::size_t sweep_threads() {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char *env = std::getenv("AGGR_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) n = std::min<std::size_t>(n, static_cast<std::size_t>(v));
    }
    return n;
}

inline void validate_refinements(const std::vector<std::size_t> &levels) {
    if (levels.size() < 3) throw ConfigError("convergence study needs at least three refinement levels");
    for (std::size_t k = 0; k + 1 < levels.size(); ++k)
        if (levels[k] == 0 || levels[k + 1] <= levels[k] || levels[k + 1] % levels[k] != 0)
            throw ConfigError("refinement levels must be nested (each divides the next)");
}

/// W1 error at t_end of each refinement level against an n-particle oracle.
inline ConvergenceReport converge(const SimConfig &c, const std::vector<std::size_t> &levels,
                                  std::size_t n_particles) {
    validate_refinements(levels);
    c.validate();
    SimConfig oracle_cfg = c;
    oracle_cfg.sample_times = {c.t_end};
    const ParticleRun oracle =
        run_particles(oracle_cfg, particle_projection(c.initial, c.x_min, c.x_max, n_particles));
    const DiscreteMeasure &reference = oracle.samples.back().second;

    auto level_run = [&](std::size_t cells) {
        const auto t0 = std::chrono::steady_clock::now();
        SimConfig lc = c;
        lc.n_cells = cells;
        lc.sample_times = {c.t_end};
        const fv::RunResult r = simulate(lc);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return ConvergenceRow{lc.grid().dx, cells, wasserstein1(r.snapshots.back().measure, reference), secs};
    };

    ConvergenceReport rep;
    rep.rows.resize(levels.size());
    const std::size_t workers = sweep_threads();
    for (std::size_t start = 0; start < levels.size(); start += workers) {
        std::vector<std::future<ConvergenceRow>> batch;
        const std::size_t stop = std::min(levels.size(), start + workers);
        for (std::size_t k = start; k < stop; ++k) batch.push_back(std::async(std::launch::async, level_run, levels[k]));
        for (std::size_t k = start; k < stop; ++k) rep.rows[k] = batch[k - start].get();
    }
    for (std::size_t k = 0; k + 1 < rep.rows.size(); ++k)
        rep.ratios.push_back(rep.rows[k + 1].w1_error / rep.rows[k].w1_error);
    return rep;
}

// ---------------------------------------------------------------------------
// Commands. Each writes into c.output_dir and returns an exit code.

template <class F>
int guarded(F &&body) {
    try {
        body();
        return kOk;
    } catch (const ConfigError &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "runtime abort: %s\n", e.what());
        return kRuntimeAbort;
    }
}

inline std::string indexed_name(const std::string &stem, std::size_t k, const std::string &ext) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%03zu", k);
    return stem + buf + ext;
}

inline int cmd_simulate(const SimConfig &c) {
    return guarded([&] {
        c.validate();
        const fv::RunResult r = simulate(c);
        ArtifactWriter out(c.output_dir);
        json snaps = json::array();
        for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
            const std::string name = indexed_name("snapshot", k, ".csv");
            out.write(name, snapshot_csv(r.snapshots[k].state));
            snaps.push_back({{"time", r.snapshots[k].time}, {"file", name}});
        }
        out.write("diagnostics.csv", diagnostics_csv(r.diagnostics));

        const auto &rows = r.diagnostics.rows;
        double drift = 0.0, min_rho = 0.0, max_a = 0.0, max_entropy = -std::numeric_limits<double>::infinity();
        for (const auto &row : rows) {
            drift = std::max(drift, std::abs(row.mass - rows.front().mass));
            min_rho = std::min(min_rho, row.min_rho);
            max_a = std::max(max_a, row.max_abs_a);
            if (!std::isnan(row.entropy_residual)) max_entropy = std::max(max_entropy, row.entropy_residual);
        }
        const Concentration fin = concentration(r.snapshots.back().state, 5);
        json summary = {{"steps", rows.back().step},
                        {"a_inf", r.diagnostics.a_inf},
                        {"dt_cfl", r.diagnostics.dt_cfl},
                        {"gamma", c.gamma},
                        {"mass_drift", drift},
                        {"min_rho", min_rho},
                        {"max_abs_a", max_a},
                        {"final_peak_position", fin.position},
                        {"final_mass_within_5_cells", fin.mass_near},
                        {"snapshots", snaps}};
        if (c.mode == VelocityMode::nonlinear) summary["max_entropy_residual"] = max_entropy;
        out.finish(to_json(c), summary);
    });
}

inline int cmd_particles(const SimConfig &c) {
    return guarded([&] {
        c.validate();
        const DiscreteMeasure init = particle_projection(c.initial, c.x_min, c.x_max, c.compare_particles);
        const ParticleRun r = run_particles(c, init);
        ArtifactWriter out(c.output_dir);
        std::ostringstream traj;
        particles::write_trajectory_csv(traj, r.log);
        out.write("trajectory.csv", traj.str());
        out.write("atoms_initial.csv", atoms_csv(init));
        out.write("atoms_final.csv", atoms_csv(r.samples.back().second));
        json merges = json::array();
        for (const auto &e : r.log.events)
            if (e.kind == particles::EventKind::merge) merges.push_back(e.time);
        out.finish(to_json(c), {{"initial_particles", init.size()},
                                {"final_particles", r.final_count},
                                {"merge_events", r.log.count(particles::EventKind::merge)},
                                {"merge_times", merges}});
    });
}

inline int cmd_compare(const SimConfig &c) {
    return guarded([&] {
        const auto rows = compare(c, c.compare_particles);
        ArtifactWriter out(c.output_dir);
        std::string csv = "time,w1\n";
        double worst = 0.0;
        for (const auto &r : rows) {
            csv += format_double(r.time) + ',' + format_double(r.w1) + '\n';
            worst = std::max(worst, r.w1);
        }
        out.write("w1.csv", csv);
        out.finish(to_json(c), {{"particles", c.compare_particles},
                                {"w1_initial", rows.empty() ? 0.0 : rows.front().w1},
                                {"w1_final", rows.empty() ? 0.0 : rows.back().w1},
                                {"w1_max", worst}});
    });
}

inline int cmd_converge(const SimConfig &c) {
    return guarded([&] {
        const ConvergenceReport rep = converge(c, c.refinements, c.converge_particles);
        ArtifactWriter out(c.output_dir);
        // Runtimes go to the manifest so the CSV stays bit-reproducible.
        std::string csv = "dx,n_cells,w1_error\n";
        json runtimes = json::array();
        for (const auto &r : rep.rows) {
            csv += format_double(r.dx) + ',' + std::to_string(r.n_cells) + ',' + format_double(r.w1_error) + '\n';
            runtimes.push_back(r.runtime_s);
        }
        out.write("convergence.csv", csv);
        out.finish(to_json(c), {{"oracle_particles", c.converge_particles},
                                {"ratios", rep.ratios},
                                {"runtime_s", runtimes}});
    });
}

}  // namespace aggr::harness
