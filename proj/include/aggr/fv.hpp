/**
 * @file fv.hpp
 * @brief Upwind finite-volume scheme for d_t rho + d_x(a(W' * rho) rho) = 0.
 *
 * Densities live on a uniform grid of cell centers x_i = x_min + i dx with
 * cells C_i = [x_i - dx/2, x_i + dx/2). One step is
 *
 *   rho_i^{n+1} = rho_i^n - dt/dx (J_{i+1/2} - J_{i-1/2}),
 *   J_{i+1/2}   = (a_i)_+ rho_i + (a_{i+1})_- rho_{i+1}.
 *
 * The cell velocities a_i come from one of two routes:
 *  - linear:    a_i = sum_{j != i} W'(x_i - x_j) rho_j dx (self term excluded);
 *  - nonlinear: a_i is the divided difference of A between the interface values
 *               u_{i-1/2}, u_{i+1/2} of u = W' * rho, which solve
 *               (u_{i+1/2} - u_{i-1/2}) / dx = nu_i - c rho_i with nu ~ w * rho.
 *
 * With a = id both routes agree to rounding, which the tests rely on.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "aggr/initial_data.hpp"
#include "aggr/measure.hpp"
#include "aggr/potentials.hpp"

namespace aggr::fv {

/// Raised when the scheme cannot continue (CFL violation, mass at the boundary, NaN).
class SchemeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Grid {
    double x_min = 0.0;  ///< center of cell 0
    double dx = 1.0;
    std::size_t n_cells = 0;
    /// Midpoint of the grid. Centers are offsets from it, so a grid symmetric
    /// about 0 has exactly mirrored centers.
    double x_mid = 0.0;

    Grid() = default;
    Grid(double x_min_, double dx_, std::size_t n) : x_min(x_min_), dx(dx_), n_cells(n) {
        if (!(dx > 0.0) || !std::isfinite(dx)) throw std::invalid_argument("Grid: dx must be positive");
        if (n_cells < 2) throw std::invalid_argument("Grid: need at least two cells");
        x_mid = x_min + half_span() * dx;
    }

    /// n cells tiling [lo, hi]; centers at lo + (i + 1/2) dx.
    static Grid from_domain(double lo, double hi, std::size_t n) {
        if (!(hi > lo)) throw std::invalid_argument("Grid: empty domain");
        const double dx = (hi - lo) / static_cast<double>(n);
        Grid g(lo + 0.5 * dx, dx, n);
        g.x_mid = 0.5 * (lo + hi);
        g.x_min = g.center(0);
        return g;
    }

    double center(std::size_t i) const { return x_mid + (static_cast<double>(i) - half_span()) * dx; }
    double left_edge() const { return x_mid - 0.5 * static_cast<double>(n_cells) * dx; }
    double right_edge() const { return x_mid + 0.5 * static_cast<double>(n_cells) * dx; }

    /// Index of the cell containing x (boundary points go right), nullopt outside.
    std::optional<std::size_t> locate(double x) const {
        const double s = std::floor((x - left_edge()) / dx);
        if (!(s >= 0.0) || s >= static_cast<double>(n_cells)) return std::nullopt;
        return static_cast<std::size_t>(s);
    }

    bool operator==(const Grid &) const = default;

private:
    double half_span() const { return 0.5 * static_cast<double>(n_cells - 1); }
};

struct FVState {
    Grid grid;
    std::vector<double> rho;
    double time = 0.0;
    std::size_t step_index = 0;

    double mass() const {
        double s = 0.0;
        for (double r : rho) s += r;
        return s * grid.dx;
    }
    DiscreteMeasure measure() const { return from_cells(grid.x_min, grid.dx, rho); }
};

struct VelocityField {
    std::vector<double> a_cell;
    /// Interface values u_{i-1/2}, i = 0..n (size n + 1); nonlinear route only.
    std::vector<double> s_grad;
    /// nu_i ~ (w * rho)(x_i); nonlinear route only.
    std::vector<double> nu;

    double max_abs() const {
        double m = 0.0;
        for (double a : a_cell) m = std::max(m, std::abs(a));
        return m;
    }
};

/// Largest relative bump mass allowed to fall outside the grid.
inline constexpr double kTruncationTolerance = 1e-6;

/// Cell averages of the initial data, rescaled to unit total mass.
inline FVState project_initial(const InitialData &init, const Grid &grid) {
    init.validate();
    FVState st{grid, std::vector<double>(grid.n_cells, 0.0), 0.0, 0};
    if (init.atomic()) {
        for (const Atom &a : init.atoms) {
            if (a.mass == 0.0) continue;
            const auto cell = grid.locate(a.position);
            if (!cell) throw std::invalid_argument("project_initial: atom outside the grid");
            st.rho[*cell] += a.mass / grid.dx;
        }
    } else {
        using Gauss5 = boost::math::quadrature::gauss<double, 5>;
        const auto f = [&init](double x) { return init.density(x); };
        for (std::size_t i = 0; i < grid.n_cells; ++i) {
            const double c = grid.center(i);
            st.rho[i] = Gauss5::integrate(f, c - 0.5 * grid.dx, c + 0.5 * grid.dx) / grid.dx;
        }
        const double lost = init.raw_mass() - st.mass();
        if (std::abs(lost) > kTruncationTolerance * init.raw_mass())
            throw std::invalid_argument("project_initial: initial support extends outside the grid");
    }
    const double m = st.mass();
    if (!(m > 0.0)) throw std::invalid_argument("project_initial: zero initial mass");
    if (!init.normalize && std::abs(m - 1.0) > 1e-10)
        throw std::invalid_argument("project_initial: initial data must have unit mass");
    for (double &r : st.rho) r /= m;
    return st;
}

/// a_i = sum_{j != i} W'(x_i - x_j) rho_j dx.
inline VelocityField linear_velocity(const FVState &st, const PointyPotential &pot) {
    const std::size_t n = st.grid.n_cells;
    const double dx = st.grid.dx;
    // W' is odd and the grid uniform: a_i = sum_d W'(d dx) (m_{i-d} - m_{i+d}).
    // Mirrored cells then run the same operations with flipped signs.
    std::vector<double> table(n, 0.0), m(n);
    for (std::size_t d = 1; d < n; ++d) table[d] = pot.derivative(static_cast<double>(d) * dx);
    for (std::size_t j = 0; j < n; ++j) m[j] = st.rho[j] * dx;

    VelocityField v;
    v.a_cell.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t d = 1; d < n; ++d) {
            const double left = d <= i ? m[i - d] : 0.0;
            const double right = i + d < n ? m[i + d] : 0.0;
            acc += table[d] * (left - right);
        }
        v.a_cell[i] = acc;
    }
    return v;
}

/**
 * Discrete kernel g_l = w_{k,k+l} for nu_i = sum_k rho_k g_{i-k} dx, satisfying
 * (g_l + g_{l+1}) / 2 = (1/dx) int_{l dx}^{(l+1) dx} w for -K <= l < K.
 * Anchored at g_{-K} = w(-K dx) and mirrored, so g is even like w.
 */
struct NuKernel {
    double dx = 0.0;
    long half_width = 0;             ///< K
    std::vector<double> g;           ///< g[l + K], l in [-K, K]
    std::vector<double> cumulative;  ///< sum_{m <= l} g_m dx, same indexing
    double total = 0.0;              ///< sum_l g_l dx (~ w0)

    double at(long l) const { return (l < -half_width || l > half_width) ? 0.0 : g[static_cast<std::size_t>(l + half_width)]; }
    double cumulative_at(long l) const {
        if (l < -half_width) return 0.0;
        if (l >= half_width) return total;
        return cumulative[static_cast<std::size_t>(l + half_width)];
    }
};

/// Kernel cells with |int w| below this are dropped.
inline constexpr double kKernelTruncation = 1e-14;

inline NuKernel build_nu_kernel(const PointyPotential &pot, const Grid &grid) {
    const Decomposition &dec = pot.require_decomposition();
    const double dx = grid.dx;
    const long cap = 50'000'000;
    auto cell_integral = [&](long l) {
        return dec.integral(static_cast<double>(l) * dx, static_cast<double>(l + 1) * dx);
    };
    // w is even; the left half-line integrals keep their relative accuracy in the tail.
    long K = 0;
    while (K < cap && std::abs(cell_integral(-K - 1)) >= kKernelTruncation) ++K;

    NuKernel ker;
    ker.dx = dx;
    ker.half_width = K;
    ker.g.assign(static_cast<std::size_t>(2 * K + 1), 0.0);
    auto g = [&](long l) -> double & { return ker.g[static_cast<std::size_t>(l + K)]; };
    g(-K) = dec.w(-static_cast<double>(K) * dx);
    for (long l = -K; l < 0; ++l) g(l + 1) = 2.0 * cell_integral(l) / dx - g(l);
    for (long l = 1; l <= K; ++l) g(l) = g(-l);

    ker.cumulative.resize(ker.g.size());
    double s = 0.0;
    for (std::size_t k = 0; k < ker.g.size(); ++k) {
        s += ker.g[k] * dx;
        ker.cumulative[k] = s;
    }
    ker.total = s;
    return ker;
}

struct NuField {
    std::vector<double> nu;
    double left_tail = 0.0;   ///< sum_{k < 0} nu_k dx over cells left of the grid
    double right_tail = 0.0;  ///< same, right of the grid
    double kernel_total = 0.0;
};

/// nu_i = g_0 m_i + sum_{d >= 1} g_d (m_{i-d} + m_{i+d}) with m = rho dx.
inline NuField convolve_nu(const FVState &st, const NuKernel &ker) {
    const std::size_t n = st.grid.n_cells;
    const double dx = st.grid.dx;
    const long K = ker.half_width;
    const long ln = static_cast<long>(n);
    NuField out;
    out.nu.assign(n, 0.0);
    out.kernel_total = ker.total;
    std::vector<double> m(n);
    for (std::size_t j = 0; j < n; ++j) m[j] = st.rho[j] * dx;
    for (long i = 0; i < ln; ++i) {
        double acc = ker.at(0) * m[static_cast<std::size_t>(i)];
        for (long d = 1; d <= std::min(K, ln - 1); ++d) {
            const double left = i - d >= 0 ? m[static_cast<std::size_t>(i - d)] : 0.0;
            const double right = i + d < ln ? m[static_cast<std::size_t>(i + d)] : 0.0;
            acc += ker.at(d) * (left + right);
        }
        out.nu[static_cast<std::size_t>(i)] = acc;
    }
    // Kernel mass falling off either end; the right sum runs from the far end.
    for (long j = 0; j < ln; ++j) out.left_tail += ker.cumulative_at(-1 - j) * m[static_cast<std::size_t>(j)];
    for (long j = ln - 1; j >= 0; --j) out.right_tail += ker.cumulative_at(-1 - (ln - 1 - j)) * m[static_cast<std::size_t>(j)];
    return out;
}

/// u at -infinity for the given mass: (c/2 - kernel_total/2) * mass.
inline double far_left_gradient(const Decomposition &dec, double kernel_total, double mass) {
    return (0.5 * dec.c - 0.5 * kernel_total) * mass;
}

/**
 * Interface values u_{i-1/2}, i = 0..n, with (u_{i+1/2} - u_{i-1/2}) / dx = nu_i - c rho_i
 * and u_{-1/2} = far_left_gradient + left_tail. Evaluated in the balanced form
 *   u_{i-1/2} = (c/2)(R_i - L_i) + (N_i^left - N_i^right)/2,
 * with L, R the mass left/right of the interface and N the nu mass (tails included).
 */
inline std::vector<double> solve_s_gradient(const FVState &st, const PointyPotential &pot, const NuField &nu) {
    const Decomposition &dec = pot.require_decomposition();
    const std::size_t n = st.grid.n_cells;
    const double dx = st.grid.dx;
    std::vector<double> mass_left(n + 1, 0.0), mass_right(n + 1, 0.0), nu_left(n + 1), nu_right(n + 1);
    nu_left[0] = nu.left_tail;
    for (std::size_t i = 0; i < n; ++i) {
        mass_left[i + 1] = mass_left[i] + st.rho[i] * dx;
        nu_left[i + 1] = nu_left[i] + nu.nu[i] * dx;
    }
    nu_right[n] = nu.right_tail;
    for (std::size_t i = n; i-- > 0;) {
        mass_right[i] = mass_right[i + 1] + st.rho[i] * dx;
        nu_right[i] = nu_right[i + 1] + nu.nu[i] * dx;
    }
    std::vector<double> s(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        s[i] = 0.5 * dec.c * (mass_right[i] - mass_left[i]) + 0.5 * (nu_left[i] - nu_right[i]);
    return s;
}

/// Below this gap between interface values the velocity is a at the midpoint.
inline constexpr double kEqualGradientThreshold = 1e-12;

/// (A(u_+) - A(u_-)) / (u_+ - u_-), or a(u) when the two values coincide.
inline double divided_difference(const VelocityLaw &law, double u_minus, double u_plus) {
    if (std::abs(u_plus - u_minus) < kEqualGradientThreshold) return law(0.5 * (u_plus + u_minus));
    return interval_mean(law, u_minus, u_plus);
}

inline VelocityField nonlinear_velocity(const FVState &st, const PointyPotential &pot, const VelocityLaw &law,
                                        const NuKernel &ker) {
    NuField nu = convolve_nu(st, ker);
    VelocityField v;
    v.s_grad = solve_s_gradient(st, pot, nu);
    v.nu = std::move(nu.nu);
    const std::size_t n = st.grid.n_cells;
    v.a_cell.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = divided_difference(law, v.s_grad[i], v.s_grad[i + 1]);
        if (!std::isfinite(a)) throw SchemeError("nonlinear_velocity: non-finite divided difference");
        v.a_cell[i] = a;
    }
    return v;
}

inline VelocityField nonlinear_velocity(const FVState &st, const PointyPotential &pot, const VelocityLaw &law) {
    return nonlinear_velocity(st, pot, law, build_nu_kernel(pot, st.grid));
}

/// Largest admissible CFL number; a little slack for rounding in dt * a / dx.
inline constexpr double kCflSlack = 1e-12;

/**
 * One upwind step, written as
 *   rho_i (1 - r|a_i|) - r (a_{i+1})_- rho_{i+1} + r (a_{i-1})_+ rho_{i-1},  r = dt/dx,
 * so each term is nonnegative under the CFL condition. The outer interfaces
 * carry no flux.
 */
inline FVState step(const FVState &st, const VelocityField &vel, double dt) {
    const std::size_t n = st.grid.n_cells;
    if (vel.a_cell.size() != n) throw std::invalid_argument("step: velocity size mismatch");
    if (!(dt >= 0.0)) throw std::invalid_argument("step: negative time step");
    const double r = dt / st.grid.dx;
    if (r * vel.max_abs() > 1.0 + kCflSlack) throw SchemeError("step: CFL condition violated");

    const auto &a = vel.a_cell;
    const auto &rho = st.rho;
    FVState next{st.grid, std::vector<double>(n, 0.0), st.time + dt, st.step_index + 1};
    for (std::size_t i = 0; i < n; ++i) {
        // Outflow is blocked at the two ends of the grid.
        double out = 0.0;
        if (i + 1 < n) out += std::max(a[i], 0.0);
        if (i > 0) out -= std::min(a[i], 0.0);
        const double from_left = i > 0 ? std::max(a[i - 1], 0.0) * rho[i - 1] : 0.0;
        const double from_right = i + 1 < n ? -std::min(a[i + 1], 0.0) * rho[i + 1] : 0.0;
        next.rho[i] = rho[i] * std::max(0.0, 1.0 - r * out) + r * (from_left + from_right);
    }
    return next;
}

/// dt = gamma dx / a_inf; a_inf == 0 falls back to dt_cap.
inline double cfl_dt(double a_inf, double dx, double gamma,
                     double dt_cap = std::numeric_limits<double>::infinity()) {
    if (!(dx > 0.0) || !(gamma > 0.0 && gamma <= 1.0) || !(a_inf >= 0.0))
        throw std::invalid_argument("cfl_dt: need dx > 0, gamma in (0,1], a_inf >= 0");
    if (a_inf == 0.0) {
        if (!std::isfinite(dt_cap)) throw std::invalid_argument("cfl_dt: zero velocity bound needs a dt cap");
        return dt_cap;
    }
    return std::min(gamma * dx / a_inf, dt_cap);
}

/**
 * max_i [ (u_{i+1/2} - u_{i-1/2}) / dx - nu_i ] / c, i.e. the discrete form of
 * d_x(W' * rho) - w * rho <= 0. Equals max_i(-rho_i) when the S-solve is intact.
 */
inline double entropy_residual(const FVState &st, const VelocityField &vel, const PointyPotential &pot) {
    const Decomposition &dec = pot.require_decomposition();
    const std::size_t n = st.grid.n_cells;
    if (vel.s_grad.size() != n + 1 || vel.nu.size() != n)
        throw std::invalid_argument("entropy_residual: velocity field lacks interface data");
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ((vel.s_grad[i + 1] - vel.s_grad[i]) / st.grid.dx - vel.nu[i]) / dec.c;
        worst = std::max(worst, r);
    }
    return worst;
}

/// Total variation of the cumulative mass M_i = sum_{k <= i} rho_k dx (with M_{-1} = 0).
inline double cumulative_tv(const FVState &st) {
    double tv = 0.0, prev = 0.0, cum = 0.0;
    for (double r : st.rho) {
        cum += r * st.grid.dx;
        tv += std::abs(cum - prev);
        prev = cum;
    }
    return tv;
}

inline std::vector<double> cumulative_tv(std::span<const FVState> states) {
    std::vector<double> out;
    out.reserve(states.size());
    for (const FVState &s : states) {
        if (!(s.grid == states.front().grid)) throw std::invalid_argument("cumulative_tv: grid mismatch");
        out.push_back(cumulative_tv(s));
    }
    return out;
}

inline double first_moment(const FVState &st) {
    double s = 0.0;
    for (std::size_t i = 0; i < st.rho.size(); ++i) s += std::abs(st.grid.center(i)) * st.rho[i];
    return s * st.grid.dx;
}

/// Index range [first, last] of nonzero cells; nullopt for the zero state.
inline std::optional<std::pair<std::size_t, std::size_t>> support(const FVState &st) {
    std::optional<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < st.rho.size(); ++i) {
        if (st.rho[i] == 0.0) continue;
        if (!out) out.emplace(i, i);
        out->second = i;
    }
    return out;
}

struct DiagnosticsRow {
    std::size_t step = 0;
    double time = 0.0;
    double mass = 0.0;
    double min_rho = 0.0;
    double max_abs_a = 0.0;
    double moment1 = 0.0;
    std::size_t support_first = 0;
    std::size_t support_last = 0;
    std::size_t support_cells = 0;
    double tv_cumulative = 0.0;
    double entropy_residual = std::numeric_limits<double>::quiet_NaN();  ///< nonlinear runs only
    double dt = 0.0;  ///< step taken from this level (0 at the final level)
};

struct DiagnosticsReport {
    double a_inf = 0.0;
    double dt_cfl = 0.0;
    std::vector<DiagnosticsRow> rows;
};

struct Snapshot {
    double time = 0.0;
    FVState state;
    DiscreteMeasure measure;
};

struct RunResult {
    std::vector<Snapshot> snapshots;
    DiagnosticsReport diagnostics;
};

struct RunOptions {
    VelocityMode mode = VelocityMode::linear;
    double t_end = 0.0;
    double gamma = 0.9;
    std::vector<double> sample_times;
    /// Abort when mass within boundary_cells of either end exceeds boundary_mass_tol.
    std::size_t boundary_cells = 5;
    double boundary_mass_tol = 1e-8;
};

/// Velocities for one time level, dispatching on the mode.
class VelocitySolver {
public:
    VelocitySolver(const PointyPotential &pot, const VelocityLaw &law, VelocityMode mode, const Grid &grid)
        : pot_(pot), law_(law), mode_(mode) {
        if (mode_ == VelocityMode::nonlinear) kernel_ = build_nu_kernel(pot_, grid);
    }

    VelocityField operator()(const FVState &st) const {
        if (mode_ == VelocityMode::linear) return linear_velocity(st, pot_);
        return nonlinear_velocity(st, pot_, law_, *kernel_);
    }

    VelocityMode mode() const { return mode_; }

private:
    const PointyPotential &pot_;
    const VelocityLaw &law_;
    VelocityMode mode_;
    std::optional<NuKernel> kernel_;
};

inline DiagnosticsRow diagnose(const FVState &st, const VelocityField &vel, const PointyPotential &pot,
                               VelocityMode mode) {
    DiagnosticsRow row;
    row.step = st.step_index;
    row.time = st.time;
    row.mass = st.mass();
    row.min_rho = st.rho.empty() ? 0.0 : *std::min_element(st.rho.begin(), st.rho.end());
    row.max_abs_a = vel.max_abs();
    row.moment1 = first_moment(st);
    if (auto sup = support(st)) {
        row.support_first = sup->first;
        row.support_last = sup->second;
        row.support_cells = sup->second - sup->first + 1;
    }
    row.tv_cumulative = cumulative_tv(st);
    if (mode == VelocityMode::nonlinear) row.entropy_residual = entropy_residual(st, vel, pot);
    return row;
}

/**
 * Advances state0 to opts.t_end with dt = gamma dx / a_inf, shortening steps to
 * land exactly on each sample time. Snapshots are taken at every sample time in
 * [0, t_end] and at t_end itself.
 */
inline RunResult run(const FVState &state0, const PointyPotential &pot, const VelocityLaw &law,
                     const RunOptions &opts) {
    if (!(opts.t_end >= 0.0)) throw std::invalid_argument("run: t_end must be nonnegative");
    if (opts.mode == VelocityMode::nonlinear) pot.require_decomposition();

    std::vector<double> samples;
    for (double t : opts.sample_times)
        if (t >= 0.0 && t <= opts.t_end) samples.push_back(t);
    samples.push_back(opts.t_end);
    std::sort(samples.begin(), samples.end());
    samples.erase(std::unique(samples.begin(), samples.end()), samples.end());

    RunResult out;
    auto &diag = out.diagnostics;
    diag.a_inf = velocity_sup_bound(pot, law, opts.mode);
    const double span = std::max(opts.t_end, 1.0);
    diag.dt_cfl = cfl_dt(diag.a_inf, state0.grid.dx, opts.gamma, span);

    const VelocitySolver velocity(pot, law, opts.mode, state0.grid);
    const std::size_t n = state0.grid.n_cells;
    const std::size_t edge = std::min(opts.boundary_cells, n / 2);
    auto check_state = [&](const FVState &st) {
        double boundary_mass = 0.0;
        for (std::size_t i = 0; i < edge; ++i) boundary_mass += (st.rho[i] + st.rho[n - 1 - i]) * st.grid.dx;
        for (double r : st.rho)
            if (!std::isfinite(r)) throw SchemeError("run: non-finite density");
        if (boundary_mass > opts.boundary_mass_tol)
            throw SchemeError("run: mass reached the grid boundary; enlarge the domain");
    };

    FVState st = state0;
    check_state(st);
    std::size_t next_sample = 0;
    const double eps = 1e-12 * span;
    while (true) {
        const VelocityField vel = velocity(st);
        diag.rows.push_back(diagnose(st, vel, pot, opts.mode));
        while (next_sample < samples.size() && samples[next_sample] <= st.time + eps) {
            out.snapshots.push_back({samples[next_sample], st, st.measure()});
            ++next_sample;
        }
        if (next_sample == samples.size()) break;

        const double target = samples[next_sample];
        double dt = diag.dt_cfl;
        bool land = false;
        if (st.time + dt >= target - eps) {
            dt = target - st.time;
            land = true;
        }
        diag.rows.back().dt = dt;
        st = step(st, vel, dt);
        if (land) st.time = target;
        check_state(st);
    }
    return out;
}

}  // namespace aggr::fv
