// Figure-ready tables behind the command-line tool.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <vector>

#include "invariant_measure.hpp"
#include "io.hpp"
#include "lyapunov.hpp"
#include "pade_stieltjes.hpp"
#include "schrodinger.hpp"
#include "simulate.hpp"

namespace rmprod::tables
{
using io::Json;
using io::Table;

inline constexpr double nan = std::numeric_limits<double>::quiet_NaN();

inline Json to_json(ModelParams const& q)
{
    return Json{{"p", q.p}, {"s", q.s}, {"alpha", q.alpha}};
}

inline Json to_json(QuadratureConfig const& cfg)
{
    return Json{{"abs_tol", cfg.abs_tol},
                {"rel_tol", cfg.rel_tol},
                {"max_refinements", cfg.max_refinements}};
}

//---------------------------------------------------------------------------//
// Density
//---------------------------------------------------------------------------//
struct DensityGrid
{
    int r_cells = 240;      //!< log-spaced radial cells (also x cells at alpha=0)
    int theta_cells = 128;  //!< angular cells across (-|alpha|, |alpha|)
    double r_min = 1e-3;
    double r_max = 1e3;
    int y_cells = 960;      //!< axis cells, y = sinh(u)
    double u_max = 12;
};

namespace detail
{
inline void check_grid(DensityGrid const& g)
{
    if (g.r_cells < 2 || g.theta_cells < 2 || g.y_cells < 2)
        throw PreconditionError("density grids need at least 2 cells");
    if (!(g.r_min > 0) || !(g.r_max > g.r_min))
        throw PreconditionError("need 0 < r_min < r_max");
    if (!(g.u_max > 0))
        throw PreconditionError("axis grid half-width must be positive");
}
}  // namespace detail

//! Bands of |theta| in [0, pi/2] used to report where the angular mass sits.
inline constexpr int theta_bands = 4;

/*!
 * Density sampled at cell midpoints.  In the cone, cells are uniform in ln r
 * and in v with theta = |alpha| sin(pi v / 2), which packs cells towards the
 * edges where the density can be sharply peaked; a cell carries mass
 * f r^2 du dtheta.  The axis grid is uniform in u with y = sinh u, and the
 * half-line grid uniform in ln x.  The metadata holds the Riemann-sum mass,
 * the quadrature mass, and which of the |theta| bands of [0, pi/2] holds
 * the highest density and the most mass.
 */
inline Table density_table(ModelParams const& params, DensityGrid const& g,
                           QuadratureConfig const& cfg)
{
    params.validate();
    detail::check_grid(g);
    Table t;
    t.meta = {{"command", "density"},
              {"params", to_json(params)},
              {"grid",
               {{"r_cells", g.r_cells},
                {"theta_cells", g.theta_cells},
                {"theta_map", "abs(alpha) sin(pi v / 2)"},
                {"r_min", g.r_min},
                {"r_max", g.r_max},
                {"y_cells", g.y_cells},
                {"u_max", g.u_max}}},
              {"quadrature", to_json(cfg)}};
    double grid_mass = 0, quad_mass = 0;
    if (params.on_axis())
    {
        t.columns = {"y", "f"};
        AxisDensity f(params, cfg);
        double const du = 2 * g.u_max / g.y_cells;
        for (int i = 0; i < g.y_cells; ++i)
        {
            double u = -g.u_max + (i + 0.5) * du;
            double y = std::sinh(u);
            double v = f(y);
            grid_mass += v * std::cosh(u) * du;
            t.add_row({y, v});
        }
        quad_mass = f.integrate([](double) { return 1.0; }, cfg);
    }
    else if (params.on_half_line())
    {
        t.columns = {"x", "f"};
        GigDensity f(params.p, params.s, cfg);
        double const lo = std::log(g.r_min), du = std::log(g.r_max / g.r_min)
                                                      / g.r_cells;
        for (int i = 0; i < g.r_cells; ++i)
        {
            double x = std::exp(lo + (i + 0.5) * du);
            double v = f(x);
            grid_mass += v * x * du;
            t.add_row({x, v});
        }
        quad_mass = f.integrate([](double) { return 1.0; }, cfg);
    }
    else
    {
        t.columns = {"r", "theta", "f"};
        ConeDensity f(params, cfg);
        double const a = std::abs(params.alpha);
        double const lo = std::log(g.r_min), du = std::log(g.r_max / g.r_min)
                                                      / g.r_cells;
        double const dv = 2.0 / g.theta_cells;
        std::vector<double> theta(g.theta_cells), dth(g.theta_cells);
        for (int j = 0; j < g.theta_cells; ++j)
        {
            double v = -1 + (j + 0.5) * dv;
            theta[j] = a * std::sin(half_pi * v);
            dth[j] = a * half_pi * std::cos(half_pi * v) * dv;
        }
        std::vector<double> band(theta_bands, 0.0);
        auto band_of = [](double th) {
            return std::min(theta_bands - 1,
                            static_cast<int>(std::abs(th) / half_pi
                                             * theta_bands));
        };
        double fmax = -1, theta_fmax = 0;
        for (int i = 0; i < g.r_cells; ++i)
        {
            double r = std::exp(lo + (i + 0.5) * du);
            for (int j = 0; j < g.theta_cells; ++j)
            {
                double v = f(ConePoint{r, theta[j]});
                double m = v * r * r * du * dth[j];
                grid_mass += m;
                band[band_of(theta[j])] += m;
                if (v > fmax)
                {
                    fmax = v;
                    theta_fmax = theta[j];
                }
                t.add_row({r, theta[j], v});
            }
        }
        quad_mass = f.integrate([](ComplexValue) { return 1.0; }, cfg);
        t.meta["theta_of_max_density"] = theta_fmax;
        t.meta["band_of_max_density"] = band_of(theta_fmax);
        t.meta["band_mass"] = band;
        t.meta["band_of_max_mass"] = static_cast<int>(
            std::max_element(band.begin(), band.end()) - band.begin());
    }
    t.meta["grid_mass"] = grid_mass;
    t.meta["quadrature_mass"] = quad_mass;
    return t;
}

//---------------------------------------------------------------------------//
// Lyapunov exponent and its approximations
//---------------------------------------------------------------------------//
struct LyapunovOptions
{
    int small_s_order = 5;
    int pade_degree = 16;          //!< [d/d] from the order-2d series
    double small_s_limit = 0.5;    //!< small_s_applicable when s <= this
    double large_s_limit = 5;      //!< large_s_applicable when s >= this
};

/*!
 * One row per (p, s, alpha).  The large-s column uses the two-term law
 * (logarithm, digamma and the leading remainder).  Approximations that
 * cannot be formed (Pade pole or singular table) are written as NaN with
 * the flag cleared.
 */
inline Table lyapunov_table(std::vector<double> const& ps,
                            std::vector<double> const& ss,
                            std::vector<double> const& alphas,
                            LyapunovOptions const& o,
                            QuadratureConfig const& cfg)
{
    if (ps.empty() || ss.empty() || alphas.empty())
        throw PreconditionError("empty parameter grid");
    if (o.pade_degree < 1 || 2 * o.pade_degree > 64)
        throw PreconditionError("Pade degree must lie in 1..32");
    Table t;
    t.meta = {{"command", "lyapunov"},
              {"p", ps},
              {"s", ss},
              {"alpha", alphas},
              {"small_s_order", o.small_s_order},
              {"pade", {o.pade_degree, o.pade_degree}},
              {"small_s_limit", o.small_s_limit},
              {"large_s_limit", o.large_s_limit},
              {"quadrature", to_json(cfg)}};
    t.columns = {"p",       "s",        "alpha",   "exact",
                 "small_s", "large_s",  "pade",    "small_s_applicable",
                 "large_s_applicable",  "pade_ok"};
    for (double p : ps)
        for (double a : alphas)
        {
            // the series coefficients depend on (p, alpha) only
            ModelParams base{p, 1, a};
            auto small = asympt_small_s(base, o.small_s_order).series;
            auto gen = asympt_small_s(base, 2 * o.pade_degree).series;
            for (double s : ss)
            {
                ModelParams q{p, s, a};
                double ex = lyapunov_exact(q, cfg).value;
                double sm = small.evaluate(s);
                double lg = asympt_large_s(q, 2).value.value;
                double pd = nan;
                bool pade_ok = true;
                try
                {
                    pd = pade_resum(gen, s, o.pade_degree, o.pade_degree).value;
                }
                catch (PoleError const&)
                {
                    pade_ok = false;
                }
                catch (DegenerateTableError const&)
                {
                    pade_ok = false;
                }
                t.add_row({p, s, a, ex, sm, lg, pd, s <= o.small_s_limit,
                           s >= o.large_s_limit, pade_ok});
            }
        }
    return t;
}

//---------------------------------------------------------------------------//
// Simulation
//---------------------------------------------------------------------------//
/*!
 * Run `work(stream_id)` for ids 0..streams-1 on worker threads and return the
 * results in stream order, so the merged output does not depend on
 * scheduling.
 */
template<class R, class Work>
std::vector<R> run_streams(int streams, Work&& work)
{
    if (streams < 1)
        throw PreconditionError("need at least one stream");
    std::vector<R> out(streams);
    std::vector<std::exception_ptr> errors(streams);
    std::vector<std::thread> pool;
    for (int k = 0; k < streams; ++k)
        pool.emplace_back([&, k] {
            try
            {
                out[k] = work(static_cast<std::uint64_t>(k));
            }
            catch (...)
            {
                errors[k] = std::current_exception();
            }
        });
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

inline Json to_json(EstimateWithError const& e)
{
    return Json{{"value", e.value},
                {"std_error", e.std_error},
                {"n_samples", e.n_samples}};
}

//! Furstenberg and ergodic estimates per stream plus their merge.
inline Table simulate_estimates(ModelParams const& params, long long n,
                                long long burn_in, int streams,
                                std::uint64_t seed,
                                QuadratureConfig const& cfg)
{
    params.validate();
    struct Pair
    {
        EstimateWithError product, chain;
    };
    auto per = run_streams<Pair>(streams, [&](std::uint64_t id) {
        RngStream a(seed, 2 * id), b(seed, 2 * id + 1);
        return Pair{furstenberg_estimate(params, n, a),
                    ergodic_estimate(params, n, b, burn_in)};
    });
    double ex = lyapunov_exact(params, cfg).value;
    Table t;
    t.columns = {"stream", "method", "estimate", "std_error", "n", "exact",
                 "z"};
    EstimateWithError mp, mc;
    auto add = [&](Json stream, char const* method,
                   EstimateWithError const& e) {
        t.add_row({stream, method, e.value, e.std_error, e.n_samples, ex,
                   (e.value - ex) / e.std_error});
    };
    for (int k = 0; k < streams; ++k)
    {
        add(k, "product", per[k].product);
        add(k, "chain", per[k].chain);
        mp = mp.merge(per[k].product);
        mc = mc.merge(per[k].chain);
    }
    add("merged", "product", mp);
    add("merged", "chain", mc);
    t.meta = {{"command", "simulate"},
              {"mode", "estimate"},
              {"params", to_json(params)},
              {"n", n},
              {"burn_in", burn_in},
              {"streams", streams},
              {"seed", seed},
              {"quadrature", to_json(cfg)}};
    return t;
}

//! Histogram of the chain pooled over streams, next to the exact density.
inline Table simulate_histogram(ModelParams const& params, long long n,
                                long long burn_in, int streams,
                                std::uint64_t seed, DensityGrid const& g,
                                QuadratureConfig const& cfg)
{
    params.validate();
    detail::check_grid(g);
    if (params.on_half_line())
        throw PreconditionError("histogram mode needs alpha != 0");
    HistogramGrid hg;
    bool const axis = params.on_axis();
    if (axis)
    {
        for (int i = 0; i <= g.y_cells; ++i)
            hg.first_edges.push_back(
                std::sinh(-g.u_max + 2 * g.u_max * i / g.y_cells));
    }
    else
    {
        double a = std::abs(params.alpha);
        for (int i = 0; i <= g.r_cells; ++i)
            hg.first_edges.push_back(
                g.r_min * std::pow(g.r_max / g.r_min, double(i) / g.r_cells));
        for (int j = 0; j <= g.theta_cells; ++j)
            hg.second_edges.push_back(-a + 2 * a * j / g.theta_cells);
    }
    auto per = run_streams<Histogram>(streams, [&](std::uint64_t id) {
        RngStream rng(seed, id);
        return empirical_measure(params, n, burn_in, hg, rng);
    });
    std::vector<double> mass(per[0].mass.size(), 0.0);
    double outside = 0;
    for (auto const& h : per)
    {
        for (std::size_t i = 0; i < mass.size(); ++i)
            mass[i] += h.mass[i] / streams;
        outside += h.outside / streams;
    }
    Table t;
    t.meta = {{"command", "simulate"},
              {"mode", "histogram"},
              {"params", to_json(params)},
              {"n", n},
              {"burn_in", burn_in},
              {"streams", streams},
              {"seed", seed},
              {"outside_fraction", outside},
              {"quadrature", to_json(cfg)}};
    if (axis)
    {
        AxisDensity f(params, cfg);
        t.columns = {"y_lo", "y_hi", "empirical", "exact"};
        for (std::size_t i = 0; i + 1 < hg.first_edges.size(); ++i)
        {
            double lo = hg.first_edges[i], hi = hg.first_edges[i + 1];
            double w = hi - lo;
            t.add_row({lo, hi, mass[i] / w, f(0.5 * (lo + hi))});
        }
    }
    else
    {
        ConeDensity f(params, cfg);
        t.columns = {"r_lo", "r_hi", "theta_lo", "theta_hi", "empirical",
                     "exact"};
        std::size_t nb2 = hg.second_edges.size() - 1;
        for (std::size_t i = 0; i + 1 < hg.first_edges.size(); ++i)
            for (std::size_t j = 0; j < nb2; ++j)
            {
                double r0 = hg.first_edges[i], r1 = hg.first_edges[i + 1];
                double t0 = hg.second_edges[j], t1 = hg.second_edges[j + 1];
                double area = 0.5 * (r1 * r1 - r0 * r0) * (t1 - t0);
                double rm = std::sqrt(r0 * r1);
                t.add_row({r0, r1, t0, t1, mass[i * nb2 + j] / area,
                           f(ConePoint{rm, 0.5 * (t0 + t1)})});
            }
    }
    return t;
}

//---------------------------------------------------------------------------//
// Schrodinger and Stieltjes fractions
//---------------------------------------------------------------------------//
//! Localisation rates; with n > 0 also the simulated growth rate.
inline Table schrodinger_table(std::vector<double> const& ps,
                               std::vector<double> const& ss, long long n,
                               int streams, std::uint64_t seed,
                               QuadratureConfig const& cfg)
{
    Table t;
    t.meta = {{"command", "schrodinger"},
              {"energy", 2},
              {"p", ps},
              {"s", ss},
              {"n", n},
              {"streams", streams},
              {"seed", seed},
              {"spectrum_note", LocalizationResult{}.spectrum_note},
              {"quadrature", to_json(cfg)}};
    t.columns = {"p", "s", "rate", "mc_slope", "mc_stderr"};
    std::uint64_t block = 0;
    for (double p : ps)
        for (double s : ss)
        {
            double rate = localization_rate(p, s, cfg).rate;
            double slope = nan, se = nan;
            if (n > 0)
            {
                std::uint64_t base = block * streams;
                auto per = run_streams<EstimateWithError>(
                    streams, [&](std::uint64_t id) {
                        RngStream rng(seed, base + id);
                        return wavefunction_growth(p, s, n, rng);
                    });
                EstimateWithError m;
                for (auto const& e : per)
                    m = m.merge(e);
                slope = m.value;
                se = m.std_error;
            }
            ++block;
            t.add_row({p, s, rate, slope, se});
        }
    return t;
}

inline Table pade_table(double p, double sigma, ComplexValue t_arg, int n_max,
                        int reps, std::uint64_t seed,
                        QuadratureConfig const& cfg)
{
    RngStream rng(seed, 0);
    auto est = rate_estimate(p, sigma, t_arg, n_max, reps, rng, cfg);
    Table t;
    t.meta = {{"command", "pade"},
              {"p", p},
              {"sigma", sigma},
              {"t", {t_arg.real(), t_arg.imag()}},
              {"n_max", n_max},
              {"reps", reps},
              {"seed", seed},
              {"chain_params", to_json(stieltjes_chain_params(p, sigma, t_arg))},
              {"slope", est.slope.value},
              {"slope_std_error", est.slope.std_error},
              {"target", est.target},
              {"min_r2", est.min_r2},
              {"noisy_fit", est.noisy},
              {"quadrature", to_json(cfg)}};
    t.columns = {"n", "mean_log_error"};
    for (int n = 1; n <= n_max; ++n)
        t.add_row({n, est.mean_log_error[n]});
    return t;
}

}  // namespace rmprod::tables
