// The acceptance suite: every closed form against an independent route.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "io.hpp"
#include "invariant_measure.hpp"
#include "lyapunov.hpp"
#include "pade_stieltjes.hpp"
#include "schrodinger.hpp"
#include "simulate.hpp"
#include "special_functions.hpp"

namespace rmprod::verify
{
using io::Json;

struct CheckResult
{
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    Json metrics = Json::object();
    double elapsed_s = 0;
};

struct Options
{
    //! Multiplies every normalisation constant (fault injection).
    double normalization_scale = 1;
    std::uint64_t seed = 1;
    std::vector<int> only;  //!< empty = all checks
    QuadratureConfig cfg;
};

inline constexpr int check_count = 13;

namespace detail
{
inline std::vector<double> const& grid_p() { static std::vector<double> v{0.5, 1, 2.5}; return v; }
inline std::vector<double> const& grid_s() { static std::vector<double> v{0.5, 1, 2}; return v; }
inline std::vector<double> const& grid_alpha()
{
    static std::vector<double> v{pi / 20, pi / 6, pi / 3, 9 * pi / 20};
    return v;
}

inline std::string fmt(char const* f, double a, double b = 0, double c = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

//! Tracks the worst case over a loop and the first failing triple.
struct Worst
{
    double value = 0;
    Json where = nullptr;
    void update(double v, Json w)
    {
        if (!(v <= value))
        {
            value = v;
            where = std::move(w);
        }
    }
};

inline Json triple(ModelParams const& q)
{
    return Json{{"p", q.p}, {"s", q.s}, {"alpha", q.alpha}};
}

//---------------------------------------------------------------------------//
inline void check_normalization(CheckResult& r, Options const& o)
{
    Worst cone, axis;
    for (double p : grid_p())
        for (double s : grid_s())
        {
            for (double a : grid_alpha())
            {
                ModelParams q{p, s, a};
                ConeDensity f(q, o.cfg, o.normalization_scale);
                double m = f.integrate([](ComplexValue) { return 1.0; }, o.cfg);
                cone.update(std::abs(m - 1), triple(q));
            }
            ModelParams q{p, s, half_pi};
            AxisDensity f(q, o.cfg, o.normalization_scale);
            double m = f.integrate([](double) { return 1.0; }, o.cfg);
            axis.update(std::abs(m - 1), triple(q));
        }
    r.metrics = {{"max_cone_mass_error", cone.value},
                 {"worst_cone", cone.where},
                 {"max_axis_mass_error", axis.value},
                 {"worst_axis", axis.where},
                 {"tolerance", 1e-6}};
    r.passed = cone.value <= 1e-6 && axis.value <= 1e-6;
    r.detail = fmt("max |mass - 1|: cone %.2e, axis %.2e (tol 1e-6)",
                   cone.value, axis.value);
}

inline void check_lyapunov_agreement(CheckResult& r, Options const& o)
{
    Worst meas, integ;
    for (double p : grid_p())
        for (double s : grid_s())
        {
            std::vector<double> alphas = grid_alpha();
            alphas.push_back(half_pi);
            for (double a : alphas)
            {
                ModelParams q{p, s, a};
                double ex = lyapunov_exact(q, o.cfg).value;
                double lm;
                if (q.on_axis())
                    lm = lyapunov_from_measure(AxisDensity(q, o.cfg),
                                               MeasureCase::row_bottom_random,
                                               o.cfg)
                             .value;
                else
                    lm = lyapunov_from_measure(ConeDensity(q, o.cfg),
                                               MeasureCase::row_bottom_random,
                                               o.cfg)
                             .value;
                meas.update(std::abs(ex - lm), triple(q));
            }
        }
    for (int n = 1; n <= 5; ++n)
        for (double s : grid_s())
        {
            std::vector<double> alphas = grid_alpha();
            alphas.push_back(0);
            alphas.push_back(half_pi);
            for (double a : alphas)
            {
                ModelParams q{double(n), s, a};
                double ex = lyapunov_exact(q, o.cfg).value;
                double li = lyapunov_integer(n, s, a, o.cfg).value;
                integ.update(std::abs(ex - li), triple(q));
            }
        }
    r.metrics = {{"max_exact_vs_measure", meas.value},
                 {"worst_measure", meas.where},
                 {"max_exact_vs_integer", integ.value},
                 {"worst_integer", integ.where}};
    r.passed = meas.value < 1e-6 && integ.value < 1e-9;
    r.detail = fmt("exact vs measure %.2e (tol 1e-6); exact vs integer "
                   "%.2e (tol 1e-9)",
                   meas.value, integ.value);
}

inline void check_monte_carlo(CheckResult& r, Options const& o)
{
    ModelParams const triples[] = {{1, 1, 0},   {1, 1, pi / 6},
                                   {1, 1, half_pi}, {2, 0.5, 0},
                                   {2, 0.5, pi / 6}, {2, 0.5, half_pi}};
    bool ok = true;
    double worst_z = 0, worst_se = 0, worst_time = 0;
    Json rows = Json::array();
    std::uint64_t stream = 0;
    for (auto const& q : triples)
    {
        auto t0 = std::chrono::steady_clock::now();
        RngStream rng(o.seed, stream++);
        auto est = furstenberg_estimate(q, 1000000, rng);
        double dt = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
        double ex = lyapunov_exact(q, o.cfg).value;
        double z = std::abs(est.value - ex) / est.std_error;
        ok = ok && z < 4 && est.std_error < 5e-3 && dt < 30;
        worst_z = std::max(worst_z, z);
        worst_se = std::max(worst_se, est.std_error);
        worst_time = std::max(worst_time, dt);
        rows.push_back({{"params", triple(q)},
                        {"estimate", est.value},
                        {"std_error", est.std_error},
                        {"exact", ex},
                        {"z", z}});
    }
    r.metrics = {{"triples", rows}, {"max_z", worst_z},
                 {"max_std_error", worst_se}};
    r.passed = ok;
    r.detail = fmt("max |z| %.2f (< 4), max std error %.2e (< 5e-3), "
                   "slowest triple %.1f s",
                   worst_z, worst_se, worst_time);
}

inline void check_small_s(CheckResult& r, Options const&)
{
    double worst_rel = 0, worst_odd = 0;
    for (double p : {1.0, 2.0, 3.5})
        for (double a : {0.0, pi / 4, half_pi})
        {
            auto table = small_s_table(p, a);
            auto gen = small_s_generated(p, a, 5);
            for (int k = 1; k <= 5; ++k)
            {
                if (a == half_pi && k % 2 == 1)
                {
                    worst_odd = std::max(worst_odd, std::abs(gen[k]));
                    continue;
                }
                double rel = std::abs(gen[k] - table[k])
                             / std::max(std::abs(table[k]), 1e-300);
                worst_rel = std::max(worst_rel, rel);
            }
        }
    r.metrics = {{"max_relative_difference", worst_rel},
                 {"max_odd_at_half_pi", worst_odd}};
    r.passed = worst_rel <= 1e-10 && worst_odd <= 1e-12;
    r.detail = fmt("generator vs table %.2e (tol 1e-10); odd terms at pi/2 "
                   "%.2e (tol 1e-12)",
                   worst_rel, worst_odd);
}

inline void check_large_s(CheckResult& r, Options const& o)
{
    bool ok = true;
    Json rows = Json::array();
    std::string detail;
    for (double a : {0.0, pi / 3})
    {
        ModelParams q{3, 1e3, a};
        double lam = lyapunov_exact(q, o.cfg).value;
        double term = std::cos(2 * a) / (4 * q.s * q.s);
        double resid = lam - std::log(q.s) - digamma(3) - term;
        double bound = term != 0 ? 0.3 * std::abs(term) : 1e-7;
        ok = ok && std::abs(resid) < bound;
        rows.push_back({{"alpha", a},
                        {"residual", resid},
                        {"bound", bound},
                        {"term", term}});
        detail += (detail.empty() ? "" : "; ")
                  + fmt("alpha %.3f: |residual| %.2e < %.2e", a,
                        std::abs(resid), bound);
    }
    r.metrics = {{"cases", rows}};
    r.passed = ok;
    r.detail = detail;
}

inline void check_weak_limits(CheckResult& r, Options const& o)
{
    auto g1 = [](ComplexValue z) { return std::exp(-std::abs(z)); };
    auto g2 = [](ComplexValue z) { return 1.0 / (1.0 + std::norm(z)); };
    std::function<double(ComplexValue)> gs[] = {g1, g2};
    bool ok = true;
    Json rows = Json::array();
    double worst_err = 0, worst_ratio = 1e300;
    for (auto ps : {std::pair{1.0, 1.0}, std::pair{2.5, 0.5}})
    {
        double const p = ps.first, s = ps.second;
        GigDensity f0(p, s, o.cfg);
        AxisDensity fa({p, s, half_pi}, o.cfg);
        for (int gi = 0; gi < 2; ++gi)
        {
            auto const& g = gs[gi];
            double ref0 = f0.integrate([&](double x) { return g(x); }, o.cfg);
            double ref1 = fa.integrate(
                [&](double y) { return g(ComplexValue(0, y)); }, o.cfg);
            auto dev = [&](double alpha, double ref) {
                ConeDensity f({p, s, alpha}, o.cfg);
                return std::abs(f.integrate(g, o.cfg) - ref);
            };
            double e0_2 = dev(1e-2, ref0), e0_3 = dev(1e-3, ref0);
            double e1_2 = dev(half_pi - 1e-2, ref1),
                   e1_3 = dev(half_pi - 1e-3, ref1);
            for (auto [lim, e2, e3] : {std::tuple{"alpha->0", e0_2, e0_3},
                                      std::tuple{"alpha->pi/2", e1_2, e1_3}})
            {
                double ratio = e2 / e3;
                ok = ok && e3 < 1e-2 && ratio >= 5;
                worst_err = std::max(worst_err, e3);
                worst_ratio = std::min(worst_ratio, ratio);
                rows.push_back({{"p", p},
                                {"s", s},
                                {"g", gi == 0 ? "exp(-|z|)" : "1/(1+|z|^2)"},
                                {"limit", lim},
                                {"error_at_1e-2", e2},
                                {"error_at_1e-3", e3},
                                {"shrink", ratio}});
            }
        }
    }
    r.metrics = {{"cases", rows}};
    r.passed = ok;
    r.detail = fmt("max error at distance 1e-3: %.2e (< 1e-2); min shrink "
                   "per decade %.1fx (>= 5)",
                   worst_err, worst_ratio);
}

inline void check_residuals(CheckResult& r, Options const& o)
{
    ModelParams const cone_sets[] = {{1, 1, pi / 6}, {3, 0.5, pi / 3},
                                     {0.5, 2, pi / 20}, {2.5, 1, 9 * pi / 20}};
    ModelParams const axis_sets[] = {{1, 1, half_pi}, {2, 0.5, -half_pi},
                                     {0.5, 2, half_pi}, {3, 1, half_pi}};
    RngStream rng(o.seed, 100);
    double worst_cone = 0, worst_axis = 0;
    for (auto const& q : cone_sets)
        for (int i = 0; i < 20; ++i)
        {
            double r0 = std::exp(-2 + 4 * rng.uniform());
            double th = (2 * rng.uniform() - 1) * 0.95 * std::abs(q.alpha);
            double res = stationary_residual(q, {r0, th}, o.cfg);
            worst_cone = std::max(worst_cone, res);
        }
    for (auto const& q : axis_sets)
        for (int i = 0; i < 20; ++i)
        {
            double y = 0;
            while (y == 0)
                y = 10 * rng.uniform() - 5;
            double res = axis_stationary_residual(q, y, o.cfg);
            worst_axis = std::max(worst_axis, res);
        }
    r.metrics = {{"max_cone_residual", worst_cone},
                 {"max_axis_residual", worst_axis}};
    r.passed = worst_cone < 1e-6 && worst_axis < 1e-6;
    r.detail = fmt("max residual: cone %.2e, axis %.2e (tol 1e-6)",
                   worst_cone, worst_axis);
}

inline void check_macdonald(CheckResult& r, Options const& o)
{
    RngStream rng(o.seed, 200);
    double worst_prod = 0, worst_cross = 0;
    for (int i = 0; i < 10; ++i)
    {
        double p = 5 * rng.uniform();
        ComplexValue u = std::polar(0.5 + 3.5 * rng.uniform(),
                                    (2 * rng.uniform() - 1) * pi / 5);
        ComplexValue v = std::polar(0.5 + 3.5 * rng.uniform(),
                                    (2 * rng.uniform() - 1) * pi / 5);
        ComplexValue ku = bessel_k(p, u, o.cfg), kv = bessel_k(p, v, o.cfg);
        ComplexValue prod = ku * kv;
        ComplexValue direct_m1
            = macdonald_integral_direct({p, -1, u, v}, o.cfg);
        worst_prod
            = std::max(worst_prod, std::abs(direct_m1 - prod) / std::abs(prod));
        ComplexValue cross = u * bessel_k(p + 1, u, o.cfg) * kv
                             + v * bessel_k(p + 1, v, o.cfg) * ku
                             - 2 * p * prod;
        ComplexValue direct_0 = macdonald_integral_direct({p, 0, u, v}, o.cfg);
        ComplexValue closed_0 = macdonald_integral({p, 0, u, v}, o.cfg);
        double scale = std::abs(prod);
        worst_cross = std::max({worst_cross,
                                std::abs(direct_0 - cross) / scale,
                                std::abs(closed_0 - cross) / scale});
    }
    r.metrics = {{"max_product_identity", worst_prod},
                 {"max_cross_product_identity", worst_cross}};
    r.passed = worst_prod < 1e-8 && worst_cross < 1e-8;
    r.detail = fmt("relative defect: n=-1 product %.2e, n=0 cross product "
                   "%.2e (tol 1e-8)",
                   worst_prod, worst_cross);
}

inline void check_moments(CheckResult& r, Options const& o)
{
    bool ok = true;
    double worst = 0;
    Json rows = Json::array();
    std::uint64_t stream = 300;
    for (auto const& q : {ModelParams{1, 1, pi / 6}, ModelParams{2, 0.5, pi / 3}})
    {
        RngStream rng(o.seed, stream++);
        auto m = chain_moments(q, 1000000, rng);
        ComplexValue mean = mean_closed_form(q, o.cfg);
        double var = variance_closed_form(q, o.cfg);
        double z_re = std::abs(m.mean_re.value - mean.real()) / m.mean_re.std_error;
        double z_im = std::abs(m.mean_im.value - mean.imag()) / m.mean_im.std_error;
        double z_var = std::abs(m.variance.value - var) / m.variance.std_error;
        ok = ok && z_re < 4 && z_im < 4 && z_var < 4;
        worst = std::max({worst, z_re, z_im, z_var});
        rows.push_back({{"params", triple(q)},
                        {"mean_mc", {m.mean_re.value, m.mean_im.value}},
                        {"mean_exact", {mean.real(), mean.imag()}},
                        {"variance_mc", m.variance.value},
                        {"variance_exact", var},
                        {"z", {z_re, z_im, z_var}}});
    }
    r.metrics = {{"cases", rows}, {"max_z", worst}};
    r.passed = ok;
    r.detail = fmt("max |z| over mean and variance %.2f (< 4)", worst);
}

inline void check_schrodinger(CheckResult& r, Options const& o)
{
    bool ok = true;
    double worst = 0;
    Json rows = Json::array();
    std::uint64_t stream = 400;
    for (auto ps : {std::pair{1.0, 1.0}, std::pair{2.0, 0.5}})
    {
        RngStream rng(o.seed, stream++);
        auto g = wavefunction_growth(ps.first, ps.second, 1000000, rng);
        double rate = localization_rate(ps.first, ps.second, o.cfg).rate;
        double z = std::abs(g.value - rate) / g.std_error;
        ok = ok && z < 4;
        worst = std::max(worst, z);
        rows.push_back({{"p", ps.first},
                        {"s", ps.second},
                        {"slope", g.value},
                        {"std_error", g.std_error},
                        {"rate", rate},
                        {"z", z}});
    }
    r.metrics = {{"cases", rows}, {"max_z", worst}};
    r.passed = ok;
    r.detail = fmt("max |z| %.2f (< 4)", worst);
}

inline void check_pade_rate(CheckResult& r, Options const& o)
{
    bool ok = true;
    double worst = 0, worst_z = 0;
    Json rows = Json::array();
    std::uint64_t stream = 500;
    for (ComplexValue t : {ComplexValue(1, 0), ComplexValue(0, 1)})
    {
        RngStream rng(o.seed, stream++);
        auto est = rate_estimate(1, 1, t, 200, 20, rng, o.cfg);
        double rel = std::abs(est.slope.value - est.target) / std::abs(est.target);
        ok = ok && rel < 0.05;
        worst = std::max(worst, rel);
        worst_z = std::max(worst_z, std::abs(est.slope.value - est.target)
                                        / est.slope.std_error);
        rows.push_back({{"t", {t.real(), t.imag()}},
                        {"slope", est.slope.value},
                        {"std_error", est.slope.std_error},
                        {"target", est.target},
                        {"relative_error", rel},
                        {"min_r2", est.min_r2}});
    }
    r.metrics = {{"cases", rows}, {"max_relative_error", worst}};
    r.passed = ok;
    r.detail = fmt("max relative slope error %.3f (< 0.05), %.1f standard "
                   "errors",
                   worst, worst_z);
}

//! u^{(2n-1)} on k = n..4n-3 and u^{(2n)} on k = n+1..4n-1.
inline bool axis_structure_holds(AxisSeries const& ax, int n_max)
{
    for (int m = 1; m < static_cast<int>(ax.layers.size()) && m <= 2 * n_max;
         ++m)
    {
        int n = (m + 1) / 2;
        int lo = m % 2 ? n : n + 1;
        int hi = m % 2 ? 4 * n - 3 : 4 * n - 1;
        auto const& layer = ax.layers[m];
        for (int k = 0; k < static_cast<int>(layer.size()); ++k)
        {
            bool inside = k >= lo && k <= hi;
            if (!inside && layer[k] != 0)
                return false;
            if (inside && (k == lo || k == hi) && layer[k] == 0)
                return false;
        }
    }
    return true;
}

inline void check_axis_series(CheckResult& r, Options const& o)
{
    auto ax = axis_density_series(1, 12);
    double est = ax.estimate(0.1).value;
    double ex = lyapunov_exact({1, 0.1, half_pi}, o.cfg).value;
    double rel = std::abs(est - ex) / ex;
    bool structure = true;
    for (double p : {0.5, 1.0, 2.0, 3.5})
        structure = structure && axis_structure_holds(axis_density_series(p, 12), 6);
    r.metrics = {{"estimate", est},
                 {"exact", ex},
                 {"relative_error", rel},
                 {"structure_holds", structure}};
    r.passed = rel < 0.01 && structure;
    r.detail = fmt("relative error %.2e (< 1e-2); layer structure ", rel)
               + (structure ? "holds" : "violated");
}

inline void check_cauchy_limit(CheckResult& r, Options const& o)
{
    double dev[2];
    int i = 0;
    for (double s : {0.2, 0.1})
    {
        AxisDensity f({1, s, half_pi}, o.cfg, o.normalization_scale);
        double worst = 0;
        for (int j = 0; j < 50; ++j)
        {
            double y = -5 + 10 * (j + 0.5) / 50;
            double ratio = f(y) * pi * (1 + y * y);
            worst = std::max(worst, std::abs(ratio - 1));
        }
        dev[i++] = worst;
    }
    double ratio = dev[0] / dev[1];
    r.metrics = {{"deviation_s_0.2", dev[0]},
                 {"deviation_s_0.1", dev[1]},
                 {"ratio", ratio},
                 {"accepted_ratio", {1.5, 2.5}}};
    r.passed = ratio >= 1.5 && ratio <= 2.5;
    r.detail = fmt("sup deviation %.3e at s=0.2, %.3e at s=0.1, ratio %.2f "
                   "(halving: 1.5..2.5)",
                   dev[0], dev[1], ratio);
}

struct CheckDef
{
    int id;
    char const* name;
    void (*run)(CheckResult&, Options const&);
};

inline std::vector<CheckDef> const& checks()
{
    static std::vector<CheckDef> v{
        {1, "normalization", check_normalization},
        {2, "lyapunov_agreement", check_lyapunov_agreement},
        {3, "monte_carlo_closure", check_monte_carlo},
        {4, "small_s_coefficients", check_small_s},
        {5, "large_s_law", check_large_s},
        {6, "weak_limits", check_weak_limits},
        {7, "fixed_point_residuals", check_residuals},
        {8, "macdonald_identities", check_macdonald},
        {9, "chain_moments", check_moments},
        {10, "schrodinger_closure", check_schrodinger},
        {11, "pade_rate", check_pade_rate},
        {12, "axis_series", check_axis_series},
        {13, "cauchy_limit", check_cauchy_limit},
    };
    return v;
}
}  // namespace detail

/*!
 * Run the selected checks.  A check that throws is recorded as failed with
 * the error text; the remaining checks still run.
 */
inline std::vector<CheckResult> run(Options const& o)
{
    std::vector<CheckResult> out;
    for (auto const& def : detail::checks())
    {
        if (!o.only.empty()
            && std::find(o.only.begin(), o.only.end(), def.id) == o.only.end())
            continue;
        CheckResult r;
        r.id = def.id;
        r.name = def.name;
        auto t0 = std::chrono::steady_clock::now();
        try
        {
            def.run(r, o);
        }
        catch (std::exception const& e)
        {
            r.passed = false;
            r.detail = std::string("error: ") + e.what();
        }
        r.elapsed_s = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        out.push_back(std::move(r));
    }
    return out;
}

inline bool all_passed(std::vector<CheckResult> const& results)
{
    return std::all_of(results.begin(), results.end(),
                       [](auto const& r) { return r.passed; });
}

//! Machine-readable report; timings only on request so reruns compare equal.
inline Json report(std::vector<CheckResult> const& results, Options const& o,
                   bool with_timings = false)
{
    Json checks = Json::array();
    for (auto const& r : results)
    {
        Json c{{"id", r.id},
               {"name", r.name},
               {"passed", r.passed},
               {"detail", r.detail},
               {"metrics", r.metrics}};
        if (with_timings)
            c["elapsed_s"] = r.elapsed_s;
        checks.push_back(std::move(c));
    }
    Json config{{"seed", o.seed},
                {"normalization_scale", o.normalization_scale},
                {"abs_tol", o.cfg.abs_tol},
                {"rel_tol", o.cfg.rel_tol},
                {"max_refinements", o.cfg.max_refinements},
                {"only", o.only}};
    return Json{{"suite", "rmprod-verify"},
                {"passed", all_passed(results)},
                {"config", config},
                {"checks", checks}};
}

inline std::string summary_line(CheckResult const& r)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "[%s] %2d %-22s ", r.passed ? "PASS" : "FAIL",
                  r.id, r.name.c_str());
    return buf + r.detail;
}

}  // namespace rmprod::verify
