// Modified Bessel functions of real order and complex argument, their order
// derivative, Macdonald integrals, and a few real special functions.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include "core.hpp"
#include "quadrature.hpp"

namespace rmprod
{
namespace detail
{
//---------------------------------------------------------------------------//
/*!
 * Trapezoid sums for
 *   K_q(z) = 1/2 int_R exp(-q w - z cosh w) dw
 * on a deformed path w(tau) = tau + i eta(tau) with
 *   eta = -(arg z / 2)(T + T^3) + c sech^2(tau - x_s),  T = tanh(tau).
 * The first part has slope arg(z)/2 at the origin (steepest descent at w = 0
 * for large |z|) and asymptotes -/+ arg z; the bump lifts the path through
 * the saddle w_s = -asinh(p/z), which dominates when p is comparable to |z|.
 * On the imaginary axis this turns oscillation into decay.  The factor
 * e^{-z} and the peak of the integrand are pulled out so that
 *   K_q(z)       = exp(log_prefactor) * k[j]
 *   d/dq K_q(z)  = exp(log_prefactor) * dk[j]
 * for each requested order q_j.  All orders share the node set chosen for
 * the first one, which keeps differences across nearby orders smooth.
 */
struct ContourSums
{
    ComplexValue log_prefactor;
    std::vector<ComplexValue> k;
    std::vector<ComplexValue> dk;
};

inline ContourSums contour_sums(std::vector<double> const& orders,
                                ComplexValue z,
                                QuadratureConfig const& cfg,
                                bool with_dorder)
{
    bool const flip = z.imag() < 0;
    if (flip)
        z = std::conj(z);
    double const th = 0.5 * std::max(0.0, std::arg(z));
    double const p0 = orders.front();

    ComplexValue const saddle
        = p0 == 0 ? ComplexValue(0) : -std::asinh(ComplexValue(p0) / z);
    double const x_s = saddle.real();
    auto base = [&](double tau) {
        double t = std::tanh(tau);
        return -th * (t + t * t * t);
    };
    double const bump = saddle.imag() - base(x_s);
    auto path = [&](double tau) {
        double c = 1 / std::cosh(tau - x_s);
        return ComplexValue(tau, base(tau) + bump * c * c);
    };
    auto exponent = [&](double tau, ComplexValue w) {
        (void)tau;
        ComplexValue sh = std::sinh(0.5 * w);
        return -p0 * w - 2.0 * z * sh * sh;
    };
    auto re_exponent = [&](double tau) {
        return exponent(tau, path(tau)).real();
    };

    // Locate the peak of |integrand| on a coarse grid, then polish it.
    constexpr double span = 40;
    constexpr double step = 0.125;
    double best_tau = -span;
    double best = re_exponent(-span);
    for (double tau = -span + step; tau <= span; tau += step)
    {
        double v = re_exponent(tau);
        if (v > best)
        {
            best = v;
            best_tau = tau;
        }
    }
    {
        double a = best_tau - step, b = best_tau + step;
        double const g = 0.5 * (std::sqrt(5.0) - 1);
        double c = b - g * (b - a), d = a + g * (b - a);
        double fc = re_exponent(c), fd = re_exponent(d);
        for (int it = 0; it < 60; ++it)
        {
            if (fc > fd)
            {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = re_exponent(c);
            }
            else
            {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = re_exponent(d);
            }
        }
        double mid = 0.5 * (a + b);
        double fm = re_exponent(mid);
        if (fm > best)
        {
            best = fm;
            best_tau = mid;
        }
    }
    double const peak = best;
    double const cutoff = peak - 50;

    // Walk outwards until the integrand is e^{-50} below its peak.
    auto find_edge = [&](double dir) {
        double inside = best_tau;
        double outside = best_tau;
        for (;;)
        {
            outside = inside + dir * step;
            if (std::abs(outside) > 2 * span || re_exponent(outside) < cutoff)
                break;
            inside = outside;
        }
        for (int it = 0; it < 40; ++it)
        {
            double mid = 0.5 * (inside + outside);
            if (re_exponent(mid) < cutoff)
                outside = mid;
            else
                inside = mid;
        }
        return outside;
    };
    double const lo = find_edge(-1);
    double const hi = find_edge(+1);

    std::size_t const n_orders = orders.size();
    std::vector<ComplexValue> k(n_orders), dk(n_orders);
    std::vector<ComplexValue> k_prev(n_orders), dk_prev(n_orders);

    auto accumulate = [&](double tau, std::vector<ComplexValue>& ks,
                          std::vector<ComplexValue>& dks) {
        ComplexValue w = path(tau);
        double t = std::tanh(tau);
        double ts = std::tanh(tau - x_s);
        double deta = -th * (1 - t * t) * (1 + 3 * t * t)
                      - 2 * bump * (1 - ts * ts) * ts;
        ComplexValue dw(1, deta);
        ComplexValue e = exponent(tau, w) - peak;
        for (std::size_t j = 0; j < n_orders; ++j)
        {
            ComplexValue ej = e;
            if (j > 0)
                ej -= (orders[j] - p0) * w;
            ComplexValue term = std::exp(ej) * dw;
            ks[j] += term;
            if (with_dorder)
                dks[j] -= w * term;
        }
    };

    // Sums over nodes; the endpoint values are negligible by construction.
    int intervals = 16;
    double h = (hi - lo) / intervals;
    std::vector<ComplexValue> sum_k(n_orders), sum_dk(n_orders);
    for (int i = 0; i <= intervals; ++i)
        accumulate(lo + i * h, sum_k, sum_dk);
    for (std::size_t j = 0; j < n_orders; ++j)
    {
        k[j] = 0.5 * h * sum_k[j];
        dk[j] = 0.5 * h * sum_dk[j];
    }

    auto converged = [&](int level) {
        if (level < 2)
            return false;
        for (std::size_t j = 0; j < n_orders; ++j)
        {
            // Relative test only: the absolute tolerance is meaningless
            // for values spanning e^{-10^6} to e^{300}.
            double tol = cfg.rel_tol * std::abs(k[j]);
            if (!(std::abs(k[j] - k_prev[j]) <= tol))
                return false;
            if (with_dorder
                && !(std::abs(dk[j] - dk_prev[j])
                     <= std::max(tol, cfg.rel_tol * std::abs(dk[j]))))
                return false;
        }
        return true;
    };

    int level = 0;
    for (; level <= cfg.max_refinements; ++level)
    {
        if (converged(level))
            break;
        if (level == cfg.max_refinements)
            throw QuadratureError("Bessel K contour sum did not converge",
                                  k_prev[0], k[0]);
        k_prev = k;
        dk_prev = dk;
        h *= 0.5;
        intervals *= 2;
        for (int i = 1; i < intervals; i += 2)
            accumulate(lo + i * h, sum_k, sum_dk);
        for (std::size_t j = 0; j < n_orders; ++j)
        {
            k[j] = 0.5 * h * sum_k[j];
            dk[j] = 0.5 * h * sum_dk[j];
        }
    }

    ContourSums out;
    out.log_prefactor = ComplexValue(peak, 0) - z;
    out.k = std::move(k);
    out.dk = std::move(dk);
    if (flip)
    {
        out.log_prefactor = std::conj(out.log_prefactor);
        for (auto& v : out.k)
            v = std::conj(v);
        for (auto& v : out.dk)
            v = std::conj(v);
    }
    return out;
}

inline void check_argument(ComplexValue z)
{
    require_finite(z, "Bessel argument");
    double r = std::abs(z);
    if (!(r >= 1e-6 && r <= 1e6))
        throw DomainError("Bessel argument modulus outside [1e-6, 1e6]");
    if (z.real() < -1e-14 * r)
        throw DomainError("Bessel argument must satisfy Re z >= 0");
}

inline void check_order(double p)
{
    if (!(std::abs(p) <= 64.0 + 1e-9))
        throw DomainError("Bessel order outside [-64, 64]");
}

//! log K_q(z) for any real order |q| <= 64.
inline ComplexValue log_bessel_k_any(double q, ComplexValue z,
                                     QuadratureConfig const& cfg)
{
    check_order(q);
    check_argument(z);
    auto sums = contour_sums({q}, z, cfg, false);
    return sums.log_prefactor + std::log(sums.k[0]);
}

//! log(e^z K_q(z)), free of the cancellation in log K + z for large z.
inline ComplexValue log_bessel_k_scaled_any(double q, ComplexValue z,
                                            QuadratureConfig const& cfg)
{
    check_order(q);
    check_argument(z);
    auto sums = contour_sums({q}, z, cfg, false);
    return (sums.log_prefactor + z) + std::log(sums.k[0]);
}

inline ComplexValue safe_exp(ComplexValue x, char const* what)
{
    if (x.real() > 709)
        throw DomainError(std::string(what) + ": overflow");
    return std::exp(x);
}

//! Integer-order closed form of d/dp K_p / K_p at p = n.
inline ComplexValue integer_dorder_ratio(int n, ComplexValue z,
                                         QuadratureConfig const& cfg)
{
    if (n == 0)
        return 0;
    ComplexValue const log_kn = log_bessel_k_any(n, z, cfg);
    ComplexValue const log_half_z = std::log(0.5 * z);
    ComplexValue total = 0;
    for (int k = 0; k < n; ++k)
    {
        ComplexValue log_term = std::lgamma(n + 1.0) - std::log(2.0 * (n - k))
                                - std::lgamma(k + 1.0)
                                + double(k - n) * log_half_z
                                + log_bessel_k_any(k, z, cfg) - log_kn;
        total += std::exp(log_term);
    }
    return total;
}

inline bool is_integer_order(double p)
{
    return p == std::round(p);
}
}  // namespace detail

//---------------------------------------------------------------------------//
// Public interface
//---------------------------------------------------------------------------//

inline void check_bessel_domain(double p, ComplexValue z)
{
    if (!(p >= 0 && p <= 64))
        throw DomainError("Bessel order must lie in [0, 64]");
    detail::check_argument(z);
}

//! Natural logarithm of K_p(z) (principal branch of the returned mantissa).
inline ComplexValue log_bessel_k(double p, ComplexValue z,
                                 QuadratureConfig const& cfg = {})
{
    cfg.validate();
    check_bessel_domain(p, z);
    return detail::log_bessel_k_any(p, z, cfg);
}

inline ComplexValue bessel_k(double p, ComplexValue z,
                             QuadratureConfig const& cfg = {})
{
    return detail::safe_exp(log_bessel_k(p, z, cfg), "bessel_k");
}

//! K_p(z) / K_q(z) without forming either factor.
inline ComplexValue bessel_k_ratio(double p, double q, ComplexValue z,
                                   QuadratureConfig const& cfg = {})
{
    cfg.validate();
    detail::check_argument(z);
    auto sums = detail::contour_sums({q, p}, z, cfg, false);
    return sums.k[1] / sums.k[0];
}

//! Lambda_p(z) = d/dp K_p(z) / K_p(z) from a single contour pass.
inline ComplexValue bessel_k_log_derivative(double p, ComplexValue z,
                                            QuadratureConfig const& cfg = {})
{
    cfg.validate();
    check_bessel_domain(p, z);
    auto sums = detail::contour_sums({p}, z, cfg, true);
    return sums.dk[0] / sums.k[0];
}

/*!
 * d/dp K_p(z).  Integer orders use the finite sum over K_k; other orders
 * differentiate under the integral and are checked against a five-point
 * difference in p evaluated on the same nodes.
 */
inline ComplexValue bessel_k_dorder(double p, ComplexValue z,
                                    QuadratureConfig const& cfg = {})
{
    cfg.validate();
    check_bessel_domain(p, z);
    if (detail::is_integer_order(p))
    {
        int n = static_cast<int>(p);
        return detail::integer_dorder_ratio(n, z, cfg)
               * detail::safe_exp(detail::log_bessel_k_any(p, z, cfg),
                                  "bessel_k_dorder");
    }
    double const h = 1e-5 * std::max(1.0, p);
    auto sums = detail::contour_sums({p, p + 2 * h, p + h, p - h, p - 2 * h},
                                     z, cfg, true);
    auto const& k = sums.k;
    ComplexValue fd = (-k[1] + 8.0 * k[2] - 8.0 * k[3] + k[4]) / (12 * h);
    ComplexValue quad = sums.dk[0];
    double scale = std::max(std::abs(quad), std::abs(k[0]));
    double allowed
        = (10 * cfg.rel_tol + 100 * std::numeric_limits<double>::epsilon() / h)
          * scale;
    if (!(std::abs(fd - quad) <= allowed))
        throw ConsistencyError("order derivative: quadrature and finite "
                               "difference disagree");
    return detail::safe_exp(sums.log_prefactor, "bessel_k_dorder") * quad;
}

//! (J_p(x), Y_p(x)).
inline std::pair<double, double>
bessel_jy(double p, double x, QuadratureConfig const& cfg = {})
{
    cfg.validate();
    if (!(x > 0) || !std::isfinite(x))
        throw DomainError("bessel_jy requires x > 0");
    if (!(p >= 0 && p <= 64))
        throw DomainError("Bessel order must lie in [0, 64]");
    try
    {
        return {boost::math::cyl_bessel_j(p, x),
                boost::math::cyl_neumann(p, x)};
    }
    catch (std::exception const& e)
    {
        throw DomainError(std::string("bessel_jy: ") + e.what());
    }
}

inline double digamma(double x)
{
    if (!(x > 0) || !std::isfinite(x))
        throw DomainError("digamma requires x > 0");
    return boost::math::digamma(x);
}

//---------------------------------------------------------------------------//
// Macdonald integrals
//   I_p^{(n)}(u, v) = 1/2 int_0^inf exp(-t/2 - (u^2+v^2)/(2t)) K_p(uv/t) t^n dt
//---------------------------------------------------------------------------//
struct MacdonaldIndex
{
    double p = 0;
    int n = -1;
    ComplexValue u{1, 0};
    ComplexValue v{1, 0};

    void validate() const
    {
        require_finite(u, "Macdonald u");
        require_finite(v, "Macdonald v");
        if (u == 0.0 || v == 0.0)
            throw DomainError("Macdonald arguments must be nonzero");
        if (std::abs(std::arg(u)) >= pi || std::abs(std::arg(v)) >= pi)
            throw DomainError("Macdonald arguments on the negative axis");
        if (!(std::abs(std::arg(u + v)) < pi / 4))
            throw DomainError("Macdonald integral requires |arg(u+v)| < pi/4");
    }
};

namespace detail
{
//! coef * u^a v^b (v^2-u^2)^{-c} K_{p+i}(u) K_{p+j}(v)
struct MacdonaldKey
{
    int a, b, c, i, j;
    auto tie() const { return std::tie(a, b, c, i, j); }
    bool operator<(MacdonaldKey const& o) const { return tie() < o.tie(); }
};
using MacdonaldExpr = std::map<MacdonaldKey, ComplexValue>;

// u d/du of each term.
inline MacdonaldExpr apply_u_derivative(MacdonaldExpr const& e, double p)
{
    MacdonaldExpr out;
    for (auto const& [key, coef] : e)
    {
        auto k = key;
        out[k] += coef * double(k.a + (p + k.i));
        if (k.c != 0)
            out[{k.a + 2, k.b, k.c + 1, k.i, k.j}] += coef * double(2 * k.c);
        out[{k.a + 1, k.b, k.c, k.i + 1, k.j}] -= coef;
    }
    return out;
}

// v d/dv of each term.
inline MacdonaldExpr apply_v_derivative(MacdonaldExpr const& e, double p)
{
    MacdonaldExpr out;
    for (auto const& [key, coef] : e)
    {
        auto k = key;
        out[k] += coef * double(k.b + (p + k.j));
        if (k.c != 0)
            out[{k.a, k.b + 2, k.c + 1, k.i, k.j}] -= coef * double(2 * k.c);
        out[{k.a, k.b + 1, k.c, k.i, k.j + 1}] -= coef;
    }
    return out;
}

inline void add_scaled(MacdonaldExpr& dst, MacdonaldExpr const& src,
                       ComplexValue scale)
{
    for (auto const& [key, coef] : src)
        dst[key] += scale * coef;
}

//! Symbolic form of I_p^{(n)} in terms of K_{p+i}(u) K_{p+j}(v).
inline MacdonaldExpr macdonald_expression(double p, int n)
{
    MacdonaldExpr e;
    e[{0, 0, 0, 0, 0}] = 1;
    if (n >= -1)
    {
        for (int m = 0; m <= n; ++m)
        {
            MacdonaldExpr next;
            add_scaled(next, e, 2.0 * m);
            add_scaled(next, apply_u_derivative(e, p), -1.0);
            add_scaled(next, apply_v_derivative(e, p), -1.0);
            e = std::move(next);
        }
        return e;
    }
    for (int m = -1; m > n; --m)
    {
        MacdonaldExpr next = apply_u_derivative(e, p);
        add_scaled(next, apply_v_derivative(e, p), -1.0);
        e.clear();
        for (auto const& [key, coef] : next)
        {
            if (coef == 0.0)
                continue;
            auto k = key;
            k.c += 1;
            e[k] += coef;
        }
    }
    return e;
}

//! Evaluate a symbolic Macdonald expression with cached Bessel values.
class MacdonaldEvaluator
{
  public:
    MacdonaldEvaluator(ComplexValue u, ComplexValue v, QuadratureConfig cfg)
        : u_(u), v_(v), cfg_(cfg)
    {
    }

    ComplexValue operator()(double p, MacdonaldExpr const& e)
    {
        ComplexValue total = 0;
        ComplexValue const diff = v_ * v_ - u_ * u_;
        for (auto const& [key, coef] : e)
        {
            if (coef == 0.0)
                continue;
            if (key.c > 0 && std::abs(diff) <= 1e-14 * std::norm(u_))
                throw DegenerateRecurrenceError(
                    "Macdonald backward recurrence needs u^2 != v^2");
            ComplexValue log_term = log_k(p + key.i, u_, cache_u_)
                                    + log_k(p + key.j, v_, cache_v_);
            ComplexValue term = std::exp(log_term) * coef;
            if (key.a)
                term *= std::pow(u_, key.a);
            if (key.b)
                term *= std::pow(v_, key.b);
            if (key.c)
                term *= std::pow(diff, -key.c);
            total += term;
        }
        return total;
    }

  private:
    ComplexValue log_k(double order, ComplexValue z,
                       std::map<double, ComplexValue>& cache)
    {
        auto it = cache.find(order);
        if (it != cache.end())
            return it->second;
        ComplexValue value = log_bessel_k_any(order, z, cfg_);
        cache.emplace(order, value);
        return value;
    }

    ComplexValue u_, v_;
    QuadratureConfig cfg_;
    std::map<double, ComplexValue> cache_u_, cache_v_;
};
}  // namespace detail

/*!
 * Closed form of the Macdonald integral: n = -1 is K_p(u) K_p(v); higher n
 * follow from the forward recurrence and lower n from the backward one,
 * with derivatives of K expressed through neighbouring orders.
 */
inline ComplexValue macdonald_integral(MacdonaldIndex const& idx,
                                       QuadratureConfig const& cfg = {})
{
    cfg.validate();
    idx.validate();
    if (!(std::abs(idx.p) <= 64))
        throw DomainError("Macdonald order outside [-64, 64]");
    if (idx.n < -12 || idx.n > 12)
        throw UnsupportedError("Macdonald power outside [-12, 12]");
    detail::MacdonaldEvaluator eval(idx.u, idx.v, cfg);
    return eval(idx.p, detail::macdonald_expression(idx.p, idx.n));
}

//! The defining integral evaluated by quadrature (needs |arg(uv)| <= pi/2).
inline ComplexValue macdonald_integral_direct(MacdonaldIndex const& idx,
                                              QuadratureConfig const& cfg = {})
{
    cfg.validate();
    idx.validate();
    ComplexValue const uv = idx.u * idx.v;
    ComplexValue const sum_sq = (idx.u + idx.v) * (idx.u + idx.v);
    if (uv.real() < -1e-14 * std::abs(uv))
        throw DomainError("direct Macdonald quadrature needs Re(uv) >= 0");
    auto integrand = [&](double t) -> ComplexValue {
        if (!(t > 0))
            return 0;
        ComplexValue x = uv / t;
        ComplexValue outer = -0.5 * t - sum_sq / (2 * t)
                             + double(idx.n) * std::log(t);
        double ax = std::abs(x);
        if (ax > 1e6 || ax < 1e-6)
        {
            if (outer.real() + (ax < 1e-6 ? 64 * 14.0 : 0.0) < -745)
                return 0;
            throw QuadratureError("direct Macdonald quadrature left the "
                                  "Bessel domain");
        }
        ComplexValue log_ks = detail::log_bessel_k_scaled_any(idx.p, x, cfg);
        ComplexValue e = outer + log_ks;
        if (e.real() < -745)
            return 0;
        return 0.5 * std::exp(e);
    };
    return quad::upper<1>(integrand, 0.0, std::max(cfg.rel_tol, 1e-13));
}

}  // namespace rmprod
