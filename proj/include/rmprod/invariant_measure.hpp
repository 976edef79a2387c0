// Invariant densities of the continued-fraction chain, their normalisation,
// moments, and fixed-point residuals.
#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <tuple>

#include "core.hpp"
#include "quadrature.hpp"
#include "special_functions.hpp"

namespace rmprod
{
//! log of the gamma density a^{p-1} e^{-a/s} / (s^p Gamma(p)).
inline double log_gamma_density(double p, double s, double a)
{
    return (p - 1) * std::log(a) - a / s - p * std::log(s) - std::lgamma(p);
}

inline double gamma_density(double p, double s, double a)
{
    if (!(a > 0))
        return 0;
    return std::exp(log_gamma_density(p, s, a));
}

//---------------------------------------------------------------------------//
/*!
 * Normalisation constant of the invariant density: 1/|2K_p(2e^{ia}/s)|^2 on
 * the open cone and 1/(pi^2 (J_p^2 + Y_p^2)(2/s)) on the imaginary axis.
 */
inline double log_normalization_constant(ModelParams const& params,
                                         QuadratureConfig const& cfg = {})
{
    params.validate();
    if (params.on_axis())
    {
        auto [j, y] = bessel_jy(params.p, 2 / params.s, cfg);
        return -std::log(pi * pi * (j * j + y * y));
    }
    ComplexValue lk
        = log_bessel_k(params.p, bessel_argument(params.s, params.alpha), cfg);
    return -2 * (std::log(2.0) + lk.real());
}

inline double normalization_constant(ModelParams const& params,
                                     QuadratureConfig const& cfg = {})
{
    return std::exp(log_normalization_constant(params, cfg));
}

//---------------------------------------------------------------------------//
/*!
 * Density on the open cone S_alpha, 0 < |alpha| < pi/2.  The normalisation
 * is evaluated once at construction.
 */
class ConeDensity
{
  public:
    explicit ConeDensity(ModelParams const& params,
                         QuadratureConfig const& cfg = {},
                         double normalization_scale = 1)
        : params_(params)
    {
        params.validate();
        a_ = std::abs(params.alpha);
        if (!(a_ > 0 && a_ < half_pi))
            throw DomainError("cone density needs 0 < |alpha| < pi/2");
        sign_ = params.alpha > 0 ? 1 : -1;
        sin2a_ = std::sin(2 * a_);
        log_c_ = log_normalization_constant(params, cfg)
                 + std::log(normalization_scale);
    }

    ModelParams const& params() const { return params_; }
    double log_normalization() const { return log_c_; }

    double log_value(ConePoint z) const
    {
        double th = sign_ * z.theta;
        double lo = std::sin(a_ - th);
        double hi = std::sin(a_ + th);
        return std::log(sin2a_) + log_c_ - 2 * std::log(z.r) - 2 * std::log(hi)
               + (params_.p - 1) * (std::log(lo) - std::log(hi))
               - sin2a_ / params_.s * (1 / (z.r * lo) + z.r / hi);
    }

    double operator()(ConePoint z) const
    {
        if (!(z.r > 0) || !z.strictly_inside(params_.alpha))
            return 0;
        double v = log_value(z);
        return v < -745 ? 0 : std::exp(v);
    }

    double operator()(ComplexValue z) const
    {
        return (*this)(ConePoint{std::abs(z), std::arg(z)});
    }

    /*!
     * Integral of g(z) f(z) over the cone.  With t = sin(a-th)/sin(a+th) and
     * r = rho/sqrt(t) the density becomes
     *   c t^{p-1} exp(-D(t)(rho + 1/rho)/(s sqrt t)) drho/rho dt,
     *   D(t) = sqrt((1+t)^2 cos^2 a + (1-t)^2 sin^2 a),
     * and both variables are integrated on a log scale.  The t-integral is
     * split at t = 1 where D has its sharpest feature.
     */
    template<class G>
    auto integrate(G&& g, QuadratureConfig const& cfg = {}) const
    {
        using R = decltype(g(ComplexValue{}));
        double const ca = std::cos(a_), sa = std::sin(a_);
        double const p = params_.p, s = params_.s;
        double const tol = std::max(cfg.rel_tol, 1e-13);
        auto inner = [&](double u) -> R {
            if (!(std::abs(u) < 600))
                return R{};
            double t = std::exp(u);
            double d = std::hypot((1 + t) * ca, (1 - t) * sa);
            double beta = d / (s * std::sqrt(t));
            double theta = sign_ * std::atan2((1 - t) * sa, (1 + t) * ca);
            double log_pre = log_c_ + p * u;
            if (log_pre - 2 * beta < -745)
                return R{};
            auto f = [&](double v) -> R {
                double e = log_pre - 2 * beta * std::cosh(v);
                if (e < -745)
                    return R{};
                double r = std::exp(v) / std::sqrt(t);
                return std::exp(e) * g(std::polar(r, theta));
            };
            return quad::whole_line<1>(f, tol);
        };
        R left = quad::upper<0>([&](double x) { return inner(-x); }, 0.0, tol);
        R right = quad::upper<0>(inner, 0.0, tol);
        return left + right;
    }

  private:
    ModelParams params_;
    double a_ = 0;
    double sign_ = 1;
    double sin2a_ = 0;
    double log_c_ = 0;
};

inline double density_cone(ModelParams const& params, ConePoint z,
                           QuadratureConfig const& cfg = {})
{
    if (!(z.r > 0) || !z.strictly_inside(params.alpha))
    {
        params.validate();
        return 0;
    }
    return ConeDensity(params, cfg)(z);
}

//---------------------------------------------------------------------------//
/*!
 * Density of Im Z when alpha = +-pi/2.  Substituting x = (1/t - 1/y)
 * in the defining integral gives the unnormalised profile
 *   f_+(y) = int (1 + yx)^{-p-1} exp(-[x + y^2 x/(1 + yx)]/s) dx
 * over x > 0 with 1 + yx > 0, which is smooth through y = 0 (f_+(0) = s);
 * f_-(y) = f_+(-y).
 */
class AxisDensity
{
  public:
    explicit AxisDensity(ModelParams const& params,
                         QuadratureConfig const& cfg = {},
                         double normalization_scale = 1)
        : params_(params), cfg_(cfg)
    {
        params.validate();
        if (!params.on_axis())
            throw DomainError("axis density needs |alpha| = pi/2");
        sign_ = params.alpha > 0 ? 1 : -1;
        log_c_ = log_normalization_constant(params, cfg)
                 + std::log(normalization_scale);
    }

    ModelParams const& params() const { return params_; }
    double normalization() const { return std::exp(log_c_); }

    //! Unnormalised profile f_+, integrated in units of its decay length.
    double profile_plus(double y) const
    {
        double const p = params_.p, s = params_.s;
        double const tol = std::max(cfg_.rel_tol, 1e-13);
        double const y2 = y * y;
        double const kappa = s / (1 + y2);
        if (y >= 0)
        {
            auto f = [&](double z) {
                double x = kappa * z;
                double q = 1 + y * x;
                double e = -(p + 1) * std::log(q) - (x + y2 * x / q) / s;
                return e < -745 ? 0.0 : std::exp(e);
            };
            return kappa * quad::upper<2>(f, 0.0, tol);
        }
        // y < 0: x = eta/(|y|(1 + eta)) maps 1 + yx > 0 onto eta > 0.
        double const ay = -y;
        double const scale = ay * kappa;
        auto f = [&](double z) {
            double eta = scale * z;
            double e = (p - 1) * std::log1p(eta)
                       - (eta / ((1 + eta) * ay) + ay * eta) / s;
            return e < -745 ? 0.0 : std::exp(e);
        };
        return kappa * quad::upper<2>(f, 0.0, tol);
    }

    //! Unnormalised f_+ or f_- according to the sign of alpha.
    double profile(double y) const { return profile_plus(sign_ * y); }

    double operator()(double y) const { return std::exp(log_c_) * profile(y); }

    //! Integral of g(y) times the normalised density over the real line.
    template<class G>
    auto integrate(G&& g, QuadratureConfig const& cfg = {}) const
    {
        double const tol = std::max(cfg.rel_tol, 1e-13);
        auto pos = [&](double y) { return g(y) * (*this)(y); };
        auto neg = [&](double y) { return g(-y) * (*this)(-y); };
        return quad::upper<0>(pos, 0.0, tol) + quad::upper<0>(neg, 0.0, tol);
    }

  private:
    ModelParams params_;
    QuadratureConfig cfg_;
    double sign_ = 1;
    double log_c_ = 0;
};

inline double density_axis(ModelParams const& params, double y,
                           QuadratureConfig const& cfg = {})
{
    if (y == 0)
        throw DomainError("density_axis requires y != 0");
    return AxisDensity(params, cfg)(y);
}

//---------------------------------------------------------------------------//
//! Generalised inverse Gaussian density, the alpha = 0 invariant law.
class GigDensity
{
  public:
    GigDensity(double p, double s, QuadratureConfig const& cfg = {})
        : p_(p), s_(s)
    {
        ModelParams{p, s, 0}.validate();
        log_norm_ = -std::log(2.0) - log_bessel_k(p, 2 / s, cfg).real();
    }

    double operator()(double x) const
    {
        if (!(x > 0))
            return 0;
        double e = log_norm_ - (p_ + 1) * std::log(x) - (x + 1 / x) / s_;
        return e < -745 ? 0 : std::exp(e);
    }

    template<class G>
    auto integrate(G&& g, QuadratureConfig const& cfg = {}) const
    {
        double const tol = std::max(cfg.rel_tol, 1e-13);
        return quad::upper<0>([&](double x) { return g(x) * (*this)(x); },
                              0.0, tol);
    }

  private:
    double p_, s_;
    double log_norm_ = 0;
};

inline double density_gig(double p, double s, double x,
                          QuadratureConfig const& cfg = {})
{
    if (!(x > 0))
        throw DomainError("density_gig requires x > 0");
    return GigDensity(p, s, cfg)(x);
}

//---------------------------------------------------------------------------//
namespace detail
{
class DysonCache
{
  public:
    static DysonCache& instance()
    {
        static DysonCache cache;
        return cache;
    }

    template<class F>
    double get(std::tuple<double, double, double> key, F&& compute)
    {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = values_.find(key);
            if (it != values_.end())
                return it->second;
        }
        double value = compute();
        std::lock_guard<std::mutex> lock(mutex_);
        return values_.emplace(key, value).first->second;
    }

  private:
    std::mutex mutex_;
    std::map<std::tuple<double, double, double>, double> values_;
};

inline double log_dyson_unnormalized(double p, double s, double t, double x)
{
    return (p - 1) * std::log(x) - p * std::log1p(x) - x / (s * t);
}
}  // namespace detail

//! log of the Dyson normalisation C_{p,s,t}, memoised per (p, s, t).
inline double log_dyson_normalization(double p, double s, double t,
                                      QuadratureConfig const& cfg = {})
{
    if (!(p > 0 && s > 0 && t > 0))
        throw DomainError("Dyson density needs p, s, t > 0");
    return detail::DysonCache::instance().get({p, s, t}, [&] {
        auto f = [&](double x) {
            return x > 0 ? std::exp(detail::log_dyson_unnormalized(p, s, t, x))
                         : 0.0;
        };
        return -std::log(
            quad::upper<0>(f, 0.0, std::max(cfg.rel_tol, 1e-13)));
    });
}

inline double density_dyson(double p, double s, double t, double x,
                            QuadratureConfig const& cfg = {})
{
    if (!(x > 0))
        throw DomainError("density_dyson requires x > 0");
    return std::exp(log_dyson_normalization(p, s, t, cfg)
                    + detail::log_dyson_unnormalized(p, s, t, x));
}

//---------------------------------------------------------------------------//
// Moments
//---------------------------------------------------------------------------//
struct MomentResult
{
    int m = 0;
    int n = 0;
    ComplexValue value;
};

/*!
 * M^{(m,n)} = E[Z^m conj(Z)^n] for n <= m, as a finite combination of
 * Macdonald integrals at u = conj(v) = 2e^{ia}/s:
 *   4c (2/s)^{m+n} sum_k C(m-n,k) e^{ia(m-n-2k)}
 *     sum_{a+b+e=n} n!/(a!b!e!) (2cos 2a)^e I^{(-m-n-1)}_{p-m+k+a-b}(u, v).
 */
inline MomentResult moment(ModelParams const& params, int m, int n,
                           QuadratureConfig const& cfg = {})
{
    params.validate();
    if (params.on_axis())
        throw DomainError("moments need |alpha| < pi/2");
    if (m < 0 || n < 0)
        throw DomainError("moment orders must be non-negative");
    if (n > m)
        throw UnsupportedError(
            "moment needs n <= m; use M(m,n) = conj M(n,m)");
    if (m + n > 8)
        throw UnsupportedError("moments limited to m + n <= 8");
    if (m == 0 && n == 0)
        return {0, 0, 1.0};

    double const p = params.p, s = params.s, a = params.alpha;
    ComplexValue const u = bessel_argument(s, a);
    ComplexValue const v = std::conj(u);
    double const c = normalization_constant(params, cfg);
    int const power = -m - n - 1;
    int const d = m - n;

    std::map<double, ComplexValue> integrals;
    auto integral = [&](double order) {
        order = std::abs(order);
        auto it = integrals.find(order);
        if (it != integrals.end())
            return it->second;
        ComplexValue val = macdonald_integral({order, power, u, v}, cfg);
        integrals.emplace(order, val);
        return val;
    };

    auto binom = [](int nn, int kk) {
        return std::exp(std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0)
                        - std::lgamma(nn - kk + 1.0));
    };
    double const two_cos = 2 * std::cos(2 * a);
    ComplexValue total = 0;
    for (int k = 0; k <= d; ++k)
    {
        ComplexValue phase = std::polar(binom(d, k), a * (d - 2 * k));
        for (int ia = 0; ia <= n; ++ia)
        {
            for (int ib = 0; ia + ib <= n; ++ib)
            {
                int ie = n - ia - ib;
                double multinomial
                    = std::exp(std::lgamma(n + 1.0) - std::lgamma(ia + 1.0)
                               - std::lgamma(ib + 1.0) - std::lgamma(ie + 1.0));
                double weight = multinomial * std::pow(two_cos, ie);
                if (weight == 0)
                    continue;
                total += phase * weight * integral(p - m + k + ia - ib);
            }
        }
    }
    total *= 4 * c * std::pow(2 / s, m + n);
    return {m, n, total};
}

//! Mean of the invariant law, K_{p-1}(2e^{-ia}/s)/K_p(2e^{-ia}/s).
inline ComplexValue mean_closed_form(ModelParams const& params,
                                     QuadratureConfig const& cfg = {})
{
    params.validate();
    ComplexValue w = bessel_argument(params.s, -params.alpha);
    return bessel_k_ratio(params.p - 1, params.p, w, cfg);
}

//! Variance E|Z|^2 - |EZ|^2 = s/sin(2a) Im{e^{ia} mean}, 0 < |a| < pi/2.
inline double variance_closed_form(ModelParams const& params,
                                   QuadratureConfig const& cfg = {})
{
    params.validate();
    if (params.alpha == 0 || params.on_axis())
        throw DomainError("variance formula needs 0 < |alpha| < pi/2");
    ComplexValue mean = mean_closed_form(params, cfg);
    return params.s / std::sin(2 * params.alpha)
           * (std::polar(1.0, params.alpha) * mean).imag();
}

//---------------------------------------------------------------------------//
// Fixed-point residuals
//---------------------------------------------------------------------------//

/*!
 * |f(z) - |z|^{-4} int_0^{a(1/z)} f(1/z - a e^{ia}) gamma(a) da|, where
 * a(w) = |w| sin(|a| + sign(a) arg w)/sin(2|a|) is where the shifted point
 * leaves the cone.
 */
inline double stationary_residual(ModelParams const& params, ConePoint z,
                                  QuadratureConfig const& cfg = {})
{
    ConeDensity f(params, cfg);
    if (!(z.r > 0) || !z.strictly_inside(params.alpha))
        return 0;
    double const a = std::abs(params.alpha);
    double const sgn = params.alpha > 0 ? 1 : -1;
    ComplexValue const w0 = 1.0 / z.value();
    double const a_max
        = std::abs(w0) * std::sin(a + sgn * std::arg(w0)) / std::sin(2 * a);
    ComplexValue const dir = std::polar(1.0, params.alpha);
    auto integrand = [&](double x) {
        if (!(x > 0) || x >= a_max)
            return 0.0;
        return f(w0 - x * dir) * gamma_density(params.p, params.s, x);
    };
    double rhs = quad::finite<1>(integrand, 0.0, a_max,
                                 std::max(cfg.rel_tol, 1e-13))
                 / std::pow(z.r, 4);
    return std::abs(f(z) - rhs);
}

/*!
 * |f_+(y) - y^{-2} int_0^inf f_+(-a - 1/y) gamma(a) da| for the unnormalised
 * profile; the sign of alpha is read from params (f_- uses +a - 1/y).
 */
inline double axis_stationary_residual(ModelParams const& params, double y,
                                       QuadratureConfig const& cfg = {})
{
    if (y == 0)
        throw DomainError("axis_stationary_residual requires y != 0");
    AxisDensity f(params, cfg);
    double const sgn = params.alpha > 0 ? 1 : -1;
    double const p = params.p, s = params.s;
    double const tol = std::max(cfg.rel_tol, 1e-13);
    auto integrand = [&](double x) {
        if (!(x > 0))
            return 0.0;
        return f.profile(-sgn * x - 1 / y) * gamma_density(p, s, x);
    };
    // The argument of the profile crosses zero at x = sgn/y when positive.
    double rhs = 0;
    double split = sgn / y;
    if (split > 0)
        rhs = quad::finite<0>(integrand, 0.0, split, tol)
              + quad::upper<0>(integrand, split, tol);
    else
        rhs = quad::upper<0>(integrand, 0.0, tol);
    return std::abs(f.profile(y) - rhs / (y * y));
}

}  // namespace rmprod
