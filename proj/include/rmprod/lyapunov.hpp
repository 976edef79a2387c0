// Lyapunov exponent: exact formula, integer closed forms, recurrence in the
// order, measure integrals, both asymptotic regimes and their resummation.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "core.hpp"
#include "invariant_measure.hpp"
#include "quadrature.hpp"
#include "special_functions.hpp"

namespace rmprod
{
enum class LyapunovMethod
{
    exact,
    integer_closed_form,
    recurrence,
    quadrature_of_measure,
    large_s_series,
    small_s_series,
    pade_resummed,
    axis_series,
    monte_carlo
};

inline char const* to_string(LyapunovMethod m)
{
    switch (m)
    {
        case LyapunovMethod::exact: return "exact";
        case LyapunovMethod::integer_closed_form: return "integer_closed_form";
        case LyapunovMethod::recurrence: return "recurrence";
        case LyapunovMethod::quadrature_of_measure:
            return "quadrature_of_measure";
        case LyapunovMethod::large_s_series: return "large_s_series";
        case LyapunovMethod::small_s_series: return "small_s_series";
        case LyapunovMethod::pade_resummed: return "pade_resummed";
        case LyapunovMethod::axis_series: return "axis_series";
        case LyapunovMethod::monte_carlo: return "monte_carlo";
    }
    return "unknown";
}

//! Exponent in nats per matrix factor, tagged with how it was obtained.
struct LyapunovValue
{
    double value = 0;
    LyapunovMethod method = LyapunovMethod::exact;
};

enum class SeriesKind
{
    large_s,
    small_s,
    axis_density_numerator,
    axis_density_denominator
};

/*!
 * Coefficients of an expansion.  For the power series (small s and the
 * axis-density pair) coeffs[k] multiplies s^k, so coeffs.size() is
 * order + 1 and coeffs[0] = 0.  For large s the entries are successive
 * corrections: ln s + psi(p), the leading remainder, then refinements.
 */
struct SeriesExpansion
{
    SeriesKind kind = SeriesKind::small_s;
    std::vector<double> coeffs;
    int order = 0;

    double evaluate(double s) const
    {
        if (kind == SeriesKind::large_s)
        {
            double total = 0;
            for (double c : coeffs)
                total += c;
            return total;
        }
        double total = 0;
        for (auto k = coeffs.size(); k-- > 0;)
            total = total * s + coeffs[k];
        return total;
    }
};

struct AsymptoticResult
{
    SeriesExpansion series;
    LyapunovValue value;
};

//---------------------------------------------------------------------------//
// Exact evaluation
//---------------------------------------------------------------------------//
//! lambda = Re Lambda_p(2 e^{i alpha}/s) with Lambda_p = d/dp ln K_p.
inline LyapunovValue lyapunov_exact(ModelParams const& params,
                                    QuadratureConfig const& cfg = {})
{
    params.validate();
    ComplexValue w = bessel_argument(params.s, params.alpha);
    double v = bessel_k_log_derivative(params.p, w, cfg).real();
    return {v, LyapunovMethod::exact};
}

/*!
 * Integer order: d/dp K_p at p = n is a finite combination of K_k, k < n,
 * so lambda is a finite sum of Bessel ratios.
 */
inline LyapunovValue lyapunov_integer(int n, double s, double alpha,
                                      QuadratureConfig const& cfg = {})
{
    if (n < 1 || n > 16)
        throw DomainError("lyapunov_integer requires 1 <= n <= 16");
    ModelParams{double(n), s, alpha}.validate();
    ComplexValue w = bessel_argument(s, alpha);
    ComplexValue total = 0;
    for (int k = 0; k < n; ++k)
    {
        double c = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0))
                   / (2.0 * (n - k));
        total += c * std::pow(0.5 * w, double(k - n))
                 * bessel_k_ratio(k, n, w, cfg);
    }
    return {total.real(), LyapunovMethod::integer_closed_form};
}

//! Schrodinger case (alpha = pi/2) of the integer formula in terms of J, Y.
inline LyapunovValue lyapunov_integer_axis(int n, double s,
                                           QuadratureConfig const& cfg = {})
{
    if (n < 1 || n > 16)
        throw DomainError("lyapunov_integer_axis requires 1 <= n <= 16");
    ModelParams{double(n), s, half_pi}.validate();
    double const x = 2 / s;
    auto [jn, yn] = bessel_jy(n, x, cfg);
    double const den = jn * jn + yn * yn;
    double total = 0;
    for (int k = 0; k < n; ++k)
    {
        auto [jk, yk] = bessel_jy(k, x, cfg);
        double c = std::exp((n - k) * std::log(s) + std::lgamma(n + 1.0)
                            - std::lgamma(k + 1.0))
                   / (2.0 * (n - k));
        total += c * (jk * jn + yk * yn) / den;
    }
    return {total, LyapunovMethod::integer_closed_form};
}

/*!
 * Lambda_p(w) by the upward recurrence in the order.  The two starting
 * values are evaluated directly at frac(p) + 1 and frac(p) + 2; Bessel
 * ratios r_q = K_q / K_{q-1} follow from r_{q+1} = 2q/w + 1/r_q.
 */
inline ComplexValue lambda_recurrence(double p, ComplexValue w,
                                      QuadratureConfig const& cfg = {})
{
    if (!(p > 2))
        throw DomainError("lambda_recurrence requires p > 2");
    check_bessel_domain(p, w);
    double const q0 = p - std::floor(p) + 1;
    ComplexValue lam_prev = bessel_k_log_derivative(q0, w, cfg);
    ComplexValue lam = bessel_k_log_derivative(q0 + 1, w, cfg);
    ComplexValue r = bessel_k_ratio(q0 + 1, q0, w, cfg);
    int const steps = static_cast<int>(std::lround(p - q0 - 1));
    double q = q0 + 1;
    for (int i = 0; i < steps; ++i)
    {
        ComplexValue r_next = 2 * q / w + 1.0 / r;
        ComplexValue next = (2 * q / w) / r_next * lam
                            + lam_prev / (r_next * r) + (2.0 / w) / r_next;
        lam_prev = lam;
        lam = next;
        r = r_next;
        q += 1;
    }
    return lam;
}

inline LyapunovValue lyapunov_recurrence(ModelParams const& params,
                                         QuadratureConfig const& cfg = {})
{
    params.validate();
    ComplexValue w = bessel_argument(params.s, params.alpha);
    return {lambda_recurrence(params.p, w, cfg).real(),
            LyapunovMethod::recurrence};
}

//---------------------------------------------------------------------------//
// Lyapunov exponent as an integral against an invariant density
//---------------------------------------------------------------------------//
//! Which row of the random matrix carries the randomness.
enum class MeasureCase
{
    row_bottom_random,  //!< lambda = -int ln|z| dnu
    row_top_random      //!< lambda = +int ln|z| dnu
};

//! Density on an interval of the real line, given pointwise.
class LineDensity
{
  public:
    LineDensity(std::function<double(double)> f,
                double lo = -std::numeric_limits<double>::infinity(),
                double hi = std::numeric_limits<double>::infinity())
        : f_(std::move(f)), lo_(lo), hi_(hi)
    {
        if (!(lo < hi))
            throw DomainError("LineDensity: empty support");
    }

    double operator()(double x) const
    {
        return (x < lo_ || x > hi_) ? 0.0 : f_(x);
    }

    //! Integral of g f, split at 0 so that log singularities sit at an end.
    template<class G>
    auto integrate(G&& g, QuadratureConfig const& cfg = {}) const
    {
        double const tol = std::max(cfg.rel_tol, 1e-13);
        auto h = [&](double x) { return g(x) * f_(x); };
        using R = decltype(h(1.0));
        auto piece = [&](double a, double b) -> R {
            if (!(a < b))
                return R{};
            if (std::isinf(a) && std::isinf(b))
                return quad::whole_line<0>(h, tol);
            if (std::isinf(b))
                return quad::upper<0>(h, a, tol);
            if (std::isinf(a))
                return quad::upper<0>([&](double x) { return h(-x); }, -b,
                                      tol);
            return quad::finite<0>(h, a, b, tol);
        };
        if (lo_ < 0 && hi_ > 0)
            return piece(lo_, 0.0) + piece(0.0, hi_);
        return piece(lo_, hi_);
    }

  private:
    std::function<double(double)> f_;
    double lo_, hi_;
};

/*!
 * Image of a measure under z -> 1/z: if nu has density f then this one has
 * density |z|^{-4} f(1/z) (cone) or y^{-2} f(-1/y) (axis, with y = Im z).
 */
template<class D>
class InverseMeasure
{
  public:
    explicit InverseMeasure(D const& base) : base_(base) {}

    template<class G>
    auto integrate(G&& g, QuadratureConfig const& cfg = {}) const
    {
        return base_.integrate(
            [&](auto z) {
                using T = decltype(z);
                return g(T(1) / z);
            },
            cfg);
    }

  private:
    D const& base_;
};

//! lambda from an invariant density via the one-random-row formula.
template<class D>
LyapunovValue lyapunov_from_measure(D const& density, MeasureCase which,
                                    QuadratureConfig const& cfg = {})
{
    double sign = which == MeasureCase::row_bottom_random ? -1.0 : 1.0;
    auto log_abs = [](auto z) -> double {
        double a = std::abs(z);
        return a > 0 ? std::log(a) : 0.0;
    };
    double v = std::real(density.integrate(log_abs, cfg));
    if (!std::isfinite(v))
        throw QuadratureError("log-moment of the measure is not finite");
    return {sign * v, LyapunovMethod::quadrature_of_measure};
}

/*!
 * Lloyd's model: Cauchy entries centred at z.  The invariant law is Cauchy
 * centred at u with u + 1/u = z, |u| > 1, and lambda = ln|u|.
 */
inline double lloyd_lyapunov(ComplexValue z)
{
    require_finite(z, "lloyd_lyapunov");
    if (!(z.imag() > 0))
        throw DomainError("lloyd_lyapunov requires Im z > 0");
    ComplexValue root = std::sqrt(z * z - 4.0);
    ComplexValue u1 = 0.5 * (z + root);
    ComplexValue u2 = 0.5 * (z - root);
    ComplexValue u = std::abs(u1) >= std::abs(u2) ? u1 : u2;
    if (!(std::abs(u) > 1))
        throw DomainError("lloyd_lyapunov: degenerate root |u| = 1");
    return std::log(std::abs(u));
}

//---------------------------------------------------------------------------//
// Large s
//---------------------------------------------------------------------------//
namespace detail
{
/*!
 * Lambda_p(w) from the ascending series of I_{+-p}, truncated after
 * `terms` powers of (w/2)^2.  Non-integer p only.
 */
inline ComplexValue lambda_ascending(double p, ComplexValue w, int terms)
{
    using boost::math::digamma;
    using boost::math::tgamma;
    ComplexValue const log_half = std::log(0.5 * w);
    ComplexValue const x = 0.25 * w * w;
    ComplexValue const xp = std::exp(2 * p * log_half);
    ComplexValue num = 0, den = 0, xk = 1;
    double fact = 1;
    for (int k = 0; k < terms; ++k)
    {
        if (k > 0)
            fact *= k;
        double am = 1 / (fact * tgamma(k - p + 1));
        double bm = digamma(k - p + 1) * am;
        double ap = 1 / (fact * tgamma(k + p + 1));
        double bp = digamma(k + p + 1) * ap;
        num += (-am * log_half + bm) * xk - (ap * log_half - bp) * xk * xp;
        den += am * xk - ap * xk * xp;
        xk *= x;
    }
    return -pi / std::tan(p * pi) + num / den;
}

//! Leading remainder beyond ln s + psi(p).
inline double large_s_leading_remainder(ModelParams const& params)
{
    double const p = params.p, s = params.s, a = params.alpha;
    double const ls = std::log(s);
    if (p == 1)
        return 2 * std::cos(2 * a) * ls * ls / (s * s);
    if (p > 1)
        return std::cos(2 * a) / ((p - 1) * (p - 1) * s * s);
    // p < 1: real part of 2 Gamma(1-p)/Gamma(1+p) ln(2/w) (w/2)^{2p}, which
    // is of size ln s / s^{2p}; ln(2/w) = ln s - i alpha.
    double g = std::tgamma(1 - p) / std::tgamma(1 + p);
    return 2 * g * (std::cos(2 * p * a) * ls + a * std::sin(2 * p * a))
           / std::pow(s, 2 * p);
}
}  // namespace detail

/*!
 * Large-s expansion lambda = ln s + psi(p) + R.  order 1 keeps the
 * logarithm, order 2 adds the leading remainder, and orders 3..6 (non-integer
 * p) add the corrections from the ascending series with order - 1 terms.
 */
inline AsymptoticResult asympt_large_s(ModelParams const& params, int order)
{
    params.validate();
    if (order < 1 || order > 6)
        throw UnsupportedError("large-s expansion implemented for orders 1..6");
    bool const integer_p = detail::is_integer_order(params.p);
    if (integer_p && order > 2)
        throw UnsupportedError(
            "large-s refinements beyond the leading remainder need "
            "non-integer p");
    SeriesExpansion series{SeriesKind::large_s, {}, order};
    series.coeffs.push_back(std::log(params.s) + digamma(params.p));
    if (order >= 2)
        series.coeffs.push_back(detail::large_s_leading_remainder(params));
    ComplexValue const w = bessel_argument(params.s, params.alpha);
    double sum = series.coeffs[0] + (order >= 2 ? series.coeffs[1] : 0);
    for (int j = 3; j <= order; ++j)
    {
        double v = detail::lambda_ascending(params.p, w, j - 1).real();
        series.coeffs.push_back(v - sum);
        sum = v;
    }
    return {series, {series.evaluate(params.s), LyapunovMethod::large_s_series}};
}

//---------------------------------------------------------------------------//
// Small s
//---------------------------------------------------------------------------//
//! l_1..l_5 as closed forms in p and alpha; index = power of s.
inline std::vector<double> small_s_table(double p, double alpha)
{
    double const p2 = p * p;
    return {0,
            p * std::cos(alpha) / 2,
            -p * std::cos(2 * alpha) / 8,
            -p * (4 * p2 - 13) * std::cos(3 * alpha) / 192,
            p * (4 * p2 - 7) * std::cos(4 * alpha) / 128,
            p * (-920 * p2 + 48 * p2 * p2 + 1187) * std::cos(5 * alpha)
                / 20480};
}

/*!
 * l_1..l_order from the large-argument series
 *   K_p(w) ~ sqrt(pi/2w) e^{-w} sum_m (p,m) (2w)^{-m},
 *   (p,m) = prod_{j=1}^m (4p^2 - (2j-1)^2) / (4^m m!).
 * Lambda_p is the ratio of the p-derivative of the sum to the sum; with
 * 1/(2w) = s e^{-i alpha}/4 the real part of the x^n coefficient times
 * 4^{-n} cos(n alpha) is l_n.
 */
inline std::vector<double> small_s_generated(double p, double alpha, int order)
{
    if (!(p > 0))
        throw DomainError("small-s series requires p > 0");
    if (order < 1 || order > 64)
        throw UnsupportedError("small-s generator supports orders 1..64");
    int const n = order;
    std::vector<double> h(n + 1), dh(n + 1);
    double const p2 = 4 * p * p;
    h[0] = 1;
    dh[0] = 0;
    for (int m = 1; m <= n; ++m)
    {
        double f = (p2 - double(2 * m - 1) * (2 * m - 1)) / (4.0 * m);
        // product rule on the new factor (d/dp of 4p^2 is 8p)
        dh[m] = dh[m - 1] * f + h[m - 1] * (8 * p) / (4.0 * m);
        h[m] = h[m - 1] * f;
    }
    // q = dh / h as power series (h[0] = 1)
    std::vector<double> q(n + 1, 0.0);
    for (int k = 0; k <= n; ++k)
    {
        double v = dh[k];
        for (int j = 1; j <= k; ++j)
            v -= h[j] * q[k - j];
        q[k] = v;
    }
    std::vector<double> l(n + 1, 0.0);
    for (int k = 1; k <= n; ++k)
        l[k] = q[k] * std::pow(0.25, k) * std::cos(k * alpha);
    return l;
}

inline AsymptoticResult asympt_small_s(ModelParams const& params, int order)
{
    params.validate();
    if (order < 1 || order > 64)
        throw UnsupportedError("small-s expansion implemented for orders 1..64");
    std::vector<double> c;
    if (order <= 5)
    {
        c = small_s_table(params.p, params.alpha);
        c.resize(order + 1);
    }
    else
    {
        c = small_s_generated(params.p, params.alpha, order);
    }
    SeriesExpansion series{SeriesKind::small_s, std::move(c), order};
    return {series, {series.evaluate(params.s), LyapunovMethod::small_s_series}};
}

//---------------------------------------------------------------------------//
// Pade resummation
//---------------------------------------------------------------------------//
enum class PadeFallback
{
    reduce_degree,  //!< retry [L-1/M-1] on a singular system
    raise           //!< throw DegenerateTableError
};

/*!
 * [L/M] approximant of a power series evaluated at s.  Needs coefficients
 * c_0..c_{L+M}.
 */
inline double pade_evaluate(std::vector<double> const& c, double s, int L,
                            int M, PadeFallback fallback =
                                       PadeFallback::reduce_degree)
{
    if (L < 0 || M < 0)
        throw PreconditionError("Pade degrees must be non-negative");
    if (static_cast<std::size_t>(L + M) >= c.size())
        throw PreconditionError("Pade [L/M] needs L + M + 1 coefficients");
    auto coef = [&](int i) { return i < 0 ? 0.0 : c[i]; };
    std::vector<double> b(M + 1, 0.0);
    b[0] = 1;
    if (M > 0)
    {
        Eigen::MatrixXd A(M, M);
        Eigen::VectorXd rhs(M);
        for (int i = 1; i <= M; ++i)
        {
            for (int j = 1; j <= M; ++j)
                A(i - 1, j - 1) = coef(L + i - j);
            rhs(i - 1) = -coef(L + i);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        double scale = A.cwiseAbs().maxCoeff();
        lu.setThreshold(1e-13);
        if (scale == 0 || lu.rank() < M)
        {
            if (fallback == PadeFallback::raise || L == 0)
                throw DegenerateTableError("singular Pade system");
            return pade_evaluate(c, s, L - 1, M - 1, fallback);
        }
        Eigen::VectorXd x = lu.solve(rhs);
        for (int j = 1; j <= M; ++j)
            b[j] = x(j - 1);
    }
    double num = 0, den = 0, den_scale = 0, sp = 1;
    for (int i = 0; i <= std::max(L, M); ++i)
    {
        if (i <= L)
        {
            double a = 0;
            for (int j = 0; j <= std::min(i, M); ++j)
                a += b[j] * coef(i - j);
            num += a * sp;
        }
        if (i <= M)
        {
            den += b[i] * sp;
            den_scale += std::abs(b[i] * sp);
        }
        sp *= s;
    }
    if (std::abs(den) <= 1e-12 * std::max(1.0, den_scale))
        throw PoleError("Pade denominator vanishes at the evaluation point");
    return num / den;
}

inline LyapunovValue pade_resum(SeriesExpansion const& series, double s, int L,
                                int M,
                                PadeFallback fallback
                                = PadeFallback::reduce_degree)
{
    if (series.kind == SeriesKind::large_s)
        throw PreconditionError("Pade resummation needs a power series");
    if (L + M > series.order)
        throw PreconditionError("Pade [L/M] needs L + M <= series order");
    return {pade_evaluate(series.coeffs, s, L, M, fallback),
            LyapunovMethod::pade_resummed};
}

//---------------------------------------------------------------------------//
// Small-s expansion of the axis density
//---------------------------------------------------------------------------//
/*!
 * Layers of u(y) = y^{-2} f_+(-1/y) ~ sum_n u^{(n)}(y) s^n:
 *   u^{(2n-1)} = sum_k layer[k] (1+y^2)^{-k},
 *   u^{(2n)}   = sum_k layer[k] y (1+y^2)^{-k}.
 * layers[n][k] holds u_k^{(n)}; index 0 of each is unused.
 */
struct AxisSeries
{
    std::vector<std::vector<double>> layers;
    std::vector<double> alpha_k;  //!< int_0^inf (1+y^2)^{-k} dy
    std::vector<double> beta_k;   //!< int_0^inf ln y (1+y^2)^{-k} dy
    SeriesExpansion denominator;  //!< int u dy
    SeriesExpansion numerator;    //!< int ln|y| u dy

    //! lambda(pi/2) ~ numerator / denominator at small s.
    LyapunovValue estimate(double s) const
    {
        return {numerator.evaluate(s) / denominator.evaluate(s),
                LyapunovMethod::axis_series};
    }
};

inline AxisSeries axis_density_series(double p, int order)
{
    if (!(p > 0))
        throw DomainError("axis_density_series requires p > 0");
    if (order < 1 || order > 12)
        throw UnsupportedError("axis density series implemented up to order 12");
    int const kmax = 2 * order + 2;
    std::vector<std::vector<double>> u(order + 1,
                                       std::vector<double>(kmax + 1, 0.0));
    u[1][1] = 1;
    for (int m = 1; m < order; ++m)
    {
        auto const& src = u[m];
        auto& dst = u[m + 1];
        if (m % 2 == 1)
        {
            // odd layer m = 2n-1 -> even layer 2n
            int n = (m + 1) / 2;
            dst[n + 1] = (p - 1 + 2 * n) * src[n];
            for (int k = n + 2; k <= 4 * n - 2; ++k)
                dst[k] = (p - 3 + 2 * k) * src[k - 1] - 2 * (k - 2) * src[k - 2];
            dst[4 * n - 1] = -2 * (4 * n - 3) * src[4 * n - 3];
        }
        else
        {
            // even layer m = 2n -> odd layer 2n+1
            int n = m / 2;
            dst[n + 1] = (p + 2 * n) * src[n + 1];
            dst[n + 2] = (p + 2 * n + 2) * src[n + 2] - (p + 2 + 4 * n) * src[n + 1];
            for (int k = n + 3; k <= 4 * n - 1; ++k)
                dst[k] = (p - 2 + 2 * k) * src[k] + (6 - p - 4 * k) * src[k - 1]
                         + 2 * (k - 2) * src[k - 2];
            dst[4 * n] = (6 - p - 16 * n) * src[4 * n - 1]
                         + 2 * (4 * n - 2) * src[4 * n - 2];
            dst[4 * n + 1] = (8 * n - 2) * src[4 * n - 1];
        }
    }
    AxisSeries out;
    out.alpha_k.assign(kmax + 1, 0.0);
    out.beta_k.assign(kmax + 1, 0.0);
    out.alpha_k[1] = half_pi;
    out.beta_k[1] = 0;
    for (int k = 1; k < kmax; ++k)
    {
        out.alpha_k[k + 1] = (1 - 0.5 / k) * out.alpha_k[k];
        out.beta_k[k + 1]
            = out.beta_k[k] - (out.alpha_k[k] + out.beta_k[k]) / (2.0 * k);
    }
    out.denominator = {SeriesKind::axis_density_denominator,
                       std::vector<double>(order + 1, 0.0), order};
    out.numerator = {SeriesKind::axis_density_numerator,
                     std::vector<double>(order + 1, 0.0), order};
    // Even layers are odd in y and drop out of both integrals.
    for (int m = 1; m <= order; m += 2)
    {
        double d = 0, nsum = 0;
        for (int k = 1; k <= kmax; ++k)
        {
            d += u[m][k] * out.alpha_k[k];
            nsum += u[m][k] * out.beta_k[k];
        }
        out.denominator.coeffs[m] = 2 * d;
        out.numerator.coeffs[m] = 2 * nsum;
    }
    out.layers = std::move(u);
    return out;
}

}  // namespace rmprod
