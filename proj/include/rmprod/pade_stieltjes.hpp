// Random Stieltjes continued fractions and the decay rate of their
// truncation error.
#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "core.hpp"
#include "lyapunov.hpp"
#include "simulate.hpp"

namespace rmprod
{
//! Coefficients c_1..c_N of F(t) = 1/(c_1 + t/(c_2 + t/(c_3 + ...))).
struct StieltjesDraw
{
    double p = 1;
    double sigma = 1;
    std::vector<double> coeffs;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

inline StieltjesDraw make_stieltjes_draw(double p, double sigma, int n,
                                         RngStream& rng)
{
    ModelParams{p, sigma, 0}.validate();
    if (n < 1)
        throw PreconditionError("need at least one coefficient");
    StieltjesDraw d{p, sigma, {}, rng.seed(), rng.stream_id()};
    d.coeffs.resize(n);
    for (auto& c : d.coeffs)
        c = sample_gamma(p, sigma, rng);
    return d;
}

namespace detail
{
inline void check_stieltjes_args(StieltjesDraw const& d, int n, ComplexValue t)
{
    require_finite(t, "Stieltjes argument");
    if (t.imag() == 0 && t.real() < 0)
        throw DomainError("t must not lie on the negative real axis");
    if (n < 1 || n > static_cast<int>(d.coeffs.size()))
        throw PreconditionError("convergent index out of range");
}
}  // namespace detail

/*!
 * F_n(t) from the three-term recurrences A_k = c_k A_{k-1} + t A_{k-2} (and
 * the same for B) with A_0 = 0, A_1 = 1, B_0 = 1, B_1 = c_1; the pair is
 * rescaled whenever it grows large.
 */
inline ComplexValue convergent_forward(StieltjesDraw const& d, int n,
                                       ComplexValue t)
{
    detail::check_stieltjes_args(d, n, t);
    ComplexValue a_prev = 0, a = 1;
    ComplexValue b_prev = 1, b = d.coeffs[0];
    for (int k = 2; k <= n; ++k)
    {
        ComplexValue a_next = d.coeffs[k - 1] * a + t * a_prev;
        ComplexValue b_next = d.coeffs[k - 1] * b + t * b_prev;
        a_prev = a;
        a = a_next;
        b_prev = b;
        b = b_next;
        double big = std::max(std::abs(b), std::abs(b_prev));
        if (big > 1e100 || (big < 1e-100 && big > 0))
        {
            a /= big;
            a_prev /= big;
            b /= big;
            b_prev /= big;
        }
    }
    if (b == 0.0)
        throw DomainError("convergent has a vanishing denominator");
    return a / b;
}

//! F_n(t), innermost level first; falls back to the forward recurrence.
inline ComplexValue convergent(StieltjesDraw const& d, int n, ComplexValue t)
{
    detail::check_stieltjes_args(d, n, t);
    ComplexValue f = d.coeffs[n - 1];
    for (int k = n - 1; k >= 1; --k)
    {
        if (f == 0.0)
            return convergent_forward(d, n, t);
        f = d.coeffs[k - 1] + t / f;
    }
    if (f == 0.0)
        return convergent_forward(d, n, t);
    return 1.0 / f;
}

/*!
 * ln|F_N(t) - F_n(t)| for n = 1..N-1 without forming the difference.
 * With rho_k = B_k / B_{k-1} the convergent increments are
 *   d_k = F_k - F_{k-1} = (-1)^{k-1} t^{k-1} / (B_k B_{k-1}),
 * so d_{k+1}/d_k = -t / (rho_{k+1} rho_k) and the tail sum
 * E_n = d_{n+1} + ... + d_N = d_{n+1} e_n obeys e_n = 1 + (d_{n+2}/d_{n+1}) e_{n+1}.
 */
inline std::vector<double> log_truncation_errors(StieltjesDraw const& d,
                                                 ComplexValue t)
{
    int const N = static_cast<int>(d.coeffs.size());
    detail::check_stieltjes_args(d, N, t);
    if (N < 2)
        return {};
    std::vector<ComplexValue> rho(N + 1);
    rho[1] = d.coeffs[0];
    for (int k = 2; k <= N; ++k)
        rho[k] = d.coeffs[k - 1] + t / rho[k - 1];
    // ln|d_k| for k = 2..N; ln|B_k| = sum_j ln|rho_j|
    std::vector<double> log_b(N + 1, 0.0), log_d(N + 1, 0.0);
    for (int k = 1; k <= N; ++k)
        log_b[k] = log_b[k - 1] + std::log(std::abs(rho[k]));
    double const log_t = std::log(std::abs(t));
    for (int k = 2; k <= N; ++k)
        log_d[k] = (k - 1) * log_t - log_b[k] - log_b[k - 1];
    std::vector<double> out(N, 0.0);
    ComplexValue e = 1;  // e_{N-1}
    out[N - 1] = log_d[N];
    for (int n = N - 2; n >= 1; --n)
    {
        ComplexValue ratio = -t / (rho[n + 2] * rho[n + 1]);
        e = 1.0 + ratio * e;
        out[n] = log_d[n + 1] + std::log(std::abs(e));
    }
    out[0] = std::numeric_limits<double>::quiet_NaN();
    return out;
}

//! Parameters of the equivalent chain: a = c/sqrt|t|, s = sigma/sqrt|t|.
inline ModelParams stieltjes_chain_params(double p, double sigma,
                                          ComplexValue t)
{
    double r = std::abs(t);
    return {p, sigma / std::sqrt(r), -std::arg(t) / 2};
}

struct RateEstimate
{
    EstimateWithError slope;  //!< mean fitted slope of ln|F - F_n| vs n
    double target = 0;        //!< -2 lambda under the parameter mapping
    double min_r2 = 1;        //!< worst coefficient of determination
    bool noisy = false;       //!< some fit had R^2 < 0.9
    //! Mean of ln|F - F_n| over the draws, index n = 1..n_max (0 unused).
    std::vector<double> mean_log_error;
};

/*!
 * Fit the slope of ln|F - F_n| over n in [n_max/2, n_max] for `reps`
 * independent draws, with F_{4 n_max} standing in for the limit.
 */
inline RateEstimate rate_estimate(double p, double sigma, ComplexValue t,
                                  int n_max, int reps, RngStream& rng,
                                  QuadratureConfig const& cfg = {})
{
    if (n_max < 50 || reps < 10)
        throw PreconditionError("rate_estimate needs n_max >= 50, reps >= 10");
    require_finite(t, "Stieltjes argument");
    if (t == 0.0 || (t.imag() == 0 && t.real() < 0))
        throw DomainError("t must be non-zero and off the negative real axis");
    RateEstimate out;
    out.target = -2 * lyapunov_exact(stieltjes_chain_params(p, sigma, t), cfg)
                          .value;
    int const lo = n_max / 2;
    std::vector<double> slopes;
    out.mean_log_error.assign(n_max + 1, 0.0);
    out.mean_log_error[0] = std::numeric_limits<double>::quiet_NaN();
    for (int r = 0; r < reps; ++r)
    {
        auto draw = make_stieltjes_draw(p, sigma, 4 * n_max, rng);
        auto le = log_truncation_errors(draw, t);
        for (int n = 1; n <= n_max; ++n)
            out.mean_log_error[n] += le[n] / reps;
        double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
        int m = 0;
        for (int n = lo; n <= n_max; ++n, ++m)
        {
            double x = n, y = le[n];
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            syy += y * y;
        }
        double cxx = sxx - sx * sx / m, cxy = sxy - sx * sy / m,
               cyy = syy - sy * sy / m;
        double slope = cxy / cxx;
        double r2 = cyy > 0 ? cxy * cxy / (cxx * cyy) : 1.0;
        out.min_r2 = std::min(out.min_r2, r2);
        slopes.push_back(slope);
    }
    double mean = 0;
    for (double s : slopes)
        mean += s;
    mean /= reps;
    double ss = 0;
    for (double s : slopes)
        ss += (s - mean) * (s - mean);
    out.slope = {mean, std::sqrt(ss / (reps - 1) / reps), reps, rng.seed()};
    out.noisy = out.min_r2 < 0.9;
    return out;
}

}  // namespace rmprod
