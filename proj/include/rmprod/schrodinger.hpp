// One-dimensional Anderson model at energy E = 2 with gamma potential.
#pragma once

#include <array>
#include <cmath>
#include <string>

#include "core.hpp"
#include "lyapunov.hpp"
#include "simulate.hpp"

namespace rmprod
{
//! [[0, -1], [1, a]], mapping (y_{n-1}, y_n) to (y_n, y_{n+1}) from the right.
struct TransferMatrix
{
    double a = 0;

    std::array<double, 4> entries() const { return {0.0, -1.0, 1.0, a}; }
    double determinant() const
    {
        auto e = entries();
        return e[0] * e[3] - e[1] * e[2];
    }

    //! Row vector (y_{n-1}, y_n) times this matrix.
    std::array<double, 2> apply(std::array<double, 2> row) const
    {
        return {row[1], -row[0] + a * row[1]};
    }
};

struct LocalizationResult
{
    double rate = 0;    //!< inverse localisation length, nats per site
    double energy = 2;
    std::string spectrum_note
        = "spectrum (0, inf) almost surely for a potential supported on "
          "[0, inf); recorded, not verified";
};

//! lambda_{p,s}(pi/2) = Re d/dp ln K_p(2i/s).
inline LocalizationResult localization_rate(double p, double s,
                                            QuadratureConfig const& cfg = {})
{
    LocalizationResult out;
    out.rate = lyapunov_exact({p, s, half_pi}, cfg).value;
    return out;
}

/*!
 * Growth rate of y_{k+1} = a_k y_k - y_{k-1} with a_k from `draw`.  The pair
 * is rescaled by its larger component every 16 steps.
 */
template<class Draw>
EstimateWithError wavefunction_growth_with(Draw&& draw, long long n,
                                           double y0 = 1, double y1 = 0,
                                           std::uint64_t seed = 0)
{
    if (n < 10000)
        throw PreconditionError("wavefunction_growth needs n >= 1e4");
    if (y0 == 0 && y1 == 0)
        throw PreconditionError("initial vector must be non-zero");
    int const batches = BatchMeans::default_batches;
    long long const len = n / batches;
    std::array<double, 2> y{y0, y1};
    double log_scale = 0;
    auto log_norm = [&] { return log_scale + std::log(std::hypot(y[0], y[1])); };
    double const start = log_norm();
    double prev = start;
    std::vector<double> means(batches);
    long long k = 0;
    for (int b = 0; b < batches; ++b)
    {
        long long steps = b + 1 < batches ? len : n - len * (batches - 1);
        for (long long i = 0; i < steps; ++i, ++k)
        {
            y = TransferMatrix{draw()}.apply(y);
            if ((k & 15) == 15)
            {
                double big = std::max(std::abs(y[0]), std::abs(y[1]));
                y[0] /= big;
                y[1] /= big;
                log_scale += std::log(big);
            }
        }
        double now = log_norm();
        means[b] = (now - prev) / double(steps);
        prev = now;
    }
    return BatchMeans::from_batches(means, (prev - start) / double(n), n,
                                    seed);
}

inline EstimateWithError wavefunction_growth(double p, double s, long long n,
                                             RngStream& rng, double y0 = 1,
                                             double y1 = 0)
{
    ModelParams{p, s, half_pi}.validate();
    return wavefunction_growth_with(
        [&] { return sample_gamma(p, s, rng); }, n, y0, y1, rng.seed());
}

}  // namespace rmprod
