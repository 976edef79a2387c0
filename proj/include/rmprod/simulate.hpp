// Monte Carlo for the continued-fraction chain and the matrix product.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "core.hpp"

namespace rmprod
{
//---------------------------------------------------------------------------//
/*!
 * Reproducible random stream.  (seed, stream_id) fully determines the draws;
 * both words feed a seed_seq so distinct streams start from unrelated
 * engine states.
 */
class RngStream
{
  public:
    using Engine = std::mt19937_64;

    explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0)
        : seed_(seed), stream_(stream_id)
    {
        std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32),
                          std::uint32_t(stream_id),
                          std::uint32_t(stream_id >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }
    Engine& engine() { return engine_; }

    double uniform()
    {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    Engine engine_;
};

//! Draw from the gamma law with shape p and scale s.
inline double sample_gamma(double p, double s, RngStream& rng)
{
    return std::gamma_distribution<double>(p, s)(rng.engine());
}

//---------------------------------------------------------------------------//
//! Monte Carlo estimate with a batch-means standard error.
struct EstimateWithError
{
    double value = 0;
    double std_error = 0;
    long long n_samples = 0;
    std::uint64_t seed = 0;

    //! Sample-size weighted combination of independent estimates.
    EstimateWithError merge(EstimateWithError const& other) const
    {
        if (n_samples == 0)
            return other;
        if (other.n_samples == 0)
            return *this;
        double const n1 = double(n_samples), n2 = double(other.n_samples);
        double const n = n1 + n2;
        EstimateWithError out;
        out.value = (n1 * value + n2 * other.value) / n;
        out.std_error = std::sqrt(n1 * n1 * std_error * std_error
                                  + n2 * n2 * other.std_error
                                        * other.std_error)
                        / n;
        out.n_samples = n_samples + other.n_samples;
        out.seed = std::min(seed, other.seed);
        return out;
    }
};

//! Accumulates per-batch sums; the last batch takes the remainder.
class BatchMeans
{
  public:
    static constexpr int default_batches = 50;

    explicit BatchMeans(long long n, int batches = default_batches)
        : batches_(batches), sums_(batches, 0.0), counts_(batches, 0)
    {
        if (batches < 30 || n < batches)
            throw PreconditionError("batch means needs >= 30 batches of data");
        len_ = n / batches;
    }

    void add(double x)
    {
        int b = static_cast<int>(std::min<long long>(i_ / len_, batches_ - 1));
        sums_[b] += x;
        ++counts_[b];
        ++i_;
    }

    //! Per-batch means (only meaningful once all n values were added).
    std::vector<double> batch_values() const
    {
        std::vector<double> out(batches_);
        for (int b = 0; b < batches_; ++b)
            out[b] = sums_[b] / double(counts_[b]);
        return out;
    }

    EstimateWithError result(std::uint64_t seed = 0) const
    {
        double total = 0;
        for (double s : sums_)
            total += s;
        return from_batches(batch_values(), total / double(i_), i_, seed);
    }

    static EstimateWithError from_batches(std::vector<double> const& means,
                                          double value, long long n,
                                          std::uint64_t seed)
    {
        double m = 0;
        for (double x : means)
            m += x;
        m /= double(means.size());
        double ss = 0;
        for (double x : means)
            ss += (x - m) * (x - m);
        double const b = double(means.size());
        return {value, std::sqrt(ss / (b - 1) / b), n, seed};
    }

  private:
    int batches_;
    long long len_ = 1;
    long long i_ = 0;
    std::vector<double> sums_;
    std::vector<long long> counts_;
};

//---------------------------------------------------------------------------//
// Matrix products
//---------------------------------------------------------------------------//
//! Row-major 2x2 complex matrix.
using Matrix2 = std::array<ComplexValue, 4>;

inline Matrix2 multiply(Matrix2 const& a, Matrix2 const& b)
{
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

//! Largest singular value of a 2x2 matrix.
inline double operator_norm(Matrix2 const& m)
{
    double f2 = std::norm(m[0]) + std::norm(m[1]) + std::norm(m[2])
                + std::norm(m[3]);
    double det = std::abs(m[0] * m[3] - m[1] * m[2]);
    double disc = std::max(0.0, f2 * f2 - 4 * det * det);
    return std::sqrt(0.5 * (f2 + std::sqrt(disc)));
}

//! The random factor [[0, 1], [1, a e^{i alpha}]].
inline Matrix2 random_factor(double a, double alpha)
{
    return {0.0, 1.0, 1.0, std::polar(a, alpha)};
}

/*!
 * Running product M_n = A_1 ... A_n stored as a rescaled matrix and the
 * logarithm of the extracted scale.  After every step the largest entry has
 * modulus 1, so the stored operator norm lies in [1, 2].
 */
class ProductAccumulator
{
  public:
    ProductAccumulator() : m_{1.0, 0.0, 0.0, 1.0} {}

    void multiply_right(Matrix2 const& a)
    {
        m_ = multiply(m_, a);
        renormalize();
    }

    //! Specialised step for random_factor(a, alpha) with b = a e^{i alpha}.
    void multiply_right_factor(ComplexValue b)
    {
        m_ = {m_[1], m_[0] + b * m_[1], m_[3], m_[2] + b * m_[3]};
        renormalize();
    }

    Matrix2 const& stored() const { return m_; }
    double log_scale() const { return log_scale_; }
    long long steps() const { return steps_; }

    double log_norm() const { return log_scale_ + std::log(operator_norm(m_)); }

    //! e^{log_scale} times the stored matrix.
    Matrix2 product() const
    {
        double f = std::exp(log_scale_);
        return {f * m_[0], f * m_[1], f * m_[2], f * m_[3]};
    }

  private:
    void renormalize()
    {
        double big = std::max({std::abs(m_[0]), std::abs(m_[1]),
                               std::abs(m_[2]), std::abs(m_[3])});
        for (auto& x : m_)
            x /= big;
        log_scale_ += std::log(big);
        ++steps_;
    }

    Matrix2 m_;
    double log_scale_ = 0;
    long long steps_ = 0;
};

//---------------------------------------------------------------------------//
// The chain Z_k = 1 / (Z_{k-1} + a_k e^{i alpha})
//---------------------------------------------------------------------------//
struct ChainResult
{
    ComplexValue final_state;
    std::vector<ComplexValue> trajectory;
};

namespace detail
{
inline void check_chain_start(ModelParams const& params, ComplexValue z0)
{
    params.validate();
    require_finite(z0, "chain start");
    if (params.on_axis())
    {
        if (z0.real() != 0)
            throw DomainError("axis chain must start on the imaginary axis");
        return;
    }
    double a = std::abs(params.alpha);
    if (a == 0)
    {
        if (!(z0.imag() == 0 && z0.real() >= 0))
            throw DomainError("alpha = 0 chain must start on [0, inf)");
        return;
    }
    if (z0 != 0.0 && !(std::abs(std::arg(z0)) <= a))
        throw DomainError("chain start lies outside the cone");
}

/*!
 * Single chain step object: on the imaginary axis the state is the real
 * coordinate Y with Z = iY and Y_k = -1 / (+-a_k + Y_{k-1}).
 */
class ChainStepper
{
  public:
    ChainStepper(ModelParams const& params, ComplexValue z0)
        : params_(params),
          axis_(params.on_axis()),
          sign_(params.alpha > 0 ? 1.0 : -1.0),
          rot_(std::polar(1.0, params.alpha)),
          z_(z0),
          y_(z0.imag())
    {
    }

    template<class Draw>
    void step(Draw&& draw)
    {
        double a = draw();
        if (axis_)
        {
            double d = sign_ * a + y_;
            while (d == 0)
                d = sign_ * draw() + y_;
            y_ = -1 / d;
            return;
        }
        ComplexValue d = z_ + a * rot_;
        while (d == 0.0)
            d = z_ + draw() * rot_;
        z_ = 1.0 / d;
    }

    ComplexValue state() const { return axis_ ? ComplexValue(0, y_) : z_; }
    double log_abs() const { return std::log(axis_ ? std::abs(y_) : std::abs(z_)); }

  private:
    ModelParams params_;
    bool axis_;
    double sign_;
    ComplexValue rot_;
    ComplexValue z_;
    double y_;
};
}  // namespace detail

inline ChainResult iterate_chain(ModelParams const& params, ComplexValue z0,
                                 long long n, RngStream& rng,
                                 bool keep_trajectory = false)
{
    detail::check_chain_start(params, z0);
    if (n < 0)
        throw PreconditionError("iteration count must be non-negative");
    detail::ChainStepper chain(params, z0);
    auto draw = [&] { return sample_gamma(params.p, params.s, rng); };
    ChainResult out;
    if (keep_trajectory)
        out.trajectory.reserve(static_cast<std::size_t>(n));
    for (long long k = 0; k < n; ++k)
    {
        chain.step(draw);
        if (keep_trajectory)
            out.trajectory.push_back(chain.state());
    }
    out.final_state = chain.state();
    return out;
}

//! Default starting point inside S_alpha.
inline ComplexValue default_chain_start(ModelParams const& params)
{
    return params.on_axis() ? ComplexValue(0, 1) : ComplexValue(1, 0);
}

inline constexpr long long default_burn_in = 1000;

//---------------------------------------------------------------------------//
// Estimators
//---------------------------------------------------------------------------//
/*!
 * (1/n) ln |A_1(alpha) ... A_n(alpha)| from a renormalised product, with the
 * entries a_k supplied by `draw`.  The standard error comes from the
 * log-norm increments over 50 batches.
 */
template<class Draw>
EstimateWithError furstenberg_estimate_with(Draw&& draw, double alpha,
                                            long long n, std::uint64_t seed = 0)
{
    if (n < 10000)
        throw PreconditionError("furstenberg_estimate needs n >= 1e4");
    int const batches = BatchMeans::default_batches;
    long long const len = n / batches;
    ComplexValue const rot = std::polar(1.0, alpha);
    ProductAccumulator acc;
    std::vector<double> means(batches);
    double prev = 0;
    for (int b = 0; b < batches; ++b)
    {
        long long steps = b + 1 < batches ? len : n - len * (batches - 1);
        for (long long k = 0; k < steps; ++k)
            acc.multiply_right_factor(draw() * rot);
        double now = acc.log_norm();
        means[b] = (now - prev) / double(steps);
        prev = now;
    }
    return BatchMeans::from_batches(means, prev / double(n), n, seed);
}

inline EstimateWithError furstenberg_estimate(ModelParams const& params,
                                              long long n, RngStream& rng)
{
    params.validate();
    return furstenberg_estimate_with(
        [&] { return sample_gamma(params.p, params.s, rng); }, params.alpha,
        n, rng.seed());
}

//! -(1/n) sum ln|Z_k| along the chain after burn-in.
inline EstimateWithError ergodic_estimate(ModelParams const& params,
                                          long long n, RngStream& rng,
                                          long long burn_in = default_burn_in)
{
    params.validate();
    detail::ChainStepper chain(params, default_chain_start(params));
    auto draw = [&] { return sample_gamma(params.p, params.s, rng); };
    for (long long k = 0; k < burn_in; ++k)
        chain.step(draw);
    BatchMeans bm(n);
    for (long long k = 0; k < n; ++k)
    {
        chain.step(draw);
        bm.add(-chain.log_abs());
    }
    return bm.result(rng.seed());
}

//! Chain estimates of E Z and of E|Z - EZ|^2.
struct ChainMoments
{
    EstimateWithError mean_re;
    EstimateWithError mean_im;
    EstimateWithError second;  //!< E|Z|^2
    EstimateWithError variance;
};

inline ChainMoments chain_moments(ModelParams const& params, long long n,
                                  RngStream& rng,
                                  long long burn_in = default_burn_in)
{
    params.validate();
    detail::ChainStepper chain(params, default_chain_start(params));
    auto draw = [&] { return sample_gamma(params.p, params.s, rng); };
    for (long long k = 0; k < burn_in; ++k)
        chain.step(draw);
    BatchMeans re(n), im(n), sq(n);
    for (long long k = 0; k < n; ++k)
    {
        chain.step(draw);
        ComplexValue z = chain.state();
        re.add(z.real());
        im.add(z.imag());
        sq.add(std::norm(z));
    }
    ChainMoments out{re.result(rng.seed()), im.result(rng.seed()),
                     sq.result(rng.seed()), {}};
    // Variance by the delta method on the batch means:
    // d var = d E|Z|^2 - 2 Re(conj(m) dm).
    double const mr = out.mean_re.value, mi = out.mean_im.value;
    auto bre = re.batch_values(), bim = im.batch_values(),
         bsq = sq.batch_values();
    std::vector<double> lin(bre.size());
    for (std::size_t b = 0; b < lin.size(); ++b)
        lin[b] = bsq[b] - 2 * (mr * bre[b] + mi * bim[b]);
    double var = out.second.value - (mr * mr + mi * mi);
    out.variance = BatchMeans::from_batches(lin, var, n, rng.seed());
    return out;
}

//---------------------------------------------------------------------------//
// Empirical stationary law
//---------------------------------------------------------------------------//
/*!
 * Bin edges.  In the cone the first axis is r and the second theta; on the
 * imaginary axis only the first (y = Im Z) is used.
 */
struct HistogramGrid
{
    std::vector<double> first_edges;
    std::vector<double> second_edges;
};

struct Histogram
{
    HistogramGrid grid;
    std::vector<double> mass;  //!< row-major [first][second]
    double outside = 0;        //!< fraction that fell outside every bin
    long long n_samples = 0;
    std::uint64_t seed = 0;

    std::size_t second_bins() const
    {
        return grid.second_edges.empty() ? 1 : grid.second_edges.size() - 1;
    }
    double at(std::size_t i, std::size_t j = 0) const
    {
        return mass[i * second_bins() + j];
    }
};

namespace detail
{
inline void check_edges(std::vector<double> const& e, char const* what)
{
    if (e.size() < 2)
        throw PreconditionError(std::string(what) + ": need >= 2 edges");
    for (std::size_t i = 1; i < e.size(); ++i)
        if (!(e[i] > e[i - 1]))
            throw PreconditionError(std::string(what)
                                    + ": edges must increase");
}

inline long find_bin(std::vector<double> const& e, double x)
{
    if (!(x >= e.front()) || !(x < e.back()))
        return -1;
    auto it = std::upper_bound(e.begin(), e.end(), x);
    return static_cast<long>(it - e.begin()) - 1;
}
}  // namespace detail

inline Histogram empirical_measure(ModelParams const& params, long long n,
                                   long long burn_in,
                                   HistogramGrid const& grid, RngStream& rng)
{
    params.validate();
    if (n <= burn_in || n < 1)
        throw PreconditionError("empirical_measure needs n > burn_in");
    bool const axis = params.on_axis();
    detail::check_edges(grid.first_edges, axis ? "y grid" : "r grid");
    if (!axis)
    {
        detail::check_edges(grid.second_edges, "theta grid");
        double a = std::abs(params.alpha);
        if (grid.first_edges.front() < 0)
            throw DomainError("r grid must be non-negative");
        if (grid.second_edges.front() < -a - 1e-12
            || grid.second_edges.back() > a + 1e-12)
            throw DomainError("theta grid extends outside the cone");
    }
    Histogram h;
    h.grid = grid;
    std::size_t const nb2 = h.second_bins();
    h.mass.assign((grid.first_edges.size() - 1) * nb2, 0.0);
    detail::ChainStepper chain(params, default_chain_start(params));
    auto draw = [&] { return sample_gamma(params.p, params.s, rng); };
    for (long long k = 0; k < burn_in; ++k)
        chain.step(draw);
    long long const kept = n - burn_in;
    long long outside = 0;
    for (long long k = 0; k < kept; ++k)
    {
        chain.step(draw);
        ComplexValue z = chain.state();
        long i, j = 0;
        if (axis)
        {
            i = detail::find_bin(grid.first_edges, z.imag());
        }
        else
        {
            i = detail::find_bin(grid.first_edges, std::abs(z));
            j = detail::find_bin(grid.second_edges, std::arg(z));
        }
        if (i < 0 || j < 0)
            ++outside;
        else
            h.mass[i * nb2 + j] += 1;
    }
    for (auto& m : h.mass)
        m /= double(kept);
    h.outside = double(outside) / double(kept);
    h.n_samples = kept;
    h.seed = rng.seed();
    return h;
}

}  // namespace rmprod
