#include <algorithm>
#include <cmath>

#include <boost/math/distributions/gamma.hpp>
#include <gtest/gtest.h>

#include "rmprod/invariant_measure.hpp"
#include "rmprod/lyapunov.hpp"
#include "rmprod/simulate.hpp"

using namespace rmprod;

TEST(Rng, StreamsAreReproducibleAndDistinct)
{
    RngStream a(5, 1), b(5, 1), c(5, 2), d(6, 1);
    double xa = a.uniform();
    EXPECT_EQ(xa, b.uniform());
    EXPECT_NE(xa, c.uniform());
    EXPECT_NE(xa, d.uniform());
}

TEST(Gamma, MeanOfShapeTwoScaleThree)
{
    RngStream rng(1, 0);
    long long const n = 1000000;
    BatchMeans bm(n);
    for (long long k = 0; k < n; ++k)
        bm.add(sample_gamma(2, 3, rng));
    auto e = bm.result();
    EXPECT_LT(std::abs(e.value - 6), 4 * e.std_error) << e.value;
}

TEST(Gamma, ExponentialCaseKolmogorovSmirnov)
{
    RngStream rng(2, 0);
    int const n = 10000;
    std::vector<double> x(n);
    for (auto& v : x)
        v = sample_gamma(1, 1, rng);
    std::sort(x.begin(), x.end());
    double d = 0;
    for (int i = 0; i < n; ++i)
    {
        double F = 1 - std::exp(-x[i]);
        d = std::max({d, std::abs(F - double(i) / n),
                      std::abs(F - double(i + 1) / n)});
    }
    // 1% critical value
    EXPECT_LT(d, 1.63 / std::sqrt(double(n)));
}

TEST(Gamma, HalfShapeChiSquare)
{
    boost::math::gamma_distribution<double> law(0.5, 1.0);
    int const bins = 20, n = 100000;
    std::vector<double> edges;
    for (int b = 1; b < bins; ++b)
        edges.push_back(quantile(law, double(b) / bins));
    std::vector<int> count(bins, 0);
    RngStream rng(3, 0);
    for (int k = 0; k < n; ++k)
    {
        double v = sample_gamma(0.5, 1, rng);
        ++count[std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()];
    }
    double chi2 = 0, e = double(n) / bins;
    for (int c : count)
        chi2 += (c - e) * (c - e) / e;
    // 99.9% point of chi^2 with 19 degrees of freedom
    EXPECT_LT(chi2, 43.8);
}

TEST(BatchMeans, MergeWeightsBySampleSize)
{
    EstimateWithError a{1.0, 0.1, 100, 3}, b{4.0, 0.2, 300, 2};
    auto m = a.merge(b);
    EXPECT_DOUBLE_EQ(m.value, 3.25);
    EXPECT_NEAR(m.std_error,
                std::sqrt(100. * 100 * 0.01 + 300. * 300 * 0.04) / 400, 1e-15);
    EXPECT_EQ(m.n_samples, 400);
    EXPECT_EQ(m.seed, 2u);
    EXPECT_DOUBLE_EQ(EstimateWithError{}.merge(b).value, 4.0);
    EXPECT_THROW(BatchMeans(10), PreconditionError);
}

TEST(Accumulator, RescaledProductIsExact)
{
    RngStream rng(4, 0);
    for (int n : {1, 5, 20})
    {
        ProductAccumulator acc, fast;
        Matrix2 direct{1.0, 0.0, 0.0, 1.0};
        for (int k = 0; k < n; ++k)
        {
            double a = sample_gamma(1.3, 2.5, rng);
            Matrix2 f = random_factor(a, 0.7);
            acc.multiply_right(f);
            fast.multiply_right_factor(std::polar(a, 0.7));
            direct = multiply(direct, f);
        }
        Matrix2 p = acc.product(), q = fast.product();
        double scale = operator_norm(direct);
        for (int i = 0; i < 4; ++i)
        {
            EXPECT_LT(std::abs(p[i] - direct[i]), 1e-12 * scale) << n << " " << i;
            EXPECT_LT(std::abs(q[i] - direct[i]), 1e-12 * scale) << n << " " << i;
        }
        EXPECT_EQ(acc.steps(), n);
        EXPECT_NEAR(acc.log_norm(), std::log(scale), 1e-12);
    }
}

TEST(Chain, StaysInTheConeAndRejectsBadStarts)
{
    ModelParams q{1, 1, pi / 6};
    RngStream rng(5, 0);
    auto r = iterate_chain(q, 1.0, 2000, rng, true);
    ASSERT_EQ(r.trajectory.size(), 2000u);
    for (auto z : r.trajectory)
        EXPECT_LE(std::abs(std::arg(z)), pi / 6 + 1e-12);
    ModelParams half{1, 1, 0};
    auto h = iterate_chain(half, 0.5, 100, rng, true);
    for (auto z : h.trajectory)
    {
        EXPECT_GT(z.real(), 0);
        EXPECT_EQ(z.imag(), 0);
    }
    EXPECT_THROW(iterate_chain(q, ComplexValue(0, 1), 10, rng), DomainError);
    EXPECT_THROW(iterate_chain(half, -1.0, 10, rng), DomainError);
    EXPECT_THROW(iterate_chain({1, 1, half_pi}, 1.0, 10, rng), DomainError);
    EXPECT_THROW(iterate_chain(q, 1.0, -1, rng), PreconditionError);
}

TEST(Chain, DeterministicEntriesReachTheFixedPoint)
{
    detail::ChainStepper chain({1, 1, 0}, 1.0);
    auto one = [] { return 1.0; };
    for (int k = 0; k < 100; ++k)
        chain.step(one);
    EXPECT_NEAR(chain.state().real(), (std::sqrt(5.0) - 1) / 2, 1e-15);
}

TEST(Chain, MeanAgreesWithClosedForm)
{
    ModelParams q{1, 1, pi / 6};
    RngStream rng(6, 0);
    auto m = chain_moments(q, 100000, rng, 1000);
    ComplexValue expect = mean_closed_form(q);
    EXPECT_LT(std::abs(m.mean_re.value - expect.real()), 4 * m.mean_re.std_error);
    EXPECT_LT(std::abs(m.mean_im.value - expect.imag()), 4 * m.mean_im.std_error);
}

TEST(Furstenberg, DeterministicGoldenRatio)
{
    auto e = furstenberg_estimate_with([] { return 1.0; }, 0, 100000);
    EXPECT_NEAR(e.value, std::log((1 + std::sqrt(5.0)) / 2), 1e-4);
    EXPECT_THROW(furstenberg_estimate_with([] { return 1.0; }, 0, 100),
                 PreconditionError);
}

TEST(Furstenberg, InverseGaussianExponent)
{
    RngStream rng(7, 0);
    auto e = furstenberg_estimate({1, 1, 0}, 1000000, rng);
    double expect = (0.5 * bessel_k(0, 2.0) / bessel_k(1, 2.0)).real();
    EXPECT_LT(std::abs(e.value - expect), 4 * e.std_error);
    EXPECT_LT(e.std_error, 5e-3);
}

TEST(Furstenberg, ImaginaryAxis)
{
    ModelParams q{2, 0.5, half_pi};
    RngStream rng(8, 0);
    auto e = furstenberg_estimate(q, 1000000, rng);
    EXPECT_LT(std::abs(e.value - lyapunov_exact(q).value), 4 * e.std_error);
}

TEST(Furstenberg, AgreesWithErgodicAverage)
{
    ModelParams q{2.5, 1, pi / 3};
    RngStream r1(9, 0), r2(9, 1);
    auto a = furstenberg_estimate(q, 200000, r1);
    auto b = ergodic_estimate(q, 200000, r2);
    double se = std::hypot(a.std_error, b.std_error);
    EXPECT_LT(std::abs(a.value - b.value), 4 * se);
}

TEST(Furstenberg, SameStreamSameNumbers)
{
    ModelParams q{1.5, 0.8, 0.4};
    RngStream a(11, 3), b(11, 3);
    auto x = furstenberg_estimate(q, 20000, a);
    auto y = furstenberg_estimate(q, 20000, b);
    EXPECT_EQ(x.value, y.value);
    EXPECT_EQ(x.std_error, y.std_error);
}

namespace
{
double bin_mass(ConeDensity const& f, double r0, double r1, double t0, double t1)
{
    return quad::finite<0>(
        [&](double r) {
            return r * quad::finite<1>(
                           [&](double t) { return f(ConePoint{r, t}); }, t0,
                           t1, 1e-9);
        },
        r0, r1, 1e-9);
}
}  // namespace

TEST(EmpiricalMeasure, ConeHistogramMatchesDensity)
{
    ModelParams q{1, 1, pi / 3};
    ConeDensity f(q);
    HistogramGrid g;
    g.first_edges = {0, 0.25, 0.5, 0.75, 1, 1.5, 2, 4, 1e6};
    for (int j = 0; j <= 6; ++j)
        g.second_edges.push_back(-pi / 3 + j * (pi / 9));
    RngStream rng(12, 0);
    auto h = empirical_measure(q, 1001000, 1000, g, rng);
    EXPECT_EQ(h.outside, 0);
    double tv = 0, total = 0;
    for (std::size_t i = 0; i + 1 < g.first_edges.size(); ++i)
        for (std::size_t j = 0; j + 1 < g.second_edges.size(); ++j)
        {
            double m = bin_mass(f, g.first_edges[i], g.first_edges[i + 1],
                                g.second_edges[j], g.second_edges[j + 1]);
            total += m;
            tv += 0.5 * std::abs(h.at(i, j) - m);
            EXPECT_NEAR(h.at(i, j), m, 5e-3) << i << " " << j;
        }
    EXPECT_NEAR(total, 1, 1e-6);
    EXPECT_LT(tv, 0.01);
}

TEST(EmpiricalMeasure, AxisHistogramMatchesDensity)
{
    ModelParams q{2, 0.5, half_pi};
    AxisDensity f(q);
    HistogramGrid g;
    g.first_edges = {-1e6, -4, -2, -1, -0.5, -0.25, 0, 0.25, 0.5, 1, 2, 4, 1e6};
    RngStream rng(13, 0);
    auto h = empirical_measure(q, 1001000, 1000, g, rng);
    double tv = 0;
    for (std::size_t i = 0; i + 1 < g.first_edges.size(); ++i)
    {
        double lo = g.first_edges[i], hi = g.first_edges[i + 1];
        double m = quad::finite<0>([&](double y) { return f(y); }, lo, hi,
                                   1e-10);
        tv += 0.5 * std::abs(h.at(i) - m);
        EXPECT_NEAR(h.at(i), m, 5e-3) << lo << " " << hi;
    }
    EXPECT_LT(tv, 0.01);
}

TEST(EmpiricalMeasure, GridValidation)
{
    ModelParams q{1, 1, pi / 6};
    RngStream rng(14, 0);
    HistogramGrid wide{{0, 1, 2}, {-1, 0, 1}};
    EXPECT_THROW(empirical_measure(q, 100, 10, wide, rng), DomainError);
    HistogramGrid bad{{0, 2, 1}, {-0.5, 0.5}};
    EXPECT_THROW(empirical_measure(q, 100, 10, bad, rng), PreconditionError);
    HistogramGrid ok{{0, 1, 2}, {-0.5, 0.5}};
    EXPECT_THROW(empirical_measure(q, 10, 10, ok, rng), PreconditionError);
}
