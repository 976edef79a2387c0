#include <cmath>

#include <gtest/gtest.h>

#include "rmprod/invariant_measure.hpp"
#include "rmprod/simulate.hpp"

#include "reference_scalars.hpp"

using namespace rmprod;

namespace
{
double const one = 1.0;
auto unit = [](auto) { return one; };
}  // namespace

TEST(ConeDensity, ZeroOutsideTheCone)
{
    ModelParams q{1, 1, pi / 6};
    EXPECT_EQ(density_cone(q, {1, pi / 4}), 0);
    EXPECT_EQ(density_cone(q, {1, -pi / 4}), 0);
    EXPECT_EQ(density_cone(q, {1, pi / 6}), 0);
    EXPECT_GT(density_cone(q, {1, 0}), 0);
}

TEST(ConeDensity, ConjugationSymmetry)
{
    ConeDensity plus({1, 1, pi / 3}), minus({1, 1, -pi / 3});
    for (double r : {0.1, 0.5, 1.0, 2.0, 7.0})
        for (double th : {-1.0, -0.4, 0.0, 0.3, 0.9})
        {
            double a = plus(ConePoint{r, th}), b = minus(ConePoint{r, -th});
            EXPECT_NEAR(a, b, 1e-15 * std::max(1.0, a)) << r << " " << th;
        }
}

TEST(ConeDensity, NormalisesOnTheCone)
{
    QuadratureConfig cfg;
    ConeDensity f({1, 1, pi / 6}, cfg);
    EXPECT_NEAR(f.integrate(unit, cfg), 1, 1e-6);
    for (double p : {0.5, 2.5})
        for (double a : {pi / 20, 9 * pi / 20, -pi / 3})
        {
            ConeDensity g({p, 0.7, a}, cfg);
            EXPECT_NEAR(g.integrate(unit, cfg), 1, 1e-6) << p << " " << a;
        }
}

TEST(NormalizationConstant, MatchesTwoDimensionalQuadratureOracle)
{
    double c = normalization_constant({1, 1, pi / 6});
    EXPECT_NEAR(c * reference::cone_mass_unnormalised_1_1_pi6, 1, 1e-12);
}

TEST(NormalizationConstant, HalfLineSpecialisation)
{
    double k1 = bessel_k(1, 2.0).real();
    EXPECT_NEAR(normalization_constant({1, 1, 0}), 1 / (4 * k1 * k1), 1e-13);
}

TEST(NormalizationConstant, ConeConstantTendsToAxisConstant)
{
    double cone = normalization_constant({1, 1, half_pi - 1e-4});
    double axis = normalization_constant({1, 1, half_pi});
    EXPECT_NEAR(cone / axis, 1, 1e-3);
}

TEST(AxisDensity, ReflectionBetweenSigns)
{
    AxisDensity plus({2, 1, half_pi}), minus({2, 1, -half_pi});
    for (double y : {-30.0, -3.0, -0.5, 0.2, 1.0, 4.0, 50.0})
        EXPECT_NEAR(minus(y), plus(-y), 1e-15 * plus(-y));
}

TEST(AxisDensity, AlgebraicTail)
{
    AxisDensity f({1, 1, half_pi});
    double a = 1e4 * 1e4 * f(1e4), b = 1e5 * 1e5 * f(1e5),
           c = 1e6 * 1e6 * f(1e6);
    EXPECT_GT(a, 0);
    EXPECT_NEAR(b / a, 1, 1e-3);
    EXPECT_NEAR(c / b, 1, 1e-4);
}

TEST(AxisDensity, Normalises)
{
    QuadratureConfig cfg;
    for (double p : {0.5, 1.0, 2.5})
        for (double s : {0.2, 1.0, 3.0})
        {
            AxisDensity f({p, s, half_pi}, cfg);
            EXPECT_NEAR(f.integrate(unit, cfg), 1, 1e-6) << p << " " << s;
        }
    EXPECT_THROW(density_axis({1, 1, half_pi}, 0.0), DomainError);
    EXPECT_THROW(AxisDensity({1, 1, 1.0}), DomainError);
}

TEST(GigDensity, NormalisationAndMean)
{
    QuadratureConfig cfg;
    GigDensity f(1, 1, cfg);
    EXPECT_NEAR(f.integrate(unit, cfg), 1, 1e-8);
    GigDensity g(2, 1, cfg);
    double mean = g.integrate([](double x) { return x; }, cfg);
    EXPECT_NEAR(mean, (bessel_k(1, 2.0) / bessel_k(2, 2.0)).real(), 1e-10);
    EXPECT_NEAR(mean, mean_closed_form({2, 1, 0}).real(), 1e-12);
}

TEST(GigDensity, InversionMapsOrderToItsNegative)
{
    // x^{-2} f_p(1/x) = x^{p-1} e^{-(x+1/x)/s} / (2K_p) is the density with
    // -p in place of p, normalised by the same constant since K_p = K_{-p}.
    double const p = 1.7, s = 0.8;
    GigDensity f(p, s);
    double norm = 1 / (2 * bessel_k(p, 2 / s).real());
    for (double x : {0.1, 0.7, 2.0, 9.0})
    {
        double lhs = f(1 / x) / (x * x);
        double rhs = norm * std::pow(x, p - 1) * std::exp(-(x + 1 / x) / s);
        EXPECT_NEAR(lhs, rhs, 1e-13 * rhs);
    }
}

TEST(DysonDensity, NormalisesAndHasExplicitFormAtOrderOne)
{
    EXPECT_THROW(density_dyson(1, 1, 1, 0), DomainError);
    double const s = 1, t = 1;
    auto ratio = [&](double x) {
        return density_dyson(1, s, t, x) * (1 + x) * std::exp(x / (s * t));
    };
    double r0 = ratio(0.3);
    for (double x : {0.01, 1.0, 4.0, 20.0})
        EXPECT_NEAR(ratio(x) / r0, 1, 1e-12);
    double mass = quad::upper<0>(
        [&](double x) { return x > 0 ? density_dyson(1, s, t, x) : 0.0; },
        0.0, 1e-12);
    EXPECT_NEAR(mass, 1, 1e-10);
}

TEST(DysonDensity, MeanMatchesContinuedFractionSimulation)
{
    // Z -> a t / (1 + Z) with a ~ gamma(p, s): the chain of [[0, a t],[1, 1]]
    double const p = 2, s = 1, t = 0.5;
    double mean = quad::upper<0>(
        [&](double x) { return x > 0 ? x * density_dyson(p, s, t, x) : 0.0; },
        0.0, 1e-12);
    RngStream rng(7, 0);
    long long const n = 1000000;
    BatchMeans bm(n);
    double z = 1;
    for (int k = 0; k < 1000; ++k)
        z = sample_gamma(p, s, rng) * t / (1 + z);
    for (long long k = 0; k < n; ++k)
    {
        z = sample_gamma(p, s, rng) * t / (1 + z);
        bm.add(z);
    }
    auto est = bm.result();
    EXPECT_LT(std::abs(est.value - mean), 4 * est.std_error)
        << est.value << " vs " << mean;
}

TEST(Moments, ZerothMomentIsOne)
{
    EXPECT_EQ(moment({1.3, 0.7, 0.4}, 0, 0).value, ComplexValue(1, 0));
}

TEST(Moments, MeanMatchesBesselRatioAndQuadrature)
{
    ModelParams q{1, 1, pi / 6};
    ComplexValue w = std::polar(2.0, -pi / 6);
    ComplexValue expect = bessel_k(0, w) / bessel_k(1, w);
    EXPECT_LT(std::abs(moment(q, 1, 0).value - expect), 1e-12);
    EXPECT_LT(std::abs(mean_closed_form(q) - expect), 1e-13);
    ComplexValue oracle(reference::cone_mean_1_1_pi6_re,
                        reference::cone_mean_1_1_pi6_im);
    EXPECT_LT(std::abs(expect - oracle), 1e-12);
}

TEST(Moments, SecondAbsoluteMomentFromVarianceAndQuadrature)
{
    ModelParams q{1, 1, pi / 6};
    double m11 = moment(q, 1, 1).value.real();
    EXPECT_NEAR(m11, reference::cone_second_1_1_pi6, 1e-11);
    double via_var = variance_closed_form(q) + std::norm(mean_closed_form(q));
    EXPECT_NEAR(via_var, reference::cone_second_1_1_pi6, 1e-11);
    ConeDensity f(q);
    EXPECT_NEAR(f.integrate([](ComplexValue z) { return std::norm(z); }),
                reference::cone_second_1_1_pi6, 1e-9);
}

TEST(Moments, HigherMomentsAgreeWithQuadrature)
{
    ModelParams q{2.5, 0.6, pi / 5};
    ConeDensity f(q);
    for (int m = 1; m <= 3; ++m)
        for (int n = 0; n <= m; ++n)
        {
            ComplexValue expect
                = f.integrate([&](ComplexValue z) {
                      return (std::pow(z, m) * std::pow(std::conj(z), n)).real();
                  })
                  + ComplexValue(0, 1) * f.integrate([&](ComplexValue z) {
                        return (std::pow(z, m) * std::pow(std::conj(z), n))
                            .imag();
                    });
            ComplexValue got = moment(q, m, n).value;
            EXPECT_LT(std::abs(got - expect), 1e-9 * std::max(1.0, std::abs(expect)))
                << m << "," << n;
        }
    EXPECT_THROW(moment(q, 1, 2), UnsupportedError);
    EXPECT_THROW(moment({1, 1, half_pi}, 1, 0), DomainError);
}

TEST(StationaryResidual, InteriorPoints)
{
    EXPECT_LT(stationary_residual({1, 1, pi / 6}, {1, 0}), 1e-8);
    EXPECT_LT(stationary_residual({3, 0.5, pi / 3}, {2, pi / 8}), 1e-8);
    EXPECT_EQ(stationary_residual({1, 1, pi / 6}, {1, pi / 6}), 0);
}

TEST(StationaryResidual, AxisPoints)
{
    EXPECT_LT(axis_stationary_residual({1, 1, half_pi}, 1), 1e-6);
    EXPECT_LT(axis_stationary_residual({2, 0.5, half_pi}, -0.7), 1e-6);
    double a = axis_stationary_residual({2, 0.5, half_pi}, 0.9);
    double b = axis_stationary_residual({2, 0.5, -half_pi}, -0.9);
    EXPECT_NEAR(a, b, 1e-15);
}
