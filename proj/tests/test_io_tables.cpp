#include <cmath>
#include <cstdio>

#include <gtest/gtest.h>

#include "rmprod/io.hpp"
#include "rmprod/tables.hpp"

using namespace rmprod;
using io::Format;
using io::Table;
using io::Json;

namespace
{
Table sample_table()
{
    Table t;
    t.meta = {{"command", "test"}, {"note", "a, \"quoted\" string"}};
    t.columns = {"x", "label", "flag"};
    t.add_row({1.5, "plain", true});
    t.add_row({tables::nan, "with,comma", false});
    t.add_row({-1e-300, "say \"hi\"", true});
    t.add_row({Json(42), "", false});
    return t;
}

void expect_same(Table const& a, Table const& b)
{
    EXPECT_EQ(a.meta, b.meta);
    EXPECT_EQ(a.columns, b.columns);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        for (std::size_t j = 0; j < a.columns.size(); ++j)
        {
            Json const& x = a.rows[i][j];
            Json const& y = b.rows[i][j];
            if (x.is_number_float() && std::isnan(x.get<double>()))
                EXPECT_TRUE(y.is_null()
                            || (y.is_number() && std::isnan(y.get<double>())))
                    << i << " " << j;
            else if (x.is_number())
                EXPECT_EQ(x.get<double>(), y.get<double>()) << i << " " << j;
            else
                EXPECT_EQ(x, y) << i << " " << j;
        }
}
}  // namespace

TEST(Io, CsvRoundTrip)
{
    Table t = sample_table();
    std::string text = io::serialize(t, Format::csv);
    EXPECT_EQ(text.rfind("# meta: ", 0), 0u);
    expect_same(t, io::parse(text, Format::csv));
}

TEST(Io, JsonRoundTrip)
{
    Table t = sample_table();
    std::string text = io::serialize(t, Format::json);
    EXPECT_NE(text.find("null"), std::string::npos);
    expect_same(t, io::parse(text, Format::json));
}

TEST(Io, FormatsAndFiles)
{
    EXPECT_EQ(io::parse_format("csv"), Format::csv);
    EXPECT_THROW(io::parse_format("xml"), PreconditionError);
    Table t;
    t.columns = {"a"};
    EXPECT_THROW(t.add_row({1, 2}), PreconditionError);
    EXPECT_THROW(io::write_file("/nonexistent/dir/x.csv", "x"), io::IoError);
    EXPECT_THROW(io::read_file("/nonexistent/dir/x.csv"), io::IoError);
    std::string path = ::testing::TempDir() + "rmprod_io_test.csv";
    io::write_file(path, "abc\n");
    EXPECT_EQ(io::read_file(path), "abc\n");
    std::remove(path.c_str());
}

TEST(DensityTable, GridMassMatchesQuadrature)
{
    QuadratureConfig cfg;
    for (ModelParams q : {ModelParams{1, 1, pi / 6}, ModelParams{2.5, 0.5, 0},
                          ModelParams{1, 1, half_pi}, ModelParams{0.5, 2, -pi / 3}})
    {
        Table t = tables::density_table(q, {}, cfg);
        EXPECT_NEAR(t.meta["grid_mass"].get<double>(), 1, 1e-3) << q.alpha;
        EXPECT_NEAR(t.meta["quadrature_mass"].get<double>(), 1, 1e-6);
    }
}

TEST(DensityTable, PeakMovesTowardsTheEdgeWithTheAngle)
{
    QuadratureConfig cfg;
    tables::DensityGrid g;
    g.r_cells = 120;
    Table narrow = tables::density_table({1, 1, pi / 20}, g, cfg);
    Table wide = tables::density_table({1, 1, 9 * pi / 20}, g, cfg);
    EXPECT_EQ(narrow.meta["band_of_max_density"], 0);
    EXPECT_EQ(wide.meta["band_of_max_density"], 3);
    EXPECT_EQ(narrow.columns, (std::vector<std::string>{"r", "theta", "f"}));
    EXPECT_EQ(narrow.rows.size(), 120u * 128u);
}

TEST(DensityTable, GridValidation)
{
    tables::DensityGrid g;
    g.r_min = 0;
    EXPECT_THROW(tables::density_table({1, 1, 0.3}, g, {}), PreconditionError);
    g = {};
    g.theta_cells = 1;
    EXPECT_THROW(tables::density_table({1, 1, 0.3}, g, {}), PreconditionError);
}

TEST(LyapunovTable, AxisCurveIsMonotoneInS)
{
    // Stronger disorder localises faster: the exponent grows with s.
    std::vector<double> ss;
    for (int i = 0; i < 40; ++i)
        ss.push_back(0.1 + i * 0.1);
    Table t = tables::lyapunov_table({1}, ss, {half_pi}, {}, {});
    ASSERT_EQ(t.rows.size(), 40u);
    EXPECT_GT(t.rows[0][3].get<double>(), 0);
    for (std::size_t i = 1; i < t.rows.size(); ++i)
        EXPECT_GT(t.rows[i][3].get<double>(), t.rows[i - 1][3].get<double>())
            << t.rows[i][1];
}

TEST(LyapunovTable, EvenInAlphaAndFlags)
{
    Table t = tables::lyapunov_table({1.5}, {0.2, 8}, {0.6, -0.6}, {}, {});
    ASSERT_EQ(t.rows.size(), 4u);
    EXPECT_DOUBLE_EQ(t.rows[0][3].get<double>(), t.rows[2][3].get<double>());
    EXPECT_EQ(t.rows[0][7], true);
    EXPECT_EQ(t.rows[0][8], false);
    EXPECT_EQ(t.rows[1][7], false);
    EXPECT_EQ(t.rows[1][8], true);
    double ex = t.rows[0][3].get<double>();
    EXPECT_NEAR(t.rows[0][4].get<double>(), ex, 1e-4);
    EXPECT_NEAR(t.rows[1][5].get<double>(), t.rows[1][3].get<double>(), 1e-2);
    EXPECT_THROW(tables::lyapunov_table({}, {1}, {0}, {}, {}), PreconditionError);
}

TEST(LyapunovTable, HalfIntegerPadeCurvesArePositive)
{
    std::vector<double> ss;
    for (int i = 1; i <= 20; ++i)
        ss.push_back(0.1 * i);
    Table t = tables::lyapunov_table({0.5, 1.5, 2.5}, ss, {half_pi}, {}, {});
    for (auto const& row : t.rows)
    {
        ASSERT_EQ(row[9], true) << row[0] << " " << row[1];
        EXPECT_GT(row[6].get<double>(), 0) << row[0] << " " << row[1];
        EXPECT_TRUE(std::isfinite(row[6].get<double>()));
    }
}

TEST(SimulateTable, SameSeedSameBytes)
{
    ModelParams q{1, 1, pi / 6};
    auto a = io::to_csv(tables::simulate_estimates(q, 20000, 100, 3, 5, {}));
    auto b = io::to_csv(tables::simulate_estimates(q, 20000, 100, 3, 5, {}));
    auto c = io::to_csv(tables::simulate_estimates(q, 20000, 100, 3, 6, {}));
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(SimulateTable, EstimatesAndMergedRows)
{
    ModelParams q{2, 0.5, pi / 3};
    Table t = tables::simulate_estimates(q, 100000, 1000, 2, 1, {});
    // two streams times two methods plus the merged rows
    EXPECT_EQ(t.rows.size(), 6u);
    for (auto const& row : t.rows)
        EXPECT_LT(std::abs(row[6].get<double>()), 5) << row[1];
}

TEST(SimulateTable, HistogramAgreesWithDensity)
{
    ModelParams q{1, 1, pi / 3};
    tables::DensityGrid g;
    g.r_cells = 10;
    g.theta_cells = 6;
    g.r_min = 0.1;
    g.r_max = 10;
    Table t = tables::simulate_histogram(q, 200000, 1000, 2, 1, g, {});
    EXPECT_EQ(t.rows.size(), 60u);
    EXPECT_LT(t.meta["outside_fraction"].get<double>(), 0.05);
    EXPECT_THROW(tables::simulate_histogram({1, 1, 0}, 2000, 10, 1, 1, g, {}),
                 PreconditionError);
}

TEST(SchrodingerTable, RatesWithoutSimulation)
{
    Table t = tables::schrodinger_table({1, 2}, {1, 0.5}, 0, 1, 1, {});
    ASSERT_EQ(t.rows.size(), 4u);
    EXPECT_NEAR(t.rows[0][2].get<double>(),
                lyapunov_exact({1, 1, half_pi}).value, 1e-15);
    EXPECT_TRUE(t.rows[0][3].is_null()
                || std::isnan(t.rows[0][3].get<double>()));
}

TEST(PadeTable, CarriesTheFit)
{
    Table t = tables::pade_table(1, 1, 1.0, 60, 10, 3, {});
    EXPECT_EQ(t.rows.size(), 60u);
    EXPECT_NEAR(t.meta["target"].get<double>(),
                -2 * lyapunov_exact({1, 1, 0}).value, 1e-15);
    EXPECT_EQ(t.meta["chain_params"]["s"], 1.0);
}

TEST(RunStreams, OrderedAndPropagatesErrors)
{
    auto v = tables::run_streams<int>(4, [](std::uint64_t k) { return int(k * k); });
    EXPECT_EQ(v, (std::vector<int>{0, 1, 4, 9}));
    EXPECT_THROW(tables::run_streams<int>(
                     3,
                     [](std::uint64_t k) -> int {
                         if (k == 1)
                             throw DomainError("x");
                         return 0;
                     }),
                 DomainError);
    EXPECT_THROW(tables::run_streams<int>(0, [](std::uint64_t) { return 0; }),
                 PreconditionError);
}
