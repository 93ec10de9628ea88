#include "sparseconf/data.hpp"
#include "sparseconf/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>

using namespace sparseconf;

namespace {

double friedman1(const double* x)
{
    return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3]
        + 5.0 * x[4];
}

double friedman2(const double* x)
{
    const double inner = x[1] * x[2] - 1.0 / (x[1] * x[3]);
    return std::sqrt(x[0] * x[0] + inner * inner);
}

double sample_sd(const Eigen::Ref<const Vector>& v)
{
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

GenOptions raw()
{
    GenOptions o;
    o.standardize = false;
    return o;
}

template <class F>
CsvError csv_error(F&& f)
{
    try {
        f();
    } catch (const CsvError& e) {
        return e;
    }
    ADD_FAILURE() << "expected a CsvError";
    return CsvError(ErrorKind::Io, "none", -2, -2);
}

} // namespace

TEST(Rng, DeterministicAndInRange)
{
    Rng a(42), b(42), c(43);
    bool differs = false;
    for (int k = 0; k < 1000; ++k) {
        const double u = a.uniform();
        EXPECT_EQ(u, b.uniform());
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
        differs = differs || u != c.uniform();
        const auto r = a.below(7);
        EXPECT_EQ(r, b.below(7));
        c.below(7);
        EXPECT_LT(r, 7u);
    }
    EXPECT_TRUE(differs);
}

TEST(Rng, NormalMoments)
{
    Rng rng(1);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int k = 0; k < n; ++k) {
        const double x = rng.normal();
        s += x;
        s2 += x * x;
    }
    EXPECT_NEAR(s / n, 0.0, 0.02);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, ShuffleIsAPermutation)
{
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    Rng rng(3);
    shuffle(v, rng);
    EXPECT_EQ(std::set<int>(v.begin(), v.end()).size(), 50u);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted.front(), 0);
    EXPECT_EQ(sorted.back(), 49);
    EXPECT_FALSE(std::is_sorted(v.begin(), v.end()));
}

TEST(Synthetic, Shapes)
{
    const Dataset a = gen_synthetic(100, 100, 1);
    EXPECT_EQ(a.X.rows(), 100);
    EXPECT_EQ(a.X.cols(), 100);
    EXPECT_EQ(a.n(), 100);
    const Dataset b = gen_synthetic(20, 1000, 1);
    EXPECT_EQ(b.X.rows(), 20);
    EXPECT_EQ(b.p(), 1000);
    EXPECT_EQ(b.n(), 20);
    EXPECT_TRUE(a.standardized);
}

TEST(Synthetic, SameSeedIsBitIdentical)
{
    const Dataset a = gen_synthetic(30, 8, 77);
    const Dataset b = gen_synthetic(30, 8, 77);
    const Dataset c = gen_synthetic(30, 8, 78);
    EXPECT_TRUE(a.X == b.X);
    EXPECT_TRUE(a.y == b.y);
    EXPECT_FALSE(a.X == c.X);
}

TEST(Synthetic, RawDrawsAreUniformOnPlusMinusOne)
{
    const Dataset d = gen_synthetic(2000, 5, 2, raw());
    EXPECT_FALSE(d.standardized);
    EXPECT_LE(d.X.cwiseAbs().maxCoeff(), 1.0);
    EXPECT_LE(d.y.cwiseAbs().maxCoeff(), 1.0);
    EXPECT_NEAR(d.X.mean(), 0.0, 0.03);
    // variance of U[-1, 1] is 1/3
    EXPECT_NEAR(sample_sd(d.y), std::sqrt(1.0 / 3.0), 0.02);
}

TEST(Synthetic, RejectsDegenerateSizes)
{
    EXPECT_THROW(gen_synthetic(1, 5, 0), Error);
    EXPECT_THROW(gen_synthetic(5, 0, 0), Error);
}

TEST(Standardize, UnitSampleDeviation)
{
    for (const Dataset& d : {gen_synthetic(50, 20, 4), gen_friedman1(60, 4), gen_friedman2(60, 4)}) {
        for (Eigen::Index j = 0; j < d.p(); ++j)
            EXPECT_NEAR(sample_sd(d.X.col(j)), 1.0, 1e-9) << d.name << " column " << j;
        EXPECT_NEAR(sample_sd(d.y), 1.0, 1e-9) << d.name;
    }
}

TEST(Standardize, ScalesWithoutCenteringUnlessAsked)
{
    Dataset raw_d = gen_friedman1(80, 5, 1.0, raw());
    Dataset scaled = raw_d;
    standardize(scaled);
    for (Eigen::Index j = 0; j < raw_d.p(); ++j) {
        const double sd = sample_sd(raw_d.X.col(j));
        EXPECT_NEAR(scaled.X(3, j), raw_d.X(3, j) / sd, 1e-12);
    }
    Dataset centered = raw_d;
    standardize(centered, true);
    EXPECT_NEAR(centered.y.mean(), 0.0, 1e-12);
    EXPECT_NEAR(sample_sd(centered.y), 1.0, 1e-9);
}

TEST(Standardize, ConstantColumnsPassThrough)
{
    Dataset d = gen_synthetic(10, 3, 5, raw());
    d.X.col(1).setConstant(4.0);
    standardize(d);
    EXPECT_EQ(d.constant_columns, std::vector<Eigen::Index>{1});
    EXPECT_TRUE((d.X.col(1).array() == 4.0).all());
    EXPECT_NEAR(sample_sd(d.X.col(0)), 1.0, 1e-9);
}

TEST(Friedman1, ShapesAndFormula)
{
    const Dataset d = gen_friedman1(100, 3);
    EXPECT_EQ(d.X.rows(), 100);
    EXPECT_EQ(d.p(), 10);
    EXPECT_EQ(d.n(), 100);

    const double zeros[5] = {0.0, 0.7, 0.5, 0.0, 0.0};
    EXPECT_EQ(friedman1(zeros), 0.0);

    const Dataset clean = gen_friedman1(200, 3, 0.0, raw());
    for (Eigen::Index i = 0; i < clean.n(); ++i) {
        const Vector row = clean.X.row(i).transpose();
        EXPECT_NEAR(clean.y[i], friedman1(row.data()), 1e-12);
        EXPECT_GE(row.minCoeff(), 0.0);
        EXPECT_LT(row.maxCoeff(), 1.0);
    }
}

TEST(Friedman1, MeanOfLabels)
{
    const Dataset d = gen_friedman1(100000, 11, 1.0, raw());
    EXPECT_NEAR(d.y.mean(), 14.4, 1.0);
}

TEST(Friedman1, NoiseHasTheRequestedScale)
{
    const Dataset clean = gen_friedman1(20000, 12, 0.0, raw());
    const Dataset noisy = gen_friedman1(20000, 12, 2.0, raw());
    EXPECT_TRUE(clean.X == noisy.X);
    EXPECT_NEAR(sample_sd(noisy.y - clean.y), 2.0, 0.05);
}

TEST(Friedman2, ShapesRangesAndFormula)
{
    const Dataset d = gen_friedman2(100, 5);
    EXPECT_EQ(d.X.rows(), 100);
    EXPECT_EQ(d.p(), 4);
    EXPECT_EQ(d.n(), 100);

    // x2 x3 = 1 / (x2 x4) collapses the label to x1
    const double x2 = 200.0, x4 = 2.0;
    const double collapse[4] = {37.0, x2, 1.0 / (x2 * x2 * x4), x4};
    EXPECT_NEAR(friedman2(collapse), 37.0, 1e-12);

    const Dataset clean = gen_friedman2(500, 5, 0.0, raw());
    for (Eigen::Index i = 0; i < clean.n(); ++i) {
        const Vector row = clean.X.row(i).transpose();
        EXPECT_NEAR(clean.y[i], friedman2(row.data()), 1e-9 * std::max(1.0, clean.y[i]));
    }
    const auto lo = clean.X.colwise().minCoeff();
    const auto hi = clean.X.colwise().maxCoeff();
    EXPECT_GE(lo[0], 0.0);
    EXPECT_LE(hi[0], 100.0);
    EXPECT_GE(lo[1], 40 * std::numbers::pi);
    EXPECT_LE(hi[1], 560 * std::numbers::pi);
    EXPECT_GE(lo[2], 0.0);
    EXPECT_LE(hi[2], 1.0);
    EXPECT_GE(lo[3], 1.0);
    EXPECT_LE(hi[3], 11.0);
}

TEST(Friedman2, Deterministic)
{
    const Dataset a = gen_friedman2(40, 8);
    const Dataset b = gen_friedman2(40, 8);
    EXPECT_TRUE(a.X == b.X);
    EXPECT_TRUE(a.y == b.y);
}

TEST(Csv, SmallFixture)
{
    const Dataset d = parse_csv("x,y\n1,2\n3,4\n5,6\n", "y", false);
    EXPECT_EQ(d.n(), 3);
    EXPECT_EQ(d.p(), 1);
    EXPECT_EQ(d.X(2, 0), 5.0);
    EXPECT_EQ(d.y[1], 4.0);
    EXPECT_EQ(d.feature_names, std::vector<std::string>{"x"});
    EXPECT_FALSE(d.standardized);
}

TEST(Csv, LabelByIndexQuotesAndBom)
{
    const Dataset d = parse_csv("\xEF\xBB\xBF\"a\",b,\"c, d\"\n1,\"2\",3\n4,5,6\n", "0", false);
    EXPECT_EQ(d.p(), 2);
    EXPECT_EQ(d.y[0], 1.0);
    EXPECT_EQ(d.y[1], 4.0);
    EXPECT_EQ(d.X(0, 0), 2.0);
    EXPECT_EQ(d.X(1, 1), 6.0);
    EXPECT_EQ(d.feature_names, (std::vector<std::string>{"b", "c, d"}));
}

TEST(Csv, MissingLabelColumn)
{
    const CsvError e = csv_error([] { parse_csv("a,b\n1,2\n3,4\n", "target", false); });
    EXPECT_EQ(e.kind(), ErrorKind::MissingLabelColumn);
    EXPECT_EQ(csv_error([] { parse_csv("a,b\n1,2\n3,4\n", "7", false); }).kind(),
              ErrorKind::MissingLabelColumn);
}

TEST(Csv, NonNumericCellCarriesItsLocation)
{
    const CsvError e = csv_error([] { parse_csv("a,b,c\n1,2,3\n4,abc,6\n", "c", false); });
    EXPECT_EQ(e.kind(), ErrorKind::NonNumericCell);
    EXPECT_EQ(e.row(), 2);
    EXPECT_EQ(e.column(), 1);
    EXPECT_EQ(csv_error([] { parse_csv("a,b\n1,\n3,4\n", "b", false); }).kind(), ErrorKind::NonNumericCell);
    EXPECT_EQ(csv_error([] { parse_csv("a,b\n1,nan\n3,4\n", "b", false); }).kind(), ErrorKind::NonNumericCell);
}

TEST(Csv, MalformedDocuments)
{
    EXPECT_EQ(csv_error([] { parse_csv("", "y", false); }).kind(), ErrorKind::ParseError);
    EXPECT_EQ(csv_error([] { parse_csv("x,y\n1,2,3\n4,5\n", "y", false); }).kind(), ErrorKind::ParseError);
    EXPECT_EQ(csv_error([] { parse_csv("x,y\n\"1,2\n3,4\n", "y", false); }).kind(), ErrorKind::ParseError);
    EXPECT_EQ(csv_error([] { parse_csv("x,y\n1,2\n", "y", false); }).kind(), ErrorKind::InsufficientData);
}

TEST(Csv, LoadFromFileAndStandardize)
{
    const auto path = std::filesystem::temp_directory_path() / "sparseconf_test_data.csv";
    {
        std::ofstream out(path);
        out << "f1,f2,target\r\n";
        Rng rng(9);
        for (int i = 0; i < 25; ++i)
            out << rng.uniform(-3, 3) << ',' << rng.uniform(0, 10) << ',' << rng.normal() << "\r\n";
    }
    const Dataset d = load_csv(path.string(), "target", true);
    EXPECT_EQ(d.n(), 25);
    EXPECT_EQ(d.p(), 2);
    EXPECT_TRUE(d.standardized);
    EXPECT_NEAR(sample_sd(d.X.col(0)), 1.0, 1e-9);
    EXPECT_NEAR(sample_sd(d.X.col(1)), 1.0, 1e-9);
    EXPECT_NEAR(sample_sd(d.y), 1.0, 1e-9);
    std::filesystem::remove(path);
    EXPECT_THROW(load_csv(path.string(), "target", true), Error);
}

TEST(HoldOut, RemovesTheRow)
{
    Dataset d = gen_synthetic(6, 3, 10);
    const Dataset before = d;
    const auto [x, yq] = hold_out(d, 2);
    EXPECT_EQ(d.n(), 5);
    EXPECT_TRUE(x == before.X.row(2).transpose());
    EXPECT_EQ(yq, before.y[2]);
    EXPECT_TRUE(d.X.row(2) == before.X.row(3));
    EXPECT_TRUE(d.X.row(1) == before.X.row(1));
    EXPECT_THROW(hold_out(d, 5), Error);
    Dataset tiny = gen_synthetic(2, 2, 1);
    EXPECT_THROW(hold_out(tiny, 0), Error);
}
