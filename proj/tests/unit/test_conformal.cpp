#include "oracles.hpp"

#include "sparseconf/conformal.hpp"
#include "sparseconf/error.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sparseconf;

namespace {

PathNode node(double z, double beta, double dbeta)
{
    PathNode nd;
    nd.z = z;
    nd.beta = Vector::Constant(1, beta);
    nd.dbeta = Vector::Constant(1, dbeta);
    nd.active = {0};
    return nd;
}

// One observation with a zero design row, so F_1 = y_1 and F_2 = z.
SolutionPath constant_vs_query(double y1, double z_hi, double z_lo)
{
    SolutionPath path;
    path.X = Matrix::Zero(2, 1);
    path.y = Vector::Constant(1, y1);
    path.z_max = z_hi;
    path.z_min = z_lo;
    path.lambda = 1.0;
    path.nodes = {node(z_hi, 0.0, 0.0), node(z_lo, 0.0, 0.0)};
    return path;
}

struct Traced {
    oracle::Instance in;
    double lambda = 0.0;
    SolutionPath path;
};

Traced traced(long n, long p, std::uint64_t seed, double frac = 0.1)
{
    Traced t{oracle::gaussian_instance(n, p, seed), 0.0, {}};
    Vector labels(n + 1);
    labels << t.in.y, t.in.y.maxCoeff();
    t.lambda = frac * lambda_max(augment(t.in.X, t.in.xq), labels, LossModel::quadratic());
    t.path = trace_path(t.in.X, t.in.y, t.in.xq, t.lambda, LossModel::quadratic(), SolverConfig{});
    return t;
}

Vector residuals_at(const SolutionPath& path, double z)
{
    return path.labels_at(z) - path.X * interpolate(path, z);
}

} // namespace

TEST(Threshold, Examples)
{
    EXPECT_EQ(conformal_threshold(3, 0.1), 4);
    EXPECT_EQ(conformal_threshold(19, 0.1), 18);
    EXPECT_EQ(conformal_threshold(99, 0.1), 90);
    EXPECT_THROW(conformal_threshold(5, 0.0), Error);
    EXPECT_THROW(conformal_threshold(5, 1.0), Error);
}

TEST(Threshold, MatchesIntegerArithmetic)
{
    for (long n = 1; n <= 300; ++n)
        for (int a : {1, 50, 100, 125, 200, 250, 500, 900, 999})
            EXPECT_EQ(conformal_threshold(n, a / 1000.0), oracle::threshold_permille(n, a))
                << "n=" << n << " alpha=" << a;
}

TEST(Rank, DirectCount)
{
    EXPECT_EQ(rank_of_last(Vector{{0.1, 0.5, 0.3}}), 2);
    EXPECT_EQ(rank_of_last(Vector{{0.3, 0.3, 0.3}}), 3);
    EXPECT_EQ(rank_of_last(Vector{{1.0, 2.0, 0.0}}), 1);
}

TEST(ResidualLine, ZeroDesignRowIsConstant)
{
    const SolutionPath path = constant_vs_query(1.0, 2.0, -2.0);
    const ResidualLine line = residual_line(path, 0);
    EXPECT_EQ(line.a[0], 1.0);
    EXPECT_EQ(line.b[0], 0.0);
    EXPECT_EQ(line.a[1], 0.0);
    EXPECT_EQ(line.b[1], 1.0);
    EXPECT_THROW(residual_line(path, 5), Error);
}

TEST(ResidualLine, AnchoredAtTheCorrectedResidual)
{
    const Traced t = traced(15, 4, 7);
    for (std::size_t s = 0; s + 1 < t.path.nodes.size(); ++s) {
        const ResidualLine line = residual_line(t.path, s);
        const PathNode& nd = t.path.nodes[s];
        const Vector r = t.path.labels_at(nd.z) - t.path.X * nd.beta;
        for (Eigen::Index i = 0; i <= t.path.n(); ++i)
            EXPECT_NEAR(line.at(i, nd.z), r[i], 1e-12 * std::max(1.0, std::abs(r[i])));
    }
}

TEST(ResidualLine, QuadraticMatchesFreshFits)
{
    const Traced t = traced(12, 4, 9);
    for (std::size_t s = 0; s + 1 < t.path.nodes.size(); ++s) {
        const double hi = t.path.nodes[s].z, lo = t.path.nodes[s + 1].z;
        const ResidualLine line = residual_line(t.path, s);
        for (double z : {hi - 0.25 * (hi - lo), hi - 0.75 * (hi - lo)}) {
            const Vector b = oracle::cd_lasso(t.path.X, t.path.labels_at(z), t.lambda,
                                              Vector::Zero(t.path.p()));
            const Vector r = t.path.labels_at(z) - t.path.X * b;
            for (Eigen::Index i = 0; i <= t.path.n(); ++i)
                EXPECT_NEAR(line.at(i, z), r[i], 1e-6) << "segment " << s << " i=" << i;
        }
        // the query slope is 1 - x_q^T dbeta
        const double slope = 1.0 - t.path.X.row(t.path.n()).dot(t.path.nodes[s].dbeta);
        EXPECT_NEAR(line.b[t.path.n()], slope, 1e-12);
    }
}

TEST(RankEvents, ConstantAgainstQueryCrossesAtPlusMinusOne)
{
    const SolutionPath path = constant_vs_query(1.0, 2.0, -2.0);
    const std::vector<RankEvent> ev = find_rank_events(path);
    ASSERT_EQ(ev.size(), 2u);
    EXPECT_DOUBLE_EQ(ev[0].z, 1.0);
    EXPECT_EQ(ev[0].delta, -1);
    EXPECT_DOUBLE_EQ(ev[1].z, -1.0);
    EXPECT_EQ(ev[1].delta, +1);

    const ConformalResult res = conformal_set(path, 0.4); // threshold ceil(1.2) = 2
    EXPECT_EQ(res.rank_at_zmax, 2);
    ASSERT_EQ(res.steps.size(), 3u);
    EXPECT_EQ(res.steps[1].rank, 1);
    EXPECT_DOUBLE_EQ(res.steps[1].pi, 0.5);
    EXPECT_DOUBLE_EQ(pi_at(res, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(pi_at(res, 1.5), 0.0);
    EXPECT_DOUBLE_EQ(pi_at(res, -1.5), 0.0);
}

TEST(RankEvents, DuplicateLinesEmitNothing)
{
    // x_1 = 1, x_q = 0, y_1 = 0 and beta(z) = -z: F_1 = F_2 = z everywhere
    SolutionPath path;
    path.X = Matrix{{1.0}, {0.0}};
    path.y = Vector::Constant(1, 0.0);
    path.z_max = 2.0;
    path.z_min = -2.0;
    path.lambda = 1.0;
    path.nodes = {node(2.0, -2.0, -1.0), node(-2.0, 2.0, -1.0)};
    const ResidualLine line = residual_line(path, 0);
    EXPECT_DOUBLE_EQ(line.b[0], line.b[1]);
    EXPECT_DOUBLE_EQ(line.a[0], line.a[1]);
    EXPECT_TRUE(find_rank_events(path).empty());
    EXPECT_EQ(conformal_set(path, 0.1).rank_at_zmax, 2);
}

TEST(RankEvents, MatchDenseGridSignChanges)
{
    for (std::uint64_t seed : {3u, 11u, 19u, 23u}) {
        const Traced t = traced(5, 3, seed, 0.05);
        const SolutionPath& path = t.path;
        const std::vector<double> zs = oracle::linspace(path.z_max, path.z_min, 10001);
        const double cell = (path.z_max - path.z_min) / 10000.0;
        const Eigen::Index n = path.n();

        const std::vector<RankEvent> ev = find_rank_events(path);
        for (Eigen::Index i = 0; i < n; ++i) {
            std::vector<double> grid_changes;
            bool prev = false;
            for (std::size_t k = 0; k < zs.size(); ++k) {
                const Vector r = residuals_at(path, zs[k]);
                const bool now = std::abs(r[i]) <= std::abs(r[n]);
                if (k > 0 && now != prev)
                    grid_changes.push_back(zs[k]);
                prev = now;
            }
            std::vector<double> mine;
            for (const RankEvent& e : ev)
                if (e.i == i)
                    mine.push_back(e.z);
            ASSERT_EQ(mine.size(), grid_changes.size()) << "seed " << seed << " i=" << i;
            for (std::size_t k = 0; k < mine.size(); ++k)
                EXPECT_NEAR(mine[k], grid_changes[k], 1.01 * cell) << "seed " << seed << " i=" << i;
        }
    }
}

TEST(RankEvents, StructuralInvariants)
{
    for (std::uint64_t seed = 30; seed < 36; ++seed) {
        const Traced t = traced(20, 6, seed);
        const std::vector<RankEvent> ev = find_rank_events(t.path);
        for (std::size_t k = 0; k < ev.size(); ++k) {
            const RankEvent& e = ev[k];
            EXPECT_TRUE(e.delta == 1 || e.delta == -1);
            ASSERT_LT(e.segment + 1, t.path.nodes.size());
            EXPECT_LE(e.z, t.path.nodes[e.segment].z);
            EXPECT_GE(e.z, t.path.nodes[e.segment + 1].z);
            EXPECT_GE(e.z, t.path.z_min);
            EXPECT_LE(e.z, t.path.z_max);
            if (k > 0)
                EXPECT_GE(ev[k - 1].z, e.z);
        }
    }
}

TEST(ConformalSet, StepFunctionStructure)
{
    for (std::uint64_t seed = 40; seed < 46; ++seed) {
        const Traced t = traced(20, 6, seed);
        const ConformalResult res = conformal_set(t.path, 0.1);
        const double n1 = static_cast<double>(t.path.n() + 1);
        ASSERT_FALSE(res.steps.empty());
        EXPECT_EQ(res.steps.front().z_hi, t.path.z_max);
        EXPECT_EQ(res.steps.back().z_lo, t.path.z_min);
        EXPECT_EQ(res.steps.front().rank, res.rank_at_zmax);
        for (std::size_t k = 0; k < res.steps.size(); ++k) {
            const PiStep& s = res.steps[k];
            EXPECT_GE(s.rank, 1);
            EXPECT_LE(s.rank, t.path.n() + 1);
            EXPECT_DOUBLE_EQ(s.pi, (n1 - s.rank) / n1);
            EXPECT_GE(s.pi, 0.0);
            EXPECT_LE(s.pi, 1.0);
            if (k > 0) {
                EXPECT_EQ(res.steps[k - 1].z_lo, s.z_hi);
                EXPECT_NE(res.steps[k - 1].rank, s.rank);
                // breakpoints only at events
                bool found = false;
                for (const RankEvent& e : res.events)
                    found = found || e.z == s.z_hi;
                EXPECT_TRUE(found) << s.z_hi;
            }
        }
        // hull covers every qualifying run and only qualifying runs are listed
        if (!res.empty) {
            for (const auto& [lo, hi] : res.qualifying) {
                EXPECT_GE(lo, res.lo);
                EXPECT_LE(hi, res.hi);
                EXPECT_LE(lo, hi);
                EXPECT_GE(pi_at(res, 0.5 * (lo + hi)), (n1 - res.threshold) / n1);
            }
        }
    }
}

TEST(ConformalSet, SaturatedThresholdTakesTheWholeRange)
{
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Traced t = traced(3, 2, seed, 0.3);
        const ConformalResult res = conformal_set(t.path, 0.1);
        EXPECT_EQ(res.threshold, 4);
        EXPECT_FALSE(res.empty);
        EXPECT_EQ(res.lo, t.path.z_min);
        EXPECT_EQ(res.hi, t.path.z_max);
    }
}

TEST(ConformalSet, EmptySetIsFlagged)
{
    // rank 2 everywhere on [1.5, 2] while the threshold is ceil(2 * 0.4) = 1
    const ConformalResult res = conformal_set(constant_vs_query(1.0, 2.0, 1.5), 0.6);
    EXPECT_EQ(res.threshold, 1);
    EXPECT_TRUE(res.empty);
    EXPECT_TRUE(res.qualifying.empty());
    EXPECT_DOUBLE_EQ(pi_at(res, 1.7), 0.0);
}

TEST(ConformalSet, PiAtOutsideRangeThrows)
{
    const ConformalResult res = conformal_set(constant_vs_query(1.0, 2.0, -2.0), 0.1);
    EXPECT_THROW(pi_at(res, 2.5), Error);
    EXPECT_THROW(pi_at(res, -2.0 - 1e-9), Error);
    EXPECT_NO_THROW(pi_at(res, -2.0));
}

TEST(ConformalSet, SweepAgreesWithDirectRanks)
{
    for (std::uint64_t seed = 50; seed < 56; ++seed) {
        const Traced t = traced(20, 5, seed);
        const ConformalResult res = conformal_set(t.path, 0.1);
        const double delta = 1e-6 * (t.path.z_max - t.path.z_min);
        for (std::size_t k = 0; k < res.events.size(); ++k) {
            const double z = res.events[k].z;
            const bool crowded = (k > 0 && res.events[k - 1].z - z < 2 * delta && res.events[k - 1].z != z)
                || (k + 1 < res.events.size() && z - res.events[k + 1].z < 2 * delta && res.events[k + 1].z != z);
            if (crowded)
                continue;
            for (double zz : {z + delta, z - delta}) {
                if (zz > t.path.z_max || zz < t.path.z_min)
                    continue;
                const int direct = rank_of_last(residuals_at(t.path, zz).cwiseAbs());
                const double n1 = static_cast<double>(t.path.n() + 1);
                EXPECT_DOUBLE_EQ(pi_at(res, zz), (n1 - direct) / n1)
                    << "seed " << seed << " z=" << zz;
            }
        }
    }
}

TEST(ConformalSet, MatchesGridFullConformal)
{
    for (std::uint64_t seed = 60; seed < 65; ++seed) {
        const Traced t = traced(20, 5, seed);
        const ConformalResult res = conformal_set(t.path, 0.1);
        const std::vector<double> zs = oracle::linspace(t.path.z_min, t.path.z_max, 1000);
        const double cell = zs[1] - zs[0];
        const std::vector<int> ranks = oracle::grid_ranks(t.in.X, t.in.y, t.in.xq, t.lambda, zs);
        const int thr = oracle::threshold_permille(20, 100);
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t k = 0; k < zs.size(); ++k)
            if (ranks[k] <= thr) {
                lo = std::min(lo, zs[k]);
                hi = std::max(hi, zs[k]);
            }
        ASSERT_FALSE(res.empty);
        ASSERT_TRUE(std::isfinite(lo));
        EXPECT_NEAR(res.lo, lo, cell) << "seed " << seed;
        EXPECT_NEAR(res.hi, hi, cell) << "seed " << seed;
    }
}

TEST(PiCurve, AgreesWithGridOracle)
{
    for (std::uint64_t seed = 70; seed < 73; ++seed) {
        const Traced t = traced(20, 5, seed);
        const std::vector<double> zs = oracle::linspace(t.path.z_min, t.path.z_max, 2000);
        const auto curve = pi_curve(t.path, zs);
        const std::vector<int> ranks = oracle::grid_ranks(t.in.X, t.in.y, t.in.xq, t.lambda, zs);
        const double n1 = static_cast<double>(t.path.n() + 1);
        int agree = 0;
        for (std::size_t k = 0; k < zs.size(); ++k) {
            EXPECT_EQ(curve[k].first, zs[k]);
            const double rank = (1.0 - curve[k].second) * n1;
            EXPECT_NEAR(rank, std::round(rank), 1e-9);
            const int r = static_cast<int>(std::lround(rank));
            agree += r == ranks[k];
            EXPECT_LE(std::abs(r - ranks[k]), 1) << "z=" << zs[k];
        }
        EXPECT_GE(agree, 0.95 * static_cast<double>(zs.size())) << "seed " << seed;
    }
}

TEST(ConformalSet, CoverageOverExchangeableTrials)
{
    const int trials = 500;
    const long n = 20;
    const double alpha = 0.1;
    int covered = 0;
    for (int k = 0; k < trials; ++k) {
        const oracle::Instance in = oracle::gaussian_instance(n, 5, 5000 + static_cast<std::uint64_t>(k));
        Vector labels(n + 1);
        labels << in.y, in.y.maxCoeff();
        const double lambda = 0.1 * lambda_max(augment(in.X, in.xq), labels, LossModel::quadratic());
        const SolutionPath path = trace_path(in.X, in.y, in.xq, lambda, LossModel::quadratic(), SolverConfig{});
        const ConformalResult res = conformal_set(path, alpha);
        covered += !res.empty && in.yq >= res.lo && in.yq <= res.hi;
    }
    const double rate = covered / static_cast<double>(trials);
    const double se = std::sqrt(rate * (1 - rate) / trials);
    EXPECT_GE(rate, 1 - alpha - 2.0 / (n + 1) - 3 * se);
}
