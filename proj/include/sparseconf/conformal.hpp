#pragma once

#include "sparseconf/path.hpp"

#include <utility>
#include <vector>

namespace sparseconf {

// Residuals along one segment: F(z) = a + b z approximates y(z) - X beta(z).
struct ResidualLine {
    Vector a;
    Vector b;

    double at(Eigen::Index i, double z) const { return a[i] + b[i] * z; }
};

// A change of Rank(E_{n+1}) by `delta` when sweeping z downwards across `z`.
struct RankEvent {
    double z = 0.0;
    int delta = 0;
    Eigen::Index i = -1;
    std::size_t segment = 0;
};

// Rank is constant on (z_lo, z_hi].
struct PiStep {
    double z_hi = 0.0;
    double z_lo = 0.0;
    int rank = 0;
    double pi = 0.0;
};

struct ConformalResult {
    double alpha = 0.0;
    int threshold = 0;         // ceil((n+1)(1-alpha))
    int rank_at_zmax = 0;
    std::vector<RankEvent> events;  // sorted by decreasing z
    std::vector<PiStep> steps;      // sorted by decreasing z, covering [z_min, z_max]
    // maximal runs of steps with rank <= threshold, as (lo, hi)
    std::vector<std::pair<double, double>> qualifying;
    bool empty = true;
    double lo = 0.0;
    double hi = 0.0;
};

// ceil((n+1)(1-alpha)), guarded against representation error in the product.
int conformal_threshold(Eigen::Index n, double alpha);

// Rank(E_k) = #{i : E_i <= E_k} for the last entry k of `scores`.
int rank_of_last(const Vector& scores);

// The segment governed by node `segment`, i.e. (z_{t+1}, z_t].
ResidualLine residual_line(const SolutionPath& path, std::size_t segment);

std::vector<RankEvent> find_rank_events(const SolutionPath& path);

// Sweeps the rank events from z_max down to z_min and returns the typicalness
// step function and the hull of {z : Rank(E_{n+1}(z)) <= threshold}.
ConformalResult conformal_set(const SolutionPath& path, double alpha);

// pi(z) from a computed step function. Throws Error(OutOfRange).
double pi_at(const ConformalResult& result, double z);

std::vector<std::pair<double, double>> pi_curve(const SolutionPath& path,
                                                const std::vector<double>& grid);
std::vector<std::pair<double, double>> pi_curve(const ConformalResult& result,
                                                const std::vector<double>& grid);

} // namespace sparseconf
