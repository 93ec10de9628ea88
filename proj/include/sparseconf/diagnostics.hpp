#pragma once

#include "sparseconf/path.hpp"

#include <vector>

namespace sparseconf {

struct GapPoint {
    double z = 0.0;
    double gap = 0.0;       // P(interpolated) - P(reference), clamped at 0
    double neg_log = 0.0;   // -ln(gap), +inf for a zero gap
};

// Settings of the high-accuracy reference fits.
struct ReferenceConfig {
    double tol_factor = 0.01;   // reference eps_tol = path eps_tol * tol_factor
    int iter_factor = 50;       // reference max_iter = default max_iter * iter_factor
};

// Reference solution at z, warm-started from the interpolated weights.
FitResult reference_fit(const SolutionPath& path, double z, const ReferenceConfig& rc = {});

std::vector<GapPoint> primal_gap_curve(const SolutionPath& path, const std::vector<double>& grid,
                                       const ReferenceConfig& rc = {});

// Smoothness and curvature constants measured on the realized path.
struct BoundConstants {
    double L = 0.0;
    double nu = 0.0;   // max of |hess22| and |cross21|
    double mu = 0.0;   // min of hess22
    double sigma_min_A = 0.0;
    double sigma_max_A = 0.0;
};

// Extreme singular values of the columns `cols` of X; zeros for an empty set.
std::pair<double, double> singular_range(const Matrix& X, const IndexSet& cols);

// sigma_max(X_A) / sigma_min(X_A)^2, 0 for an empty set.
double conditioning_ratio(const Matrix& X, const IndexSet& cols);

// nu and mu over the nodes with z in [z_lo, z_hi]; L and sigmas from the active
// set of the node governing z_hi and the sup over the active sets of those nodes.
// Throws Error(NotStronglyConvex) when mu <= 0.
BoundConstants bound_constants(const SolutionPath& path, double z_lo, double z_hi);

struct BoundReport {
    double z_probe = 0.0;
    std::size_t node = 0;
    double distance = 0.0;    // |z - z_t|
    double gap = 0.0;         // ||interpolated - reference||_2
    double violation = 0.0;   // stationarity residual at the node
    double eps_term = 0.0;    // that residual converted into a weight distance
    double bound = 0.0;
    double L = 0.0;
    double nu_f = 0.0;
    double mu_f = 0.0;
    double sigma_min_A = 0.0;
    double sigma_max_A = 0.0;
    bool holds = false;
    // image of the weight error through d2 f
    double grad_gap = 0.0;
    double grad_bound = 0.0;
    bool grad_holds = false;
};

std::vector<BoundReport> check_error_bound(const SolutionPath& path, const std::vector<double>& probes,
                                           const ReferenceConfig& rc = {});

} // namespace sparseconf
