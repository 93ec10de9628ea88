#pragma once

#include "sparseconf/loss.hpp"

#include <vector>

namespace sparseconf {

using IndexSet = std::vector<Eigen::Index>;

enum class StepRule { Fixed, Backtracking };

struct SolverConfig {
    // Stop once the stationarity residual (see optimality_violation) is below this.
    double eps_tol = 1e-8;
    int max_iter = 50000;
    StepRule step_rule = StepRule::Backtracking;
    bool acceleration = true;
    // sigma_max(X)^2 if already known; 0 means compute it.
    double spectral_sq = 0.0;

    // eps_tol = 1e-8 for the quadratic loss, 1e-7 otherwise.
    static SolverConfig defaults_for(const LossModel& model);
    void validate() const;
};

struct FitResult {
    Vector beta;
    Vector ystar;
    double violation = 0.0;
    double objective = 0.0;
    int iters = 0;
    bool converged = false;
};

// sign(x) * max(|x| - t, 0)
inline double soft_threshold(double x, double t)
{
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

// Largest eigenvalue of X^T X, via the smaller of the two Gram matrices.
double spectral_norm_sq(const Matrix& X);

// f(y, X beta) + lambda * ||beta||_1
double objective(const Matrix& X, const Vector& y, const Vector& beta, double lambda,
                 const LossModel& model);

// ||X^T d2 f(y, 0)||_inf: the smallest lambda for which beta = 0 is optimal.
double lambda_max(const Matrix& X, const Vector& y, const LossModel& model);

// Max over coordinates of the violation of  -X^T d2 f(y, X beta) in lambda * subdiff ||beta||_1.
double optimality_violation(const Matrix& X, const Vector& y, const Vector& beta,
                            double lambda, const LossModel& model);

// Same, from the correlations c = X^T d2 f already in hand.
double violation_from_correlations(const Vector& corr, const Vector& beta, double lambda);

// Indices with |X_j^T d2 f| >= lambda (1 - act_tol), ascending.
IndexSet active_set(const Matrix& X, const Vector& y, const Vector& beta, double lambda,
                    const LossModel& model, double act_tol = 1e-6);

// Accelerated proximal gradient (FISTA with backtracking and function-value
// restart). Throws Error(NonFiniteIterate) if an iterate stops being finite;
// otherwise returns the iterate with the smallest stationarity residual among
// those no worse in objective than the start, converged or not.
FitResult fit(const Matrix& X, const Vector& y, double lambda, const LossModel& model,
              const SolverConfig& cfg);
FitResult fit(const Matrix& X, const Vector& y, double lambda, const LossModel& model,
              const Vector& warm, const SolverConfig& cfg);

} // namespace sparseconf
