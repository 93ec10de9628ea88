#pragma once

// Independent reference computations used by the unit and acceptance suites.
// None of these share code paths with the library beyond the data types.

#include "sparseconf/data.hpp"
#include "sparseconf/loss.hpp"

#include <cstdint>
#include <vector>

namespace oracle {

using sparseconf::Matrix;
using sparseconf::Vector;

struct Instance {
    Matrix X;      // n x p
    Vector y;      // n
    Vector xq;     // p
    double yq = 0.0;
};

// Gaussian design and labels with a sparse linear signal.
Instance gaussian_instance(long n, long p, std::uint64_t seed, double noise = 0.5);

// Cyclic coordinate descent for sum (y - X b)^2 + lambda ||b||_1, run until
// the largest coordinate move is below tol.
Vector cd_lasso(const Matrix& X, const Vector& y, double lambda, const Vector& warm,
                double tol = 1e-13, int max_sweeps = 200000);

// Newton-within-coordinate descent for any smooth separable loss.
Vector cd_generic(const Matrix& X, const Vector& y, double lambda, const sparseconf::LossModel& model,
                  const Vector& warm, double tol = 1e-12, int max_sweeps = 200000);

// The same loss written out independently of the library.
double loss_ref(const sparseconf::LossModel& model, double a, double b);

// #{i : |r_i| <= |r_last|}
int rank_last(const Vector& resid);

// ceil((n+1)(1-alpha)) computed with integer arithmetic on alpha given in per-mille.
int threshold_permille(long n, int alpha_permille);

// Ranks of the query residual at each z from fresh lasso fits on the augmented data.
std::vector<int> grid_ranks(const Matrix& X, const Vector& y, const Vector& xq, double lambda,
                            const std::vector<double>& zs);

std::vector<double> linspace(double lo, double hi, int count);

} // namespace oracle
