#pragma once

#include "sparseconf/loss.hpp"
#include "sparseconf/prox_solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sparseconf {

enum class BaselineMethod { Grid, Split, Oracle };

std::string to_string(BaselineMethod method);
BaselineMethod parse_baseline(const std::string& name);

struct BaselineConfig {
    BaselineMethod method = BaselineMethod::Grid;
    int grid_points = 100;
    double split_fraction = 0.5; // share of rows used for fitting
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct Interval {
    std::string method;
    double lo = 0.0;
    double hi = 0.0;
    bool empty = false;
    double center = 0.0; // model prediction at the query, when the method has one

    double length() const { return empty ? 0.0 : hi - lo; }
    bool contains(double z) const { return !empty && z >= lo && z <= hi; }
};

struct GridResult : Interval {
    int threshold = 0;
    std::vector<double> z;
    std::vector<int> rank;         // -1 where the candidate fit failed
    std::vector<char> included;
    int skipped = 0;
};

// Full conformal on grid_points candidates evenly spaced over [min y, max y],
// each fit warm-started from its left neighbour.
GridResult grid_conformal(const Matrix& X, const Vector& y, const Vector& x_query, double lambda,
                          const LossModel& model, double alpha, const SolverConfig& solver,
                          const BaselineConfig& cfg = {});

// Fit on a seeded share of the rows, calibrate absolute residuals on the rest.
// The interval is infinite when the calibration set is too small for alpha.
Interval split_conformal(const Matrix& X, const Vector& y, const Vector& x_query, double lambda,
                         const LossModel& model, double alpha, const SolverConfig& solver,
                         const BaselineConfig& cfg = {});

// Fit with the true label in place and read the quantile off the n+1 residuals.
Interval oracle_conformal(const Matrix& X, const Vector& y, const Vector& x_query, double y_true,
                          double lambda, const LossModel& model, double alpha,
                          const SolverConfig& solver);

} // namespace sparseconf
