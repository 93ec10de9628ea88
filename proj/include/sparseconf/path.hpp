#pragma once

#include "sparseconf/loss.hpp"
#include "sparseconf/prox_solver.hpp"

#include <map>
#include <string>
#include <vector>

namespace sparseconf {

enum class EventKind { Init, Join, Leave, ForcedStep };

std::string to_string(EventKind kind);

// One kink of the label path z -> beta(z).
struct PathNode {
    double z = 0.0;
    Vector beta;      // corrected weights at z
    IndexSet active;  // active set governing the segment just below z
    Vector dbeta;     // d beta / d z on that segment, zero off `active`
    EventKind event = EventKind::Init;
    Eigen::Index event_index = -1; // variable that joined or left, -1 otherwise
    double violation = 0.0;
    bool converged = true;
};

// Knobs of the tracer that are not solver settings.
struct TraceOptions {
    double act_tol = 1e-6;        // relative slack on |X_j^T d2 f| = lambda
    double delta_min_rel = 1e-9;  // minimal progress, relative to z_max - z_min
    double delta_force_rel = 1e-3;// forced step on a stall, relative to z_max - z_min
    std::size_t max_nodes = 0;    // 0: 100 (n + p) + 1000
};

// Nodes are ordered by strictly decreasing z. Node t governs (z_{t+1}, z_t],
// where beta(z) = beta_t + dbeta_t (z - z_t).
struct SolutionPath {
    std::vector<PathNode> nodes;
    double z_min = 0.0;
    double z_max = 0.0;
    double lambda = 0.0;
    LossModel model;
    double eps_tol = 0.0;
    Matrix X;        // (n+1) x p, query row last
    Vector y;        // the n observed labels
    int stall_count = 0;
    int unconverged_count = 0;

    Eigen::Index n() const { return y.size(); }
    Eigen::Index p() const { return X.cols(); }

    // (y_1, ..., y_n, z)
    Vector labels_at(double z) const;
    // Index of the node governing z: the smallest node z_t >= z.
    std::size_t governing_node(double z) const;
};

// Stacks the query row under X.
Matrix augment(const Matrix& X, const Vector& x_query);

// d beta / d z on `active`:  -cross21_{n+1} (X_A^T diag(hess22) X_A)^{-1} x_{n+1,A},
// zero elsewhere. X is the augmented design. Throws Error(SingularSystem).
Vector path_gradient(const Matrix& X, const IndexSet& active, const LossDerivatives& derivs);

// z at which each active coordinate reaches zero under the linearization, -inf
// when the slope vanishes or the crossing is not below node.z.
std::map<Eigen::Index, double> leave_candidates(const PathNode& node);

// z at which each inactive coordinate reaches |X_j^T d2 f| = lambda under the
// linearized gradient; of the two roots, the largest one below
// node.z - delta_min is kept, -inf when there is none. A bound the correlation
// already sits on (within slack) is not counted.
std::map<Eigen::Index, double> join_candidates(const PathNode& node, const Matrix& X,
                                               const Vector& y_aug, const LossModel& model,
                                               double lambda, double delta_min = 0.0,
                                               double slack = 0.0);

// Predictor-corrector homotopy over z in [min(y), max(y)].
SolutionPath trace_path(const Matrix& X, const Vector& y, const Vector& x_query, double lambda,
                        const LossModel& model, const SolverConfig& cfg,
                        const TraceOptions& opts = {});

// beta_t + dbeta_t (z - z_t) for the governing node t. Throws Error(OutOfRange).
Vector interpolate(const SolutionPath& path, double z);

} // namespace sparseconf
