#include "sparseconf/path.hpp"

#include "sparseconf/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sparseconf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double sign_of(double x)
{
    return (x > 0.0) - (x < 0.0);
}

} // namespace

std::string to_string(EventKind kind)
{
    switch (kind) {
    case EventKind::Init: return "init";
    case EventKind::Join: return "join";
    case EventKind::Leave: return "leave";
    case EventKind::ForcedStep: return "forced_step";
    }
    return "unknown";
}

Vector SolutionPath::labels_at(double z) const
{
    Vector out(y.size() + 1);
    out.head(y.size()) = y;
    out[y.size()] = z;
    return out;
}

std::size_t SolutionPath::governing_node(double z) const
{
    // nodes[t].z is decreasing; find the last t with nodes[t].z >= z
    auto it = std::partition_point(nodes.begin(), nodes.end(),
                                   [z](const PathNode& nd) { return nd.z >= z; });
    if (it == nodes.begin())
        return 0;
    return static_cast<std::size_t>(std::distance(nodes.begin(), it) - 1);
}

Matrix augment(const Matrix& X, const Vector& x_query)
{
    if (x_query.size() != X.cols())
        throw Error(ErrorKind::InvalidArgument, "query row length differs from the number of features");
    Matrix out(X.rows() + 1, X.cols());
    out.topRows(X.rows()) = X;
    out.row(X.rows()) = x_query.transpose();
    return out;
}

Vector path_gradient(const Matrix& X, const IndexSet& active, const LossDerivatives& derivs)
{
    Vector out = Vector::Zero(X.cols());
    if (active.empty())
        return out;

    const Eigen::Index last = X.rows() - 1;
    const auto k = static_cast<Eigen::Index>(active.size());
    Matrix XA(X.rows(), k);
    Vector rhs(k);
    for (Eigen::Index c = 0; c < k; ++c) {
        XA.col(c) = X.col(active[c]);
        rhs[c] = -derivs.cross21[last] * X(last, active[c]);
    }
    Matrix gram = XA.transpose() * derivs.hess22.asDiagonal() * XA;

    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) {
        const double jitter = 1e-10 * gram.trace() / static_cast<double>(k);
        gram.diagonal().array() += jitter;
        llt.compute(gram);
        if (llt.info() != Eigen::Success || !(jitter > 0.0))
            throw Error(ErrorKind::SingularSystem,
                        "active-set Gram matrix is not positive definite (rank-deficient X_A)");
    }
    const Vector sol = llt.solve(rhs);
    if (!sol.allFinite())
        throw Error(ErrorKind::SingularSystem, "active-set Gram solve produced non-finite values");
    for (Eigen::Index c = 0; c < k; ++c)
        out[active[c]] = sol[c];
    return out;
}

std::map<Eigen::Index, double> leave_candidates(const PathNode& node)
{
    std::map<Eigen::Index, double> out;
    for (Eigen::Index j : node.active) {
        const double slope = node.dbeta[j];
        double z_out = kNegInf;
        if (slope != 0.0) {
            z_out = node.z - node.beta[j] / slope;
            if (!(z_out < node.z))
                z_out = kNegInf;
        }
        out[j] = z_out;
    }
    return out;
}

namespace {

// X_j^T d2 f and the z-slope of the linearized d2 f, both at the node.
struct CorrelationLine {
    Vector corr;
    Vector slope;
};

CorrelationLine correlation_line(const Matrix& X, const Vector& dbeta,
                                 const LossDerivatives& d)
{
    const Eigen::Index last = X.rows() - 1;
    Vector g = d.hess22.cwiseProduct(X * dbeta);
    g[last] += d.cross21[last];
    return {X.transpose() * d.grad2, X.transpose() * g};
}

} // namespace

std::map<Eigen::Index, double> join_candidates(const PathNode& node, const Matrix& X,
                                               const Vector& y_aug, const LossModel& model,
                                               double lambda, double delta_min, double slack)
{
    const LossDerivatives d = loss_derivs(model, y_aug, X * node.beta);
    const CorrelationLine line = correlation_line(X, node.dbeta, d);

    std::vector<bool> is_active(static_cast<std::size_t>(X.cols()), false);
    for (Eigen::Index j : node.active)
        is_active[static_cast<std::size_t>(j)] = true;

    const double ceiling = node.z - delta_min;
    std::map<Eigen::Index, double> out;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (is_active[static_cast<std::size_t>(j)])
            continue;
        const double den = line.slope[j];
        double best = kNegInf;
        if (den != 0.0) {
            for (double bound : {lambda, -lambda}) {
                // already sitting on this bound: a root here is solver noise
                if (std::abs(line.corr[j] - bound) <= slack)
                    continue;
                const double root = node.z + (bound - line.corr[j]) / den;
                if (root < ceiling && root > best)
                    best = root;
            }
        }
        out[j] = best;
    }
    return out;
}

namespace {

struct Tracer {
    const Matrix& X;
    const SolutionPath& path;
    double lambda;
    const LossModel& model;
    const SolverConfig& cfg;
    const TraceOptions& opts;
    double delta_min;

    // Fills active / dbeta for a corrected point. Candidates are the
    // equicorrelated coordinates plus the support; zero coordinates whose
    // predicted motion contradicts their subgradient sign are dropped, and
    // coordinates that would hit zero within delta_min are treated as left.
    void finalize(PathNode& node) const
    {
        const Vector y_aug = path.labels_at(node.z);
        LossDerivatives d = loss_derivs(model, y_aug, X * node.beta);
        Vector corr = X.transpose() * d.grad2;

        const double slack = std::max(lambda * opts.act_tol, 10.0 * cfg.eps_tol);
        IndexSet cand;
        for (Eigen::Index j = 0; j < X.cols(); ++j)
            if (node.beta[j] != 0.0 || std::abs(corr[j]) >= lambda - slack)
                cand.push_back(j);

        bool zeroed = false;
        for (std::size_t round = 0; round <= cand.size() + 1; ++round) {
            node.dbeta = path_gradient(X, cand, d);
            IndexSet keep;
            keep.reserve(cand.size());
            for (Eigen::Index j : cand) {
                const double s = node.dbeta[j];
                if (node.beta[j] != 0.0 && std::abs(node.beta[j]) <= std::abs(s) * delta_min) {
                    // within delta_min of zero along the path: treat as zero
                    node.beta[j] = 0.0;
                    zeroed = true;
                }
                if (node.beta[j] == 0.0) {
                    // moving down in z, beta_j ~ -s * h must share the sign of -corr_j
                    if (-s * sign_of(-corr[j]) > 0.0)
                        keep.push_back(j);
                    continue;
                }
                keep.push_back(j);
            }
            if (keep.size() == cand.size())
                break;
            cand.swap(keep);
            if (zeroed) {
                d = loss_derivs(model, y_aug, X * node.beta);
                corr = X.transpose() * d.grad2;
            }
        }
        node.active = std::move(cand);
        node.violation = violation_from_correlations(corr, node.beta, lambda);
    }
};

} // namespace

SolutionPath trace_path(const Matrix& X, const Vector& y, const Vector& x_query, double lambda,
                        const LossModel& model, const SolverConfig& cfg_in,
                        const TraceOptions& opts)
{
    model.validate();
    cfg_in.validate();
    if (!(lambda > 0.0))
        throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
    if (y.size() < 2)
        throw Error(ErrorKind::InvalidArgument, "trace_path needs at least two labels");
    if (X.rows() != y.size())
        throw Error(ErrorKind::InvalidArgument, "X rows and label length differ");

    SolutionPath path;
    path.X = augment(X, x_query);
    path.y = y;
    path.lambda = lambda;
    path.model = model;
    path.eps_tol = cfg_in.eps_tol;
    path.z_max = y.maxCoeff();
    path.z_min = y.minCoeff();

    SolverConfig cfg = cfg_in;
    if (cfg.spectral_sq <= 0.0)
        cfg.spectral_sq = spectral_norm_sq(path.X);

    const double range = path.z_max - path.z_min;
    const double delta_min = opts.delta_min_rel * range;
    const double delta_force = opts.delta_force_rel * range;
    const std::size_t max_nodes = opts.max_nodes > 0
        ? opts.max_nodes
        : static_cast<std::size_t>(100 * (path.X.rows() + path.X.cols()) + 1000);

    const double join_slack = std::max(lambda * opts.act_tol, 10.0 * cfg.eps_tol);
    const Tracer tracer{path.X, path, lambda, model, cfg, opts, delta_min};

    {
        PathNode init;
        init.z = path.z_max;
        const FitResult r = fit(path.X, path.labels_at(init.z), lambda, model, cfg);
        init.beta = r.beta;
        init.converged = r.converged;
        init.event = EventKind::Init;
        if (!r.converged)
            ++path.unconverged_count;
        tracer.finalize(init);
        path.nodes.push_back(std::move(init));
    }

    while (path.nodes.back().z > path.z_min) {
        const PathNode& cur = path.nodes.back();

        double z_out = kNegInf;
        Eigen::Index j_out = -1;
        for (const auto& [j, zc] : leave_candidates(cur))
            if (zc > z_out) {
                z_out = zc;
                j_out = j;
            }
        double z_in = kNegInf;
        Eigen::Index j_in = -1;
        for (const auto& [j, zc] :
             join_candidates(cur, path.X, path.labels_at(cur.z), model, lambda, delta_min, join_slack))
            if (zc > z_in) {
                z_in = zc;
                j_in = j;
            }

        PathNode next;
        double z_next;
        if (z_in > z_out) {
            z_next = z_in;
            next.event = EventKind::Join;
            next.event_index = j_in;
        } else {
            z_next = z_out;
            next.event = EventKind::Leave;
            next.event_index = j_out;
        }

        if (!(z_next >= path.z_min)) {
            z_next = path.z_min;
            next.event = EventKind::ForcedStep;
            next.event_index = -1;
        } else if (z_next >= cur.z - delta_min) {
            z_next = std::max(cur.z - delta_force, path.z_min);
            next.event = EventKind::ForcedStep;
            next.event_index = -1;
            ++path.stall_count;
        }

        next.z = z_next;
        const Vector predicted = cur.beta + cur.dbeta * (z_next - cur.z);
        const FitResult r = fit(path.X, path.labels_at(z_next), lambda, model, predicted, cfg);
        next.beta = r.beta;
        next.converged = r.converged;
        if (!r.converged)
            ++path.unconverged_count;
        tracer.finalize(next);
        path.nodes.push_back(std::move(next));

        if (path.nodes.size() > max_nodes)
            throw Error(ErrorKind::PathTooLong, "path exceeded the node limit without reaching z_min");
    }
    return path;
}

Vector interpolate(const SolutionPath& path, double z)
{
    if (path.nodes.empty())
        throw Error(ErrorKind::InvalidArgument, "interpolate on an empty path");
    if (!(z >= path.z_min && z <= path.z_max))
        throw Error(ErrorKind::OutOfRange, "z = " + std::to_string(z) + " is outside [z_min, z_max]");
    const PathNode& nd = path.nodes[path.governing_node(z)];
    if (z == nd.z)
        return nd.beta;
    return nd.beta + nd.dbeta * (z - nd.z);
}

} // namespace sparseconf
