#include "sparseconf/baselines.hpp"

#include "sparseconf/conformal.hpp"
#include "sparseconf/data.hpp"
#include "sparseconf/error.hpp"
#include "sparseconf/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sparseconf {

std::string to_string(BaselineMethod method)
{
    switch (method) {
    case BaselineMethod::Grid: return "grid";
    case BaselineMethod::Split: return "split";
    case BaselineMethod::Oracle: return "oracle";
    }
    return "unknown";
}

BaselineMethod parse_baseline(const std::string& name)
{
    if (name == "grid") return BaselineMethod::Grid;
    if (name == "split") return BaselineMethod::Split;
    if (name == "oracle") return BaselineMethod::Oracle;
    throw Error(ErrorKind::InvalidArgument, "unknown baseline method '" + name + "'");
}

void BaselineConfig::validate() const
{
    if (grid_points < 2)
        throw Error(ErrorKind::InvalidArgument, "grid_points must be at least 2");
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
        throw Error(ErrorKind::InvalidArgument, "split_fraction must lie in (0, 1)");
}

namespace {

SolverConfig with_spectral(const SolverConfig& cfg, const Matrix& X)
{
    SolverConfig out = cfg;
    if (out.spectral_sq <= 0.0)
        out.spectral_sq = spectral_norm_sq(X);
    return out;
}

void check_problem(const Matrix& X, const Vector& y, double lambda, const LossModel& model,
                   const SolverConfig& solver)
{
    model.validate();
    solver.validate();
    if (!(lambda > 0.0))
        throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
    if (X.rows() != y.size())
        throw Error(ErrorKind::InvalidArgument, "X rows and label length differ");
    if (y.size() < 2)
        throw Error(ErrorKind::InvalidArgument, "at least two labels are required");
}

} // namespace

GridResult grid_conformal(const Matrix& X, const Vector& y, const Vector& x_query, double lambda,
                          const LossModel& model, double alpha, const SolverConfig& solver,
                          const BaselineConfig& cfg)
{
    check_problem(X, y, lambda, model, solver);
    cfg.validate();

    GridResult res;
    res.method = "grid";
    res.threshold = conformal_threshold(y.size(), alpha);

    const Matrix Xa = augment(X, x_query);
    const SolverConfig sc = with_spectral(solver, Xa);
    const Eigen::Index n = y.size();
    const double z_lo = y.minCoeff();
    const double z_hi = y.maxCoeff();
    const int m = cfg.grid_points;

    Vector labels(n + 1);
    labels.head(n) = y;
    Vector warm = Vector::Zero(X.cols());
    bool found = false;
    for (int k = 0; k < m; ++k) {
        const double z = k + 1 == m ? z_hi : z_lo + (z_hi - z_lo) * k / (m - 1);
        labels[n] = z;
        res.z.push_back(z);
        int rank = -1;
        try {
            const FitResult r = fit(Xa, labels, lambda, model, warm, sc);
            warm = r.beta;
            rank = rank_of_last((labels - r.ystar).cwiseAbs());
        } catch (const Error&) {
            ++res.skipped;
            warm.setZero();
        }
        res.rank.push_back(rank);
        const bool in = rank >= 0 && rank <= res.threshold;
        res.included.push_back(in);
        if (in) {
            if (!found) {
                res.lo = z;
                found = true;
            }
            res.hi = z;
        }
    }
    res.empty = !found;
    return res;
}

Interval split_conformal(const Matrix& X, const Vector& y, const Vector& x_query, double lambda,
                         const LossModel& model, double alpha, const SolverConfig& solver,
                         const BaselineConfig& cfg)
{
    check_problem(X, y, lambda, model, solver);
    cfg.validate();
    if (x_query.size() != X.cols())
        throw Error(ErrorKind::InvalidArgument, "query row length differs from the number of features");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");

    const Eigen::Index n = y.size();
    const auto n_fit = static_cast<Eigen::Index>(std::floor(cfg.split_fraction * static_cast<double>(n)));
    const Eigen::Index m = n - n_fit;
    if (n < 4 || n_fit < 1 || m < 1)
        throw Error(ErrorKind::InsufficientData, "split conformal needs non-empty fit and calibration parts");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng(cfg.rng_seed);
    shuffle(order, rng);

    Matrix Xf(n_fit, X.cols());
    Vector yf(n_fit);
    for (Eigen::Index i = 0; i < n_fit; ++i) {
        Xf.row(i) = X.row(order[static_cast<std::size_t>(i)]);
        yf[i] = y[order[static_cast<std::size_t>(i)]];
    }
    const FitResult r = fit(Xf, yf, lambda, model, solver);

    std::vector<double> resid;
    resid.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index i = n_fit; i < n; ++i) {
        const Eigen::Index row = order[static_cast<std::size_t>(i)];
        resid.push_back(std::abs(y[row] - X.row(row).dot(r.beta)));
    }
    std::sort(resid.begin(), resid.end());

    Interval out;
    out.method = "split";
    out.center = x_query.dot(r.beta);
    const int k = conformal_threshold(m, alpha);
    const double q = k > m ? std::numeric_limits<double>::infinity()
                           : resid[static_cast<std::size_t>(k - 1)];
    out.lo = out.center - q;
    out.hi = out.center + q;
    return out;
}

Interval oracle_conformal(const Matrix& X, const Vector& y, const Vector& x_query, double y_true,
                          double lambda, const LossModel& model, double alpha,
                          const SolverConfig& solver)
{
    check_problem(X, y, lambda, model, solver);
    const Eigen::Index n = y.size();
    const int k = conformal_threshold(n, alpha);

    const Matrix Xa = augment(X, x_query);
    Vector labels(n + 1);
    labels.head(n) = y;
    labels[n] = y_true;
    const FitResult r = fit(Xa, labels, lambda, model, solver);

    std::vector<double> resid(static_cast<std::size_t>(n + 1));
    for (Eigen::Index i = 0; i <= n; ++i)
        resid[static_cast<std::size_t>(i)] = std::abs(labels[i] - r.ystar[i]);
    std::nth_element(resid.begin(), resid.begin() + (k - 1), resid.end());
    const double q = resid[static_cast<std::size_t>(k - 1)];

    Interval out;
    out.method = "oracle";
    out.center = r.ystar[n];
    out.lo = out.center - q;
    out.hi = out.center + q;
    return out;
}

} // namespace sparseconf
