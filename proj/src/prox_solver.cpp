#include "sparseconf/prox_solver.hpp"

#include "sparseconf/error.hpp"

#include <algorithm>
#include <cmath>

namespace sparseconf {

SolverConfig SolverConfig::defaults_for(const LossModel& model)
{
    SolverConfig cfg;
    cfg.eps_tol = model.kind == LossKind::Quadratic ? 1e-8 : 1e-7;
    return cfg;
}

void SolverConfig::validate() const
{
    if (!(eps_tol > 0.0))
        throw Error(ErrorKind::InvalidArgument, "eps_tol must be positive");
    if (max_iter < 1)
        throw Error(ErrorKind::InvalidArgument, "max_iter must be at least 1");
}

double spectral_norm_sq(const Matrix& X)
{
    if (X.size() == 0)
        return 0.0;
    Matrix gram = X.rows() < X.cols() ? Matrix(X * X.transpose()) : Matrix(X.transpose() * X);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    return std::max(eig.eigenvalues().maxCoeff(), 0.0);
}

double objective(const Matrix& X, const Vector& y, const Vector& beta, double lambda,
                 const LossModel& model)
{
    return loss_sum(model, y, X * beta) + lambda * beta.lpNorm<1>();
}

double lambda_max(const Matrix& X, const Vector& y, const LossModel& model)
{
    Vector g;
    loss_grad2(model, y, Vector::Zero(y.size()), g);
    return (X.transpose() * g).lpNorm<Eigen::Infinity>();
}

double violation_from_correlations(const Vector& corr, const Vector& beta, double lambda)
{
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        double v;
        if (beta[j] > 0.0)
            v = std::abs(corr[j] + lambda);
        else if (beta[j] < 0.0)
            v = std::abs(corr[j] - lambda);
        else
            v = std::max(std::abs(corr[j]) - lambda, 0.0);
        worst = std::max(worst, v);
    }
    return worst;
}

double optimality_violation(const Matrix& X, const Vector& y, const Vector& beta, double lambda,
                            const LossModel& model)
{
    Vector g;
    loss_grad2(model, y, X * beta, g);
    return violation_from_correlations(X.transpose() * g, beta, lambda);
}

IndexSet active_set(const Matrix& X, const Vector& y, const Vector& beta, double lambda,
                    const LossModel& model, double act_tol)
{
    Vector g;
    loss_grad2(model, y, X * beta, g);
    const Vector corr = X.transpose() * g;
    IndexSet out;
    for (Eigen::Index j = 0; j < corr.size(); ++j)
        if (std::abs(corr[j]) >= lambda * (1.0 - act_tol))
            out.push_back(j);
    return out;
}

namespace {

double max_curvature(const LossModel& model, const Vector& y, const Vector& ystar)
{
    if (model.kind == LossKind::Quadratic)
        return 2.0;
    return loss_derivs(model, y, ystar).hess22.maxCoeff();
}

bool all_finite(const Vector& v)
{
    return v.allFinite();
}

} // namespace

FitResult fit(const Matrix& X, const Vector& y, double lambda, const LossModel& model,
              const SolverConfig& cfg)
{
    return fit(X, y, lambda, model, Vector::Zero(X.cols()), cfg);
}

FitResult fit(const Matrix& X, const Vector& y, double lambda, const LossModel& model,
              const Vector& warm, const SolverConfig& cfg)
{
    cfg.validate();
    if (!(lambda > 0.0))
        throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
    if (X.rows() != y.size())
        throw Error(ErrorKind::InvalidArgument, "fit: X rows and label length differ");
    if (warm.size() != X.cols())
        throw Error(ErrorKind::InvalidArgument, "fit: warm start has the wrong length");
    if (!X.allFinite() || !y.allFinite() || !warm.allFinite())
        throw Error(ErrorKind::InvalidArgument, "fit: non-finite input");

    const bool backtrack = cfg.step_rule == StepRule::Backtracking;
    const double sigma_sq = cfg.spectral_sq > 0.0 ? cfg.spectral_sq : spectral_norm_sq(X);

    Vector x = warm;
    Vector Xx = X * x;
    Vector g2;
    loss_grad2(model, y, Xx, g2);
    Vector grad_x = X.transpose() * g2;
    double f_x = loss_sum(model, y, Xx);
    double F_x = f_x + lambda * x.lpNorm<1>();

    FitResult res;
    res.violation = violation_from_correlations(grad_x, x, lambda);
    if (res.violation <= cfg.eps_tol || sigma_sq == 0.0) {
        res.beta = std::move(x);
        res.ystar = std::move(Xx);
        res.objective = F_x;
        res.converged = res.violation <= cfg.eps_tol;
        return res;
    }

    double L = sigma_sq * max_curvature(model, y, Xx);
    if (!(L > 0.0) || !std::isfinite(L))
        L = sigma_sq;

    Vector v = x;
    Vector Xv = Xx;
    Vector grad_v = grad_x;
    double f_v = f_x;
    double t = 1.0;

    Vector x_new(x.size());
    Vector Xx_new(Xx.size());
    Vector grad_new(x.size());
    Vector d(x.size());

    // lowest stationarity residual seen so far, returned when eps_tol is not reached
    Vector best_x = x;
    Vector best_Xx = Xx;
    double best_F = F_x;
    const double F_start = F_x;

    int it = 0;
    while (it < cfg.max_iter) {
        ++it;
        if (backtrack)
            L *= 0.9;

        double f_new = 0.0;
        for (int tries = 0;; ++tries) {
            const double step = 1.0 / L;
            for (Eigen::Index j = 0; j < x.size(); ++j)
                x_new[j] = soft_threshold(v[j] - step * grad_v[j], step * lambda);
            Xx_new.noalias() = X * x_new;
            f_new = loss_sum(model, y, Xx_new);
            loss_grad2(model, y, Xx_new, g2);
            grad_new.noalias() = X.transpose() * g2;
            if (!backtrack || tries > 60)
                break;
            d = x_new - v;
            const double dd = d.squaredNorm();
            if (dd == 0.0)
                break;
            bool ok;
            if (std::abs(f_new - f_v) > 1e-10 * std::max(std::abs(f_v), 1.0)) {
                ok = f_new - f_v - grad_v.dot(d) <= 0.5 * L * dd;
            } else {
                // function values agree to roundoff; test the curvature along d instead
                ok = (grad_new - grad_v).dot(d) <= L * dd;
            }
            if (ok)
                break;
            L *= 2.0;
        }

        if (!std::isfinite(f_new) || !all_finite(x_new))
            throw Error(ErrorKind::NonFiniteIterate,
                        "proximal gradient produced a non-finite iterate (step size or overflow)");

        const double F_new = f_new + lambda * x_new.lpNorm<1>();
        if (F_new > F_x && t > 1.0) {
            // momentum made things worse: restart from the current iterate
            t = 1.0;
            v = x;
            Xv = Xx;
            grad_v = grad_x;
            f_v = f_x;
            continue;
        }

        const double viol = violation_from_correlations(grad_new, x_new, lambda);

        double coef = 0.0;
        if (cfg.acceleration) {
            const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            coef = (t - 1.0) / t_new;
            t = t_new;
        }
        if (coef != 0.0) {
            v = x_new + coef * (x_new - x);
            Xv = Xx_new + coef * (Xx_new - Xx);
            loss_grad2(model, y, Xv, g2);
            grad_v.noalias() = X.transpose() * g2;
            f_v = loss_sum(model, y, Xv);
        } else {
            v = x_new;
            Xv = Xx_new;
            grad_v = grad_new;
            f_v = f_new;
        }

        x.swap(x_new);
        Xx.swap(Xx_new);
        grad_x.swap(grad_new);
        f_x = f_new;
        F_x = F_new;
        if (viol < res.violation && F_x <= F_start) {
            res.violation = viol;
            best_x = x;
            best_Xx = Xx;
            best_F = F_x;
        }
        if (viol <= cfg.eps_tol) {
            res.converged = true;
            break;
        }
    }

    x = std::move(best_x);
    Xx = std::move(best_Xx);
    F_x = best_F;
    res.beta = std::move(x);
    res.ystar = std::move(Xx);
    res.objective = F_x;
    res.iters = it;
    return res;
}

} // namespace sparseconf
