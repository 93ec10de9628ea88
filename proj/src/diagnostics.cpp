#include "sparseconf/diagnostics.hpp"

#include "sparseconf/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sparseconf {

namespace {

SolverConfig reference_solver(const SolutionPath& path, const ReferenceConfig& rc, double spectral_sq)
{
    SolverConfig cfg = SolverConfig::defaults_for(path.model);
    cfg.eps_tol = path.eps_tol * rc.tol_factor;
    cfg.max_iter *= rc.iter_factor;
    cfg.spectral_sq = spectral_sq;
    return cfg;
}

FitResult reference_at(const SolutionPath& path, double z, const SolverConfig& cfg)
{
    return fit(path.X, path.labels_at(z), path.lambda, path.model, interpolate(path, z), cfg);
}

struct Curvature {
    double nu = 0.0;
    double mu = std::numeric_limits<double>::infinity();

    void add(const LossDerivatives& d)
    {
        nu = std::max({nu, d.hess22.cwiseAbs().maxCoeff(), d.cross21.cwiseAbs().maxCoeff()});
        mu = std::min(mu, d.hess22.minCoeff());
    }
    void add(const SolutionPath& path, double z, const Vector& beta)
    {
        add(loss_derivs(path.model, path.labels_at(z), path.X * beta));
    }
};

IndexSet merge(IndexSet a, const IndexSet& b)
{
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

IndexSet support(const Vector& beta)
{
    IndexSet out;
    for (Eigen::Index j = 0; j < beta.size(); ++j)
        if (beta[j] != 0.0)
            out.push_back(j);
    return out;
}

} // namespace

FitResult reference_fit(const SolutionPath& path, double z, const ReferenceConfig& rc)
{
    return reference_at(path, z, reference_solver(path, rc, spectral_norm_sq(path.X)));
}

std::vector<GapPoint> primal_gap_curve(const SolutionPath& path, const std::vector<double>& grid,
                                       const ReferenceConfig& rc)
{
    const SolverConfig cfg = reference_solver(path, rc, spectral_norm_sq(path.X));
    std::vector<GapPoint> out;
    out.reserve(grid.size());
    for (double z : grid) {
        const Vector beta = interpolate(path, z);
        const FitResult ref = reference_at(path, z, cfg);
        const Vector labels = path.labels_at(z);
        const double p_interp = objective(path.X, labels, beta, path.lambda, path.model);
        GapPoint g;
        g.z = z;
        g.gap = std::max(0.0, p_interp - ref.objective);
        g.neg_log = g.gap > 0.0 ? -std::log(g.gap) : std::numeric_limits<double>::infinity();
        out.push_back(g);
    }
    return out;
}

std::pair<double, double> singular_range(const Matrix& X, const IndexSet& cols)
{
    if (cols.empty())
        return {0.0, 0.0};
    Matrix XA(X.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
        XA.col(static_cast<Eigen::Index>(c)) = X.col(cols[c]);
    const Eigen::JacobiSVD<Matrix> svd(XA);
    const Vector& s = svd.singularValues();
    // fewer rows than columns leaves a zero singular value out of the list
    const double smin = XA.cols() > XA.rows() ? 0.0 : s[s.size() - 1];
    return {smin, s[0]};
}

double conditioning_ratio(const Matrix& X, const IndexSet& cols)
{
    if (cols.empty())
        return 0.0;
    const auto [smin, smax] = singular_range(X, cols);
    if (smin <= 0.0)
        return std::numeric_limits<double>::infinity();
    return smax / (smin * smin);
}

BoundConstants bound_constants(const SolutionPath& path, double z_lo, double z_hi)
{
    if (path.nodes.empty())
        throw Error(ErrorKind::InvalidArgument, "bound_constants on an empty path");
    if (z_lo > z_hi)
        std::swap(z_lo, z_hi);
    const std::size_t anchor = path.governing_node(z_hi);
    const std::size_t last = path.governing_node(z_lo);

    Curvature curv;
    double sup_ratio = 0.0;
    for (std::size_t t = anchor; t <= last; ++t) {
        const PathNode& nd = path.nodes[t];
        curv.add(path, nd.z, nd.beta);
        sup_ratio = std::max(sup_ratio, conditioning_ratio(path.X, nd.active));
    }
    if (!(curv.mu > 0.0))
        throw Error(ErrorKind::NotStronglyConvex, "loss curvature along the path is not positive");

    BoundConstants c;
    c.nu = curv.nu;
    c.mu = curv.mu;
    const IndexSet& active = path.nodes[anchor].active;
    std::tie(c.sigma_min_A, c.sigma_max_A) = singular_range(path.X, active);
    c.L = conditioning_ratio(path.X, active) + sup_ratio;
    return c;
}

std::vector<BoundReport> check_error_bound(const SolutionPath& path, const std::vector<double>& probes,
                                           const ReferenceConfig& rc)
{
    const SolverConfig cfg = reference_solver(path, rc, spectral_norm_sq(path.X));
    const double act_slack = 1e-6;
    std::vector<BoundReport> out;
    out.reserve(probes.size());

    for (double z : probes) {
        BoundReport rep;
        rep.z_probe = z;
        rep.node = path.governing_node(z);
        const PathNode& nd = path.nodes[rep.node];
        rep.distance = std::abs(nd.z - z);
        rep.violation = nd.violation;

        const Vector beta = interpolate(path, z);
        const FitResult ref = reference_at(path, z, cfg);
        rep.gap = (beta - ref.beta).norm();

        const IndexSet ref_active = merge(
            active_set(path.X, path.labels_at(z), ref.beta, path.lambda, path.model, act_slack),
            support(ref.beta));
        const IndexSet node_active = merge(nd.active, support(nd.beta));
        const IndexSet joint = merge(node_active, ref_active);

        Curvature curv;
        curv.add(path, nd.z, nd.beta);
        if (rep.node + 1 < path.nodes.size())
            curv.add(path, path.nodes[rep.node + 1].z, path.nodes[rep.node + 1].beta);
        curv.add(path, z, beta);
        const LossDerivatives d_ref = loss_derivs(path.model, path.labels_at(z), ref.ystar);
        curv.add(d_ref);
        if (!(curv.mu > 0.0))
            throw Error(ErrorKind::NotStronglyConvex, "loss curvature along the path is not positive");
        rep.nu_f = curv.nu;
        rep.mu_f = curv.mu;

        const double ratio_node = conditioning_ratio(path.X, nd.active);
        rep.L = ratio_node + std::max(ratio_node, conditioning_ratio(path.X, ref_active));
        std::tie(rep.sigma_min_A, rep.sigma_max_A) = singular_range(path.X, joint);

        // residuals r give ||beta - beta*||_2 <= sqrt(|S|) r / (mu sigma_min(X_S)^2)
        if (!joint.empty()) {
            const double scale = std::sqrt(static_cast<double>(joint.size()))
                / (rep.mu_f * rep.sigma_min_A * rep.sigma_min_A);
            rep.eps_term = scale * (nd.violation + ref.violation);
        }
        rep.bound = rep.eps_term + rep.L * rep.nu_f / rep.mu_f * rep.distance;
        rep.holds = rep.gap <= rep.bound * (1.0 + 1e-6);

        Vector g_interp;
        loss_grad2(path.model, path.labels_at(z), path.X * beta, g_interp);
        rep.grad_gap = (g_interp - d_ref.grad2).norm();
        rep.grad_bound = rep.nu_f * rep.sigma_max_A * rep.bound;
        rep.grad_holds = rep.grad_gap <= rep.grad_bound * (1.0 + 1e-6);
        out.push_back(rep);
    }
    return out;
}

} // namespace sparseconf
