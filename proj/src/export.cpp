#include "sparseconf/export.hpp"

#include "sparseconf/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace sparseconf {

namespace {

// JSON has no infinities; they are written as null.
json number(double v)
{
    if (!std::isfinite(v))
        return nullptr;
    return v;
}

json dense(const Vector& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(v[i]);
    return out;
}

} // namespace

json to_json(const LossModel& model)
{
    json out{{"name", model.name()}};
    if (model.kind == LossKind::PowerNorm) {
        out["q"] = model.q;
        out["eps_s"] = model.smoothing;
    } else if (model.kind == LossKind::Linex) {
        out["gamma"] = model.gamma;
    }
    return out;
}

json to_json(const SolutionPath& path)
{
    json nodes = json::array();
    for (const PathNode& nd : path.nodes) {
        nodes.push_back({
            {"z", nd.z},
            {"event", to_string(nd.event)},
            {"event_index", nd.event_index},
            {"active", nd.active},
            {"beta", dense(nd.beta)},
            {"dbeta", dense(nd.dbeta)},
            {"violation", nd.violation},
            {"converged", nd.converged},
        });
    }
    return {
        {"z_min", path.z_min},
        {"z_max", path.z_max},
        {"lambda", path.lambda},
        {"loss", to_json(path.model)},
        {"eps_tol", path.eps_tol},
        {"n", path.n()},
        {"p", path.p()},
        {"stall_count", path.stall_count},
        {"unconverged_count", path.unconverged_count},
        {"nodes", std::move(nodes)},
    };
}

json to_json(const ConformalResult& result)
{
    json events = json::array();
    for (const RankEvent& e : result.events)
        events.push_back({{"z", e.z}, {"delta", e.delta}, {"i", e.i}, {"segment", e.segment}});
    json steps = json::array();
    json pi = json::array();
    for (const PiStep& s : result.steps) {
        steps.push_back({{"z_hi", s.z_hi}, {"z_lo", s.z_lo}, {"rank", s.rank}, {"pi", s.pi}});
        pi.push_back({s.z_hi, s.pi});
    }
    if (!result.steps.empty())
        pi.push_back({result.steps.back().z_lo, result.steps.back().pi});
    json runs = json::array();
    for (const auto& [lo, hi] : result.qualifying)
        runs.push_back({lo, hi});
    json out{
        {"method", "homotopy"},
        {"alpha", result.alpha},
        {"threshold", result.threshold},
        {"rank_at_zmax", result.rank_at_zmax},
        {"empty", result.empty},
        {"qualifying", std::move(runs)},
        {"events", std::move(events)},
        {"steps", std::move(steps)},
        {"pi", std::move(pi)},
    };
    out["interval"] = result.empty ? json(nullptr) : json::array({result.lo, result.hi});
    out["length"] = result.empty ? 0.0 : result.hi - result.lo;
    return out;
}

json to_json(const Interval& interval)
{
    return {
        {"method", interval.method},
        {"lo", interval.empty ? json(nullptr) : number(interval.lo)},
        {"hi", interval.empty ? json(nullptr) : number(interval.hi)},
        {"empty", interval.empty},
        {"center", number(interval.center)},
        {"length", number(interval.length())},
    };
}

json to_json(const GridResult& result)
{
    json out = to_json(static_cast<const Interval&>(result));
    out.erase("center");
    out["threshold"] = result.threshold;
    out["skipped"] = result.skipped;
    json cands = json::array();
    for (std::size_t k = 0; k < result.z.size(); ++k)
        cands.push_back({{"z", result.z[k]}, {"rank", result.rank[k]}, {"included", result.included[k] != 0}});
    out["candidates"] = std::move(cands);
    return out;
}

json to_json(const BoundReport& r)
{
    return {
        {"z_probe", r.z_probe},
        {"node", r.node},
        {"distance", r.distance},
        {"gap", r.gap},
        {"violation", r.violation},
        {"eps_term", number(r.eps_term)},
        {"bound", number(r.bound)},
        {"L", number(r.L)},
        {"nu_f", r.nu_f},
        {"mu_f", r.mu_f},
        {"sigma_min_A", r.sigma_min_A},
        {"sigma_max_A", r.sigma_max_A},
        {"holds", r.holds},
        {"grad_gap", r.grad_gap},
        {"grad_bound", number(r.grad_bound)},
        {"grad_holds", r.grad_holds},
        {"constants", "path-empirical"},
    };
}

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_path_csv(std::ostream& os, const SolutionPath& path)
{
    os << "node,z,event,event_index,n_active,violation,j,beta,dbeta\n";
    for (std::size_t t = 0; t < path.nodes.size(); ++t) {
        const PathNode& nd = path.nodes[t];
        std::ostringstream head;
        head << t << ',' << format_number(nd.z) << ',' << to_string(nd.event) << ',' << nd.event_index
             << ',' << nd.active.size() << ',' << format_number(nd.violation) << ',';
        bool any = false;
        for (Eigen::Index j = 0; j < nd.beta.size(); ++j) {
            if (nd.beta[j] == 0.0 && nd.dbeta[j] == 0.0)
                continue;
            any = true;
            os << head.str() << j << ',' << format_number(nd.beta[j]) << ','
               << format_number(nd.dbeta[j]) << "\n";
        }
        if (!any)
            os << head.str() << ",,\n";
    }
}

void write_pi_csv(std::ostream& os, const std::vector<std::pair<double, double>>& curve)
{
    os << "z,pi\n";
    for (const auto& [z, pi] : curve)
        os << format_number(z) << ',' << format_number(pi) << "\n";
}

void write_gap_csv(std::ostream& os, const std::vector<GapPoint>& gaps,
                   const std::vector<BoundReport>& reports)
{
    const bool with_bound = reports.size() == gaps.size();
    os << "z,primal_gap,neg_log_gap";
    if (with_bound)
        os << ",weight_gap,bound";
    os << "\n";
    for (std::size_t k = 0; k < gaps.size(); ++k) {
        os << format_number(gaps[k].z) << ',' << format_number(gaps[k].gap) << ','
           << format_number(gaps[k].neg_log);
        if (with_bound)
            os << ',' << format_number(reports[k].gap) << ',' << format_number(reports[k].bound);
        os << "\n";
    }
}

void write_file(const std::string& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorKind::Io, "cannot write '" + path + "'");
    out << contents;
    out.flush();
    if (!out)
        throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

} // namespace sparseconf
