#include "sparseconf/conformal.hpp"

#include "sparseconf/error.hpp"

#include <algorithm>
#include <cmath>

namespace sparseconf {

int conformal_threshold(Eigen::Index n, double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
    const double level = static_cast<double>(n + 1) * (1.0 - alpha);
    return static_cast<int>(std::ceil(level - 1e-9 * std::max(1.0, level)));
}

int rank_of_last(const Vector& scores)
{
    const double last = scores[scores.size() - 1];
    return static_cast<int>((scores.array() <= last).count());
}

ResidualLine residual_line(const SolutionPath& path, std::size_t segment)
{
    if (segment >= path.nodes.size())
        throw Error(ErrorKind::OutOfRange, "segment index out of range");
    const PathNode& nd = path.nodes[segment];
    const Eigen::Index n = path.n();

    // F(z) = y(z) - [X beta_t + X dbeta_t (z - z_t)]
    const Vector fitted = path.X * nd.beta;
    const Vector slope = path.X * nd.dbeta;
    ResidualLine line;
    line.a.resize(n + 1);
    line.a.head(n) = path.y;
    line.a[n] = 0.0;
    line.a -= fitted - slope * nd.z;
    line.b = -slope;
    line.b[n] += 1.0;
    return line;
}

namespace {

// Whether sample i counts towards Rank(E_{n+1}) at z.
inline bool counted(const ResidualLine& line, Eigen::Index i, Eigen::Index last, double z)
{
    return std::abs(line.at(i, z)) <= std::abs(line.at(last, z));
}

struct SegmentStates {
    std::vector<char> top;    // just below z_t
    std::vector<char> bottom; // just above z_{t+1}
};

SegmentStates scan_segment(const SolutionPath& path, std::size_t t, std::vector<RankEvent>& out)
{
    const Eigen::Index n = path.n();
    const double hi = path.nodes[t].z;
    const double lo = path.nodes[t + 1].z;
    const ResidualLine line = residual_line(path, t);
    const double a_q = line.a[n];
    const double b_q = line.b[n];

    SegmentStates st;
    st.top.resize(static_cast<std::size_t>(n));
    st.bottom.resize(static_cast<std::size_t>(n));

    double roots[2];
    for (Eigen::Index i = 0; i < n; ++i) {
        // |F_i| = |F_{n+1}|  <=>  F_i = F_{n+1}  or  F_i = -F_{n+1}
        int k = 0;
        const double den_minus = line.b[i] - b_q;
        if (den_minus != 0.0) {
            const double r = -(line.a[i] - a_q) / den_minus;
            if (r > lo && r < hi)
                roots[k++] = r;
        }
        const double den_plus = line.b[i] + b_q;
        if (den_plus != 0.0) {
            const double r = -(line.a[i] + a_q) / den_plus;
            if (r > lo && r < hi)
                roots[k++] = r;
        }
        if (k == 2) {
            if (roots[0] < roots[1])
                std::swap(roots[0], roots[1]);
            if (roots[0] == roots[1])
                k = 1;
        }

        // classify each piece between consecutive crossings at its midpoint
        bool state = counted(line, i, n, k > 0 ? 0.5 * (hi + roots[0]) : 0.5 * (hi + lo));
        st.top[static_cast<std::size_t>(i)] = state;
        for (int m = 0; m < k; ++m) {
            const double lower = m + 1 < k ? roots[m + 1] : lo;
            const bool below = counted(line, i, n, 0.5 * (roots[m] + lower));
            if (below != state)
                out.push_back({roots[m], below ? +1 : -1, i, t});
            state = below;
        }
        st.bottom[static_cast<std::size_t>(i)] = state;
    }
    return st;
}

// Events of all segments, sorted by decreasing z; `top` receives the states
// just below z_max.
std::vector<RankEvent> scan_path(const SolutionPath& path, std::vector<char>* top)
{
    std::vector<RankEvent> events;
    SegmentStates prev;
    for (std::size_t t = 0; t + 1 < path.nodes.size(); ++t) {
        SegmentStates cur = scan_segment(path, t, events);
        if (t == 0 && top != nullptr)
            *top = cur.top;
        if (t > 0) {
            // the corrected residuals at a kink may disagree with the linearization
            // arriving from above; the resulting rank jump is an event at the kink
            for (std::size_t i = 0; i < cur.top.size(); ++i)
                if (cur.top[i] != prev.bottom[i])
                    events.push_back({path.nodes[t].z, cur.top[i] ? +1 : -1,
                                      static_cast<Eigen::Index>(i), t});
        }
        prev = std::move(cur);
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const RankEvent& l, const RankEvent& r) { return l.z > r.z; });
    return events;
}

} // namespace

std::vector<RankEvent> find_rank_events(const SolutionPath& path)
{
    return scan_path(path, nullptr);
}

ConformalResult conformal_set(const SolutionPath& path, double alpha)
{
    if (path.nodes.empty())
        throw Error(ErrorKind::InvalidArgument, "conformal_set on an empty path");

    ConformalResult res;
    res.alpha = alpha;
    res.threshold = conformal_threshold(path.n(), alpha);
    if (path.nodes.size() < 2) {
        const Vector resid = path.labels_at(path.z_max) - path.X * path.nodes.front().beta;
        res.rank_at_zmax = rank_of_last(resid.cwiseAbs());
    } else {
        std::vector<char> top;
        res.events = scan_path(path, &top);
        res.rank_at_zmax = 1 + static_cast<int>(std::count(top.begin(), top.end(), char{1}));
    }

    const double n1 = static_cast<double>(path.n() + 1);
    auto push_step = [&](double hi, double lo, int rank) {
        if (!res.steps.empty() && res.steps.back().rank == rank) {
            res.steps.back().z_lo = lo;
            return;
        }
        res.steps.push_back({hi, lo, rank, (n1 - rank) / n1});
    };

    int rank = res.rank_at_zmax;
    double upper = path.z_max;
    for (std::size_t e = 0; e < res.events.size();) {
        const double z = res.events[e].z;
        int delta = 0;
        for (; e < res.events.size() && res.events[e].z == z; ++e)
            delta += res.events[e].delta;
        if (delta == 0)
            continue;
        push_step(upper, z, rank);
        rank += delta;
        upper = z;
    }
    push_step(upper, path.z_min, rank);

    for (const PiStep& s : res.steps) {
        if (s.rank > res.threshold)
            continue;
        if (!res.qualifying.empty() && res.qualifying.back().first == s.z_hi)
            res.qualifying.back().first = s.z_lo;
        else
            res.qualifying.emplace_back(s.z_lo, s.z_hi);
    }
    res.empty = res.qualifying.empty();
    if (!res.empty) {
        res.lo = res.qualifying.back().first;
        res.hi = res.qualifying.front().second;
    }
    return res;
}

double pi_at(const ConformalResult& result, double z)
{
    if (result.steps.empty())
        throw Error(ErrorKind::InvalidArgument, "pi_at on an empty result");
    const double z_max = result.steps.front().z_hi;
    const double z_min = result.steps.back().z_lo;
    if (!(z >= z_min && z <= z_max))
        throw Error(ErrorKind::OutOfRange, "z = " + std::to_string(z) + " is outside [z_min, z_max]");
    for (const PiStep& s : result.steps)
        if (z > s.z_lo)
            return s.pi;
    return result.steps.back().pi;
}

std::vector<std::pair<double, double>> pi_curve(const ConformalResult& result,
                                                const std::vector<double>& grid)
{
    std::vector<std::pair<double, double>> out;
    out.reserve(grid.size());
    for (double z : grid)
        out.emplace_back(z, pi_at(result, z));
    return out;
}

std::vector<std::pair<double, double>> pi_curve(const SolutionPath& path,
                                                const std::vector<double>& grid)
{
    // pi does not depend on alpha; any level yields the same step function
    return pi_curve(conformal_set(path, 0.5), grid);
}

} // namespace sparseconf
