#include "sparseconf/loss.hpp"

#include "sparseconf/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sparseconf {

LossModel LossModel::quadratic()
{
    return LossModel{};
}

LossModel LossModel::power_norm(double q, double smoothing)
{
    LossModel m;
    m.kind = LossKind::PowerNorm;
    m.q = q;
    m.smoothing = smoothing;
    return m;
}

LossModel LossModel::linex(double gamma)
{
    LossModel m;
    m.kind = LossKind::Linex;
    m.gamma = gamma;
    return m;
}

void LossModel::validate() const
{
    switch (kind) {
    case LossKind::Quadratic:
        return;
    case LossKind::PowerNorm:
        if (!(q > 1.0 && q <= 2.0))
            throw Error(ErrorKind::InvalidArgument, "power_norm loss requires q in (1, 2]");
        if (!(smoothing >= 0.0))
            throw Error(ErrorKind::InvalidArgument, "power_norm smoothing must be >= 0");
        if (q < 2.0 && smoothing == 0.0)
            throw Error(ErrorKind::InvalidArgument,
                        "power_norm with q < 2 needs smoothing > 0 for a finite curvature");
        return;
    case LossKind::Linex:
        if (gamma == 0.0 || !std::isfinite(gamma))
            throw Error(ErrorKind::InvalidArgument, "linex loss requires a finite gamma != 0");
        return;
    }
}

std::string LossModel::name() const
{
    switch (kind) {
    case LossKind::Quadratic: return "quadratic";
    case LossKind::PowerNorm: return "robust";
    case LossKind::Linex: return "asymmetric";
    }
    return "unknown";
}

LossModel parse_loss(std::string_view name, double q, double gamma, double smoothing)
{
    LossModel m;
    if (name == "quadratic" || name == "lasso") {
        m = LossModel::quadratic();
    } else if (name == "robust" || name == "power_norm") {
        m = LossModel::power_norm(q, smoothing);
    } else if (name == "asymmetric" || name == "linex") {
        m = LossModel::linex(gamma);
    } else {
        throw Error(ErrorKind::InvalidArgument, "unknown loss '" + std::string(name) + "'");
    }
    m.validate();
    return m;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PointDerivs {
    double grad2;
    double hess22;
    double cross21;
    bool overflow;
};

inline PointDerivs point_derivs(const LossModel& m, double a, double b)
{
    const double r = a - b;
    switch (m.kind) {
    case LossKind::Quadratic:
        return {-2.0 * r, 2.0, -2.0, false};
    case LossKind::PowerNorm: {
        // h(r) = (r^2 + e^2)^(q/2):  h' = q r s^(q/2-1),  h'' = q s^(q/2-2) ((q-1) r^2 + e^2).
        // Evaluated with r and e scaled by max(|r|, e) so that r^2 cannot overflow.
        const double scale = std::max(std::abs(r), m.smoothing);
        if (scale == 0.0)
            return {0.0, m.q == 2.0 ? 2.0 : kInf, m.q == 2.0 ? -2.0 : -kInf, false};
        const double rs = r / scale;
        const double es = m.smoothing / scale;
        const double s = rs * rs + es * es; // in [1, 2]
        const double d1 = m.q * rs * std::pow(scale, m.q - 1.0) * std::pow(s, 0.5 * m.q - 1.0);
        const double d2 = m.q * std::pow(scale, m.q - 2.0) * std::pow(s, 0.5 * m.q - 2.0)
            * ((m.q - 1.0) * rs * rs + es * es);
        return {-d1, d2, -d2, false};
    }
    case LossKind::Linex: {
        double t = m.gamma * r;
        bool overflow = false;
        if (t > m.exponent_cap) {
            t = m.exponent_cap;
            overflow = true;
        }
        const double e = std::exp(t);
        const double g2 = m.gamma * m.gamma * e;
        return {m.gamma - m.gamma * e, g2, -g2, overflow};
    }
    }
    return {0.0, 0.0, 0.0, false};
}

} // namespace

double loss_value(const LossModel& m, double a, double b)
{
    const double r = a - b;
    switch (m.kind) {
    case LossKind::Quadratic:
        return r * r;
    case LossKind::PowerNorm: {
        if (m.smoothing == 0.0)
            return std::pow(std::abs(r), m.q);
        // e^q ((1 + (r/e)^2)^(q/2) - 1), exact zero at r = 0
        const double u = std::abs(r / m.smoothing);
        // past 1e150 the smoothing is below double precision and u^2 would overflow
        if (u > 1e150)
            return std::pow(std::abs(r), m.q);
        return std::pow(m.smoothing, m.q) * std::expm1(0.5 * m.q * std::log1p(u * u));
    }
    case LossKind::Linex: {
        const double t = m.gamma * r;
        return std::exp(std::min(t, m.exponent_cap)) - t - 1.0;
    }
    }
    return 0.0;
}

double loss_sum(const LossModel& m, const Vector& y, const Vector& ystar)
{
    if (m.kind == LossKind::Quadratic)
        return (y - ystar).squaredNorm();
    double total = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
        total += loss_value(m, y[i], ystar[i]);
    return total;
}

LossDerivatives loss_derivs(const LossModel& m, const Vector& y, const Vector& ystar)
{
    if (y.size() != ystar.size())
        throw Error(ErrorKind::InvalidArgument, "loss_derivs: label and prediction lengths differ");
    LossDerivatives out;
    const Eigen::Index n = y.size();
    out.grad2.resize(n);
    out.hess22.resize(n);
    out.cross21.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const PointDerivs d = point_derivs(m, y[i], ystar[i]);
        out.grad2[i] = d.grad2;
        out.hess22[i] = d.hess22;
        out.cross21[i] = d.cross21;
        out.overflow = out.overflow || d.overflow;
    }
    return out;
}

void loss_grad2(const LossModel& m, const Vector& y, const Vector& ystar, Vector& grad2)
{
    if (m.kind == LossKind::Quadratic) {
        grad2.noalias() = -2.0 * (y - ystar);
        return;
    }
    grad2.resize(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i)
        grad2[i] = point_derivs(m, y[i], ystar[i]).grad2;
}

} // namespace sparseconf
