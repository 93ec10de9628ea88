#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>

namespace sparseconf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class LossKind { Quadratic, PowerNorm, Linex };

// Separable data-fitting loss l(a, b), a = label, b = prediction.
//
//   quadratic   (a - b)^2
//   power_norm  (r^2 + eps_s^2)^(q/2) - eps_s^q,   r = a - b, q in (1, 2]
//   linex       exp(gamma r) - gamma r - 1,        gamma != 0
//
// The loss over a label vector is the plain sum over samples (no 1/n).
struct LossModel {
    LossKind kind = LossKind::Quadratic;
    double q = 1.5;
    double gamma = 1.0;
    double smoothing = 1e-6;
    // linex exponents gamma * r are clamped to this value
    double exponent_cap = 50.0;

    static LossModel quadratic();
    static LossModel power_norm(double q = 1.5, double smoothing = 1e-6);
    static LossModel linex(double gamma = 1.0);

    // Throws Error(InvalidArgument) when the parameters break the invariants.
    void validate() const;

    // "quadratic", "robust" or "asymmetric".
    std::string name() const;
};

// Parses the CLI spelling ("quadratic" | "robust" | "asymmetric").
LossModel parse_loss(std::string_view name, double q = 1.5, double gamma = 1.0,
                     double smoothing = 1e-6);

// Per-sample derivatives of f(y, y*) = sum_i l(y_i, y*_i). Since f is
// separable, the Hessian blocks d22 f and d21 f are diagonal and stored as vectors.
struct LossDerivatives {
    Vector grad2;   // d l / d b
    Vector hess22;  // d2 l / d b2
    Vector cross21; // d2 l / d b d a
    bool overflow = false; // a linex exponent hit the cap
};

double loss_value(const LossModel& model, double a, double b);

// Sum of loss_value over the two vectors.
double loss_sum(const LossModel& model, const Vector& y, const Vector& ystar);

LossDerivatives loss_derivs(const LossModel& model, const Vector& y, const Vector& ystar);

// Only the gradient; the solver inner loop does not need second derivatives.
void loss_grad2(const LossModel& model, const Vector& y, const Vector& ystar, Vector& grad2);

} // namespace sparseconf
