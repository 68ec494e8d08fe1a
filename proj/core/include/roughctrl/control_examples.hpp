#pragma once

#include "roughctrl/hjb.hpp"

namespace roughctrl {

// Cost of one concrete piecewise-constant control, evaluated on the driver
// grid from time t (a grid point) to the horizon: gamma by explicit Euler,
// X by solve_rde, then trapezoid running cost + rough integral of
// psi(X, gamma) + terminal cost. Blow-up returns the sentinel. u_steps holds
// one control per grid step on [t, T], or a single entry broadcast.
double cost_functional(const ControlProblem& prob, std::shared_ptr<const RoughPath> rp,
                       double t, const Eigen::VectorXd& x, const Eigen::VectorXd& a,
                       const std::vector<Eigen::VectorXd>& u_steps);

enum class RegMode { PVar, Sobolev };

// exponent large enough for the power cost to regularise a p-rough problem;
// sufficient, not sharp
inline bool regularising_exponent_ok(double q, double p) { return q > 2.0 * (1.0 + p); }

// PVar:    eps * ||gamma||_{p/2; [lo,hi]}^q
// Sobolev: eps * sum |dgamma/dt|^q dt (forward differences); additive over
//          adjacent intervals exactly
// Warns on stderr when q fails the exponent condition for the given p.
double regularising_cost(const SampledPath& gamma, double eps, double q, double p,
                         std::size_t lo, std::size_t hi, RegMode mode);

// Trading against a revealed future price: state x = wealth, position a,
// dX = a dzeta, da = u ds, running cost eps u^2, terminal reward x. The
// natural problem is a supremum (profit); this builder returns the
// equivalent infimum form (g = -x), so the profit value is the negation of
// the solved field (ValueField::negated()).
ControlProblem insider_problem(double eps, double u_lo, double u_hi, std::size_t n_u);

// v = x + (zeta_T - zeta_t) a + (1/4eps) int_t^T (zeta_T - zeta_s)^2 ds,
// trapezoid quadrature; supremum-form value (profit). zeta scalar, t a grid
// point.
double insider_value_closed_form(const SampledPath& zeta, double eps, double t, double x,
                                 double a);

struct DegeneracyResult {
    double value;
    SampledPath control;  // bang-bang eps * sgn(eta step), per node
};

// Unregularised linear example: value x + eps * total variation of eta on
// [t, T], realized by the bang-bang control. Grows without bound as eta
// refines toward an infinite-variation path.
DegeneracyResult degeneracy_demo(const SampledPath& eta, double eps_bound, double t, double x);

// sin(k s) on [0, 2 pi], node count near n_hint rounded so every extremum
// lands on the grid (n - 1 divisible by 4k); total variation then sums
// exactly to 4k
SampledPath sin_freq_path(std::size_t k, std::size_t n_hint);

}  // namespace roughctrl
