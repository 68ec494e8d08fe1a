#include "roughctrl/control_examples.hpp"

#include <cmath>
#include <iostream>

namespace roughctrl {

double cost_functional(const ControlProblem& prob, std::shared_ptr<const RoughPath> rp,
                       double t, const Eigen::VectorXd& x, const Eigen::VectorXd& a,
                       const std::vector<Eigen::VectorXd>& u_steps) {
    const std::size_t lo = rp->first().index_of(t);
    const std::size_t hi = rp->size() - 1;
    const std::size_t n_steps = hi - lo;
    if (n_steps == 0) return prob.g(x, a);
    if (u_steps.size() != n_steps && u_steps.size() != 1)
        throw std::invalid_argument("cost_functional: need one control per step or a single one");
    auto u_at = [&](std::size_t step) -> const Eigen::VectorXd& {
        return u_steps.size() == 1 ? u_steps[0] : u_steps[step];
    };

    const auto& times = rp->times();
    Eigen::MatrixXd gvals(n_steps + 1, a.size());
    gvals.row(0) = a.transpose();
    for (std::size_t i = 0; i < n_steps; ++i) {
        const double dt = times[lo + i + 1] - times[lo + i];
        const Eigen::VectorXd gi = gvals.row(i).transpose();
        gvals.row(i + 1) = (gi + prob.h(gi, u_at(i)) * dt).transpose();
    }
    SampledPath gamma(std::vector<double>(times.begin() + lo, times.begin() + hi + 1), gvals);

    RdeRun run = solve_rde_status(prob.dyn, rp, gamma, x, lo, hi);
    if (run.blew_up) return kCostSentinel;
    const ControlledPath& X = *run.solution;

    double running = 0.0;
    for (std::size_t i = 0; i < n_steps; ++i) {
        const double dt = times[lo + i + 1] - times[lo + i];
        const double fl = prob.f(X.value(i), gamma.value(i), u_at(i));
        const double fr = prob.f(X.value(i + 1), gamma.value(i + 1), u_at(i));
        if (fl >= kCostSentinel || fr >= kCostSentinel) return kCostSentinel;
        running += 0.5 * (fl + fr) * dt;
    }

    ControlledPath psi_path = compose_controlled(prob.psi, X, gamma);
    const SampledPath integral = rough_integral(psi_path, *rp);
    const double terminal = prob.g(X.value(n_steps), gamma.value(n_steps));
    if (terminal >= kCostSentinel) return kCostSentinel;
    return running + integral.value(integral.size() - 1)(0) + terminal;
}

double regularising_cost(const SampledPath& gamma, double eps, double q, double p,
                         std::size_t lo, std::size_t hi, RegMode mode) {
    if (eps <= 0.0) throw std::invalid_argument("regularising_cost: eps must be positive");
    if (!regularising_exponent_ok(q, p))
        std::cerr << "warning: regularising exponent q = " << q
                  << " does not exceed 2(1+p) = " << 2.0 * (1.0 + p) << "\n";
    if (hi >= gamma.size() || lo > hi)
        throw std::out_of_range("regularising_cost: bad index range");
    if (mode == RegMode::PVar) {
        return eps * std::pow(p_variation(gamma, p / 2.0, lo, hi), q);
    }
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        const double dt = gamma.time(i + 1) - gamma.time(i);
        acc += std::pow(gamma.increment(i, i + 1).norm() / dt, q) * dt;
    }
    return eps * acc;
}

ControlProblem insider_problem(double eps, double u_lo, double u_hi, std::size_t n_u) {
    if (eps <= 0.0) throw std::invalid_argument("insider_problem: eps must be positive");
    ControlProblem prob;
    prob.dyn = builtin_dynamics("insider", 1);
    prob.h = [](const Eigen::VectorXd&, const Eigen::VectorXd& u) { return u; };
    prob.f = [eps](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd& u) {
        return eps * u.squaredNorm();
    };
    prob.g = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) { return -x(0); };
    prob.psi.e = 1;
    prob.psi.d = 1;
    prob.psi.value = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Zero(1, 1);
    };
    prob.psi.dx = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Zero(1, 1);
    };
    Eigen::VectorXd lo(1), hi(1);
    lo << u_lo;
    hi << u_hi;
    prob.control_set = control_box(lo, hi, {n_u});
    prob.delta1 = 1.0;
    prob.delta2 = 2.0;
    return prob;
}

double insider_value_closed_form(const SampledPath& zeta, double eps, double t, double x,
                                 double a) {
    if (eps <= 0.0) throw std::invalid_argument("insider value: eps must be positive");
    if (zeta.dim() != 1) throw std::invalid_argument("insider value: scalar path expected");
    const std::size_t it = zeta.index_of(t);
    const std::size_t n = zeta.size();
    const double zT = zeta.value(n - 1)(0);
    double quad = 0.0;
    for (std::size_t i = it; i + 1 < n; ++i) {
        const double dl = zT - zeta.value(i)(0);
        const double dr = zT - zeta.value(i + 1)(0);
        quad += 0.5 * (dl * dl + dr * dr) * (zeta.time(i + 1) - zeta.time(i));
    }
    return x + (zT - zeta.value(it)(0)) * a + quad / (4.0 * eps);
}

DegeneracyResult degeneracy_demo(const SampledPath& eta, double eps_bound, double t, double x) {
    if (eta.dim() != 1) throw std::invalid_argument("degeneracy_demo: scalar path expected");
    const std::size_t it = eta.index_of(t);
    const std::size_t n = eta.size();
    double tv = 0.0;
    Eigen::MatrixXd ctrl(n - it, 1);
    for (std::size_t i = it; i + 1 < n; ++i) {
        const double step = eta.value(i + 1)(0) - eta.value(i)(0);
        tv += std::abs(step);
        ctrl(i - it, 0) = eps_bound * (step > 0.0 ? 1.0 : (step < 0.0 ? -1.0 : 0.0));
    }
    ctrl(n - 1 - it, 0) = n - it > 1 ? ctrl(n - 2 - it, 0) : 0.0;
    SampledPath control(std::vector<double>(eta.times().begin() + it, eta.times().end()),
                        std::move(ctrl));
    return {x + eps_bound * tv, std::move(control)};
}

SampledPath sin_freq_path(std::size_t k, std::size_t n_hint) {
    if (k == 0) throw std::invalid_argument("sin_freq_path: k must be positive");
    if (n_hint < 2) n_hint = 2;
    // round the interval count to a multiple of 4k so sin(k s) has every
    // extremum on the grid; the discrete total variation is then exact
    const std::size_t unit = 4 * k;
    std::size_t intervals = ((n_hint - 1 + unit / 2) / unit) * unit;
    if (intervals == 0) intervals = unit;
    const double two_pi = 6.283185307179586476925286766559;
    std::vector<double> times(intervals + 1);
    Eigen::MatrixXd vals(intervals + 1, 1);
    for (std::size_t i = 0; i <= intervals; ++i) {
        times[i] = two_pi * static_cast<double>(i) / static_cast<double>(intervals);
        vals(i, 0) = std::sin(static_cast<double>(k) * times[i]);
    }
    return SampledPath(std::move(times), std::move(vals));
}

}  // namespace roughctrl
