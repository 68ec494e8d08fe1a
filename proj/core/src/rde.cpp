#include "roughctrl/rde.hpp"

#include <cmath>
#include <stdexcept>

namespace roughctrl {

double check_dx_lambda(const ControlledDynamics& dyn,
                       const std::vector<Eigen::VectorXd>& xs,
                       const std::vector<Eigen::VectorXd>& as) {
    double worst = 0.0;
    const double h = 1e-6;
    for (const auto& x : xs) {
        for (const auto& a : as) {
            const Eigen::MatrixXd jac = dyn.dx_lambda(x, a);
            for (Eigen::Index j = 0; j < dyn.m; ++j) {
                Eigen::VectorXd xp = x, xm = x;
                xp[j] += h;
                xm[j] -= h;
                const Eigen::MatrixXd fd = (dyn.lambda(xp, a) - dyn.lambda(xm, a)) / (2 * h);
                for (Eigen::Index i = 0; i < dyn.m; ++i)
                    for (Eigen::Index c = 0; c < dyn.d; ++c) {
                        const double scale = std::max(1.0, std::abs(fd(i, c)));
                        worst = std::max(worst,
                                         std::abs(jac(i * dyn.d + c, j) - fd(i, c)) / scale);
                    }
            }
        }
    }
    return worst;
}

RdeRun solve_rde_status(const ControlledDynamics& dyn,
                        std::shared_ptr<const RoughPath> rp, const SampledPath& gamma,
                        const Eigen::VectorXd& x0, std::size_t lo, std::size_t hi) {
    if (!rp) throw std::invalid_argument("rde: null driver");
    if (lo > hi || hi >= rp->size()) throw std::invalid_argument("rde: bad index range");
    const std::size_t n = hi - lo + 1;
    if (gamma.size() != n) throw std::invalid_argument("rde: gamma grid length mismatch");
    if (x0.size() != dyn.m) throw std::invalid_argument("rde: x0 dimension mismatch");
    if (rp->dim() != dyn.d) throw std::invalid_argument("rde: driver dimension mismatch");

    Eigen::MatrixXd values(n, dyn.m);
    std::vector<Eigen::MatrixXd> derivs(n);
    Eigen::VectorXd x = x0;
    values.row(0) = x.transpose();
    derivs[0] = dyn.lambda(x, gamma.value(0));
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const Eigen::VectorXd a = gamma.value(i);
        const double dt = rp->times()[lo + i + 1] - rp->times()[lo + i];
        const Eigen::VectorXd z = rp->increment(lo + i, lo + i + 1);
        const Eigen::MatrixXd z2 = rp->second_level(lo + i, lo + i + 1);
        const Eigen::MatrixXd lam = dyn.lambda(x, a);
        const Eigen::MatrixXd comp = dyn.dx_lambda(x, a) * lam;  // (m*d) x d
        Eigen::VectorXd xn = x + dyn.b(x, a) * dt + lam * z;
        for (Eigen::Index r = 0; r < dyn.m; ++r) {
            double s = 0.0;
            for (Eigen::Index c = 0; c < dyn.d; ++c)
                for (Eigen::Index bb = 0; bb < dyn.d; ++bb)
                    s += comp(r * dyn.d + c, bb) * z2(bb, c);
            xn[r] += s;
        }
        if (!xn.allFinite() || xn.norm() > kBlowupThreshold) {
            RdeRun run;
            run.blew_up = true;
            run.blowup_step = i + 1;
            return run;
        }
        x = xn;
        values.row(i + 1) = x.transpose();
        derivs[i + 1] = dyn.lambda(x, gamma.value(i + 1));
    }
    RdeRun run;
    run.solution.emplace(std::move(rp), lo, std::move(values), std::move(derivs));
    return run;
}

ControlledPath solve_rde(const ControlledDynamics& dyn, std::shared_ptr<const RoughPath> rp,
                         const SampledPath& gamma, const Eigen::VectorXd& x0, std::size_t lo,
                         std::size_t hi) {
    RdeRun run = solve_rde_status(dyn, std::move(rp), gamma, x0, lo, hi);
    if (run.blew_up)
        throw std::runtime_error("rde: solution blew up at step " +
                                 std::to_string(run.blowup_step));
    return std::move(*run.solution);
}

ControlledPath solve_rde(const ControlledDynamics& dyn, std::shared_ptr<const RoughPath> rp,
                         const SampledPath& gamma, const Eigen::VectorXd& x0) {
    const std::size_t hi = rp->size() - 1;
    return solve_rde(dyn, std::move(rp), gamma, x0, 0, hi);
}

AprioriDiagnostics apriori_diagnostics(const ControlledPath& solution,
                                       const SampledPath& gamma, const RoughPath& rp,
                                       const SmoothMap& psi) {
    const double p = rp.p();
    AprioriDiagnostics d;
    {
        SampledPath xs(solution.times(), solution.values());
        d.x_pvar = p_variation(xs, p);
    }
    d.x_remainder = solution.remainder_variation(p / 2.0);
    const ControlledPath composed = compose_controlled(psi, solution, gamma);
    d.psi_deriv_pvar = composed.deriv_variation(p);
    d.psi_remainder = composed.remainder_variation(p / 2.0);
    d.gamma_pvar = p_variation(gamma, p / 2.0);
    d.driver_holder = holder_norm(rp.first(), 1.0 / p) + holder_norm(rp.second(), 2.0 / p);
    return d;
}

std::vector<StabilityRow> stability_experiment(const ControlledDynamics& dyn,
                                               const std::vector<StabilityCase>& pairs) {
    std::vector<StabilityRow> rows;
    rows.reserve(pairs.size());
    for (const auto& c : pairs) {
        const double p = c.rp_a->p();
        const ControlledPath xa =
            solve_rde(dyn, c.rp_a, c.gamma_a, c.x0_a, 0, c.rp_a->size() - 1);
        const ControlledPath xb =
            solve_rde(dyn, c.rp_b, c.gamma_b, c.x0_b, 0, c.rp_b->size() - 1);

        double gamma_sup = 0.0;
        for (std::size_t i = 0; i < c.gamma_a.size(); ++i)
            gamma_sup = std::max(
                gamma_sup, (c.gamma_a.value(i) - c.gamma_b.value(i)).norm());
        SampledPath gamma_diff(c.gamma_a.times(),
                               c.gamma_a.values() - c.gamma_b.values());

        StabilityRow row;
        row.input_distance = (c.x0_a - c.x0_b).norm() + gamma_sup +
                             p_variation(gamma_diff, p / 2.0) +
                             rough_metric(*c.rp_a, *c.rp_b, MetricMode::PVariation);
        // derivative difference as a path of flattened matrices
        const std::size_t n = xa.size();
        Eigen::MatrixXd dd(n, dyn.m * dyn.d);
        for (std::size_t i = 0; i < n; ++i) {
            const Eigen::MatrixXd diff = xa.deriv(i) - xb.deriv(i);
            for (Eigen::Index r = 0; r < dyn.m; ++r)
                for (Eigen::Index cc = 0; cc < dyn.d; ++cc)
                    dd(i, r * dyn.d + cc) = diff(r, cc);
        }
        SampledPath deriv_diff(xa.times(), std::move(dd));
        row.output_distance = p_variation(deriv_diff, p) +
                              remainder_difference_variation(xa, xb, p / 2.0);
        row.ratio = row.input_distance > 0 ? row.output_distance / row.input_distance : 0.0;
        rows.push_back(row);
    }
    return rows;
}

ControlledDynamics builtin_dynamics(const std::string& name, Eigen::Index d) {
    ControlledDynamics dyn;
    dyn.d = d;
    if (name == "linear-scalar") {
        if (d != 1) throw std::invalid_argument("linear-scalar dynamics require d=1");
        dyn.m = 1;
        dyn.k = 1;
        dyn.b = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
            return Eigen::VectorXd::Zero(1);
        };
        dyn.lambda = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
            return Eigen::MatrixXd::Constant(1, 1, x[0]);
        };
        dyn.dx_lambda = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
            return Eigen::MatrixXd::Identity(1, 1);
        };
    } else if (name == "additive") {
        dyn.m = d;
        dyn.k = 1;
        dyn.b = [d](const Eigen::VectorXd&, const Eigen::VectorXd&) {
            return Eigen::VectorXd::Zero(d);
        };
        dyn.lambda = [d](const Eigen::VectorXd&, const Eigen::VectorXd&) {
            return Eigen::MatrixXd::Identity(d, d);
        };
        dyn.dx_lambda = [d](const Eigen::VectorXd&, const Eigen::VectorXd&) {
            return Eigen::MatrixXd::Zero(d * d, d);
        };
    } else if (name == "insider") {
        if (d != 1) throw std::invalid_argument("insider dynamics require d=1");
        dyn.m = 1;
        dyn.k = 1;
        dyn.b = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
            return Eigen::VectorXd::Zero(1);
        };
        dyn.lambda = [](const Eigen::VectorXd&, const Eigen::VectorXd& a) {
            return Eigen::MatrixXd::Constant(1, 1, a[0]);
        };
        dyn.dx_lambda = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
            return Eigen::MatrixXd::Zero(1, 1);
        };
    } else if (name == "kalman") {
        if (d != 1) throw std::invalid_argument("kalman demo dynamics require d=1");
        dyn.m = 1;
        dyn.k = 2;  // gamma = (drift coefficient, observation gain)
        dyn.b = [](const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
            return Eigen::VectorXd::Constant(1, (a[0] - a[1]) * x[0]);
        };
        dyn.lambda = [](const Eigen::VectorXd&, const Eigen::VectorXd& a) {
            return Eigen::MatrixXd::Constant(1, 1, a[1]);
        };
        dyn.dx_lambda = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
            return Eigen::MatrixXd::Zero(1, 1);
        };
    } else {
        throw std::invalid_argument("unknown builtin dynamics: " + name);
    }
    return dyn;
}

}  // namespace roughctrl
