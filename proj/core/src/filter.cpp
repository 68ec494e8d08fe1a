#include "roughctrl/filter.hpp"

#include <algorithm>
#include <cmath>

#include "roughctrl/rng.hpp"

namespace roughctrl {

namespace {

Eigen::MatrixXd interp_entrywise(const std::vector<double>& times,
                                 const std::vector<Eigen::MatrixXd>& samples, double t) {
    if (t <= times.front()) return samples.front();
    if (t >= times.back()) return samples.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - times.begin());
    const double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
    return (1.0 - w) * samples[j - 1] + w * samples[j];
}

// symmetric PSD square root; throws if a numerically negative eigenvalue shows up
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& M, const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < -1e-10) throw std::runtime_error(std::string(what) + " is not PSD");
        ev(i) = std::sqrt(std::max(ev(i), 0.0));
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

double min_eigenvalue(const Eigen::MatrixXd& M) {
    if (M.rows() == 1) return M(0, 0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    return es.eigenvalues().minCoeff();
}

}  // namespace

ParamTraj::ParamTraj(std::vector<double> times, std::vector<Eigen::MatrixXd> samples)
    : times_(std::move(times)), samples_(std::move(samples)) {
    if (times_.empty() || times_.size() != samples_.size())
        throw std::invalid_argument("ParamTraj: times and samples must match and be non-empty");
    for (std::size_t i = 0; i + 1 < times_.size(); ++i)
        if (times_[i + 1] <= times_[i])
            throw std::invalid_argument("ParamTraj: times must increase");
    for (const auto& s : samples_)
        if (s.rows() != samples_[0].rows() || s.cols() != samples_[0].cols())
            throw std::invalid_argument("ParamTraj: inconsistent sample shapes");
}

Eigen::MatrixXd ParamTraj::at(double t) const {
    if (is_const_) return constant_;
    return interp_entrywise(times_, samples_, t);
}

bool correlation_domain_check(const Eigen::MatrixXd& rho, double margin) {
    if (rho.size() == 0) return true;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho * rho.transpose());
    return es.eigenvalues().maxCoeff() < 1.0 - margin;
}

void FilterModel::validate(const std::vector<double>& probe_times) const {
    if (alpha.rows() != m || alpha.cols() != m) throw std::invalid_argument("model: alpha must be m x m");
    if (sigma.rows() != m || sigma.cols() != l) throw std::invalid_argument("model: sigma must be m x l");
    if (c.rows() != d || c.cols() != m) throw std::invalid_argument("model: c must be d x m");
    if (rho.rows() != l || rho.cols() != d) throw std::invalid_argument("model: rho must be l x d");
    if (mu0.size() != m) throw std::invalid_argument("model: mu0 must have dim m");
    if (Sigma0.rows() != m || Sigma0.cols() != m)
        throw std::invalid_argument("model: Sigma0 must be m x m");
    if ((Sigma0 - Sigma0.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * std::max(1.0, Sigma0.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("model: Sigma0 must be symmetric");
    if (min_eigenvalue(Sigma0) <= 0.0)
        throw std::invalid_argument("model: Sigma0 must be positive definite");
    for (double t : probe_times)
        if (!correlation_domain_check(rho.at(t)))
            throw std::invalid_argument("model: rho leaves the valid correlation domain");
}

std::pair<SampledPath, SampledPath> simulate_signal_observation(const FilterModel& model,
                                                                std::uint64_t seed,
                                                                std::size_t n_steps, double T) {
    if (n_steps == 0 || T <= 0.0) throw std::invalid_argument("simulate: need n_steps > 0, T > 0");
    std::vector<double> probe(n_steps + 1);
    for (std::size_t i = 0; i <= n_steps; ++i) probe[i] = T * static_cast<double>(i) / n_steps;
    model.validate(probe);

    GaussStream rng(seed);
    const Eigen::MatrixXd root0 = psd_sqrt(model.Sigma0, "Sigma0");
    Eigen::VectorXd z0(model.m);
    for (Eigen::Index i = 0; i < model.m; ++i) z0(i) = rng.normal();

    Eigen::MatrixXd S(n_steps + 1, model.m), Y(n_steps + 1, model.d);
    S.row(0) = (model.mu0 + root0 * z0).transpose();
    Y.row(0).setZero();

    const bool const_rho = model.rho.is_constant();
    Eigen::MatrixXd cross_root;
    if (const_rho) {
        const Eigen::MatrixXd r = model.rho.at(0.0);
        cross_root = psd_sqrt(Eigen::MatrixXd::Identity(model.l, model.l) - r * r.transpose(),
                              "I - rho rho^T");
    }
    for (std::size_t i = 0; i < n_steps; ++i) {
        const double t = probe[i];
        const double dt = probe[i + 1] - probe[i];
        const double sq = std::sqrt(dt);
        const Eigen::MatrixXd rho = model.rho.at(t);
        const Eigen::MatrixXd root =
            const_rho ? cross_root
                      : psd_sqrt(Eigen::MatrixXd::Identity(model.l, model.l) - rho * rho.transpose(),
                                 "I - rho rho^T");
        Eigen::VectorXd z1(model.d), z2(model.l);
        for (Eigen::Index j = 0; j < model.d; ++j) z1(j) = rng.normal();
        for (Eigen::Index j = 0; j < model.l; ++j) z2(j) = rng.normal();
        const Eigen::VectorXd db2 = sq * z1;
        const Eigen::VectorXd db1 = sq * (rho * z1 + root * z2);
        const Eigen::VectorXd s = S.row(i).transpose();
        S.row(i + 1) = (s + model.alpha.at(t) * s * dt + model.sigma.at(t) * db1).transpose();
        Y.row(i + 1) = Y.row(i) + (model.c.at(t) * s * dt + db2).transpose();
    }
    return {SampledPath(probe, std::move(S)), SampledPath(probe, std::move(Y))};
}

SampledPath KalmanResult::R_flat() const {
    const Eigen::Index m2 = R[0].rows() * R[0].cols();
    Eigen::MatrixXd flat(static_cast<Eigen::Index>(R.size()), m2);
    for (std::size_t i = 0; i < R.size(); ++i) {
        Eigen::Index k = 0;
        for (Eigen::Index r = 0; r < R[i].rows(); ++r)
            for (Eigen::Index col = 0; col < R[i].cols(); ++col) flat(i, k++) = R[i](r, col);
    }
    return SampledPath(times, std::move(flat));
}

KalmanResult kalman_bucy_forward(const FilterModel& model, const SampledPath& Y) {
    if (Y.dim() != model.d) throw std::invalid_argument("kalman: observation dim mismatch");
    model.validate(Y.times());
    const std::size_t n = Y.size();
    if (n < 2) throw std::invalid_argument("kalman: need at least two observation nodes");

    auto riccati_rhs = [&](const Eigen::MatrixXd& R, double t) {
        const Eigen::MatrixXd al = model.alpha.at(t);
        const Eigen::MatrixXd sg = model.sigma.at(t);
        const Eigen::MatrixXd cc = model.c.at(t);
        const Eigen::MatrixXd rh = model.rho.at(t);
        const Eigen::MatrixXd gain = R * cc.transpose() + sg * rh;
        return Eigen::MatrixXd(sg * sg.transpose() + al * R + R * al.transpose() -
                               gain * gain.transpose());
    };

    KalmanResult out;
    out.times = Y.times();
    out.R.resize(n);
    Eigen::MatrixXd q(n, model.m);
    q.row(0) = model.mu0.transpose();
    out.R[0] = model.Sigma0;

    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double t = Y.time(i);
        const double dt = Y.time(i + 1) - t;
        const Eigen::MatrixXd& R = out.R[i];

        const Eigen::MatrixXd k1 = riccati_rhs(R, t);
        const Eigen::MatrixXd k2 = riccati_rhs(R + 0.5 * dt * k1, t + 0.5 * dt);
        const Eigen::MatrixXd k3 = riccati_rhs(R + 0.5 * dt * k2, t + 0.5 * dt);
        const Eigen::MatrixXd k4 = riccati_rhs(R + dt * k3, t + dt);
        Eigen::MatrixXd Rn = R + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        Rn = 0.5 * (Rn + Rn.transpose()).eval();
        if (min_eigenvalue(Rn) <= 0.0)
            throw std::runtime_error("kalman: covariance lost positive definiteness at step " +
                                     std::to_string(i + 1));
        out.R[i + 1] = std::move(Rn);

        const Eigen::MatrixXd al = model.alpha.at(t);
        const Eigen::MatrixXd cc = model.c.at(t);
        const Eigen::MatrixXd gain = R * cc.transpose() + model.sigma.at(t) * model.rho.at(t);
        const Eigen::VectorXd qi = q.row(i).transpose();
        const Eigen::VectorXd dy = Y.increment(i, i + 1);
        q.row(i + 1) = (qi + al * qi * dt + gain * (dy - cc * qi * dt)).transpose();
    }
    out.q = SampledPath(out.times, std::move(q));
    return out;
}

double neg_log_likelihood_ito(const FilterModel& model, const SampledPath& Y) {
    const KalmanResult kr = kalman_bucy_forward(model, Y);
    const std::size_t n = Y.size();
    double stoch = 0.0, quad = 0.0;
    double prev_sq = (model.c.at(Y.time(0)) * kr.q.value(0)).squaredNorm();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const Eigen::VectorXd cq = model.c.at(Y.time(i)) * kr.q.value(i);
        stoch += cq.dot(Y.increment(i, i + 1));
        const double next_sq =
            (model.c.at(Y.time(i + 1)) * kr.q.value(i + 1)).squaredNorm();
        quad += 0.5 * (prev_sq + next_sq) * (Y.time(i + 1) - Y.time(i));
        prev_sq = next_sq;
    }
    return -stoch + 0.5 * quad;
}

double neg_log_likelihood_strat(const FilterModel& model,
                                std::shared_ptr<const RoughPath> lifted_Y) {
    const SampledPath& Y = lifted_Y->first();
    const KalmanResult kr = kalman_bucy_forward(model, Y);
    const std::size_t n = Y.size();

    Eigen::MatrixXd vals(n, model.d);
    std::vector<Eigen::MatrixXd> derivs(n);
    double corr = 0.0, prev_term = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = Y.time(i);
        const Eigen::MatrixXd cc = model.c.at(t);
        const Eigen::MatrixXd gain = kr.R[i] * cc.transpose() + model.sigma.at(t) * model.rho.at(t);
        const Eigen::VectorXd cq = cc * kr.q.value(i);
        vals.row(i) = -cq.transpose();
        derivs[i] = -cc * gain;
        const double term = cq.squaredNorm() + (cc * gain).trace();
        if (i > 0) corr += 0.5 * (prev_term + term) * (t - Y.time(i - 1));
        prev_term = term;
    }
    ControlledPath psi(lifted_Y, 0, std::move(vals), std::move(derivs));
    const SampledPath integral = rough_integral(psi, *lifted_Y);
    return integral.value(integral.size() - 1)(0) + 0.5 * corr;
}

static GammaPoint gamma_at(const FilterModel& model, double t) {
    return {model.alpha.at(t), model.sigma.at(t), model.c.at(t), model.rho.at(t)};
}

double penalty(const FilterModel& model, std::shared_ptr<const RoughPath> lifted_Y,
               const PenaltySpec& spec, double t) {
    const SampledPath& Yfull = lifted_Y->first();
    const std::size_t it = Yfull.index_of(t);
    const double g0 = spec.ginitial(model.mu0, model.Sigma0, gamma_at(model, Yfull.time(0)));
    if (g0 >= kCostSentinel) return kCostSentinel;
    if (it == 0) return g0;

    const SampledPath Y = Yfull.segment(0, it);
    const KalmanResult kr = kalman_bucy_forward(model, Y);

    Eigen::MatrixXd vals(it + 1, model.d);
    std::vector<Eigen::MatrixXd> derivs(it + 1);
    double running = 0.0, prev_f = 0.0;
    for (std::size_t i = 0; i <= it; ++i) {
        const double s = Y.time(i);
        const GammaPoint gp = gamma_at(model, s);
        const Eigen::MatrixXd gain = kr.R[i] * gp.c.transpose() + gp.sigma * gp.rho;
        const Eigen::VectorXd cq = gp.c * kr.q.value(i);
        vals.row(i) = -cq.transpose();
        derivs[i] = -gp.c * gain;
        const double fr = spec.frunning(kr.q.value(i), kr.R[i], gp);
        if (fr >= kCostSentinel) return kCostSentinel;
        const double f = fr + 0.5 * (cq.squaredNorm() + (gp.c * gain).trace());
        if (i > 0) running += 0.5 * (prev_f + f) * (s - Y.time(i - 1));
        prev_f = f;
    }
    ControlledPath psi(lifted_Y, 0, std::move(vals), std::move(derivs));
    const SampledPath integral = rough_integral(psi, *lifted_Y);
    return running + integral.value(integral.size() - 1)(0) + g0;
}

Eigen::Index GammaMask::control_dim(Eigen::Index m, Eigen::Index d, Eigen::Index l) const {
    Eigen::Index n = 0;
    if (alpha) n += m * m;
    if (sigma) n += m * l;
    if (c) n += d * m;
    if (rho) n += l * d;
    return n;
}

namespace {

void apply_gamma_rate(GammaPoint& g, const Eigen::VectorXd& u, const GammaMask& mask,
                      double dt_signed) {
    Eigen::Index off = 0;
    auto block = [&](Eigen::MatrixXd& target, bool on, double scale) {
        if (!on) return;
        for (Eigen::Index r = 0; r < target.rows(); ++r)
            for (Eigen::Index c = 0; c < target.cols(); ++c)
                target(r, c) += dt_signed * scale * u(off + r * target.cols() + c);
        off += target.rows() * target.cols();
    };
    block(g.alpha, mask.alpha, 1.0);
    block(g.sigma, mask.sigma, 1.0);
    block(g.c, mask.c, 1.0);
    if (mask.rho) {
        // damped rate keeps the correlation inside its open domain
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.rho * g.rho.transpose());
        const double damp = std::max(0.0, 1.0 - es.eigenvalues().maxCoeff());
        block(g.rho, true, damp);
    }
}

}  // namespace

BackwardResult backward_trajectories(double t, const Eigen::VectorXd& mu,
                                     const Eigen::MatrixXd& Sigma, const GammaPoint& a,
                                     const std::vector<Eigen::VectorXd>& u_knots,
                                     const GammaMask& mask, const FilterModel& model_template,
                                     std::shared_ptr<const RoughPath> lifted_Y) {
    const Eigen::Index m = model_template.m, d = model_template.d, l = model_template.l;
    const SampledPath& Y = lifted_Y->first();
    const std::size_t it = Y.index_of(t);
    if (u_knots.empty()) throw std::invalid_argument("backward: need at least one control knot");
    const Eigen::Index udim = mask.control_dim(m, d, l);
    for (const auto& u : u_knots)
        if (u.size() != udim) throw std::invalid_argument("backward: control knot dim mismatch");

    BackwardResult out;
    out.times.assign(Y.times().begin(), Y.times().begin() + it + 1);
    out.q.resize(it + 1, m);
    out.R.resize(it + 1);
    out.gamma.resize(it + 1);
    out.q.row(it) = mu.transpose();
    out.R[it] = Sigma;
    out.gamma[it] = a;
    if (min_eigenvalue(Sigma) <= kPosDefMargin) {
        out.valid = false;
        out.fail_step = it;
        return out;
    }

    const std::size_t n_pieces = u_knots.size();
    for (std::size_t i = it; i >= 1; --i) {
        const double dt = out.times[i] - out.times[i - 1];
        const Eigen::VectorXd dy = Y.increment(i - 1, i);
        const std::size_t piece = std::min(n_pieces - 1, ((i - 1) * n_pieces) / it);
        const GammaPoint& gp = out.gamma[i];
        const Eigen::MatrixXd& R = out.R[i];
        const Eigen::VectorXd q = out.q.row(i).transpose();

        const Eigen::MatrixXd gain = R * gp.c.transpose() + gp.sigma * gp.rho;
        out.q.row(i - 1) =
            (q - (gp.alpha * q - gain * gp.c * q) * dt - gain * dy).transpose();
        Eigen::MatrixXd Rn = R - (gp.sigma * gp.sigma.transpose() + gp.alpha * R +
                                  R * gp.alpha.transpose() - gain * gain.transpose()) *
                                     dt;
        out.R[i - 1] = 0.5 * (Rn + Rn.transpose());
        GammaPoint gnext = gp;
        apply_gamma_rate(gnext, u_knots[piece], mask, -dt);
        out.gamma[i - 1] = std::move(gnext);

        const bool pd = min_eigenvalue(out.R[i - 1]) > kPosDefMargin;
        const bool bounded = out.q.row(i - 1).cwiseAbs().maxCoeff() < kBlowupThreshold &&
                             out.R[i - 1].cwiseAbs().maxCoeff() < kBlowupThreshold;
        const bool rho_ok = !mask.rho || correlation_domain_check(out.gamma[i - 1].rho);
        if (!pd || !bounded || !rho_ok) {
            out.valid = false;
            out.fail_step = i - 1;
            return out;
        }
    }
    return out;
}

double filter_control_cost(double t, const Eigen::VectorXd& mu, const Eigen::MatrixXd& Sigma,
                           const GammaPoint& a, const std::vector<Eigen::VectorXd>& u_knots,
                           const FilterControlConfig& config, const PenaltySpec& spec,
                           const FilterModel& model_template,
                           std::shared_ptr<const RoughPath> lifted_Y) {
    const BackwardResult traj = backward_trajectories(t, mu, Sigma, a, u_knots, config.mask,
                                                      model_template, lifted_Y);
    if (!traj.valid) return kCostSentinel;
    const std::size_t it = traj.times.size() - 1;

    const double g0 = spec.ginitial(traj.q.row(0).transpose(), traj.R[0], traj.gamma[0]);
    if (g0 >= kCostSentinel) return kCostSentinel;

    const Eigen::Index d = model_template.d;
    Eigen::MatrixXd vals(it + 1, d);
    std::vector<Eigen::MatrixXd> derivs(it + 1);
    double running = 0.0, prev_f = 0.0;
    for (std::size_t i = 0; i <= it; ++i) {
        const GammaPoint& gp = traj.gamma[i];
        const Eigen::VectorXd q = traj.q.row(i).transpose();
        const Eigen::MatrixXd gain = traj.R[i] * gp.c.transpose() + gp.sigma * gp.rho;
        const Eigen::VectorXd cq = gp.c * q;
        vals.row(i) = -cq.transpose();
        derivs[i] = -gp.c * gain;
        const double fr = spec.frunning(q, traj.R[i], gp);
        if (fr >= kCostSentinel) return kCostSentinel;
        const double f = fr + 0.5 * (cq.squaredNorm() + (gp.c * gain).trace());
        if (i > 0) running += 0.5 * (prev_f + f) * (traj.times[i] - traj.times[i - 1]);
        prev_f = f;
    }

    double control_cost = 0.0;
    const std::size_t n_pieces = u_knots.size();
    for (std::size_t i = 0; i < it; ++i) {
        const std::size_t piece = std::min(n_pieces - 1, (i * n_pieces) / it);
        control_cost += config.eps_u * std::pow(u_knots[piece].norm(), config.delta2) *
                        (traj.times[i + 1] - traj.times[i]);
    }

    ControlledPath psi(lifted_Y, 0, std::move(vals), std::move(derivs));
    const SampledPath integral = rough_integral(psi, *lifted_Y);
    return running + control_cost + integral.value(integral.size() - 1)(0) + g0;
}

ShootingResult filter_value_shooting(double t, const Eigen::VectorXd& mu,
                                     const Eigen::MatrixXd& Sigma, const GammaPoint& a,
                                     const FilterControlConfig& config, const PenaltySpec& spec,
                                     const FilterModel& model_template,
                                     std::shared_ptr<const RoughPath> lifted_Y,
                                     const ShootingOptions& opts) {
    const Eigen::Index udim =
        config.mask.control_dim(model_template.m, model_template.d, model_template.l);
    auto evaluate = [&](const std::vector<Eigen::VectorXd>& knots) {
        return filter_control_cost(t, mu, Sigma, a, knots, config, spec, model_template,
                                   lifted_Y);
    };

    ShootingResult best;
    for (std::size_t start = 0; start < opts.n_starts; ++start) {
        std::vector<Eigen::VectorXd> knots(opts.n_pieces, Eigen::VectorXd::Zero(udim));
        if (start > 0) {
            GaussStream rng(7700 + 13 * static_cast<std::uint64_t>(start));
            for (auto& kn : knots)
                for (Eigen::Index j = 0; j < udim; ++j)
                    kn(j) = std::clamp(opts.start_scale * rng.normal(), -config.u_cap,
                                       config.u_cap);
        }
        double cur = evaluate(knots);
        std::vector<double> steps(opts.n_pieces * static_cast<std::size_t>(udim),
                                  opts.init_step);

        for (std::size_t sweep = 0; sweep < opts.max_sweeps; ++sweep) {
            const double sweep_start = cur;
            for (std::size_t kn = 0; kn < opts.n_pieces; ++kn) {
                for (Eigen::Index j = 0; j < udim; ++j) {
                    double& h = steps[kn * static_cast<std::size_t>(udim) +
                                      static_cast<std::size_t>(j)];
                    bool improved = false;
                    for (const double dir : {1.0, -1.0}) {
                        const double base = knots[kn](j);
                        const double cand = std::clamp(base + dir * h, -config.u_cap,
                                                       config.u_cap);
                        if (cand == base) continue;
                        knots[kn](j) = cand;
                        double val = evaluate(knots);
                        if (val < cur) {
                            cur = val;
                            improved = true;
                            // extend along the successful direction
                            for (int ext = 0; ext < 40; ++ext) {
                                const double more = std::clamp(knots[kn](j) + dir * h,
                                                               -config.u_cap, config.u_cap);
                                if (more == knots[kn](j)) break;
                                const double keep = knots[kn](j);
                                knots[kn](j) = more;
                                val = evaluate(knots);
                                if (val < cur) {
                                    cur = val;
                                } else {
                                    knots[kn](j) = keep;
                                    break;
                                }
                            }
                            break;
                        }
                        knots[kn](j) = base;
                    }
                    if (!improved) h = std::max(h * 0.5, 1e-7);
                }
            }
            if (sweep_start - cur <= opts.rel_tol * std::max(1.0, std::abs(cur))) break;
        }
        if (cur < best.value) {
            best.value = cur;
            best.u_knots = knots;
        }
    }
    best.cap_bound = false;
    for (const auto& kn : best.u_knots)
        for (Eigen::Index j = 0; j < kn.size(); ++j)
            if (std::abs(kn(j)) >= config.u_cap - 1e-9) best.cap_bound = true;
    return best;
}

ControlProblem reduced_filter_problem(const FilterModel& model_template,
                                      const PenaltySpec& spec,
                                      const FilterControlConfig& config,
                                      std::size_t n_controls) {
    if (model_template.m != 1 || model_template.d != 1 || model_template.l != 1)
        throw std::invalid_argument("reduced problem: scalar model required");
    if (!(config.mask.alpha && !config.mask.sigma && !config.mask.c && !config.mask.rho))
        throw std::invalid_argument("reduced problem: only alpha may be uncertain");
    if (!model_template.sigma.is_constant() || !model_template.c.is_constant() ||
        !model_template.rho.is_constant())
        throw std::invalid_argument("reduced problem: sigma, c, rho must be constant");
    if (std::abs(model_template.rho.at(0.0)(0, 0)) > 1e-14)
        throw std::invalid_argument("reduced problem: rho must be zero");
    const double sg = model_template.sigma.at(0.0)(0, 0);
    const double cc = model_template.c.at(0.0)(0, 0);

    auto gamma_of = [sg, cc](double a) {
        GammaPoint gp;
        gp.alpha = Eigen::MatrixXd::Constant(1, 1, a);
        gp.sigma = Eigen::MatrixXd::Constant(1, 1, sg);
        gp.c = Eigen::MatrixXd::Constant(1, 1, cc);
        gp.rho = Eigen::MatrixXd::Zero(1, 1);
        return gp;
    };

    ControlProblem prob;
    prob.dyn.m = 2;
    prob.dyn.k = 1;
    prob.dyn.d = 1;
    prob.dyn.b = [sg, cc](const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
        const double mu = x(0), Si = x(1), al = a(0);
        const double gain = Si * cc;
        Eigen::VectorXd out(2);
        out << al * mu - gain * cc * mu, sg * sg + 2.0 * al * Si - gain * gain;
        return out;
    };
    prob.dyn.lambda = [cc](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
        Eigen::MatrixXd lam(2, 1);
        lam << x(1) * cc, 0.0;
        return lam;
    };
    prob.dyn.dx_lambda = [cc](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2, 2);
        jac(0, 1) = cc;  // d lambda_mu / d Sigma
        return jac;
    };
    prob.h = [](const Eigen::VectorXd&, const Eigen::VectorXd& u) { return u; };
    const double eps_u = config.eps_u, delta2 = config.delta2;
    prob.f = [spec, gamma_of, cc, eps_u, delta2](const Eigen::VectorXd& x,
                                                 const Eigen::VectorXd& a,
                                                 const Eigen::VectorXd& u) {
        if (x(1) <= 0.0) return kCostSentinel;
        const Eigen::VectorXd q = x.head(1);
        const Eigen::MatrixXd R = Eigen::MatrixXd::Constant(1, 1, x(1));
        const double fr = spec.frunning(q, R, gamma_of(a(0)));
        if (fr >= kCostSentinel) return kCostSentinel;
        const double cq = cc * x(0);
        return fr + 0.5 * (cq * cq + cc * cc * x(1)) +
               eps_u * std::pow(u.norm(), delta2);
    };
    prob.g = [spec, gamma_of](const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
        if (x(1) <= 0.0) return kCostSentinel;
        return spec.ginitial(x.head(1), Eigen::MatrixXd::Constant(1, 1, x(1)),
                             gamma_of(a(0)));
    };
    prob.psi.e = 1;
    prob.psi.d = 1;
    prob.psi.value = [cc](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Constant(1, 1, -cc * x(0));
    };
    prob.psi.dx = [cc](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        Eigen::MatrixXd jac(1, 2);
        jac << -cc, 0.0;
        return jac;
    };
    Eigen::VectorXd lo(1), hi(1);
    lo << -config.u_cap;
    hi << config.u_cap;
    prob.control_set = control_box(lo, hi, {n_controls});
    prob.delta1 = config.delta1;
    prob.delta2 = config.delta2;
    return prob;
}

std::pair<ValueField, RoughHjbReport> filter_value_hjb(
    const FilterModel& model_template, const RoughPath& lifted_Y, const PenaltySpec& spec,
    const FilterControlConfig& config, const StateGrid& grid, std::size_t n_controls,
    const std::vector<std::size_t>& levels, HjbOptions options) {
    if (grid.num_axes() != 3)
        throw std::invalid_argument("filter hjb: grid must have axes (mu, Sigma, alpha)");
    if (grid.axis(1).front() <= 0.0)
        throw std::invalid_argument("filter hjb: Sigma axis must stay positive");
    ControlProblem prob = reduced_filter_problem(model_template, spec, config, n_controls);
    // pad every axis of the truncated (mu, Sigma, alpha) box. The value class
    // explodes as Sigma approaches the cone boundary, the Riccati drift makes
    // the upper Sigma edge an inflow boundary, the mean-reverting mu drift
    // points inward at both mu edges, and on the controlled alpha axis the
    // expensive ghost is what keeps the max over controls from harvesting the
    // one-sided fallback slope at the edges: unpadded, any of these feeds the
    // forward march a downwind difference and the field diverges
    for (int ax : {0, 1, 2}) {
        if (std::find(options.pad_lower.begin(), options.pad_lower.end(), ax) ==
            options.pad_lower.end())
            options.pad_lower.push_back(ax);
        if (std::find(options.pad_upper.begin(), options.pad_upper.end(), ax) ==
            options.pad_upper.end())
            options.pad_upper.push_back(ax);
    }
    return solve_rough_hjb(prob, lifted_Y, levels, grid, HjbDirection::ForwardInitial, options);
}

}  // namespace roughctrl
