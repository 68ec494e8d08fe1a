#pragma once

#include "roughctrl/hjb.hpp"

namespace roughctrl {

// parameter trajectory on [0,T]: constant matrix or grid samples with linear
// interpolation (absolutely continuous by construction)
class ParamTraj {
public:
    ParamTraj() = default;
    explicit ParamTraj(Eigen::MatrixXd constant) : constant_(std::move(constant)), is_const_(true) {}
    ParamTraj(std::vector<double> times, std::vector<Eigen::MatrixXd> samples);

    bool is_constant() const { return is_const_; }
    Eigen::MatrixXd at(double t) const;
    Eigen::Index rows() const { return is_const_ ? constant_.rows() : samples_[0].rows(); }
    Eigen::Index cols() const { return is_const_ ? constant_.cols() : samples_[0].cols(); }

private:
    Eigen::MatrixXd constant_;
    std::vector<double> times_;
    std::vector<Eigen::MatrixXd> samples_;
    bool is_const_ = false;
};

// true iff lambda_max(rho rho^T) < 1 - margin; the strict inequality defines
// the valid correlation domain
bool correlation_domain_check(const Eigen::MatrixXd& rho, double margin = 1e-6);

// Linear-Gaussian signal/observation model
//   dS = alpha S dt + sigma dB1,   dY = c S dt + dB2,   d<B1,B2> = rho dt
// with S_0 ~ N(mu0, Sigma0) and Y_0 = 0.
struct FilterModel {
    Eigen::Index m = 1, d = 1, l = 1;
    ParamTraj alpha, sigma, c, rho;
    Eigen::VectorXd mu0;
    Eigen::MatrixXd Sigma0;

    void validate(const std::vector<double>& probe_times) const;
};

// Euler-Maruyama with correlated increments: per step, B2 = sqrt(dt) Z1 and
// B1 = sqrt(dt) (rho Z1 + (I - rho rho^T)^{1/2} Z2), so the joint covariance
// is [[I, rho],[rho^T, I]] dt. Deterministic per seed.
std::pair<SampledPath, SampledPath> simulate_signal_observation(const FilterModel& model,
                                                                std::uint64_t seed,
                                                                std::size_t n_steps, double T);

struct KalmanResult {
    SampledPath q;
    std::vector<Eigen::MatrixXd> R;
    std::vector<double> times;
    SampledPath R_flat() const;  // row-major flattening per node
};

// conditional mean by pathwise Euler against the observation increments;
// covariance by classic RK4 on the matrix Riccati equation, symmetrized each
// step. Throws if R loses positive definiteness.
KalmanResult kalman_bucy_forward(const FilterModel& model, const SampledPath& Y);

// negative log-likelihood up to the dropped additive constant
double neg_log_likelihood_ito(const FilterModel& model, const SampledPath& Y);
// Stratonovich form: rough integral of psi(q) = -cq (Gubinelli derivative
// -c(Rc^T + sigma rho)) against the lifted observation, plus the correction
// 0.5 int (|cq|^2 + tr(c(Rc^T + sigma rho))) ds
double neg_log_likelihood_strat(const FilterModel& model,
                                std::shared_ptr<const RoughPath> lifted_Y);

// parameter tuple at one time
struct GammaPoint {
    Eigen::MatrixXd alpha, sigma, c, rho;
};

// prior terms of the penalty
struct PenaltySpec {
    std::function<double(const Eigen::VectorXd& q, const Eigen::MatrixXd& R,
                         const GammaPoint&)> frunning;  // prior running term
    std::function<double(const Eigen::VectorXd& mu0, const Eigen::MatrixXd& Sigma0,
                         const GammaPoint&)> ginitial;  // sentinel outside the valid domain
    double k1 = 1.0;
    double k2 = 1.0;
};

// int_0^t [frunning + 0.5(|cq|^2 + tr(c(Rc^T+sigma rho)))] ds
//   + int_0^t psi(q) dzeta + ginitial(mu0, Sigma0, gamma(0)),
// along the forward filter of the given model; sentinel-propagating
double penalty(const FilterModel& model, std::shared_ptr<const RoughPath> lifted_Y,
               const PenaltySpec& spec, double t);

// which parameter blocks the backward control steers; the rest stay frozen
struct GammaMask {
    bool alpha = true, sigma = false, c = false, rho = false;
    Eigen::Index control_dim(Eigen::Index m, Eigen::Index d, Eigen::Index l) const;
};

struct BackwardResult {
    std::vector<double> times;            // sub-grid of the lift on [0, t]
    Eigen::MatrixXd q;                    // nodes x m
    std::vector<Eigen::MatrixXd> R;
    std::vector<GammaPoint> gamma;
    bool valid = true;
    std::size_t fail_step = 0;
};

inline constexpr double kPosDefMargin = 1e-10;

// Integrates the filter dynamics backward from (q_t, R_t, gamma_t) =
// (mu, Sigma, a) to time 0: forward integration of negated vector fields on
// the reversed grid, with left-point sums against the reversed observation
// increments. u is piecewise constant with one knot per control piece
// (pieces split [0,t] evenly by index). Marks invalid when R exits the
// positive cone, the state blows up, or rho leaves the valid domain. When
// rho is steered, its rate is damped by (1 - lambda_max(rho rho^T)).
BackwardResult backward_trajectories(double t, const Eigen::VectorXd& mu,
                                     const Eigen::MatrixXd& Sigma, const GammaPoint& a,
                                     const std::vector<Eigen::VectorXd>& u_knots,
                                     const GammaMask& mask, const FilterModel& model_template,
                                     std::shared_ptr<const RoughPath> lifted_Y);

// objective configuration shared by shooting and the grid HJB
struct FilterControlConfig {
    GammaMask mask;
    double eps_u = 1e-2;     // control cost weight, f gains eps_u |u|^delta2
    double delta1 = 1.0;
    double delta2 = 2.0;
    double u_cap = 8.0;      // coordinate bound for the optimizer
};

// cost of one control choice: penalty terms along the backward trajectories
// plus the control cost; sentinel when the trajectory is invalid
double filter_control_cost(double t, const Eigen::VectorXd& mu, const Eigen::MatrixXd& Sigma,
                           const GammaPoint& a, const std::vector<Eigen::VectorXd>& u_knots,
                           const FilterControlConfig& config, const PenaltySpec& spec,
                           const FilterModel& model_template,
                           std::shared_ptr<const RoughPath> lifted_Y);

struct ShootingOptions {
    std::size_t n_pieces = 4;
    std::size_t max_sweeps = 200;
    double rel_tol = 1e-6;
    double init_step = 0.5;
    std::size_t n_starts = 8;  // start 0 is all-zero; the rest from a fixed seed list
    double start_scale = 0.5;
};

struct ShootingResult {
    double value = kCostSentinel;
    std::vector<Eigen::VectorXd> u_knots;
    bool cap_bound = false;  // some coordinate ended on the cap
};

// derivative-free minimization of filter_control_cost over piecewise-constant
// control knots: coordinate descent with adaptive step, deterministic
// multi-start. Returns the sentinel if every start is invalid.
ShootingResult filter_value_shooting(double t, const Eigen::VectorXd& mu,
                                     const Eigen::MatrixXd& Sigma, const GammaPoint& a,
                                     const FilterControlConfig& config, const PenaltySpec& spec,
                                     const FilterModel& model_template,
                                     std::shared_ptr<const RoughPath> lifted_Y,
                                     const ShootingOptions& opts);

// Reduced scalar problem (m = d = l = 1, uncertain alpha only, rho = 0):
// forward-initial HJB on the (mu, Sigma, alpha) grid, reusing the rough-HJB
// mollification loop. The Sigma axis carries explosion padding at its lower
// boundary. Control set: u uniformly spaced in [-u_cap, u_cap].
std::pair<ValueField, RoughHjbReport> filter_value_hjb(
    const FilterModel& model_template, const RoughPath& lifted_Y, const PenaltySpec& spec,
    const FilterControlConfig& config, const StateGrid& grid, std::size_t n_controls,
    const std::vector<std::size_t>& levels, HjbOptions options);

// builds the reduced-problem ControlProblem (exposed for tests)
ControlProblem reduced_filter_problem(const FilterModel& model_template,
                                      const PenaltySpec& spec,
                                      const FilterControlConfig& config,
                                      std::size_t n_controls);

}  // namespace roughctrl
