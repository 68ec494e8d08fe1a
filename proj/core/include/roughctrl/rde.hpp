#pragma once

#include <optional>
#include <string>

#include "roughctrl/controlled.hpp"

namespace roughctrl {

// Dynamics dX = b(X, gamma) dt + lambda(X, gamma) dzeta with state dim m,
// parameter dim k, driver dim d. dx_lambda returns the flattened Jacobian of
// lambda: row i*d + c holds the gradient of lambda(i,c) with respect to x,
// so (dx_lambda * lambda) is the (m*d) x d compensator used by the one-step
// scheme and the Gubinelli derivative of lambda along the solution.
struct ControlledDynamics {
    Eigen::Index m = 1;
    Eigen::Index k = 1;
    Eigen::Index d = 1;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> b;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> lambda;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> dx_lambda;
};

// max relative defect of dx_lambda against central finite differences at the
// given probe points; used by tests and the builtin registry
double check_dx_lambda(const ControlledDynamics& dyn,
                       const std::vector<Eigen::VectorXd>& xs,
                       const std::vector<Eigen::VectorXd>& as);

inline constexpr double kBlowupThreshold = 1e12;

struct RdeRun {
    std::optional<ControlledPath> solution;  // empty on blow-up
    bool blew_up = false;
    std::size_t blowup_step = 0;
};

// One-step (Davie) scheme over local driver index range [lo, hi]:
//   X_{i+1} = X_i + b dt + lambda z_{i,i+1} + (dx_lambda . lambda) z2_{i,i+1}
// Solution carries Gubinelli derivative X' = lambda(X, gamma). gamma must be
// sampled on the same index range of the driver grid.
RdeRun solve_rde_status(const ControlledDynamics& dyn,
                        std::shared_ptr<const RoughPath> rp, const SampledPath& gamma,
                        const Eigen::VectorXd& x0, std::size_t lo, std::size_t hi);

// throwing wrapper; blow-up (|X| > 1e12 or non-finite) reports the step index
ControlledPath solve_rde(const ControlledDynamics& dyn, std::shared_ptr<const RoughPath> rp,
                         const SampledPath& gamma, const Eigen::VectorXd& x0, std::size_t lo,
                         std::size_t hi);
ControlledPath solve_rde(const ControlledDynamics& dyn, std::shared_ptr<const RoughPath> rp,
                         const SampledPath& gamma, const Eigen::VectorXd& x0);

// norms controlling the solution map, reported together
struct AprioriDiagnostics {
    double x_pvar;             // ||X||_p
    double x_remainder;        // ||R^X||_{p/2}
    double psi_deriv_pvar;     // ||psi(X,gamma)'||_p
    double psi_remainder;      // ||R^psi(X,gamma)||_{p/2}
    double gamma_pvar;         // ||gamma||_{p/2}
    double driver_holder;      // ||z||_{1/p-Hol} + ||z2||_{2/p-Hol}
};

AprioriDiagnostics apriori_diagnostics(const ControlledPath& solution,
                                       const SampledPath& gamma, const RoughPath& rp,
                                       const SmoothMap& psi);

struct StabilityCase {
    Eigen::VectorXd x0_a, x0_b;
    SampledPath gamma_a, gamma_b;
    std::shared_ptr<const RoughPath> rp_a, rp_b;
};

struct StabilityRow {
    double input_distance;   // |x-y| + ||g-h||_inf + ||g-h||_{p/2} + rho_p(za, zb)
    double output_distance;  // ||X'-Y'||_p + ||R^X - R^Y||_{p/2}
    double ratio;            // output / input
};

// solves both instances of each pair and reports distance ratios
std::vector<StabilityRow> stability_experiment(const ControlledDynamics& dyn,
                                               const std::vector<StabilityCase>& pairs);

// builtin dynamics: "linear-scalar" (b=0, lambda=x), "additive" (b=0,
// lambda=I), "insider" (b=0, lambda=a), "kalman" (scalar mean dynamics
// b = a1*x - a2*c*x, lambda = a2 with gamma = (a1, a2) = (alpha, gain))
ControlledDynamics builtin_dynamics(const std::string& name, Eigen::Index d);

}  // namespace roughctrl
