#pragma once

#include "roughctrl/hjb.hpp"

namespace roughctrl {

// Gauss-Hermite rule for weight exp(-x^2): nodes ascending, weights summing
// to sqrt(pi). Computed by the Golub-Welsch eigendecomposition.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite(std::size_t n);

// int phi dN(mu, var) by Gauss-Hermite (x = mu + sqrt(2 var) xi)
double gaussian_expectation(const std::function<double(double)>& phi, double mu, double var,
                            const Eigen::VectorXd& nodes, const Eigen::VectorXd& weights);

struct KappaValue {
    double value = kCostSentinel;
    double argmin_a = 0.0;
};

// inf over the a-axis of a (mu, Sigma, a) value field at one query point;
// multilinear in (t, mu, Sigma), exact on a-nodes
KappaValue kappa(const ValueField& field, double t, double mu, double Sigma);

// the same inf taken on every (mu, Sigma) grid node
struct KappaField {
    double t = 0.0;
    std::vector<double> mu_axis, sigma_axis;
    Eigen::MatrixXd values;    // n_mu x n_sigma, sentinel where all a-nodes are sentinel
    Eigen::MatrixXd argmin_a;  // matching argmin over the a-axis
};

KappaField kappa_field(const ValueField& field, double t);

struct Expectation {
    double value = -kCostSentinel;
    double mu_star = 0.0;
    double sigma_star = 0.0;
};

// sup over (mu, Sigma) nodes of  int phi dN(mu, Sigma) - ((kappa - min kappa)/k1)^k2.
// kappa is min-normalized first so the penalty vanishes at its minimum;
// sentinel nodes are excluded from the sup. Quadrature order 64.
Expectation nonlinear_expectation(const std::function<double(double)>& phi,
                                  const KappaField& kf, double k1, double k2);

struct RobustInterval {
    double lower = 0.0, upper = 0.0;
    Expectation lower_arg, upper_arg;
};

// [-E(-phi), E(phi)]
RobustInterval robust_interval(const std::function<double(double)>& phi, const KappaField& kf,
                               double k1, double k2);

}  // namespace roughctrl
