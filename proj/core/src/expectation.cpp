#include "roughctrl/expectation.hpp"

#include <cmath>

namespace roughctrl {

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite(std::size_t n) {
    if (n == 0) throw std::invalid_argument("gauss_hermite: order must be positive");
    const Eigen::Index ni = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(ni, ni);
    for (Eigen::Index i = 1; i < ni; ++i) {
        const double off = std::sqrt(static_cast<double>(i) / 2.0);
        J(i, i - 1) = off;
        J(i - 1, i) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const double sqrt_pi = 1.7724538509055160272981674833411;
    Eigen::VectorXd weights(ni);
    for (Eigen::Index i = 0; i < ni; ++i) {
        const double v0 = es.eigenvectors()(0, i);
        weights(i) = sqrt_pi * v0 * v0;
    }
    return {es.eigenvalues(), weights};
}

double gaussian_expectation(const std::function<double(double)>& phi, double mu, double var,
                            const Eigen::VectorXd& nodes, const Eigen::VectorXd& weights) {
    if (var < 0.0) throw std::invalid_argument("gaussian_expectation: negative variance");
    const double scale = std::sqrt(2.0 * var);
    const double inv_sqrt_pi = 0.56418958354775628694807945156077;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < nodes.size(); ++i)
        acc += weights(i) * phi(mu + scale * nodes(i));
    return acc * inv_sqrt_pi;
}

KappaValue kappa(const ValueField& field, double t, double mu, double Sigma) {
    if (field.grid.num_axes() != 3)
        throw std::invalid_argument("kappa: field must live on a (mu, Sigma, a) grid");
    const auto& a_axis = field.grid.axis(2);
    KappaValue out;
    Eigen::VectorXd state(3);
    state << mu, Sigma, 0.0;
    for (double a : a_axis) {
        state(2) = a;
        const double v = field.value_interp(t, state);
        if (v >= kCostSentinel) continue;
        if (v < out.value || out.value >= kCostSentinel) {
            out.value = v;
            out.argmin_a = a;
        }
    }
    return out;
}

KappaField kappa_field(const ValueField& field, double t) {
    if (field.grid.num_axes() != 3)
        throw std::invalid_argument("kappa_field: field must live on a (mu, Sigma, a) grid");
    const std::size_t slice = field.slice_index(t);
    const Eigen::VectorXd& vals = field.values[slice];
    const auto& strides = field.grid.strides();
    const std::size_t n_mu = field.grid.axis(0).size();
    const std::size_t n_sigma = field.grid.axis(1).size();
    const std::size_t n_a = field.grid.axis(2).size();

    KappaField out;
    out.t = field.times[slice];
    out.mu_axis = field.grid.axis(0);
    out.sigma_axis = field.grid.axis(1);
    out.values = Eigen::MatrixXd::Constant(n_mu, n_sigma, kCostSentinel);
    out.argmin_a = Eigen::MatrixXd::Zero(n_mu, n_sigma);
    for (std::size_t im = 0; im < n_mu; ++im) {
        for (std::size_t is = 0; is < n_sigma; ++is) {
            double best = kCostSentinel, best_a = 0.0;
            for (std::size_t ia = 0; ia < n_a; ++ia) {
                const double v = vals(static_cast<Eigen::Index>(im * strides[0] +
                                                                is * strides[1] +
                                                                ia * strides[2]));
                if (v < best) {
                    best = v;
                    best_a = field.grid.axis(2)[ia];
                }
            }
            out.values(im, is) = best;
            out.argmin_a(im, is) = best_a;
        }
    }
    return out;
}

Expectation nonlinear_expectation(const std::function<double(double)>& phi,
                                  const KappaField& kf, double k1, double k2) {
    if (k1 <= 0.0 || k2 < 1.0)
        throw std::invalid_argument("nonlinear_expectation: need k1 > 0, k2 >= 1");
    double kmin = kCostSentinel;
    for (Eigen::Index i = 0; i < kf.values.rows(); ++i)
        for (Eigen::Index j = 0; j < kf.values.cols(); ++j)
            if (kf.values(i, j) < kmin) kmin = kf.values(i, j);
    if (kmin >= kCostSentinel)
        throw std::runtime_error("nonlinear_expectation: every penalty node is infinite");

    const auto [nodes, weights] = gauss_hermite(64);
    Expectation out;
    for (Eigen::Index i = 0; i < kf.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < kf.values.cols(); ++j) {
            const double k = kf.values(i, j);
            if (k >= kCostSentinel) continue;
            const double integral = gaussian_expectation(phi, kf.mu_axis[static_cast<std::size_t>(i)],
                                                         kf.sigma_axis[static_cast<std::size_t>(j)],
                                                         nodes, weights);
            const double cand = integral - std::pow((k - kmin) / k1, k2);
            if (cand > out.value) {
                out.value = cand;
                out.mu_star = kf.mu_axis[static_cast<std::size_t>(i)];
                out.sigma_star = kf.sigma_axis[static_cast<std::size_t>(j)];
            }
        }
    }
    return out;
}

RobustInterval robust_interval(const std::function<double(double)>& phi, const KappaField& kf,
                               double k1, double k2) {
    RobustInterval out;
    out.upper_arg = nonlinear_expectation(phi, kf, k1, k2);
    out.lower_arg = nonlinear_expectation([&phi](double x) { return -phi(x); }, kf, k1, k2);
    out.upper = out.upper_arg.value;
    out.lower = -out.lower_arg.value;
    return out;
}

}  // namespace roughctrl
