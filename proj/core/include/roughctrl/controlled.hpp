#pragma once

#include <functional>
#include <memory>

#include "roughctrl/rough_path.hpp"

namespace roughctrl {

// Path controlled by a rough path: values X on (a contiguous index range of)
// the driver's grid together with a Gubinelli derivative X'. Values are
// nv-dimensional; X' at each node is nv x d. The remainder over a grid pair
// is R_{s,t} = X_{s,t} - X'_s z_{s,t}.
//
// Integrand convention: a controlled integrand with values in R^(e x d) is
// stored flattened with nv = e*d, component (r,c) at index r*d + c, and
// derivative entry (r*d + c, b) = coefficient of z2(b,c) in the compensator.
class ControlledPath {
public:
    ControlledPath(std::shared_ptr<const RoughPath> driver, std::size_t base_index,
                   Eigen::MatrixXd values, std::vector<Eigen::MatrixXd> derivs);

    const RoughPath& driver() const { return *driver_; }
    std::shared_ptr<const RoughPath> driver_ptr() const { return driver_; }
    std::size_t base_index() const { return base_; }
    std::size_t size() const { return static_cast<std::size_t>(values_.rows()); }
    Eigen::Index value_dim() const { return values_.cols(); }

    double time(std::size_t i) const { return driver_->times()[base_ + i]; }
    std::vector<double> times() const;
    const Eigen::MatrixXd& values() const { return values_; }
    Eigen::VectorXd value(std::size_t i) const { return values_.row(i).transpose(); }
    const Eigen::MatrixXd& deriv(std::size_t i) const { return derivs_[i]; }

    // driver increment over local indices [i, j]
    Eigen::VectorXd driver_increment(std::size_t i, std::size_t j) const {
        return driver_->increment(base_ + i, base_ + j);
    }
    Eigen::MatrixXd driver_second(std::size_t i, std::size_t j) const {
        return driver_->second_level(base_ + i, base_ + j);
    }

    // true remainder over a grid pair (local indices)
    Eigen::VectorXd remainder_increment(std::size_t i, std::size_t j) const {
        return value(j) - value(i) - derivs_[i] * driver_increment(i, j);
    }

    // q-variation of the remainder as a two-parameter grid functional, with
    // true remainder increments over every pair (remainders of adjacent
    // blocks do not compose additively)
    double remainder_variation(double q) const;

    // p-variation of the Gubinelli derivative path (Frobenius increments)
    double deriv_variation(double p) const;

private:
    std::shared_ptr<const RoughPath> driver_;
    std::size_t base_;
    Eigen::MatrixXd values_;
    std::vector<Eigen::MatrixXd> derivs_;
};

// Rough integral of a controlled integrand against its driver over local
// index range [lo, hi], by compensated sums
//   sum_i  X_i z_{i,i+1} + X'_i z2_{i,i+1}
// accumulated left to right. Returns the running integral as a path on the
// integrand's grid (value 0 at lo). The integrand must be controlled by rp
// (identity check) and have value_dim divisible by the driver dimension.
SampledPath rough_integral(const ControlledPath& integrand, const RoughPath& rp,
                           std::size_t lo, std::size_t hi);
SampledPath rough_integral(const ControlledPath& integrand, const RoughPath& rp);

// Smooth map (x, a) -> R^(e x d) with state Jacobian, for composing with a
// controlled path. dx returns the flattened Jacobian: row r*d + c holds the
// gradient of component (r,c) with respect to x.
struct SmoothMap {
    Eigen::Index e = 1;
    Eigen::Index d = 1;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> value;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> dx;
};

// psi(X, gamma) as a controlled path: values psi(X_t, gamma_t) flattened,
// derivative D_x psi . X'. gamma rides along with zero Gubinelli derivative.
ControlledPath compose_controlled(const SmoothMap& map, const ControlledPath& xp,
                                  const SampledPath& gamma);

// a path of bounded variation as a controlled path with zero derivative
ControlledPath controlled_constant_derivative(std::shared_ptr<const RoughPath> driver,
                                              std::size_t base_index,
                                              Eigen::MatrixXd values);

// step entries R_{i,i+1} as an additive two-parameter object (column entries)
TwoParamIncrements remainder(const ControlledPath& xp);

// || R^X - R^Y ||_q with true pairwise remainders, each against its own
// driver; grids must have equal length
double remainder_difference_variation(const ControlledPath& x, const ControlledPath& y,
                                      double q);

}  // namespace roughctrl
