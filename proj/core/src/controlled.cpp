#include "roughctrl/controlled.hpp"

#include <cmath>
#include <stdexcept>

namespace roughctrl {

ControlledPath::ControlledPath(std::shared_ptr<const RoughPath> driver, std::size_t base_index,
                               Eigen::MatrixXd values, std::vector<Eigen::MatrixXd> derivs)
    : driver_(std::move(driver)), base_(base_index), values_(std::move(values)),
      derivs_(std::move(derivs)) {
    if (!driver_) throw std::invalid_argument("controlled path: null driver");
    const std::size_t n = static_cast<std::size_t>(values_.rows());
    if (n < 1 || base_ + n > driver_->size())
        throw std::invalid_argument("controlled path: grid range outside driver grid");
    if (derivs_.size() != n)
        throw std::invalid_argument("controlled path: values/derivs length mismatch");
    for (const auto& d : derivs_)
        if (d.rows() != values_.cols() || d.cols() != driver_->dim())
            throw std::invalid_argument("controlled path: derivative shape must be nv x d");
}

std::vector<double> ControlledPath::times() const {
    const auto& t = driver_->times();
    return std::vector<double>(t.begin() + base_, t.begin() + base_ + size());
}

double ControlledPath::remainder_variation(double q) const {
    if (q < 1.0) throw std::invalid_argument("remainder variation: exponent must be >= 1");
    const std::size_t n = size();
    std::vector<double> best(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
        double v = 0.0;
        for (std::size_t i = 0; i < j; ++i) {
            const double cand = best[i] + std::pow(remainder_increment(i, j).norm(), q);
            if (cand > v) v = cand;
        }
        best[j] = v;
    }
    return std::pow(best[n - 1], 1.0 / q);
}

double ControlledPath::deriv_variation(double p) const {
    if (p < 1.0) throw std::invalid_argument("derivative variation: p must be >= 1");
    const std::size_t n = size();
    std::vector<double> best(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
        double v = 0.0;
        for (std::size_t i = 0; i < j; ++i) {
            const double cand = best[i] + std::pow((derivs_[j] - derivs_[i]).norm(), p);
            if (cand > v) v = cand;
        }
        best[j] = v;
    }
    return std::pow(best[n - 1], 1.0 / p);
}

SampledPath rough_integral(const ControlledPath& integrand, const RoughPath& rp,
                           std::size_t lo, std::size_t hi) {
    if (integrand.driver().id() != rp.id())
        throw std::invalid_argument("rough integral: integrand is controlled by a different driver");
    if (lo > hi || hi >= integrand.size())
        throw std::invalid_argument("rough integral: bad index range");
    const Eigen::Index d = rp.dim();
    const Eigen::Index nv = integrand.value_dim();
    if (nv % d != 0)
        throw std::invalid_argument("rough integral: integrand dimension not a multiple of d");
    const Eigen::Index e = nv / d;

    std::vector<double> times;
    times.reserve(hi - lo + 1);
    Eigen::MatrixXd out(hi - lo + 1, e);
    out.row(0).setZero();
    times.push_back(integrand.time(lo));
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(e);
    for (std::size_t i = lo; i < hi; ++i) {
        const Eigen::VectorXd z = integrand.driver_increment(i, i + 1);
        const Eigen::MatrixXd z2 = integrand.driver_second(i, i + 1);
        const Eigen::VectorXd x = integrand.value(i);
        const Eigen::MatrixXd& xp = integrand.deriv(i);
        for (Eigen::Index r = 0; r < e; ++r) {
            double term = 0.0;
            for (Eigen::Index c = 0; c < d; ++c) {
                term += x[r * d + c] * z[c];
                for (Eigen::Index b = 0; b < d; ++b)
                    term += xp(r * d + c, b) * z2(b, c);
            }
            acc[r] += term;
        }
        out.row(i + 1 - lo) = acc.transpose();
        times.push_back(integrand.time(i + 1));
    }
    return SampledPath(std::move(times), std::move(out));
}

SampledPath rough_integral(const ControlledPath& integrand, const RoughPath& rp) {
    return rough_integral(integrand, rp, 0, integrand.size() - 1);
}

ControlledPath compose_controlled(const SmoothMap& map, const ControlledPath& xp,
                                  const SampledPath& gamma) {
    if (!map.value || !map.dx) throw std::invalid_argument("compose: map callbacks not set");
    if (gamma.size() != xp.size())
        throw std::invalid_argument("compose: gamma grid length mismatch");
    const Eigen::Index nv = map.e * map.d;
    const Eigen::Index d = xp.driver().dim();
    if (map.d != d) throw std::invalid_argument("compose: map output width must equal driver dim");

    Eigen::MatrixXd values(xp.size(), nv);
    std::vector<Eigen::MatrixXd> derivs(xp.size());
    for (std::size_t i = 0; i < xp.size(); ++i) {
        const Eigen::VectorXd x = xp.value(i);
        const Eigen::VectorXd a = gamma.value(i);
        const Eigen::MatrixXd v = map.value(x, a);
        if (v.rows() != map.e || v.cols() != map.d)
            throw std::invalid_argument("compose: map value has wrong shape");
        for (Eigen::Index r = 0; r < map.e; ++r)
            for (Eigen::Index c = 0; c < map.d; ++c) values(i, r * map.d + c) = v(r, c);
        const Eigen::MatrixXd jac = map.dx(x, a);
        if (jac.rows() != nv || jac.cols() != xp.value_dim())
            throw std::invalid_argument("compose: map Jacobian has wrong shape");
        derivs[i] = jac * xp.deriv(i);
    }
    return ControlledPath(xp.driver_ptr(), xp.base_index(), std::move(values),
                          std::move(derivs));
}

ControlledPath controlled_constant_derivative(std::shared_ptr<const RoughPath> driver,
                                              std::size_t base_index, Eigen::MatrixXd values) {
    if (!driver) throw std::invalid_argument("controlled path: null driver");
    const std::size_t n = static_cast<std::size_t>(values.rows());
    std::vector<Eigen::MatrixXd> derivs(
        n, Eigen::MatrixXd::Zero(values.cols(), driver->dim()));
    return ControlledPath(std::move(driver), base_index, std::move(values), std::move(derivs));
}

TwoParamIncrements remainder(const ControlledPath& xp) {
    std::vector<Eigen::MatrixXd> steps;
    steps.reserve(xp.size() - 1);
    for (std::size_t i = 0; i + 1 < xp.size(); ++i)
        steps.push_back(xp.remainder_increment(i, i + 1));
    return TwoParamIncrements(xp.times(), std::move(steps), CompositionRule::Additive);
}

double remainder_difference_variation(const ControlledPath& x, const ControlledPath& y,
                                      double q) {
    if (x.size() != y.size())
        throw std::invalid_argument("remainder difference: grid length mismatch");
    if (q < 1.0) throw std::invalid_argument("remainder difference: exponent must be >= 1");
    const std::size_t n = x.size();
    std::vector<double> best(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
        double v = 0.0;
        for (std::size_t i = 0; i < j; ++i) {
            const double inc =
                (x.remainder_increment(i, j) - y.remainder_increment(i, j)).norm();
            const double cand = best[i] + std::pow(inc, q);
            if (cand > v) v = cand;
        }
        best[j] = v;
    }
    return std::pow(best[n - 1], 1.0 / q);
}

}  // namespace roughctrl
