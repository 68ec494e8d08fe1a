#include <doctest.h>

#include <cmath>
#include <memory>

#include "roughctrl/controlled.hpp"
#include "roughctrl/rng.hpp"

using namespace roughctrl;

namespace {

std::shared_ptr<const RoughPath> time_lift(std::size_t n, double t1 = 1.0) {
    std::vector<double> times(n);
    Eigen::MatrixXd vals(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        times[i] = t1 * static_cast<double>(i) / static_cast<double>(n - 1);
        vals(i, 0) = times[i];
    }
    return std::make_shared<RoughPath>(lift_piecewise_linear(SampledPath(times, vals)));
}

}  // namespace

TEST_SUITE("controlled") {

TEST_CASE("integral of the driver against itself") {
    // int_0^1 z dz = 1/2, exact at any resolution thanks to the compensator
    for (std::size_t n : {2u, 5u, 33u}) {
        auto rp = time_lift(n);
        std::vector<Eigen::MatrixXd> derivs(n, Eigen::MatrixXd::Identity(1, 1));
        ControlledPath zp(rp, 0, rp->first().values(), derivs);
        const SampledPath integral = rough_integral(zp, *rp);
        CHECK(integral.value(0)(0) == 0.0);
        CHECK(integral.value(n - 1)(0) == doctest::Approx(0.5).epsilon(1e-15));
    }
}

TEST_CASE("flattened two-dimensional integrand") {
    // driver is the axis-aligned L-path; X = (-z2, z1) integrates to twice
    // the signed area, and X = z to half the squared endpoint norm
    std::vector<double> times{0.0, 1.0, 2.0};
    Eigen::MatrixXd vals(3, 2);
    vals << 0.0, 0.0, 1.0, 0.0, 1.0, 1.0;
    auto rp = std::make_shared<const RoughPath>(lift_piecewise_linear(SampledPath(times, vals)));

    Eigen::MatrixXd area_vals(3, 2);
    for (int i = 0; i < 3; ++i) {
        area_vals(i, 0) = -vals(i, 1);
        area_vals(i, 1) = vals(i, 0);
    }
    Eigen::MatrixXd area_deriv(2, 2);
    area_deriv << 0.0, -1.0, 1.0, 0.0;
    ControlledPath area_integrand(rp, 0, area_vals,
                                  std::vector<Eigen::MatrixXd>(3, area_deriv));
    CHECK(rough_integral(area_integrand, *rp).value(2)(0) ==
          doctest::Approx(1.0).epsilon(1e-14));

    ControlledPath self(rp, 0, vals,
                        std::vector<Eigen::MatrixXd>(3, Eigen::MatrixXd::Identity(2, 2)));
    CHECK(rough_integral(self, *rp).value(2)(0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("running integral over a subrange") {
    auto rp = time_lift(11);
    std::vector<Eigen::MatrixXd> derivs(11, Eigen::MatrixXd::Identity(1, 1));
    ControlledPath zp(rp, 0, rp->first().values(), derivs);
    const SampledPath part = rough_integral(zp, *rp, 2, 7);
    CHECK(part.size() == 6);
    CHECK(part.value(0)(0) == 0.0);
    const double lo = rp->times()[2], hi = rp->times()[7];
    CHECK(part.value(5)(0) == doctest::Approx(0.5 * (hi * hi - lo * lo)).epsilon(1e-14));
}

TEST_CASE("remainder of the driver itself vanishes") {
    GaussStream rng(3);
    std::vector<double> times(20);
    Eigen::MatrixXd vals(20, 2);
    for (int i = 0; i < 20; ++i) {
        times[i] = i / 19.0;
        vals(i, 0) = rng.normal();
        vals(i, 1) = rng.normal();
    }
    auto rp = std::make_shared<const RoughPath>(lift_piecewise_linear(SampledPath(times, vals)));
    ControlledPath zp(rp, 0, vals,
                      std::vector<Eigen::MatrixXd>(20, Eigen::MatrixXd::Identity(2, 2)));
    CHECK(zp.remainder_variation(1.25) <= 1e-13);
    for (std::size_t j : {3u, 11u, 19u}) CHECK(zp.remainder_increment(0, j).norm() <= 1e-13);
}

TEST_CASE("zero-derivative paths have pure increment remainders") {
    auto rp = time_lift(5);
    Eigen::MatrixXd vals(5, 1);
    vals << 0.0, 1.0, -1.0, 2.0, 0.0;
    const ControlledPath cp = controlled_constant_derivative(rp, 0, vals);
    CHECK(cp.deriv(2).norm() == 0.0);
    CHECK(cp.remainder_increment(1, 3)(0) == doctest::Approx(1.0));
    // remainder = raw increments, so its q-variation matches the path's
    SampledPath raw(cp.times(), vals);
    CHECK(cp.remainder_variation(1.0) == doctest::Approx(p_variation(raw, 1.0)));
}

TEST_CASE("composition tracks values, derivative, and parameter") {
    auto rp = time_lift(9);
    std::vector<Eigen::MatrixXd> derivs(9, Eigen::MatrixXd::Identity(1, 1));
    ControlledPath zp(rp, 0, rp->first().values(), derivs);

    SmoothMap square;
    square.e = 1;
    square.d = 1;
    square.value = [](const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
        return Eigen::MatrixXd::Constant(1, 1, a[0] * x[0] * x[0]);
    };
    square.dx = [](const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
        return Eigen::MatrixXd::Constant(1, 1, 2.0 * a[0] * x[0]);
    };

    Eigen::MatrixXd avals(9, 1);
    for (int i = 0; i < 9; ++i) avals(i, 0) = 1.0 + 0.5 * i;
    const SampledPath gamma(zp.times(), avals);

    const ControlledPath comp = compose_controlled(square, zp, gamma);
    for (std::size_t i = 0; i < 9; ++i) {
        const double t = comp.time(i), a = avals(i, 0);
        CHECK(comp.value(i)(0) == doctest::Approx(a * t * t).epsilon(1e-14));
        CHECK(comp.deriv(i)(0, 0) == doctest::Approx(2.0 * a * t).epsilon(1e-14));
    }
    // the parameter rides with zero derivative, so its variation lands in the
    // remainder; still finite as a q-variation functional
    CHECK(std::isfinite(comp.remainder_variation(1.25)));
    CHECK(remainder_difference_variation(comp, comp, 1.25) == doctest::Approx(0.0));

    // frozen parameter: R_{s,t} = (t - s)^2 exactly, whose 1.25-variation over
    // [0,1] is realized by the single full block
    const SampledPath frozen(zp.times(), Eigen::MatrixXd::Ones(9, 1));
    const ControlledPath comp2 = compose_controlled(square, zp, frozen);
    CHECK(comp2.remainder_variation(1.25) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("remainder step table composes additively") {
    auto rp = time_lift(6);
    Eigen::MatrixXd vals(6, 1);
    for (int i = 0; i < 6; ++i) vals(i, 0) = std::sin(1.7 * i);
    const ControlledPath cp = controlled_constant_derivative(rp, 0, vals);
    const TwoParamIncrements table = remainder(cp);
    CHECK((table.composed(0, 5) - cp.remainder_increment(0, 5)).norm() <= 1e-14);
    CHECK((table.composed(1, 4) - cp.remainder_increment(1, 4)).norm() <= 1e-14);
}

TEST_CASE("driver identity is enforced") {
    auto rp_a = time_lift(8);
    auto rp_b = time_lift(8);
    std::vector<Eigen::MatrixXd> derivs(8, Eigen::MatrixXd::Identity(1, 1));
    ControlledPath zp(rp_a, 0, rp_a->first().values(), derivs);
    CHECK_THROWS(rough_integral(zp, *rp_b));
    CHECK_NOTHROW(rough_integral(zp, *rp_a));
}

TEST_CASE("shape validation") {
    auto rp = time_lift(4);
    // wrong number of derivative blocks
    CHECK_THROWS(ControlledPath(rp, 0, Eigen::MatrixXd::Zero(4, 1),
                                std::vector<Eigen::MatrixXd>(3, Eigen::MatrixXd::Zero(1, 1))));
    // derivative block with wrong driver dimension
    CHECK_THROWS(ControlledPath(rp, 0, Eigen::MatrixXd::Zero(4, 1),
                                std::vector<Eigen::MatrixXd>(4, Eigen::MatrixXd::Zero(1, 2))));
}

}  // TEST_SUITE
