#include <doctest.h>

#include <cmath>
#include <memory>

#include "roughctrl/rde.hpp"
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

SampledPath zero_gamma(const RoughPath& rp, Eigen::Index k) {
    return SampledPath(rp.times(), Eigen::MatrixXd::Zero(rp.size(), k));
}

double exp_endpoint_error(std::size_t n) {
    auto rp = time_lift(n + 1);
    const ControlledDynamics dyn = builtin_dynamics("linear-scalar", 1);
    const ControlledPath sol = solve_rde(dyn, rp, zero_gamma(*rp, 1), Eigen::VectorXd::Ones(1));
    return std::abs(sol.value(n)(0) - std::exp(1.0));
}

}  // namespace

TEST_SUITE("rde") {

TEST_CASE("scalar exponential endpoint") {
    CHECK(exp_endpoint_error(256) < 1e-4);
}

TEST_CASE("error halving on grid doubling") {
    const double e512 = exp_endpoint_error(512);
    const double e1024 = exp_endpoint_error(1024);
    const double e2048 = exp_endpoint_error(2048);
    CHECK(e512 / e1024 >= 3.5);
    CHECK(e1024 / e2048 >= 3.5);
}

TEST_CASE("additive dynamics reproduce the driver exactly") {
    const RoughPath bm = lift_brownian(31, 200, 1.0, 2);
    auto rp = std::make_shared<const RoughPath>(bm);
    const ControlledDynamics dyn = builtin_dynamics("additive", 2);
    Eigen::VectorXd x0(2);
    x0 << -1.0, 2.0;
    const ControlledPath sol = solve_rde(dyn, rp, zero_gamma(*rp, 1), x0);
    for (std::size_t i = 0; i < sol.size(); ++i) {
        const Eigen::VectorXd expect = x0 + rp->increment(0, i);
        CHECK((sol.value(i) - expect).norm() <= 1e-12);
        CHECK((sol.deriv(i) - Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
    }
}

TEST_CASE("parameter-slope dynamics are exact for frozen slope") {
    auto rp = time_lift(50, 2.0);
    const ControlledDynamics dyn = builtin_dynamics("insider", 1);
    const SampledPath gamma(rp->times(), Eigen::MatrixXd::Constant(rp->size(), 1, 1.5));
    const ControlledPath sol =
        solve_rde(dyn, rp, gamma, Eigen::VectorXd::Constant(1, 0.25));
    for (std::size_t i = 0; i < sol.size(); ++i)
        CHECK(sol.value(i)(0) ==
              doctest::Approx(0.25 + 1.5 * rp->times()[i]).epsilon(1e-13));
}

TEST_CASE("exponential of a brownian driver") {
    auto rp = std::make_shared<const RoughPath>(lift_brownian(11, 1 << 12, 1.0, 1));
    const ControlledDynamics dyn = builtin_dynamics("linear-scalar", 1);
    const ControlledPath sol = solve_rde(dyn, rp, zero_gamma(*rp, 1), Eigen::VectorXd::Ones(1));
    const double wT = rp->first().values()(rp->size() - 1, 0);
    CHECK(sol.value(sol.size() - 1)(0) == doctest::Approx(std::exp(wT)).epsilon(1e-2));
}

TEST_CASE("gubinelli derivative equals the diffusion field") {
    auto rp = time_lift(12);
    const ControlledDynamics dyn = builtin_dynamics("linear-scalar", 1);
    const ControlledPath sol = solve_rde(dyn, rp, zero_gamma(*rp, 1), Eigen::VectorXd::Ones(1));
    for (std::size_t i = 0; i < sol.size(); ++i)
        CHECK(sol.deriv(i)(0, 0) == doctest::Approx(sol.value(i)(0)));
}

TEST_CASE("quadratic drift blows up and is flagged") {
    auto rp = time_lift(2049);
    ControlledDynamics dyn;
    dyn.m = 1;
    dyn.k = 1;
    dyn.d = 1;
    dyn.b = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Constant(1, x[0] * x[0]);
    };
    dyn.lambda = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Zero(1, 1);
    };
    dyn.dx_lambda = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Zero(1, 1);
    };
    const RdeRun run = solve_rde_status(dyn, rp, zero_gamma(*rp, 1),
                                        Eigen::VectorXd::Constant(1, 2.0), 0, 2048);
    CHECK(run.blew_up);
    CHECK_FALSE(run.solution.has_value());
    // continuous blow-up time is 0.5; the flag must fire shortly after
    CHECK(rp->times()[run.blowup_step] > 0.45);
    CHECK(rp->times()[run.blowup_step] < 0.70);
    CHECK_THROWS(solve_rde(dyn, rp, zero_gamma(*rp, 1), Eigen::VectorXd::Constant(1, 2.0)));
}

TEST_CASE("jacobian check accepts builtins and rejects corruption") {
    std::vector<Eigen::VectorXd> xs, as;
    GaussStream rng(8);
    for (int i = 0; i < 5; ++i) {
        xs.push_back(Eigen::VectorXd::Constant(1, rng.normal()));
        as.push_back(Eigen::VectorXd::Constant(1, rng.normal()));
    }
    ControlledDynamics good = builtin_dynamics("linear-scalar", 1);
    CHECK(check_dx_lambda(good, xs, as) <= 1e-6);

    ControlledDynamics bad = good;
    bad.dx_lambda = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Constant(1, 1, 2.0);
    };
    CHECK(check_dx_lambda(bad, xs, as) > 0.5);
}

TEST_CASE("mean-reversion builtin shape") {
    const ControlledDynamics dyn = builtin_dynamics("kalman", 1);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 3.0);
    Eigen::VectorXd a(2);
    a << -0.5, 0.8;
    CHECK(dyn.b(x, a)(0) == doctest::Approx(-1.3 * 3.0));
    CHECK(dyn.lambda(x, a)(0, 0) == doctest::Approx(0.8));
    CHECK_THROWS(builtin_dynamics("no-such-dynamics", 1));
}

TEST_CASE("solution norms are finite and consistent") {
    auto rp = std::make_shared<const RoughPath>(lift_brownian(3, 256, 1.0, 1));
    const ControlledDynamics dyn = builtin_dynamics("linear-scalar", 1);
    const SampledPath gamma = zero_gamma(*rp, 1);
    const ControlledPath sol = solve_rde(dyn, rp, gamma, Eigen::VectorXd::Ones(1));

    SmoothMap psi;
    psi.e = 1;
    psi.d = 1;
    psi.value = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Constant(1, 1, x[0]);
    };
    psi.dx = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Identity(1, 1);
    };
    const AprioriDiagnostics diag = apriori_diagnostics(sol, gamma, *rp, psi);
    CHECK(std::isfinite(diag.x_pvar));
    CHECK(diag.x_pvar > 0.0);
    CHECK(std::isfinite(diag.x_remainder));
    CHECK(std::isfinite(diag.psi_deriv_pvar));
    CHECK(std::isfinite(diag.psi_remainder));
    CHECK(diag.gamma_pvar == doctest::Approx(0.0));
    CHECK(diag.driver_holder > 0.0);
}

TEST_CASE("stability rows report finite contractive ratios") {
    const ControlledDynamics dyn = builtin_dynamics("linear-scalar", 1);
    std::vector<StabilityCase> pairs;
    for (int i = 0; i < 3; ++i) {
        StabilityCase sc;
        sc.rp_a = time_lift(64);
        sc.rp_b = sc.rp_a;
        sc.x0_a = Eigen::VectorXd::Ones(1);
        sc.x0_b = Eigen::VectorXd::Constant(1, 1.0 + 0.01 * (i + 1));
        sc.gamma_a = zero_gamma(*sc.rp_a, 1);
        sc.gamma_b = sc.gamma_a;
        pairs.push_back(std::move(sc));
    }
    const std::vector<StabilityRow> rows = stability_experiment(dyn, pairs);
    REQUIRE(rows.size() == 3);
    for (const StabilityRow& row : rows) {
        CHECK(row.input_distance > 0.0);
        CHECK(std::isfinite(row.output_distance));
        CHECK(row.ratio == doctest::Approx(row.output_distance / row.input_distance));
    }
}

TEST_CASE("mismatched parameter grid is rejected") {
    auto rp = time_lift(10);
    const ControlledDynamics dyn = builtin_dynamics("insider", 1);
    std::vector<double> short_times(rp->times().begin(), rp->times().begin() + 5);
    const SampledPath bad_gamma(short_times, Eigen::MatrixXd::Zero(5, 1));
    CHECK_THROWS(solve_rde(dyn, rp, bad_gamma, Eigen::VectorXd::Zero(1)));
}

}  // TEST_SUITE
