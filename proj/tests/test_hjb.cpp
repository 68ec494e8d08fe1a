#include <doctest.h>

#include <cmath>

#include "roughctrl/hjb.hpp"

using namespace roughctrl;

namespace {

SampledPath constant_eta(double t0, double t1) {
    std::vector<double> times{t0, t1};
    return SampledPath(times, Eigen::MatrixXd::Zero(2, 1));
}

SampledPath linear_eta(double t0, double t1) {
    std::vector<double> times{t0, t1};
    Eigen::MatrixXd vals(2, 1);
    vals << t0, t1;
    return SampledPath(times, vals);
}

SmoothMap zero_psi(Eigen::Index m, Eigen::Index d) {
    SmoothMap psi;
    psi.e = 1;
    psi.d = d;
    psi.value = [d](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Zero(1, d);
    };
    psi.dx = [m, d](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Zero(d, m);
    };
    return psi;
}

ControlledDynamics frozen_state_dynamics() {
    ControlledDynamics dyn;
    dyn.m = 1;
    dyn.k = 1;
    dyn.d = 1;
    dyn.b = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Zero(1);
    };
    dyn.lambda = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Zero(1, 1);
    };
    dyn.dx_lambda = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Zero(1, 1);
    };
    return dyn;
}

// quadratic steering cost int eps u^2 ds + a(1)^2 over da = u ds; the
// Riccati value is P(t) a^2 with P(t) = eps / (eps + 1 - t)
ControlProblem quadratic_steering_problem(double eps) {
    ControlProblem prob;
    prob.dyn = frozen_state_dynamics();
    prob.h = [](const Eigen::VectorXd&, const Eigen::VectorXd& u) { return u; };
    prob.f = [eps](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd& u) {
        return eps * u[0] * u[0];
    };
    prob.g = [](const Eigen::VectorXd&, const Eigen::VectorXd& a) { return a[0] * a[0]; };
    prob.psi = zero_psi(1, 1);
    prob.control_set =
        control_box(Eigen::VectorXd::Constant(1, -2.0), Eigen::VectorXd::Constant(1, 2.0), {41});
    return prob;
}

// independent check: semi-Lagrangian value iteration on the a-axis alone
std::vector<double> steering_dp_oracle(const std::vector<double>& a_axis, double eps,
                                       std::size_t n_steps, double query_time,
                                       std::vector<double>* at_query = nullptr) {
    const double dt = 1.0 / static_cast<double>(n_steps);
    const std::size_t na = a_axis.size();
    auto interp = [&](const std::vector<double>& v, double a) {
        const double c = std::clamp(a, a_axis.front(), a_axis.back());
        auto it = std::upper_bound(a_axis.begin(), a_axis.end(), c);
        std::size_t j = std::min<std::size_t>(
            std::max<std::ptrdiff_t>(it - a_axis.begin() - 1, 0), na - 2);
        const double w = (c - a_axis[j]) / (a_axis[j + 1] - a_axis[j]);
        return (1.0 - w) * v[j] + w * v[j + 1];
    };
    std::vector<double> v(na);
    for (std::size_t i = 0; i < na; ++i) v[i] = a_axis[i] * a_axis[i];
    for (std::size_t s = 0; s < n_steps; ++s) {
        const double t = 1.0 - dt * static_cast<double>(s + 1);
        std::vector<double> nv(na);
        for (std::size_t i = 0; i < na; ++i) {
            double best = std::numeric_limits<double>::max();
            for (int ui = -80; ui <= 80; ++ui) {
                const double u = 0.025 * ui;
                const double cand = dt * eps * u * u + interp(v, a_axis[i] + dt * u);
                best = std::min(best, cand);
            }
            nv[i] = best;
        }
        v.swap(nv);
        if (at_query && std::abs(t - query_time) < 0.5 * dt) *at_query = v;
    }
    return v;
}

}  // namespace

TEST_SUITE("hjb") {

TEST_CASE("grid strides and coordinates") {
    const StateGrid grid({{0.0, 1.0, 2.0}, {10.0, 20.0}});
    CHECK(grid.num_nodes() == 6);
    CHECK(grid.strides() == std::vector<std::size_t>{2, 1});
    CHECK(grid.axis_index(5, 0) == 2);
    CHECK(grid.axis_index(5, 1) == 1);
    const Eigen::VectorXd c = grid.coords(3);
    CHECK(c[0] == 1.0);
    CHECK(c[1] == 20.0);
    CHECK_THROWS(StateGrid(std::vector<std::vector<double>>{{0.0}}));
    CHECK_THROWS(StateGrid(std::vector<std::vector<double>>{{1.0, 0.5}}));
}

TEST_CASE("stencil reproduces multilinear functions") {
    const StateGrid grid({{0.0, 0.5, 1.5}, {-1.0, 0.0, 2.0}});
    auto f = [](double x, double y) { return 2.0 + 3.0 * x - 0.5 * y; };
    std::vector<std::size_t> nodes;
    std::vector<double> weights;
    for (double px : {0.0, 0.3, 0.7, 1.5}) {
        for (double py : {-1.0, -0.2, 1.3}) {
            Eigen::VectorXd p(2);
            p << px, py;
            grid.interpolation_stencil(p, nodes, weights);
            double wsum = 0.0, val = 0.0;
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                const Eigen::VectorXd c = grid.coords(nodes[i]);
                wsum += weights[i];
                val += weights[i] * f(c[0], c[1]);
            }
            CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(val == doctest::Approx(f(px, py)).epsilon(1e-13));
        }
    }
    // out-of-box points clamp
    Eigen::VectorXd far(2);
    far << 99.0, -99.0;
    grid.interpolation_stencil(far, nodes, weights);
    double val = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Eigen::VectorXd c = grid.coords(nodes[i]);
        val += weights[i] * f(c[0], c[1]);
    }
    CHECK(val == doctest::Approx(f(1.5, -1.0)).epsilon(1e-13));
}

TEST_CASE("grid spec parser") {
    std::vector<std::string> names;
    const StateGrid grid = parse_state_grid("x=-3:3:61,a=-2:2:41", &names);
    CHECK(names == std::vector<std::string>{"x", "a"});
    CHECK(grid.num_axes() == 2);
    CHECK(grid.axis(0).size() == 61);
    CHECK(grid.axis(0).front() == doctest::Approx(-3.0));
    CHECK(grid.axis(0).back() == doctest::Approx(3.0));
    CHECK(grid.axis(1).size() == 41);
    CHECK_THROWS(parse_state_grid("x=1:2"));
    CHECK_THROWS(parse_state_grid("x=1:2:1"));
    CHECK_THROWS(parse_state_grid("oops"));
}

TEST_CASE("control box enumeration order") {
    Eigen::VectorXd lo(2), hi(2);
    lo << -1.0, 0.0;
    hi << 1.0, 1.0;
    const auto box = control_box(lo, hi, {3, 2});
    REQUIRE(box.size() == 6);
    CHECK(box[0][0] == -1.0);
    CHECK(box[0][1] == 0.0);
    CHECK(box[1][0] == -1.0);
    CHECK(box[1][1] == 1.0);
    CHECK(box[2][0] == 0.0);
    CHECK(box[5][0] == 1.0);
    CHECK(box[5][1] == 1.0);
    // count-1 axes sit at the lower bound
    const auto degenerate = control_box(lo, hi, {1, 2});
    CHECK(degenerate.size() == 2);
    CHECK(degenerate[0][0] == -1.0);
}

TEST_CASE("pure transport is exact on affine data") {
    // -v_t = v_x with terminal v = x: value x + (1 - t) at every node;
    // one-sided differences are exact so boundaries add no error
    ControlProblem prob;
    prob.dyn = frozen_state_dynamics();
    prob.dyn.lambda = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Identity(1, 1);
    };
    prob.h = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Zero(1);
    };
    prob.f = [](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return 0.0;
    };
    prob.g = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) { return x[0]; };
    prob.psi = zero_psi(1, 1);
    prob.control_set = {Eigen::VectorXd::Zero(1)};

    const StateGrid grid = parse_state_grid("x=-3:3:61,a=0:1:2");
    HjbOptions options;

    ValueField field = solve_hjb_smooth(prob, linear_eta(0.0, 1.0), 0.0, 1.0, grid,
                                        HjbDirection::BackwardTerminal, options);
    CHECK(field.total_steps >= 11);
    for (double t : {0.0, 0.4, 1.0}) {
        const std::size_t s = field.slice_index(t);
        const double ts = field.times[s];
        for (double x : {-2.5, 0.0, 1.7, 3.0}) {
            Eigen::VectorXd state(2);
            state << x, 0.0;
            CHECK(field.value_at(s, state) == doctest::Approx(x + 1.0 - ts).epsilon(1e-10));
        }
    }

    ValueField fwd = solve_hjb_smooth(prob, linear_eta(0.0, 1.0), 0.0, 1.0, grid,
                                      HjbDirection::ForwardInitial, options);
    for (double t : {0.0, 0.6, 1.0}) {
        const std::size_t s = fwd.slice_index(t);
        const double ts = fwd.times[s];
        Eigen::VectorXd state(2);
        state << 0.5, 0.0;
        CHECK(fwd.value_at(s, state) == doctest::Approx(0.5 - ts).epsilon(1e-10));
    }
}

TEST_CASE("cfl violation, suggestion, and auto refine") {
    ControlProblem prob;
    prob.dyn = frozen_state_dynamics();
    prob.dyn.lambda = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Identity(1, 1);
    };
    prob.h = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Zero(1);
    };
    prob.f = [](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return 0.0;
    };
    prob.g = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) { return x[0]; };
    prob.psi = zero_psi(1, 1);
    prob.control_set = {Eigen::VectorXd::Zero(1)};
    const StateGrid grid = parse_state_grid("x=-3:3:61,a=0:1:2");

    HjbOptions coarse;
    coarse.n_steps = 3;  // dt = 1/3 against dx = 0.1 and unit speed
    bool threw = false;
    std::size_t suggested = 0;
    try {
        solve_hjb_smooth(prob, linear_eta(0.0, 1.0), 0.0, 1.0, grid,
                         HjbDirection::BackwardTerminal, coarse);
    } catch (const CflError& e) {
        threw = true;
        suggested = e.suggested_steps;
    }
    CHECK(threw);
    CHECK(suggested >= 11);

    coarse.auto_refine = true;
    const ValueField refined = solve_hjb_smooth(prob, linear_eta(0.0, 1.0), 0.0, 1.0, grid,
                                                HjbDirection::BackwardTerminal, coarse);
    CHECK(refined.total_steps == suggested);
}

TEST_CASE("quadratic steering matches the riccati solution") {
    const double eps = 1.0;
    const ControlProblem prob = quadratic_steering_problem(eps);
    const StateGrid grid = parse_state_grid("x=-1:1:3,a=-2:2:81");
    HjbOptions options;
    const ValueField field = solve_hjb_smooth(prob, constant_eta(0.0, 1.0), 0.0, 1.0, grid,
                                              HjbDirection::BackwardTerminal, options);
    for (double t : {0.0, 0.5}) {
        const double P = eps / (eps + 1.0 - t);
        const std::size_t s = field.slice_index(t);
        for (double a = -1.5; a <= 1.5; a += 0.25) {
            Eigen::VectorXd state(2);
            state << 0.0, a;
            CHECK(std::abs(field.value_at(s, state) - P * a * a) < 0.06);
        }
    }
    // value is independent of the frozen x coordinate
    Eigen::VectorXd s0(2), s1(2);
    s0 << -1.0, 1.0;
    s1 << 1.0, 1.0;
    CHECK(field.value_at(0, s0) == doctest::Approx(field.value_at(0, s1)).epsilon(1e-12));
}

TEST_CASE("independent value iteration agrees") {
    const double eps = 1.0;
    const ControlProblem prob = quadratic_steering_problem(eps);
    const StateGrid grid = parse_state_grid("x=-1:1:3,a=-2:2:81");
    const ValueField field = solve_hjb_smooth(prob, constant_eta(0.0, 1.0), 0.0, 1.0, grid,
                                              HjbDirection::BackwardTerminal, HjbOptions{});
    const std::vector<double> dp = steering_dp_oracle(grid.axis(1), eps, 400, 0.0);
    const std::size_t s0 = field.slice_index(0.0);
    for (std::size_t i = 8; i + 8 < grid.axis(1).size(); ++i) {
        Eigen::VectorXd state(2);
        state << 0.0, grid.axis(1)[i];
        CHECK(std::abs(field.value_at(s0, state) - dp[i]) < 0.06);
        // the oracle itself must track the closed form
        const double P = eps / (eps + 1.0);
        CHECK(std::abs(dp[i] - P * grid.axis(1)[i] * grid.axis(1)[i]) < 0.05);
    }
}

TEST_CASE("recorded feedback satisfies bellman consistency") {
    const ControlProblem prob = quadratic_steering_problem(1.0);
    const StateGrid grid = parse_state_grid("x=-1:1:3,a=-2:2:81");
    const SampledPath eta = constant_eta(0.0, 1.0);
    const ValueField field = solve_hjb_smooth(prob, eta, 0.0, 1.0, grid,
                                              HjbDirection::BackwardTerminal, HjbOptions{});
    const double res = dpp_check(prob, field, eta, 0.25, Eigen::VectorXd::Zero(1),
                                 Eigen::VectorXd::Constant(1, 1.0), 0.75);
    CHECK(std::isfinite(res));
    CHECK(res < 0.1);
}

TEST_CASE("negation and slice lookup") {
    const ControlProblem prob = quadratic_steering_problem(1.0);
    const StateGrid grid = parse_state_grid("x=-1:1:3,a=-2:2:81");
    const ValueField field = solve_hjb_smooth(prob, constant_eta(0.0, 1.0), 0.0, 1.0, grid,
                                              HjbDirection::BackwardTerminal, HjbOptions{});
    const ValueField neg = field.negated();
    Eigen::VectorXd state(2);
    state << 0.0, 1.0;
    CHECK(neg.value_at(0, state) == doctest::Approx(-field.value_at(0, state)));
    CHECK(field.slice_index(field.times.front() - 5.0) == 0);
    CHECK(field.slice_index(field.times.back() + 5.0) == field.times.size() - 1);
    const double mid = 0.5 * (field.times[3] + field.times[4]);
    const std::size_t near = field.slice_index(mid + 1e-9);
    CHECK((near == 3 || near == 4));
}

TEST_CASE("stored slices honour the stride and keep endpoints") {
    const ControlProblem prob = quadratic_steering_problem(1.0);
    const StateGrid grid = parse_state_grid("x=-1:1:3,a=-2:2:81");
    HjbOptions options;
    options.n_steps = 50;
    options.store_stride = 7;
    const ValueField field = solve_hjb_smooth(prob, constant_eta(0.0, 1.0), 0.0, 1.0, grid,
                                              HjbDirection::BackwardTerminal, options);
    CHECK(field.total_steps == 50);
    CHECK(field.times.front() == doctest::Approx(0.0));
    CHECK(field.times.back() == doctest::Approx(1.0));
    CHECK(field.times.size() == 9);  // ceil(51 / 7) slices plus the far endpoint
    // interior times line up with step multiples of the stride
    CHECK(field.times[1] == doctest::Approx(7.0 / 50.0));
}

TEST_CASE("configuration errors") {
    ControlProblem prob = quadratic_steering_problem(1.0);
    const StateGrid bad_grid({{0.0, 1.0}});  // missing the a-axis
    CHECK_THROWS(solve_hjb_smooth(prob, constant_eta(0.0, 1.0), 0.0, 1.0, bad_grid,
                                  HjbDirection::BackwardTerminal, HjbOptions{}));
    ControlProblem empty = prob;
    empty.control_set.clear();
    const StateGrid grid = parse_state_grid("x=-1:1:3,a=-2:2:5");
    CHECK_THROWS(solve_hjb_smooth(empty, constant_eta(0.0, 1.0), 0.0, 1.0, grid,
                                  HjbDirection::BackwardTerminal, HjbOptions{}));
    CHECK_THROWS(solve_hjb_smooth(prob, constant_eta(0.0, 1.0), 1.0, 1.0, grid,
                                  HjbDirection::BackwardTerminal, HjbOptions{}));
}

}  // TEST_SUITE
