// Microbenchmarks for the hot paths: lifting, p-variation, integration, the
// RDE step loop, and one HJB march. Sizes are chosen so a full run stays
// under a minute; scaling behaviour comes from the Range arguments.

#include <benchmark/benchmark.h>

#include <memory>

#include "roughctrl/control_examples.hpp"
#include "roughctrl/filter.hpp"
#include "roughctrl/rde.hpp"

using namespace roughctrl;

namespace {

SampledPath brownian_path(std::uint64_t seed, std::size_t n) {
    return lift_brownian(seed, n, 1.0, 1).first();
}

void bm_lift_piecewise_linear(benchmark::State& state) {
    const SampledPath w = brownian_path(1, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(lift_piecewise_linear(w));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_lift_piecewise_linear)->Range(1 << 8, 1 << 14)->Complexity();

void bm_p_variation(benchmark::State& state) {
    const SampledPath w = brownian_path(2, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(p_variation(w, 2.5));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_p_variation)->Range(1 << 6, 1 << 10)->Complexity();

void bm_rough_integral(benchmark::State& state) {
    auto rp = std::make_shared<const RoughPath>(
        lift_brownian(3, static_cast<std::size_t>(state.range(0)), 1.0, 1));
    std::vector<Eigen::MatrixXd> derivs(rp->size(), Eigen::MatrixXd::Identity(1, 1));
    const ControlledPath integrand(rp, 0, rp->first().values(), std::move(derivs));
    for (auto _ : state) benchmark::DoNotOptimize(rough_integral(integrand, *rp));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_rough_integral)->Range(1 << 8, 1 << 14)->Complexity();

void bm_solve_rde(benchmark::State& state) {
    const ControlledDynamics dyn = builtin_dynamics("linear-scalar", 1);
    auto rp = std::make_shared<const RoughPath>(
        lift_brownian(4, static_cast<std::size_t>(state.range(0)), 1.0, 1));
    const SampledPath gamma(rp->times(),
                            Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rp->size()), 1));
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_rde(dyn, rp, gamma, Eigen::VectorXd::Ones(1)));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_solve_rde)->Range(1 << 8, 1 << 14)->Complexity();

void bm_hjb_march(benchmark::State& state) {
    const ControlProblem prob = insider_problem(0.25, -3.0, 3.0, 31);
    const StateGrid grid = parse_state_grid("x=-3:3:61,a=-2:2:41");
    std::vector<double> ts(101);
    Eigen::MatrixXd vals(101, 1);
    for (int i = 0; i <= 100; ++i) {
        ts[static_cast<std::size_t>(i)] = i / 100.0;
        vals(i, 0) = i / 100.0;
    }
    const SampledPath eta(ts, vals);
    HjbOptions opt;
    opt.n_steps = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_hjb_smooth(prob, eta, 0.0, 1.0, grid,
                                                  HjbDirection::BackwardTerminal, opt));
}
BENCHMARK(bm_hjb_march)->Arg(100)->Arg(200)->Arg(400);

void bm_kalman_forward(benchmark::State& state) {
    FilterModel m;
    m.alpha = ParamTraj(Eigen::MatrixXd::Constant(1, 1, -1.0));
    m.sigma = ParamTraj(Eigen::MatrixXd::Constant(1, 1, 1.0));
    m.c = ParamTraj(Eigen::MatrixXd::Constant(1, 1, 1.0));
    m.rho = ParamTraj(Eigen::MatrixXd::Zero(1, 1));
    m.mu0 = Eigen::VectorXd::Zero(1);
    m.Sigma0 = Eigen::MatrixXd::Identity(1, 1);
    const auto [s, y] =
        simulate_signal_observation(m, 5, static_cast<std::size_t>(state.range(0)), 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(kalman_bucy_forward(m, y));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_kalman_forward)->Range(1 << 8, 1 << 13)->Complexity();

}  // namespace

BENCHMARK_MAIN();
