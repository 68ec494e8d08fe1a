#pragma once

#include <cstdint>
#include <stdexcept>

#include "roughctrl/rde.hpp"

namespace roughctrl {

inline constexpr double kCostSentinel = 1e30;  // +infinity surrogate, kept out of arithmetic
inline constexpr double kBoundaryPad = 1e6;    // ghost value outside padded boundaries

// Tensor-product grid over the combined state (x axes first, then a axes).
// Flattened row-major with the last axis fastest, so the a-block index of a
// node is node % (product of a-axis sizes).
class StateGrid {
public:
    StateGrid() = default;
    explicit StateGrid(std::vector<std::vector<double>> axes);

    std::size_t num_axes() const { return axes_.size(); }
    const std::vector<double>& axis(std::size_t i) const { return axes_[i]; }
    const std::vector<std::vector<double>>& axes() const { return axes_; }
    std::size_t num_nodes() const { return num_nodes_; }
    const std::vector<std::size_t>& strides() const { return strides_; }

    std::size_t axis_index(std::size_t node, std::size_t ax) const {
        return (node / strides_[ax]) % axes_[ax].size();
    }
    Eigen::VectorXd coords(std::size_t node) const;

    // multilinear interpolation weights: corner nodes and weights for a point
    // (clamped into the grid box); used by value queries
    void interpolation_stencil(const Eigen::VectorXd& point,
                               std::vector<std::size_t>& nodes,
                               std::vector<double>& weights) const;

private:
    std::vector<std::vector<double>> axes_;
    std::vector<std::size_t> strides_;
    std::size_t num_nodes_ = 0;
};

// parses "x=-3:3:61,a=-2:2:41" (name=lo:hi:count per axis, in order)
StateGrid parse_state_grid(const std::string& desc, std::vector<std::string>* names = nullptr);

// Control problem over state x (dim m, dynamics from dyn) and parameter a
// (dim k, dynamics da = h(a,u) ds). f and g define running/terminal costs and
// psi the rough running cost row. delta exponents are growth documentation
// used by validation probes, not by the solver.
struct ControlProblem {
    ControlledDynamics dyn;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> h;
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&,
                         const Eigen::VectorXd&)> f;
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> g;
    SmoothMap psi;  // e=1, d = dyn.d
    std::vector<Eigen::VectorXd> control_set;
    double delta1 = 1.0;
    double delta2 = 2.0;
};

// uniform control box helper: k-dim product of [lo, hi] with count points per
// axis, row-major enumeration (deterministic order for tie-breaking)
std::vector<Eigen::VectorXd> control_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                         const std::vector<std::size_t>& counts);

enum class HjbDirection { BackwardTerminal, ForwardInitial };

struct CflError : std::runtime_error {
    CflError(const std::string& msg, std::size_t suggested)
        : std::runtime_error(msg), suggested_steps(suggested) {}
    std::size_t suggested_steps;
};

struct HjbOptions {
    std::size_t n_steps = 0;          // time intervals; 0 = smallest CFL-stable count
    bool auto_refine = false;         // raise n_steps to meet CFL instead of erroring
    std::size_t store_stride = 1;     // keep every k-th slice (endpoints always kept)
    std::vector<int> pad_lower;       // axis indices with padded lower boundary
    std::vector<int> pad_upper;
    double pad_value = kBoundaryPad;
    double cfl_safety = 0.9;
};

// Value field on stored time slices. best_control holds the index into the
// problem's control set realizing the inf (first index on ties).
class ValueField {
public:
    StateGrid grid;
    std::vector<double> times;                     // stored, increasing
    std::vector<Eigen::VectorXd> values;           // flattened per stored time
    std::vector<std::vector<std::uint16_t>> best_control;
    std::vector<Eigen::VectorXd> control_set;
    HjbDirection direction = HjbDirection::BackwardTerminal;
    std::size_t total_steps = 0;                   // time intervals actually marched

    std::size_t slice_index(double t) const;       // nearest stored slice
    double value_at(std::size_t slice, const Eigen::VectorXd& state) const;
    double value_interp(double t, const Eigen::VectorXd& state) const;
    std::uint16_t control_at(std::size_t slice, const Eigen::VectorXd& state) const;  // nearest node
    ValueField negated() const;                    // flips value signs (sup-form reporting)
};

// Explicit first-order upwind marching of
//   backward-terminal:  -dv/dt = b.grad_x v + inf_u{h.grad_a v + f} + (lambda.grad_x v + psi).etadot,
//                       v(t1) = g
//   forward-initial:     dv/dt + b.grad_x v + sup_u{h.grad_a v - f} + (lambda.grad_x v - psi).etadot = 0,
//                       v(t0) = g
// x-advection uses the combined coefficient b + lambda.etadot; etadot comes
// from finite differences of eta over each time interval. Throws CflError
// when the explicit step violates dt <= safety * min(dx/(|b|+|lambda||etadot|), da/|h|)
// unless options.auto_refine is set.
ValueField solve_hjb_smooth(const ControlProblem& prob, const SampledPath& eta, double t0,
                            double t1, const StateGrid& grid, HjbDirection direction,
                            const HjbOptions& options);

struct RoughHjbReport {
    std::vector<std::size_t> levels;
    std::vector<double> sup_diffs;   // interior sup-difference between consecutive levels
    std::vector<std::size_t> tsteps; // time steps used per level
    bool cauchy_ok = true;           // non-increasing within factor-2 slack
};

// Mollification limit: subsample rp's first level at each resolution, solve
// the smooth problem per level, compare consecutive fields on interior nodes
// at 21 uniform times. Returns the finest-level field. rp must be geometric.
std::pair<ValueField, RoughHjbReport> solve_rough_hjb(const ControlProblem& prob,
                                                      const RoughPath& rp,
                                                      const std::vector<std::size_t>& levels,
                                                      const StateGrid& grid,
                                                      HjbDirection direction,
                                                      HjbOptions options);

// Bellman consistency: integrates the feedback control recorded in the field
// from (t, x, a) to r against the same driver, accumulating running costs,
// and compares v(t,x,a) with costs + v(r, X_r, gamma_r). The field must store
// every slice. States are clamped to the grid box.
double dpp_check(const ControlProblem& prob, const ValueField& field, const SampledPath& eta,
                 double t, const Eigen::VectorXd& x, const Eigen::VectorXd& a, double r);

}  // namespace roughctrl
