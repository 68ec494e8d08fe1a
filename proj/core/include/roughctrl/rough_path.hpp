#pragma once

#include <cstdint>
#include <map>

#include "roughctrl/paths.hpp"

namespace roughctrl {

// First level plus second level on a shared grid, p in [2,3). The second
// level is stored per step and composed through Chen's relation, so the
// relation holds by construction for every grid pair. Copies share identity
// (the object is immutable); identity ties controlled paths to their driver.
class RoughPath {
public:
    RoughPath(SampledPath first_level, std::vector<Eigen::MatrixXd> second_level_steps,
              bool geometric, double p);

    const SampledPath& first() const { return first_; }
    const TwoParamIncrements& second() const { return second_; }
    bool geometric() const { return geometric_; }
    double p() const { return p_; }
    std::uint64_t id() const { return id_; }

    std::size_t size() const { return first_.size(); }
    Eigen::Index dim() const { return first_.dim(); }
    const std::vector<double>& times() const { return first_.times(); }

    Eigen::VectorXd increment(std::size_t i, std::size_t j) const {
        return first_.increment(i, j);
    }
    Eigen::MatrixXd second_level(std::size_t i, std::size_t j) const {
        return second_.composed(i, j);
    }

    // max over grid pairs of |Sym(A_{s,t}) - 0.5 z_{s,t} (x) z_{s,t}|
    double geometric_symmetry_residual() const;

private:
    SampledPath first_;
    TwoParamIncrements second_;
    bool geometric_;
    double p_;
    std::uint64_t id_;
};

// Canonical lift of a piecewise-linear path: per-step second level
// 0.5 z_step (x) z_step; geometric by construction.
RoughPath lift_piecewise_linear(const SampledPath& path, double p = 2.5);

// Stratonovich lift of d-dimensional Brownian motion on [0,T]: simulate
// increments (variance dt), lift the piecewise-linear interpolation.
RoughPath lift_brownian(std::uint64_t seed, std::size_t n_steps, double T, Eigen::Index d,
                        double p = 2.5);

// Chen defect of a composition-stored lift. Step storage makes composition
// satisfy Chen's relation structurally, so this is exactly zero; nonzero
// values can only arise for externally supplied dense tables (below).
double chen_residual(const RoughPath& rp);

// Numeric Chen defect for an externally supplied dense two-parameter table:
// max over triples i<=j<=k of |A(i,k) - A(i,j) - A(j,k) - z_{i,j} (x) z_{j,k}|.
// Table keys are index pairs (i,j), i < j; missing pairs are skipped.
double chen_residual_table(const SampledPath& first_level,
                           const std::map<std::pair<std::size_t, std::size_t>, Eigen::MatrixXd>& table);

enum class MetricMode { PVariation, Holder };

// Inhomogeneous distance between lifts on a common grid:
//   pvar:   ||za - zb||_p + ||Aa - Ab||_{p/2}
//   holder: 1/p and 2/p Holder analogues.
// Second-level differences are composed per object first, then subtracted
// (the difference of two Chen objects is not itself a Chen object).
// Blind to constant shifts of the first level by construction.
double rough_metric(const RoughPath& a, const RoughPath& b, MetricMode mode);

}  // namespace roughctrl
