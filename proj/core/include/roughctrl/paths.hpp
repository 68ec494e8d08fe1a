#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace roughctrl {

// A path sampled on a strictly increasing time grid. Row i of values is the
// state at times[i]. The grid is part of the object's identity: all norms and
// integrals below are grid functionals (sup over partitions drawn from the
// grid), which for the piecewise-linear paths used throughout are exact.
class SampledPath {
public:
    SampledPath() = default;
    SampledPath(std::vector<double> times, Eigen::MatrixXd values);

    std::size_t size() const { return times_.size(); }
    Eigen::Index dim() const { return values_.cols(); }
    const std::vector<double>& times() const { return times_; }
    const Eigen::MatrixXd& values() const { return values_; }
    double time(std::size_t i) const { return times_[i]; }
    Eigen::VectorXd value(std::size_t i) const { return values_.row(i).transpose(); }

    Eigen::VectorXd increment(std::size_t i, std::size_t j) const {
        return (values_.row(j) - values_.row(i)).transpose();
    }

    // index of a grid time; throws if t is not a grid point
    std::size_t index_of(double t) const;

    // linear interpolation; t clamped to [t0, tN]
    Eigen::VectorXd interpolate(double t) const;

    // restriction to the closed index range [i, j]
    SampledPath segment(std::size_t i, std::size_t j) const;

    // keep every stride-th node (always keeps the last one)
    SampledPath subsample(std::size_t stride) const;

private:
    std::vector<double> times_;
    Eigen::MatrixXd values_;
};

enum class CompositionRule { Additive, Chen };

// Two-parameter increments A_{s,t} on a grid, stored per step. Values over
// larger intervals are materialized through the composition rule:
//   Additive: A_{s,t} = A_{s,r} + A_{r,t}
//   Chen:     A_{s,t} = A_{s,r} + A_{r,t} + first_{s,r} (x) first_{r,t}
// Chen composition needs the first-level path, supplied at construction.
// Entries are matrices; vector-valued entries use column matrices.
class TwoParamIncrements {
public:
    TwoParamIncrements() = default;
    TwoParamIncrements(std::vector<double> times,
                       std::vector<Eigen::MatrixXd> step_entries,
                       CompositionRule rule,
                       Eigen::MatrixXd first_level = {});

    std::size_t size() const { return times_.size(); }
    const std::vector<double>& times() const { return times_; }
    CompositionRule rule() const { return rule_; }
    const std::vector<Eigen::MatrixXd>& steps() const { return steps_; }
    const Eigen::MatrixXd& step(std::size_t i) const { return steps_[i]; }

    // composed increment over [times[i], times[j]], i <= j
    Eigen::MatrixXd composed(std::size_t i, std::size_t j) const;

    std::size_t index_of(double t) const;

private:
    std::vector<double> times_;
    std::vector<Eigen::MatrixXd> steps_;
    CompositionRule rule_ = CompositionRule::Additive;
    Eigen::MatrixXd first_;                 // n x d, Chen rule only
    std::vector<Eigen::MatrixXd> prefix_;   // A_{0,i}, precomputed
};

// p-variation over the grid restricted to index range [lo, hi]:
//   ( sup over partitions of sum |increment|^p )^(1/p),
// computed exactly by dynamic programming over grid pairs. Requires p >= 1.
double p_variation(const SampledPath& path, double p, std::size_t lo, std::size_t hi);
double p_variation(const SampledPath& path, double p);
double p_variation(const TwoParamIncrements& inc, double p, std::size_t lo, std::size_t hi);
double p_variation(const TwoParamIncrements& inc, double p);

// exhaustive check over all 2^(n-2) partitions; n <= 16
double p_variation_bruteforce(const SampledPath& path, double p);

// sup over grid pairs of |increment_{s,t}| / (t-s)^exponent; needs >= 2 nodes
double holder_norm(const SampledPath& path, double exponent);
double holder_norm(const TwoParamIncrements& inc, double exponent);

struct PasteCheck {
    double lhs;  // ||X||_p over the whole grid
    double rhs;  // n * (sum_i ||X||_p^p over the i-th block)^(1/p)
};

// Verifies the pasting bound ||X||_p <= n (sum_i ||X||_{p,block_i}^p)^{1/p}
// for the partition of the grid at the given interior breakpoint indices.
PasteCheck partition_paste_check(const SampledPath& path, double p,
                                 const std::vector<std::size_t>& breakpoints);

}  // namespace roughctrl
