#include "roughctrl/paths.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace roughctrl {

namespace {

void check_grid(const std::vector<double>& times) {
    if (times.empty()) throw std::invalid_argument("path: empty time grid");
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("path: times must be strictly increasing");
    }
}

std::size_t locate(const std::vector<double>& times, double t) {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    const double tol = 1e-12 * std::max(1.0, std::abs(t));
    if (it != times.end() && std::abs(*it - t) <= tol)
        return static_cast<std::size_t>(it - times.begin());
    if (it != times.begin() && std::abs(*(it - 1) - t) <= tol)
        return static_cast<std::size_t>(it - times.begin()) - 1;
    throw std::invalid_argument("time " + std::to_string(t) + " is not a grid point");
}

}  // namespace

SampledPath::SampledPath(std::vector<double> times, Eigen::MatrixXd values)
    : times_(std::move(times)), values_(std::move(values)) {
    check_grid(times_);
    if (static_cast<Eigen::Index>(times_.size()) != values_.rows())
        throw std::invalid_argument("path: times/values length mismatch");
    if (values_.cols() < 1) throw std::invalid_argument("path: dimension must be positive");
}

std::size_t SampledPath::index_of(double t) const { return locate(times_, t); }

Eigen::VectorXd SampledPath::interpolate(double t) const {
    if (t <= times_.front()) return value(0);
    if (t >= times_.back()) return value(size() - 1);
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - times_.begin());
    const double t0 = times_[j - 1], t1 = times_[j];
    const double w = (t - t0) / (t1 - t0);
    return ((1.0 - w) * values_.row(j - 1) + w * values_.row(j)).transpose();
}

SampledPath SampledPath::segment(std::size_t i, std::size_t j) const {
    if (i > j || j >= size()) throw std::invalid_argument("path: bad segment range");
    std::vector<double> t(times_.begin() + i, times_.begin() + j + 1);
    return SampledPath(std::move(t), values_.middleRows(i, j - i + 1));
}

SampledPath SampledPath::subsample(std::size_t stride) const {
    if (stride == 0) throw std::invalid_argument("path: zero stride");
    std::vector<double> t;
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < size(); i += stride) {
        t.push_back(times_[i]);
        rows.push_back(static_cast<Eigen::Index>(i));
    }
    if (rows.back() != static_cast<Eigen::Index>(size() - 1)) {
        t.push_back(times_.back());
        rows.push_back(static_cast<Eigen::Index>(size() - 1));
    }
    Eigen::MatrixXd v(rows.size(), dim());
    for (std::size_t r = 0; r < rows.size(); ++r) v.row(r) = values_.row(rows[r]);
    return SampledPath(std::move(t), std::move(v));
}

TwoParamIncrements::TwoParamIncrements(std::vector<double> times,
                                       std::vector<Eigen::MatrixXd> step_entries,
                                       CompositionRule rule, Eigen::MatrixXd first_level)
    : times_(std::move(times)), steps_(std::move(step_entries)), rule_(rule),
      first_(std::move(first_level)) {
    check_grid(times_);
    if (steps_.size() + 1 != times_.size())
        throw std::invalid_argument("two-param: entries count must be grid length - 1");
    for (const auto& s : steps_) {
        if (s.rows() != steps_[0].rows() || s.cols() != steps_[0].cols())
            throw std::invalid_argument("two-param: inconsistent entry shapes");
        if (!s.allFinite()) throw std::invalid_argument("two-param: non-finite entry");
    }
    if (rule_ == CompositionRule::Chen) {
        if (first_.rows() != static_cast<Eigen::Index>(times_.size()))
            throw std::invalid_argument("two-param: Chen rule needs the first level on the same grid");
        if (steps_[0].rows() != first_.cols() || steps_[0].cols() != first_.cols())
            throw std::invalid_argument("two-param: Chen entries must be d x d");
    }
    // prefix A_{0,i}; A_{0,0} = 0
    prefix_.resize(times_.size());
    prefix_[0] = Eigen::MatrixXd::Zero(steps_[0].rows(), steps_[0].cols());
    for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
        prefix_[i + 1] = prefix_[i] + steps_[i];
        if (rule_ == CompositionRule::Chen) {
            const Eigen::RowVectorXd a = first_.row(i) - first_.row(0);
            const Eigen::RowVectorXd b = first_.row(i + 1) - first_.row(i);
            prefix_[i + 1] += a.transpose() * b;
        }
    }
}

Eigen::MatrixXd TwoParamIncrements::composed(std::size_t i, std::size_t j) const {
    if (i > j || j >= times_.size()) throw std::invalid_argument("two-param: bad index pair");
    if (rule_ == CompositionRule::Additive) return prefix_[j] - prefix_[i];
    // Chen: A_{0,j} = A_{0,i} + A_{i,j} + z_{0,i} (x) z_{i,j}
    const Eigen::RowVectorXd z0i = first_.row(i) - first_.row(0);
    const Eigen::RowVectorXd zij = first_.row(j) - first_.row(i);
    return prefix_[j] - prefix_[i] - z0i.transpose() * zij;
}

std::size_t TwoParamIncrements::index_of(double t) const { return locate(times_, t); }

namespace {

// DP over grid pairs: V(j) = max_{i<j} V(i) + |inc(i,j)|^p. Exact on the grid.
template <typename IncNorm>
double pvar_dp(std::size_t lo, std::size_t hi, double p, IncNorm&& inc_norm) {
    if (p < 1.0) throw std::invalid_argument("p-variation: p must be >= 1");
    if (hi <= lo) return 0.0;
    const std::size_t n = hi - lo + 1;
    std::vector<double> best(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
        double v = 0.0;
        for (std::size_t i = 0; i < j; ++i) {
            const double cand = best[i] + std::pow(inc_norm(lo + i, lo + j), p);
            if (cand > v) v = cand;
        }
        best[j] = v;
    }
    return std::pow(best[n - 1], 1.0 / p);
}

}  // namespace

double p_variation(const SampledPath& path, double p, std::size_t lo, std::size_t hi) {
    if (hi >= path.size()) throw std::invalid_argument("p-variation: index out of range");
    return pvar_dp(lo, hi, p,
                   [&](std::size_t i, std::size_t j) { return path.increment(i, j).norm(); });
}

double p_variation(const SampledPath& path, double p) {
    return p_variation(path, p, 0, path.size() - 1);
}

double p_variation(const TwoParamIncrements& inc, double p, std::size_t lo, std::size_t hi) {
    if (hi >= inc.size()) throw std::invalid_argument("p-variation: index out of range");
    return pvar_dp(lo, hi, p,
                   [&](std::size_t i, std::size_t j) { return inc.composed(i, j).norm(); });
}

double p_variation(const TwoParamIncrements& inc, double p) {
    return p_variation(inc, p, 0, inc.size() - 1);
}

double p_variation_bruteforce(const SampledPath& path, double p) {
    const std::size_t n = path.size();
    if (n > 16) throw std::invalid_argument("brute-force p-variation limited to 16 nodes");
    if (p < 1.0) throw std::invalid_argument("p-variation: p must be >= 1");
    if (n < 2) return 0.0;
    const std::size_t interior = n - 2;
    double best = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << interior); ++mask) {
        std::vector<std::size_t> pts;
        pts.push_back(0);
        for (std::size_t b = 0; b < interior; ++b)
            if (mask & (std::size_t{1} << b)) pts.push_back(b + 1);
        pts.push_back(n - 1);
        double sum = 0.0;
        for (std::size_t k = 0; k + 1 < pts.size(); ++k)
            sum += std::pow(path.increment(pts[k], pts[k + 1]).norm(), p);
        best = std::max(best, sum);
    }
    return std::pow(best, 1.0 / p);
}

namespace {

template <typename IncNorm>
double holder_max(const std::vector<double>& times, double exponent, IncNorm&& inc_norm) {
    if (times.size() < 2) throw std::invalid_argument("holder norm needs at least 2 nodes");
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        for (std::size_t j = i + 1; j < times.size(); ++j) {
            const double dt = times[j] - times[i];
            best = std::max(best, inc_norm(i, j) / std::pow(dt, exponent));
        }
    }
    return best;
}

}  // namespace

double holder_norm(const SampledPath& path, double exponent) {
    return holder_max(path.times(), exponent,
                      [&](std::size_t i, std::size_t j) { return path.increment(i, j).norm(); });
}

double holder_norm(const TwoParamIncrements& inc, double exponent) {
    return holder_max(inc.times(), exponent,
                      [&](std::size_t i, std::size_t j) { return inc.composed(i, j).norm(); });
}

PasteCheck partition_paste_check(const SampledPath& path, double p,
                                 const std::vector<std::size_t>& breakpoints) {
    for (std::size_t b : breakpoints) {
        if (b == 0 || b + 1 >= path.size())
            throw std::invalid_argument("paste check: breakpoints must be interior grid indices");
    }
    std::vector<std::size_t> cuts;
    cuts.push_back(0);
    cuts.insert(cuts.end(), breakpoints.begin(), breakpoints.end());
    cuts.push_back(path.size() - 1);
    for (std::size_t k = 1; k < cuts.size(); ++k)
        if (cuts[k] <= cuts[k - 1])
            throw std::invalid_argument("paste check: breakpoints must be increasing");

    PasteCheck out;
    out.lhs = p_variation(path, p);
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
        sum += std::pow(p_variation(path, p, cuts[k], cuts[k + 1]), p);
    const double n_blocks = static_cast<double>(cuts.size() - 1);
    out.rhs = n_blocks * std::pow(sum, 1.0 / p);
    return out;
}

}  // namespace roughctrl
