#include "roughctrl/hjb.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace roughctrl {

namespace {

std::size_t worker_count() {
    const char* env = std::getenv("ROUGHCTRL_THREADS");
    if (!env) return 1;
    const long v = std::atol(env);
    if (v < 1) return 1;
    return std::min<long>(v, 64);
}

// pure per-index map over [0, n); chunks are disjoint so any worker count
// produces identical results
template <typename F>
void parallel_for(std::size_t n, F&& body) {
    const std::size_t nt = std::min(worker_count(), std::max<std::size_t>(n / 1024, 1));
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (std::size_t w = 0; w < nt; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

bool is_sentinel(double v) { return std::abs(v) >= 0.5 * kCostSentinel; }

double clamp_value(double v) {
    return std::clamp(v, -kCostSentinel, kCostSentinel);
}

}  // namespace

StateGrid::StateGrid(std::vector<std::vector<double>> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) throw std::invalid_argument("state grid: no axes");
    for (const auto& ax : axes_) {
        if (ax.size() < 2) throw std::invalid_argument("state grid: axis needs >= 2 nodes");
        for (std::size_t i = 1; i < ax.size(); ++i)
            if (!(ax[i] > ax[i - 1]))
                throw std::invalid_argument("state grid: axis not strictly increasing");
    }
    strides_.assign(axes_.size(), 1);
    for (std::size_t i = axes_.size(); i-- > 1;)
        strides_[i - 1] = strides_[i] * axes_[i].size();
    num_nodes_ = strides_[0] * axes_[0].size();
}

Eigen::VectorXd StateGrid::coords(std::size_t node) const {
    Eigen::VectorXd c(axes_.size());
    for (std::size_t ax = 0; ax < axes_.size(); ++ax)
        c[ax] = axes_[ax][axis_index(node, ax)];
    return c;
}

void StateGrid::interpolation_stencil(const Eigen::VectorXd& point,
                                      std::vector<std::size_t>& nodes,
                                      std::vector<double>& weights) const {
    const std::size_t na = axes_.size();
    if (static_cast<std::size_t>(point.size()) != na)
        throw std::invalid_argument("state grid: point dimension mismatch");
    std::vector<std::size_t> lo(na);
    std::vector<double> w(na);
    for (std::size_t ax = 0; ax < na; ++ax) {
        const auto& xs = axes_[ax];
        double v = std::clamp(point[ax], xs.front(), xs.back());
        auto it = std::upper_bound(xs.begin(), xs.end(), v);
        std::size_t j = std::min<std::size_t>(
            std::max<std::ptrdiff_t>(it - xs.begin() - 1, 0), xs.size() - 2);
        lo[ax] = j;
        w[ax] = (v - xs[j]) / (xs[j + 1] - xs[j]);
    }
    nodes.clear();
    weights.clear();
    const std::size_t corners = std::size_t{1} << na;
    for (std::size_t mask = 0; mask < corners; ++mask) {
        std::size_t node = 0;
        double weight = 1.0;
        for (std::size_t ax = 0; ax < na; ++ax) {
            const bool hi = mask & (std::size_t{1} << ax);
            node += (lo[ax] + (hi ? 1 : 0)) * strides_[ax];
            weight *= hi ? w[ax] : 1.0 - w[ax];
        }
        nodes.push_back(node);
        weights.push_back(weight);
    }
}

StateGrid parse_state_grid(const std::string& desc, std::vector<std::string>* names) {
    std::vector<std::vector<double>> axes;
    if (names) names->clear();
    std::stringstream ss(desc);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("grid spec: expected name=lo:hi:count in '" + part + "'");
        const std::string name = part.substr(0, eq);
        const std::string rng = part.substr(eq + 1);
        double lo, hi;
        long count;
        char c1, c2;
        std::stringstream rs(rng);
        if (!(rs >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' || count < 2)
            throw std::invalid_argument("grid spec: bad range '" + rng + "'");
        std::vector<double> ax(count);
        for (long i = 0; i < count; ++i)
            ax[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
        axes.push_back(std::move(ax));
        if (names) names->push_back(name);
    }
    return StateGrid(std::move(axes));
}

std::vector<Eigen::VectorXd> control_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                         const std::vector<std::size_t>& counts) {
    const std::size_t k = counts.size();
    if (lo.size() != static_cast<Eigen::Index>(k) || hi.size() != static_cast<Eigen::Index>(k))
        throw std::invalid_argument("control box: dimension mismatch");
    std::size_t total = 1;
    for (std::size_t c : counts) {
        if (c < 1) throw std::invalid_argument("control box: counts must be >= 1");
        total *= c;
    }
    std::vector<Eigen::VectorXd> out;
    out.reserve(total);
    std::vector<std::size_t> idx(k, 0);
    for (std::size_t n = 0; n < total; ++n) {
        Eigen::VectorXd u(k);
        for (std::size_t j = 0; j < k; ++j) {
            u[j] = counts[j] == 1
                       ? lo[j]
                       : lo[j] + (hi[j] - lo[j]) * static_cast<double>(idx[j]) /
                             static_cast<double>(counts[j] - 1);
        }
        out.push_back(std::move(u));
        for (std::size_t j = k; j-- > 0;) {
            if (++idx[j] < counts[j]) break;
            idx[j] = 0;
        }
    }
    return out;
}

std::size_t ValueField::slice_index(double t) const {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end()) return times.size() - 1;
    if (it == times.begin()) return 0;
    const std::size_t j = static_cast<std::size_t>(it - times.begin());
    return (t - times[j - 1] < times[j] - t) ? j - 1 : j;
}

double ValueField::value_at(std::size_t slice, const Eigen::VectorXd& state) const {
    std::vector<std::size_t> nodes;
    std::vector<double> weights;
    grid.interpolation_stencil(state, nodes, weights);
    double v = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double val = values[slice][nodes[i]];
        if (weights[i] > 1e-12 && is_sentinel(val)) return kCostSentinel;
        v += weights[i] * val;
    }
    return v;
}

double ValueField::value_interp(double t, const Eigen::VectorXd& state) const {
    if (t <= times.front()) return value_at(0, state);
    if (t >= times.back()) return value_at(times.size() - 1, state);
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - times.begin());
    const double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
    const double a = value_at(j - 1, state);
    const double b = value_at(j, state);
    if (is_sentinel(a) || is_sentinel(b)) return kCostSentinel;
    return (1.0 - w) * a + w * b;
}

std::uint16_t ValueField::control_at(std::size_t slice, const Eigen::VectorXd& state) const {
    std::size_t node = 0;
    for (std::size_t ax = 0; ax < grid.num_axes(); ++ax) {
        const auto& xs = grid.axis(ax);
        const double v = std::clamp(state[ax], xs.front(), xs.back());
        auto it = std::upper_bound(xs.begin(), xs.end(), v);
        std::size_t j = std::min<std::size_t>(
            std::max<std::ptrdiff_t>(it - xs.begin() - 1, 0), xs.size() - 2);
        if (v - xs[j] > xs[j + 1] - v) ++j;
        node += j * grid.strides()[ax];
    }
    return best_control[slice][node];
}

ValueField ValueField::negated() const {
    ValueField out = *this;
    for (auto& slice : out.values) slice = -slice;
    return out;
}

namespace {

struct SolverCaches {
    Eigen::MatrixXd coords;   // nodes x (m+k)
    Eigen::MatrixXd b;        // nodes x m
    Eigen::MatrixXd lam;      // nodes x (m*d)
    Eigen::MatrixXd psi;      // nodes x d
    Eigen::MatrixXd f;        // nodes x nu
    std::vector<Eigen::MatrixXd> h;  // per u: a_nodes x k
    std::size_t na_prod = 1;
};

}  // namespace

ValueField solve_hjb_smooth(const ControlProblem& prob, const SampledPath& eta, double t0,
                            double t1, const StateGrid& grid, HjbDirection direction,
                            const HjbOptions& options) {
    const Eigen::Index m = prob.dyn.m;
    const Eigen::Index k = prob.dyn.k;
    const Eigen::Index d = prob.dyn.d;
    if (!(t1 > t0)) throw std::invalid_argument("hjb: empty time interval");
    if (grid.num_axes() != static_cast<std::size_t>(m + k))
        throw std::invalid_argument("hjb: grid must have m + k axes");
    if (eta.dim() != d) throw std::invalid_argument("hjb: driver dimension mismatch");
    if (prob.control_set.empty()) throw std::invalid_argument("hjb: empty control set");
    if (prob.control_set.size() > 65535) throw std::invalid_argument("hjb: control set too large");

    const std::size_t nodes = grid.num_nodes();
    const std::size_t nu = prob.control_set.size();

    SolverCaches cache;
    cache.na_prod = 1;
    for (Eigen::Index j = 0; j < k; ++j) cache.na_prod *= grid.axis(m + j).size();
    cache.coords.resize(nodes, m + k);
    cache.b.resize(nodes, m);
    cache.lam.resize(nodes, m * d);
    cache.psi.resize(nodes, d);
    cache.f.resize(nodes, nu);
    parallel_for(nodes, [&](std::size_t n) {
        const Eigen::VectorXd c = grid.coords(n);
        cache.coords.row(n) = c.transpose();
        const Eigen::VectorXd x = c.head(m);
        const Eigen::VectorXd a = c.tail(k);
        cache.b.row(n) = prob.dyn.b(x, a).transpose();
        const Eigen::MatrixXd lam = prob.dyn.lambda(x, a);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index c2 = 0; c2 < d; ++c2) cache.lam(n, i * d + c2) = lam(i, c2);
        cache.psi.row(n) = prob.psi.value(x, a).row(0);
        for (std::size_t uu = 0; uu < nu; ++uu)
            cache.f(n, uu) = prob.f(x, a, prob.control_set[uu]);
    });
    cache.h.resize(nu);
    for (std::size_t uu = 0; uu < nu; ++uu) {
        cache.h[uu].resize(cache.na_prod, k);
        for (std::size_t an = 0; an < cache.na_prod; ++an) {
            // a-axes are the fastest-varying block, so flat index an addresses them directly
            const Eigen::VectorXd a = grid.coords(an).tail(k);
            cache.h[uu].row(an) = prob.h(a, prob.control_set[uu]).transpose();
        }
    }

    // CFL bound: per-axis max advection speed; etadot bounded by the steepest
    // segment of eta (interpolated increments average segment slopes)
    Eigen::VectorXd etadot_max = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i + 1 < eta.size(); ++i) {
        const double dt = eta.times()[i + 1] - eta.times()[i];
        const Eigen::VectorXd sl = eta.increment(i, i + 1).cwiseAbs() / dt;
        etadot_max = etadot_max.cwiseMax(sl);
    }
    std::vector<double> min_dx(grid.num_axes());
    for (std::size_t ax = 0; ax < grid.num_axes(); ++ax) {
        double md = std::numeric_limits<double>::max();
        for (std::size_t i = 0; i + 1 < grid.axis(ax).size(); ++i)
            md = std::min(md, grid.axis(ax)[i + 1] - grid.axis(ax)[i]);
        min_dx[ax] = md;
    }
    // monotonicity of the explicit update needs the summed Courant number
    // over all axes <= 1 at every node, not a per-axis bound: nodes fast on
    // several axes at once otherwise flip the sign of their own-value weight
    std::vector<double> a_block(cache.na_prod, 0.0);
    for (std::size_t an = 0; an < cache.na_prod; ++an) {
        for (std::size_t uu = 0; uu < nu; ++uu) {
            double s = 0.0;
            for (Eigen::Index j = 0; j < k; ++j)
                s += std::abs(cache.h[uu](an, j)) / min_dx[m + j];
            a_block[an] = std::max(a_block[an], s);
        }
    }
    double worst = 0.0;
    for (std::size_t n = 0; n < nodes; ++n) {
        double s = a_block[n % cache.na_prod];
        for (Eigen::Index i = 0; i < m; ++i) {
            double c = std::abs(cache.b(n, i));
            for (Eigen::Index cc = 0; cc < d; ++cc)
                c += std::abs(cache.lam(n, i * d + cc)) * etadot_max[cc];
            s += c / min_dx[i];
        }
        worst = std::max(worst, s);
    }
    double dt_max = std::numeric_limits<double>::max();
    if (worst > 0.0) dt_max = options.cfl_safety / worst;

    const double horizon = t1 - t0;
    std::size_t n_steps = options.n_steps;
    const std::size_t cfl_steps =
        dt_max == std::numeric_limits<double>::max()
            ? 1
            : static_cast<std::size_t>(std::ceil(horizon / dt_max));
    if (n_steps == 0) {
        n_steps = std::max<std::size_t>(cfl_steps, 1);
    } else if (horizon / static_cast<double>(n_steps) > dt_max) {
        if (options.auto_refine) {
            n_steps = cfl_steps;
        } else {
            throw CflError("hjb: time step violates CFL bound; use at least " +
                               std::to_string(cfl_steps) + " steps",
                           cfl_steps);
        }
    }
    const double dt = horizon / static_cast<double>(n_steps);

    // stored slice bookkeeping
    const std::size_t stride = std::max<std::size_t>(options.store_stride, 1);
    std::vector<std::size_t> stored;  // time-step indices kept
    for (std::size_t n = 0; n <= n_steps; n += stride) stored.push_back(n);
    if (stored.back() != n_steps) stored.push_back(n_steps);
    std::vector<std::ptrdiff_t> stored_pos(n_steps + 1, -1);
    for (std::size_t s = 0; s < stored.size(); ++s) stored_pos[stored[s]] = s;

    ValueField field;
    field.grid = grid;
    field.direction = direction;
    field.control_set = prob.control_set;
    field.total_steps = n_steps;
    field.times.resize(stored.size());
    for (std::size_t s = 0; s < stored.size(); ++s)
        field.times[s] = t0 + dt * static_cast<double>(stored[s]);
    field.values.assign(stored.size(), Eigen::VectorXd::Zero(nodes));
    field.best_control.assign(stored.size(), std::vector<std::uint16_t>(nodes, 0));

    // boundary condition slice
    Eigen::VectorXd cur(nodes);
    parallel_for(nodes, [&](std::size_t n) {
        const Eigen::VectorXd x = cache.coords.row(n).head(m).transpose();
        const Eigen::VectorXd a = cache.coords.row(n).tail(k).transpose();
        cur[n] = clamp_value(prob.g(x, a));
    });

    const bool backward = direction == HjbDirection::BackwardTerminal;
    {
        const std::size_t bc_step = backward ? n_steps : 0;
        field.values[stored_pos[bc_step]] = cur;
    }

    std::vector<char> pad_lo(grid.num_axes(), 0), pad_hi(grid.num_axes(), 0);
    for (int ax : options.pad_lower) pad_lo.at(ax) = 1;
    for (int ax : options.pad_upper) pad_hi.at(ax) = 1;

    // upwind one-sided difference on an axis; falls back to the into-domain
    // side at unpadded boundaries
    const double updir = backward ? 1.0 : -1.0;
    auto diff_on_axis = [&](const Eigen::VectorXd& v, std::size_t node, std::size_t ax,
                            double coef) -> double {
        const auto& xs = grid.axis(ax);
        const std::size_t i = grid.axis_index(node, ax);
        const std::size_t s = grid.strides()[ax];
        const bool want_forward = coef * updir > 0.0;
        if (want_forward) {
            if (i + 1 < xs.size()) return (v[node + s] - v[node]) / (xs[i + 1] - xs[i]);
            if (pad_hi[ax]) return (options.pad_value - v[node]) / (xs[i] - xs[i - 1]);
            return (v[node] - v[node - s]) / (xs[i] - xs[i - 1]);
        }
        if (i > 0) return (v[node] - v[node - s]) / (xs[i] - xs[i - 1]);
        if (pad_lo[ax]) return (v[node] - options.pad_value) / (xs[i + 1] - xs[i]);
        return (v[node + s] - v[node]) / (xs[i + 1] - xs[i]);
    };

    Eigen::VectorXd nxt(nodes);
    std::vector<std::uint16_t> ctrl(nodes, 0);
    std::atomic<bool> saw_nan{false};

    for (std::size_t step = 0; step < n_steps; ++step) {
        // backward marches n_steps-1-step -> produced slice index; forward marches step -> step+1
        const std::size_t produced = backward ? n_steps - 1 - step : step + 1;
        const double ta = t0 + dt * static_cast<double>(backward ? produced : step);
        const double tb = ta + dt;
        const Eigen::VectorXd etadot = (eta.interpolate(tb) - eta.interpolate(ta)) / dt;

        parallel_for(nodes, [&](std::size_t n) {
            const double own = cur[n];
            if (is_sentinel(own)) {
                nxt[n] = own;
                ctrl[n] = 0;
                return;
            }
            // x-advection with combined coefficient b + lambda etadot
            double adv = 0.0;
            for (Eigen::Index i = 0; i < m; ++i) {
                double coef = cache.b(n, i);
                for (Eigen::Index c = 0; c < d; ++c)
                    coef += cache.lam(n, i * d + c) * etadot[c];
                if (coef != 0.0) adv += coef * diff_on_axis(cur, n, i, coef);
            }
            // control optimization over the a-axes
            const std::size_t an = n % cache.na_prod;
            double best_val = 0.0;
            std::uint16_t best_u = 0;
            bool first = true;
            for (std::size_t uu = 0; uu < nu; ++uu) {
                double s = 0.0;
                for (Eigen::Index j = 0; j < k; ++j) {
                    const double hj = cache.h[uu](an, j);
                    if (hj != 0.0) s += hj * diff_on_axis(cur, n, m + j, hj);
                }
                const double cand = backward ? s + cache.f(n, uu) : s - cache.f(n, uu);
                const bool better = backward ? cand < best_val : cand > best_val;
                if (first || better) {
                    best_val = cand;
                    best_u = static_cast<std::uint16_t>(uu);
                    first = false;
                }
            }
            double source = 0.0;
            for (Eigen::Index c = 0; c < d; ++c) source += cache.psi(n, c) * etadot[c];
            if (!backward) source = -source;

            const double rhs = adv + best_val + source;
            const double out = backward ? own + dt * rhs : own - dt * rhs;
            if (std::isnan(out)) saw_nan.store(true, std::memory_order_relaxed);
            nxt[n] = clamp_value(out);
            ctrl[n] = best_u;
        });
        if (saw_nan.load()) throw std::runtime_error("hjb: NaN value produced");

        cur.swap(nxt);
        // decision time: produced slice in backward mode, known slice in forward mode
        const std::size_t decision = backward ? produced : step;
        if (stored_pos[decision] >= 0) field.best_control[stored_pos[decision]] = ctrl;
        if (stored_pos[produced] >= 0) field.values[stored_pos[produced]] = cur;
    }
    return field;
}

std::pair<ValueField, RoughHjbReport> solve_rough_hjb(const ControlProblem& prob,
                                                      const RoughPath& rp,
                                                      const std::vector<std::size_t>& levels,
                                                      const StateGrid& grid,
                                                      HjbDirection direction,
                                                      HjbOptions options) {
    if (!rp.geometric())
        throw std::invalid_argument("rough hjb: driver must be a geometric rough path");
    if (levels.empty()) throw std::invalid_argument("rough hjb: no mollification levels");

    RoughHjbReport report;
    const double t0 = rp.times().front();
    const double t1 = rp.times().back();
    std::vector<ValueField> fields;
    for (std::size_t level : levels) {
        const std::size_t segs = rp.size() - 1;
        const std::size_t stride = std::max<std::size_t>(1, segs / std::max<std::size_t>(level, 1));
        const SampledPath eta = rp.first().subsample(stride);
        ValueField f = solve_hjb_smooth(prob, eta, t0, t1, grid, direction, options);
        report.levels.push_back(level);
        report.tsteps.push_back(f.total_steps);
        fields.push_back(std::move(f));
    }

    // interior sup-difference at 21 uniform comparison times
    std::vector<std::size_t> interior;
    for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
        bool in = true;
        for (std::size_t ax = 0; ax < grid.num_axes(); ++ax) {
            const std::size_t i = grid.axis_index(n, ax);
            if (i == 0 || i + 1 == grid.axis(ax).size()) {
                in = false;
                break;
            }
        }
        if (in) interior.push_back(n);
    }
    for (std::size_t l = 0; l + 1 < fields.size(); ++l) {
        double sup = 0.0;
        for (int ti = 0; ti <= 20; ++ti) {
            const double t = t0 + (t1 - t0) * ti / 20.0;
            for (std::size_t n : interior) {
                const Eigen::VectorXd c = grid.coords(n);
                const double a = fields[l].value_interp(t, c);
                const double b = fields[l + 1].value_interp(t, c);
                if (is_sentinel(a) || is_sentinel(b)) continue;
                sup = std::max(sup, std::abs(a - b));
            }
        }
        report.sup_diffs.push_back(sup);
    }
    report.cauchy_ok = true;
    for (std::size_t i = 0; i + 1 < report.sup_diffs.size(); ++i)
        if (report.sup_diffs[i + 1] > 2.0 * report.sup_diffs[i] + 1e-12)
            report.cauchy_ok = false;

    return {std::move(fields.back()), std::move(report)};
}

double dpp_check(const ControlProblem& prob, const ValueField& field, const SampledPath& eta,
                 double t, const Eigen::VectorXd& x0, const Eigen::VectorXd& a0, double r) {
    if (field.total_steps + 1 != field.times.size())
        throw std::invalid_argument("dpp check: field must store every slice");
    if (r < t) throw std::invalid_argument("dpp check: r must be >= t");
    const std::size_t it = field.slice_index(t);
    const std::size_t ir = field.slice_index(r);
    const Eigen::Index m = prob.dyn.m, k = prob.dyn.k;

    Eigen::VectorXd x = x0, a = a0;
    auto clamp_state = [&](Eigen::VectorXd& xs, Eigen::VectorXd& as) {
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto& ax = field.grid.axis(i);
            xs[i] = std::clamp(xs[i], ax.front(), ax.back());
        }
        for (Eigen::Index j = 0; j < k; ++j) {
            const auto& ax = field.grid.axis(m + j);
            as[j] = std::clamp(as[j], ax.front(), ax.back());
        }
    };
    clamp_state(x, a);
    Eigen::VectorXd state(m + k);
    state << x, a;
    const double v_start = field.value_at(it, state);

    double cost = 0.0;
    for (std::size_t n = it; n < ir; ++n) {
        state << x, a;
        const Eigen::VectorXd u = field.control_set[field.control_at(n, state)];
        const double dt = field.times[n + 1] - field.times[n];
        const Eigen::VectorXd dz =
            eta.interpolate(field.times[n + 1]) - eta.interpolate(field.times[n]);
        cost += prob.f(x, a, u) * dt + (prob.psi.value(x, a) * dz)(0, 0);
        // one-step scheme against the segment lift (second level = 0.5 dz dz^T)
        const Eigen::MatrixXd lam = prob.dyn.lambda(x, a);
        const Eigen::MatrixXd comp = prob.dyn.dx_lambda(x, a) * lam;
        Eigen::VectorXd xn = x + prob.dyn.b(x, a) * dt + lam * dz;
        const Eigen::MatrixXd z2 = 0.5 * dz * dz.transpose();
        for (Eigen::Index rr = 0; rr < m; ++rr) {
            double s = 0.0;
            for (Eigen::Index c = 0; c < prob.dyn.d; ++c)
                for (Eigen::Index b = 0; b < prob.dyn.d; ++b)
                    s += comp(rr * prob.dyn.d + c, b) * z2(b, c);
            xn[rr] += s;
        }
        x = xn;
        a += prob.h(a, u) * dt;
        clamp_state(x, a);
    }
    state << x, a;
    const double v_end = field.value_at(ir, state);
    return std::abs(v_start - (cost + v_end));
}

}  // namespace roughctrl
