// Single-binary experiment driver. One subcommand per experiment; every run
// writes a manifest (inputs, seeds, resolved parameters, version) next to its
// outputs. Exit codes: 0 ok, 1 numerical failure, 2 config error.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "roughctrl/control_examples.hpp"
#include "roughctrl/expectation.hpp"
#include "roughctrl/io.hpp"
#include "roughctrl/rde.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace roughctrl;

namespace {

// config errors exit with status 2; anything else escaping a command body is
// treated as a numerical failure (status 1)
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_file(const std::string& path) {
    if (!fs::exists(path)) throw ConfigError("missing input file: " + path);
}

// input parsing failures are config errors, not numerical ones
template <typename F>
auto read_input(const std::string& what, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

std::vector<double> parse_doubles(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(what + ": cannot parse '" + item + "' as a number");
        }
    }
    if (out.empty()) throw ConfigError(what + ": empty list");
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s, const std::string& what) {
    std::vector<std::size_t> out;
    for (double v : parse_doubles(s, what)) {
        if (v < 1.0 || v != std::floor(v)) throw ConfigError(what + ": expected positive integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

Eigen::VectorXd parse_vector(const std::string& s, const std::string& what) {
    const std::vector<double> v = parse_doubles(s, what);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// manifest.json lands in the directory of the first output
void emit_manifest(const std::string& command,
                   const std::vector<std::pair<std::string, std::string>>& params,
                   const std::vector<std::string>& outputs) {
    fs::path dir = outputs.empty() ? fs::path(".") : fs::path(outputs.front()).parent_path();
    if (dir.empty()) dir = ".";
    write_manifest((dir / "manifest.json").string(), command, params, outputs);
}

void write_json_report(const std::string& file, const json& j) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open output file: " + file);
    out << j.dump(2) << '\n';
}

// numeric table with explicit header, 17-digit cells
void write_table_csv(const std::string& file, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open output file: " + file);
    for (std::size_t i = 0; i < columns.size(); ++i)
        out << (i ? "," : "") << columns[i];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_float(row[i]);
        out << '\n';
    }
}

std::string sibling(const std::string& file, const std::string& suffix) {
    fs::path p(file);
    fs::path dir = p.parent_path();
    fs::path name = p.stem();
    name += suffix;
    return (dir / name).string();
}

SampledPath constant_gamma(const RoughPath& rp, const Eigen::VectorXd& value) {
    Eigen::MatrixXd vals(static_cast<Eigen::Index>(rp.times().size()), value.size());
    vals.rowwise() = value.transpose();
    return SampledPath(rp.times(), std::move(vals));
}

ControlledDynamics load_dynamics(const std::string& arg, Eigen::Index d) {
    std::string name = arg;
    if (arg.size() > 5 && arg.substr(arg.size() - 5) == ".json") {
        require_file(arg);
        return read_input("dynamics config " + arg, [&] {
            std::ifstream in(arg);
            json j = json::parse(in);
            const std::string builtin = j.at("builtin").get<std::string>();
            const Eigen::Index dd = j.value("d", static_cast<int>(d));
            return builtin_dynamics(builtin, dd);
        });
    }
    try {
        return builtin_dynamics(name, d);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

// ------------------------------------------------------------------ lift

struct LiftOpts {
    std::string input, output = "lift.json";
    bool brownian = false;
    std::uint64_t seed = 42;
    std::size_t steps = 1024;
    int dim = 1;
    double horizon = 1.0;
    double p = 2.5;
};

int cmd_lift(const LiftOpts& o) {
    RoughPath rp = [&] {
        if (o.brownian) {
            if (!o.input.empty())
                throw ConfigError("lift: --input and --brownian are mutually exclusive");
            return lift_brownian(o.seed, o.steps, o.horizon, o.dim, o.p);
        }
        if (o.input.empty()) throw ConfigError("lift: need --input or --brownian");
        require_file(o.input);
        const SampledPath path =
            read_input("path file " + o.input, [&] { return read_path_csv(o.input); });
        return lift_piecewise_linear(path, o.p);
    }();
    write_lift_json(o.output, rp);
    emit_manifest("lift",
                  {{"mode", o.brownian ? "brownian" : "csv"},
                   {"input", o.input},
                   {"seed", std::to_string(o.seed)},
                   {"steps", std::to_string(o.steps)},
                   {"dim", std::to_string(o.dim)},
                   {"horizon", format_float(o.horizon)},
                   {"p", format_float(o.p)}},
                  {o.output});
    std::cout << "lift: " << rp.times().size() << " nodes, d=" << rp.first().values().cols()
              << ", p=" << format_float(rp.p()) << " -> " << o.output << '\n';
    return 0;
}

// ------------------------------------------------------------- chen-check

struct ChenOpts {
    std::string lift, out = "chen_check.json";
    double tol = 1e-9;
};

int cmd_chen_check(const ChenOpts& o) {
    require_file(o.lift);
    const RoughPath rp =
        read_input("lift file " + o.lift, [&] { return read_lift_json(o.lift); });

    const double structural = chen_residual(rp);

    // dense cross-check on a coarse sub-grid (the full table is cubic in
    // node count): every composed entry must satisfy Chen against the others
    const std::size_t n = rp.times().size();
    const std::size_t stride = std::max<std::size_t>(1, (n - 1) / 32);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
    if (idx.back() != n - 1) idx.push_back(n - 1);
    std::map<std::pair<std::size_t, std::size_t>, Eigen::MatrixXd> table;
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a + 1; b < idx.size(); ++b)
            table[{idx[a], idx[b]}] = rp.second_level(idx[a], idx[b]);
    const double dense = chen_residual_table(rp.first(), table);

    const double symmetry = rp.geometric() ? rp.geometric_symmetry_residual() : 0.0;
    const bool ok = structural <= o.tol && dense <= o.tol &&
                    (!rp.geometric() || symmetry <= o.tol);

    json report = {{"lift", o.lift},
                   {"chen_residual", structural},
                   {"dense_table_residual", dense},
                   {"geometric", rp.geometric()},
                   {"symmetry_residual", symmetry},
                   {"tolerance", o.tol},
                   {"ok", ok}};
    write_json_report(o.out, report);
    emit_manifest("chen-check", {{"lift", o.lift}, {"tolerance", format_float(o.tol)}},
                  {o.out});
    std::cout << "chen residual " << format_float(structural) << ", dense table residual "
              << format_float(dense);
    if (rp.geometric()) std::cout << ", symmetry residual " << format_float(symmetry);
    std::cout << (ok ? " -> ok" : " -> FAIL") << '\n';
    return ok ? 0 : 1;
}

// -------------------------------------------------------------- integrate

struct IntegrateOpts {
    std::string lift, out = "integral.csv";
};

// running integral of the driver against itself, all coordinate pairs:
// column r*d+c holds int zeta_r d zeta_c from the start of the grid
int cmd_integrate(const IntegrateOpts& o) {
    require_file(o.lift);
    auto rp = std::make_shared<const RoughPath>(
        read_input("lift file " + o.lift, [&] { return read_lift_json(o.lift); }));
    const Eigen::Index d = rp->first().values().cols();
    const std::size_t n = rp->times().size();
    const Eigen::Index nv = d * d * d;  // e = d*d output components, flattened with d

    Eigen::MatrixXd values(static_cast<Eigen::Index>(n), nv);
    values.setZero();
    Eigen::MatrixXd deriv = Eigen::MatrixXd::Zero(nv, d);
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c)
            deriv((r * d + c) * d + c, r) = 1.0;  // d/dzeta_r of component ((r,c), c)
    std::vector<Eigen::MatrixXd> derivs(n, deriv);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::VectorXd z = rp->first().values().row(i).transpose();
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index c = 0; c < d; ++c)
                values(static_cast<Eigen::Index>(i), (r * d + c) * d + c) = z[r];
    }
    const ControlledPath integrand(rp, 0, std::move(values), std::move(derivs));
    const SampledPath running = rough_integral(integrand, *rp);

    std::vector<std::string> names;
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c)
            names.push_back("i" + std::to_string(r + 1) + std::to_string(c + 1));
    write_path_csv(o.out, running, names);
    emit_manifest("integrate", {{"lift", o.lift}}, {o.out});
    const Eigen::VectorXd total = running.values().row(running.values().rows() - 1);
    std::cout << "integral over the full grid:";
    for (Eigen::Index i = 0; i < total.size(); ++i) std::cout << ' ' << format_float(total[i]);
    std::cout << '\n';
    return 0;
}

// -------------------------------------------------------------------- rde

struct RdeOpts {
    std::string dynamics = "linear-scalar";
    std::string lift, control, gamma_const, x0 = "1", out = "solution.csv";
};

int cmd_rde(const RdeOpts& o) {
    require_file(o.lift);
    auto rp = std::make_shared<const RoughPath>(
        read_input("lift file " + o.lift, [&] { return read_lift_json(o.lift); }));
    const Eigen::Index d = rp->first().values().cols();
    const ControlledDynamics dyn = load_dynamics(o.dynamics, d);
    if (dyn.d != d)
        throw ConfigError("rde: dynamics driver dimension " + std::to_string(dyn.d) +
                          " does not match lift dimension " + std::to_string(d));

    const Eigen::VectorXd x0 = parse_vector(o.x0, "rde --x0");
    if (x0.size() != dyn.m)
        throw ConfigError("rde: --x0 has " + std::to_string(x0.size()) +
                          " entries, dynamics expects " + std::to_string(dyn.m));

    SampledPath gamma = [&] {
        if (!o.control.empty()) {
            require_file(o.control);
            return read_input("control file " + o.control,
                              [&] { return read_path_csv(o.control); });
        }
        Eigen::VectorXd g = Eigen::VectorXd::Zero(dyn.k);
        if (!o.gamma_const.empty()) g = parse_vector(o.gamma_const, "rde --gamma-const");
        if (g.size() != dyn.k)
            throw ConfigError("rde: --gamma-const has " + std::to_string(g.size()) +
                              " entries, dynamics expects " + std::to_string(dyn.k));
        return constant_gamma(*rp, g);
    }();

    const ControlledPath sol = solve_rde(dyn, rp, gamma, x0);
    std::vector<std::string> names;
    for (Eigen::Index i = 0; i < dyn.m; ++i) names.push_back("x" + std::to_string(i + 1));
    write_path_csv(o.out, SampledPath(sol.times(), sol.values()), names);
    emit_manifest("rde",
                  {{"dynamics", o.dynamics},
                   {"lift", o.lift},
                   {"control", o.control.empty() ? "(constant)" : o.control},
                   {"x0", o.x0}},
                  {o.out});
    const Eigen::VectorXd xT = sol.value(sol.size() - 1);
    std::cout << "endpoint:";
    for (Eigen::Index i = 0; i < xT.size(); ++i) std::cout << ' ' << format_float(xT[i]);
    std::cout << '\n';
    return 0;
}

// -------------------------------------------------------------------- hjb

struct HjbOpts {
    std::string problem = "insider";
    std::string lift, levels = "64,128,256", grid = "x=-3:3:61,a=-2:2:41";
    std::size_t tsteps = 400;
    bool auto_refine = false;
    double epsilon = 0.25;
    double u_lo = -2.0, u_hi = 2.0;
    std::size_t u_count = 41;
    std::string out = "field.csv";
};

int cmd_hjb(const HjbOpts& o) {
    require_file(o.lift);
    const RoughPath rp =
        read_input("lift file " + o.lift, [&] { return read_lift_json(o.lift); });

    double eps = o.epsilon;
    double u_lo = o.u_lo, u_hi = o.u_hi;
    std::size_t u_count = o.u_count;
    if (o.problem != "insider") {
        require_file(o.problem);
        read_input("problem config " + o.problem, [&] {
            std::ifstream in(o.problem);
            json j = json::parse(in);
            if (j.at("problem").get<std::string>() != "insider")
                throw ConfigError("hjb: only the 'insider' problem is registered");
            eps = j.value("epsilon", eps);
            u_lo = j.value("u_lo", u_lo);
            u_hi = j.value("u_hi", u_hi);
            u_count = j.value("u_count", u_count);
            return 0;
        });
    }
    const ControlProblem prob = insider_problem(eps, u_lo, u_hi, u_count);
    if (rp.dim() != prob.dyn.d)
        throw ConfigError("hjb: problem expects a " + std::to_string(prob.dyn.d) +
                          "-dimensional driver, lift has d=" + std::to_string(rp.dim()));

    std::vector<std::string> axis_names;
    const StateGrid grid = read_input("grid description", [&] {
        return parse_state_grid(o.grid, &axis_names);
    });
    const std::vector<std::size_t> levels = parse_sizes(o.levels, "hjb --levels");

    HjbOptions options;
    options.n_steps = o.tsteps;
    options.auto_refine = o.auto_refine;
    const auto [field, report] = solve_rough_hjb(prob, rp, levels, grid,
                                                 HjbDirection::BackwardTerminal, options);

    // the natural statement of the problem is a supremum (profit); the
    // solver works in infimum form, so the written field is the negation
    write_field_csv(o.out, field.negated(), axis_names);
    const std::string conv = sibling(o.out, "_convergence.csv");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 1; i < report.levels.size(); ++i)
        rows.push_back({static_cast<double>(report.levels[i]),
                        static_cast<double>(report.tsteps[i]), report.sup_diffs[i - 1]});
    write_table_csv(conv, {"level", "tsteps", "sup_diff"}, rows);
    emit_manifest("hjb",
                  {{"problem", o.problem},
                   {"lift", o.lift},
                   {"levels", o.levels},
                   {"grid", o.grid},
                   {"tsteps", std::to_string(o.tsteps)},
                   {"epsilon", format_float(eps)},
                   {"u_lo", format_float(u_lo)},
                   {"u_hi", format_float(u_hi)},
                   {"u_count", std::to_string(u_count)}},
                  {o.out, conv});
    std::cout << "levels:";
    for (std::size_t l : report.levels) std::cout << ' ' << l;
    std::cout << "; sup diffs:";
    for (double v : report.sup_diffs) std::cout << ' ' << format_float(v);
    std::cout << "; cauchy " << (report.cauchy_ok ? "ok" : "NOT ok") << '\n';
    return 0;
}

// --------------------------------------------------------- insider-oracle

struct OracleOpts {
    std::string path, out = "insider_oracle.json";
    double epsilon = 0.25, t = 0.0, x = 0.0, a = 0.0;
};

int cmd_insider_oracle(const OracleOpts& o) {
    require_file(o.path);
    const SampledPath zeta =
        read_input("path file " + o.path, [&] { return read_path_csv(o.path); });
    if (zeta.values().cols() != 1)
        throw ConfigError("insider-oracle: path must be scalar, got " +
                          std::to_string(zeta.values().cols()) + " columns");

    // the closed form integrates on the grid; snap t to the nearest node
    double t = zeta.times().front();
    for (double s : zeta.times())
        if (std::abs(s - o.t) < std::abs(t - o.t)) t = s;

    const double value = insider_value_closed_form(zeta, o.epsilon, t, o.x, o.a);
    json report = {{"value", value}, {"epsilon", o.epsilon}, {"t", t},
                   {"t_requested", o.t}, {"x", o.x}, {"a", o.a}};
    write_json_report(o.out, report);
    emit_manifest("insider-oracle",
                  {{"path", o.path},
                   {"epsilon", format_float(o.epsilon)},
                   {"t", format_float(t)},
                   {"x", format_float(o.x)},
                   {"a", format_float(o.a)}},
                  {o.out});
    std::cout << "value " << format_float(value) << '\n';
    return 0;
}

// ------------------------------------------------------------- degeneracy

struct DegeneracyOpts {
    std::string freqs = "1,2,4,8";
    double epsilon = 0.5, t = 0.0, x = 0.0;
    std::size_t nodes = 10001;
    std::string out = "degeneracy.csv";
};

int cmd_degeneracy(const DegeneracyOpts& o) {
    const std::vector<std::size_t> freqs = parse_sizes(o.freqs, "degeneracy --freqs");
    std::vector<std::vector<double>> rows;
    for (std::size_t k : freqs) {
        const SampledPath eta = sin_freq_path(k, o.nodes);
        double tv = 0.0;
        for (std::size_t i = 0; i + 1 < eta.times().size(); ++i)
            tv += std::abs(eta.values()(static_cast<Eigen::Index>(i + 1), 0) -
                           eta.values()(static_cast<Eigen::Index>(i), 0));
        const DegeneracyResult res = degeneracy_demo(eta, o.epsilon, o.t, o.x);
        rows.push_back({static_cast<double>(k), static_cast<double>(eta.times().size()), tv,
                        res.value});
    }
    write_table_csv(o.out, {"freq", "nodes", "total_variation", "value"}, rows);
    emit_manifest("degeneracy",
                  {{"freqs", o.freqs},
                   {"epsilon", format_float(o.epsilon)},
                   {"t", format_float(o.t)},
                   {"x", format_float(o.x)},
                   {"nodes", std::to_string(o.nodes)}},
                  {o.out});
    for (const auto& row : rows)
        std::cout << "freq " << row[0] << ": value " << format_float(row[3]) << '\n';
    return 0;
}

// --------------------------------------------------------------- simulate

struct SimulateOpts {
    std::string model, out = "sy.csv";
    std::uint64_t seed = 42;
    std::size_t steps = 1000;
    double horizon = 1.0;
};

int cmd_simulate(const SimulateOpts& o) {
    require_file(o.model);
    const FilterModel model =
        read_input("model file " + o.model, [&] { return read_filter_model(o.model); });
    const auto [signal, obs] = simulate_signal_observation(model, o.seed, o.steps, o.horizon);

    Eigen::MatrixXd combined(signal.values().rows(), signal.values().cols() + obs.values().cols());
    combined << signal.values(), obs.values();
    std::vector<std::string> names;
    for (Eigen::Index i = 0; i < signal.values().cols(); ++i)
        names.push_back("s" + std::to_string(i + 1));
    for (Eigen::Index i = 0; i < obs.values().cols(); ++i)
        names.push_back("y" + std::to_string(i + 1));
    write_path_csv(o.out, SampledPath(signal.times(), std::move(combined)), names);
    emit_manifest("simulate",
                  {{"model", o.model},
                   {"seed", std::to_string(o.seed)},
                   {"steps", std::to_string(o.steps)},
                   {"horizon", format_float(o.horizon)}},
                  {o.out});
    std::cout << "wrote " << signal.times().size() << " samples -> " << o.out << '\n';
    return 0;
}

// ----------------------------------------------------------------- filter

struct FilterOpts {
    std::string model, obs, out = "qr.csv";
};

int cmd_filter(const FilterOpts& o) {
    require_file(o.model);
    require_file(o.obs);
    const FilterModel model =
        read_input("model file " + o.model, [&] { return read_filter_model(o.model); });
    SampledPath obs_full =
        read_input("observation file " + o.obs, [&] { return read_path_csv(o.obs); });
    // accept simulate output directly: y columns are the trailing d
    const Eigen::Index cols = obs_full.values().cols();
    if (cols != model.d) {
        if (cols < model.d)
            throw ConfigError("filter: observation file has " + std::to_string(cols) +
                              " columns, model expects " + std::to_string(model.d));
        obs_full = SampledPath(obs_full.times(),
                               obs_full.values().rightCols(model.d).eval());
    }

    const KalmanResult kr = kalman_bucy_forward(model, obs_full);
    const SampledPath rflat = kr.R_flat();
    Eigen::MatrixXd combined(kr.q.values().rows(), kr.q.values().cols() + rflat.values().cols());
    combined << kr.q.values(), rflat.values();
    std::vector<std::string> names;
    for (Eigen::Index i = 0; i < model.m; ++i) names.push_back("q" + std::to_string(i + 1));
    for (Eigen::Index i = 0; i < model.m; ++i)
        for (Eigen::Index j = 0; j < model.m; ++j)
            names.push_back("R" + std::to_string(i + 1) + std::to_string(j + 1));
    write_path_csv(o.out, SampledPath(kr.times, std::move(combined)), names);
    emit_manifest("filter", {{"model", o.model}, {"obs", o.obs}}, {o.out});
    std::cout << "filtered " << kr.times.size() << " nodes -> " << o.out << '\n';
    return 0;
}

// ---------------------------------------------------------------- penalty

// spec.json: {"k1":..., "k2":..., "frunning_const":0, "alpha_weight":0,
// "alpha_ref":0, "mu_weight":0, "mu_ref":0, "sigma_weight":0, "sigma_ref":1}
PenaltySpec parse_penalty_spec(const std::string& file) {
    require_file(file);
    return read_input("spec file " + file, [&] {
        std::ifstream in(file);
        json j = json::parse(in);
        PenaltySpec spec;
        spec.k1 = j.at("k1").get<double>();
        spec.k2 = j.at("k2").get<double>();
        const double fconst = j.value("frunning_const", 0.0);
        const double aw = j.value("alpha_weight", 0.0);
        const double aref = j.value("alpha_ref", 0.0);
        const double mw = j.value("mu_weight", 0.0);
        const double mref = j.value("mu_ref", 0.0);
        const double sw = j.value("sigma_weight", 0.0);
        const double sref = j.value("sigma_ref", 1.0);
        spec.frunning = [fconst, aw, aref](const Eigen::VectorXd&, const Eigen::MatrixXd&,
                                           const GammaPoint& g) {
            double v = fconst;
            if (aw > 0.0)
                v += aw * (g.alpha - Eigen::MatrixXd::Constant(g.alpha.rows(), g.alpha.cols(),
                                                               aref))
                              .squaredNorm();
            return v;
        };
        spec.ginitial = [mw, mref, sw, sref](const Eigen::VectorXd& mu0,
                                             const Eigen::MatrixXd& Sigma0, const GammaPoint&) {
            double v = 0.0;
            if (mw > 0.0)
                v += mw * (mu0 - Eigen::VectorXd::Constant(mu0.size(), mref)).squaredNorm();
            if (sw > 0.0)
                v += sw * (Sigma0 - Eigen::MatrixXd::Constant(Sigma0.rows(), Sigma0.cols(),
                                                              sref))
                              .squaredNorm();
            return v;
        };
        return spec;
    });
}

struct PenaltyOpts {
    std::string model, obs_lift, spec, out = "penalty.json";
    double t = -1.0;
};

int cmd_penalty(const PenaltyOpts& o) {
    require_file(o.model);
    require_file(o.obs_lift);
    const FilterModel model =
        read_input("model file " + o.model, [&] { return read_filter_model(o.model); });
    auto lift = std::make_shared<const RoughPath>(
        read_input("lift file " + o.obs_lift, [&] { return read_lift_json(o.obs_lift); }));
    const PenaltySpec spec = parse_penalty_spec(o.spec);
    const double t = o.t < 0.0 ? lift->times().back() : o.t;

    const double value = penalty(model, lift, spec, t);
    json report = {{"penalty", value}, {"t", t}, {"k1", spec.k1}, {"k2", spec.k2},
                   {"sentinel", std::abs(value) >= 0.5 * kCostSentinel}};
    write_json_report(o.out, report);
    emit_manifest("penalty",
                  {{"model", o.model},
                   {"obs_lift", o.obs_lift},
                   {"spec", o.spec},
                   {"t", format_float(t)}},
                  {o.out});
    std::cout << "penalty " << format_float(value) << " at t=" << format_float(t) << '\n';
    return 0;
}

// ----------------------------------------------------------------- robust

std::function<double(double)> parse_phi(const std::string& desc) {
    if (desc == "id") return [](double x) { return x; };
    const std::string prefix = "indicator:";
    if (desc.rfind(prefix, 0) == 0) {
        const std::vector<double> ab =
            parse_doubles(desc.substr(prefix.size()), "robust --phi indicator bounds");
        if (ab.size() != 2 || ab[0] >= ab[1])
            throw ConfigError("robust --phi: indicator needs bounds a,b with a < b");
        const double a = ab[0], b = ab[1];
        return [a, b](double x) { return (x >= a && x <= b) ? 1.0 : 0.0; };
    }
    throw ConfigError("robust --phi: expected 'id' or 'indicator:a,b', got '" + desc + "'");
}

struct RobustOpts {
    std::string reduced, obs_lift, spec;
    std::string grid = "mu=-4:4:41,sigma=0.05:4:40,alpha=-3:1:33";
    std::string phi = "id";
    std::string levels = "4,8";
    std::size_t controls = 9;
    std::size_t tsteps = 0;
    double t = -1.0;
    double eps_u = 1e-2, u_cap = 8.0;
    std::string out = "report.json";
};

int cmd_robust(const RobustOpts& o) {
    require_file(o.reduced);
    require_file(o.obs_lift);
    const FilterModel model =
        read_input("model file " + o.reduced, [&] { return read_filter_model(o.reduced); });
    const RoughPath lift =
        read_input("lift file " + o.obs_lift, [&] { return read_lift_json(o.obs_lift); });
    const PenaltySpec spec = parse_penalty_spec(o.spec);
    const std::function<double(double)> phi = parse_phi(o.phi);

    std::vector<std::string> axis_names;
    const StateGrid grid = read_input("grid description", [&] {
        return parse_state_grid(o.grid, &axis_names);
    });
    const std::vector<std::size_t> levels = parse_sizes(o.levels, "robust --levels");

    FilterControlConfig config;
    config.eps_u = o.eps_u;
    config.u_cap = o.u_cap;
    HjbOptions options;
    options.n_steps = o.tsteps;
    options.auto_refine = true;
    const double t = o.t < 0.0 ? lift.times().back() : o.t;

    const auto t0 = std::chrono::steady_clock::now();
    const auto [field, report] =
        filter_value_hjb(model, lift, spec, config, grid, o.controls, levels, options);
    const KappaField kf = kappa_field(field, t);
    const Expectation expectation = nonlinear_expectation(phi, kf, spec.k1, spec.k2);
    const RobustInterval interval = robust_interval(phi, kf, spec.k1, spec.k2);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // kappa heat-map plot data
    const std::string kappa_csv = sibling(o.out, "_kappa.csv");
    std::vector<std::vector<double>> krows;
    for (std::size_t i = 0; i < kf.mu_axis.size(); ++i)
        for (std::size_t j = 0; j < kf.sigma_axis.size(); ++j)
            krows.push_back({kf.mu_axis[i], kf.sigma_axis[j],
                             kf.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                             kf.argmin_a(static_cast<Eigen::Index>(i),
                                         static_cast<Eigen::Index>(j))});
    write_table_csv(kappa_csv, {"mu", "sigma", "kappa", "argmin_a"}, krows);

    // robust interval as a function of the query time
    const std::string intervals_csv = sibling(o.out, "_intervals.csv");
    std::vector<std::vector<double>> irows;
    for (int i = 0; i <= 10; ++i) {
        const double ti = t * i / 10.0;
        try {
            const KappaField kfi = kappa_field(field, ti);
            const RobustInterval ri = robust_interval(phi, kfi, spec.k1, spec.k2);
            irows.push_back({ti, ri.lower, ri.upper});
        } catch (const std::exception&) {
            // all nodes sentinel at this time; skip the row
        }
    }
    write_table_csv(intervals_csv, {"t", "lower", "upper"}, irows);

    json jreport = {{"kappa_field", kappa_csv},
                    {"intervals_over_time", intervals_csv},
                    {"t", t},
                    {"phi", o.phi},
                    {"k1", spec.k1},
                    {"k2", spec.k2},
                    {"expectation",
                     {{"value", expectation.value},
                      {"mu_star", expectation.mu_star},
                      {"sigma_star", expectation.sigma_star}}},
                    {"robust_interval", {{"lower", interval.lower}, {"upper", interval.upper}}},
                    {"levels", report.levels},
                    {"sup_diffs", report.sup_diffs},
                    {"cauchy_ok", report.cauchy_ok},
                    {"timing_seconds", seconds}};
    write_json_report(o.out, jreport);
    emit_manifest("robust",
                  {{"reduced", o.reduced},
                   {"obs_lift", o.obs_lift},
                   {"spec", o.spec},
                   {"grid", o.grid},
                   {"phi", o.phi},
                   {"levels", o.levels},
                   {"controls", std::to_string(o.controls)},
                   {"tsteps", std::to_string(o.tsteps)},
                   {"t", format_float(t)},
                   {"eps_u", format_float(o.eps_u)},
                   {"u_cap", format_float(o.u_cap)}},
                  {o.out, kappa_csv, intervals_csv});
    std::cout << "E(phi) = " << format_float(expectation.value) << " at (mu*, sigma*) = ("
              << format_float(expectation.mu_star) << ", " << format_float(expectation.sigma_star)
              << "); interval [" << format_float(interval.lower) << ", "
              << format_float(interval.upper) << "]\n";
    return 0;
}

// -------------------------------------------------------------- stability

struct StabilityOpts {
    std::string dynamics = "linear-scalar";
    std::uint64_t seed = 42;
    std::size_t steps = 256;
    int dim = 1;
    double horizon = 1.0;
    std::string x0 = "1";
    std::string scales = "1e-4,1e-3,1e-2,1e-1";
    std::string out = "stability.csv";
};

int cmd_stability(const StabilityOpts& o) {
    const ControlledDynamics dyn = load_dynamics(o.dynamics, o.dim);
    const Eigen::VectorXd x0 = parse_vector(o.x0, "stability --x0");
    if (x0.size() != dyn.m) throw ConfigError("stability: --x0 size does not match dynamics");
    const std::vector<double> scales = parse_doubles(o.scales, "stability --scales");

    auto rp_a = std::make_shared<const RoughPath>(
        lift_brownian(o.seed, o.steps, o.horizon, o.dim));
    const SampledPath gamma_a = constant_gamma(*rp_a, Eigen::VectorXd::Zero(dyn.k));

    std::vector<StabilityCase> pairs;
    for (double s : scales) {
        StabilityCase sc;
        sc.x0_a = x0;
        sc.x0_b = x0 + s * Eigen::VectorXd::Ones(x0.size());
        sc.gamma_a = gamma_a;
        sc.gamma_b = constant_gamma(*rp_a, Eigen::VectorXd::Constant(dyn.k, s));
        sc.rp_a = rp_a;
        // driver perturbed by a smooth bump of the same scale
        Eigen::MatrixXd vals = rp_a->first().values();
        for (Eigen::Index i = 0; i < vals.rows(); ++i) {
            const double t = rp_a->times()[static_cast<std::size_t>(i)];
            vals.row(i).array() += s * std::sin(M_PI * t / o.horizon);
        }
        sc.rp_b = std::make_shared<const RoughPath>(
            lift_piecewise_linear(SampledPath(rp_a->times(), std::move(vals)), rp_a->p()));
        pairs.push_back(std::move(sc));
    }

    const std::vector<StabilityRow> table = stability_experiment(dyn, pairs);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < table.size(); ++i)
        rows.push_back({scales[i], table[i].input_distance, table[i].output_distance,
                        table[i].ratio});
    write_table_csv(o.out, {"scale", "input_distance", "output_distance", "ratio"}, rows);
    emit_manifest("stability",
                  {{"dynamics", o.dynamics},
                   {"seed", std::to_string(o.seed)},
                   {"steps", std::to_string(o.steps)},
                   {"dim", std::to_string(o.dim)},
                   {"horizon", format_float(o.horizon)},
                   {"x0", o.x0},
                   {"scales", o.scales}},
                  {o.out});
    for (const auto& row : rows)
        std::cout << "scale " << format_float(row[0]) << ": ratio " << format_float(row[3])
                  << '\n';
    return 0;
}

// ---------------------------------------------------------------- apriori

struct AprioriOpts {
    std::string dynamics = "insider";
    std::uint64_t seed = 42;
    std::size_t steps = 256;
    int dim = 1;
    double horizon = 1.0;
    std::string x0 = "1";
    std::string amps = "0.25,0.5,1,2,4";
    std::string out = "apriori.csv";
};

int cmd_apriori(const AprioriOpts& o) {
    const ControlledDynamics dyn = load_dynamics(o.dynamics, o.dim);
    const Eigen::VectorXd x0 = parse_vector(o.x0, "apriori --x0");
    if (x0.size() != dyn.m) throw ConfigError("apriori: --x0 size does not match dynamics");
    const std::vector<double> amps = parse_doubles(o.amps, "apriori --amps");

    auto rp = std::make_shared<const RoughPath>(
        lift_brownian(o.seed, o.steps, o.horizon, o.dim));

    SmoothMap psi;  // the vector field itself, the map the solver composes
    psi.e = dyn.m;
    psi.d = dyn.d;
    psi.value = dyn.lambda;
    psi.dx = dyn.dx_lambda;

    std::vector<std::vector<double>> rows;
    for (double amp : amps) {
        Eigen::MatrixXd gvals(static_cast<Eigen::Index>(rp->times().size()), dyn.k);
        for (Eigen::Index i = 0; i < gvals.rows(); ++i) {
            const double t = rp->times()[static_cast<std::size_t>(i)];
            gvals.row(i).setConstant(amp * std::sin(2.0 * M_PI * t / o.horizon));
        }
        const SampledPath gamma(rp->times(), std::move(gvals));
        const ControlledPath sol = solve_rde(dyn, rp, gamma, x0);
        const AprioriDiagnostics diag = apriori_diagnostics(sol, gamma, *rp, psi);
        rows.push_back({amp, diag.x_pvar, diag.x_remainder, diag.psi_deriv_pvar,
                        diag.psi_remainder, diag.gamma_pvar, diag.driver_holder});
    }
    write_table_csv(o.out,
                    {"amp", "x_pvar", "x_remainder", "psi_deriv_pvar", "psi_remainder",
                     "gamma_pvar", "driver_holder"},
                    rows);
    emit_manifest("apriori",
                  {{"dynamics", o.dynamics},
                   {"seed", std::to_string(o.seed)},
                   {"steps", std::to_string(o.steps)},
                   {"dim", std::to_string(o.dim)},
                   {"horizon", format_float(o.horizon)},
                   {"x0", o.x0},
                   {"amps", o.amps}},
                  {o.out});
    for (const auto& row : rows)
        std::cout << "amp " << format_float(row[0]) << ": |X|_p " << format_float(row[1])
                  << ", |R|_{p/2} " << format_float(row[2]) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rough-path driven control and robust filtering experiments"};
    app.set_version_flag("--version", kVersionString);
    app.require_subcommand(1);

    LiftOpts lift_o;
    auto* lift_c = app.add_subcommand("lift", "lift a sampled path (or fresh Brownian motion)");
    lift_c->add_option("--input", lift_o.input, "path CSV to lift");
    lift_c->add_option("--output", lift_o.output, "lift JSON output");
    lift_c->add_flag("--brownian", lift_o.brownian, "generate a Brownian driver instead");
    lift_c->add_option("--seed", lift_o.seed, "Brownian seed");
    lift_c->add_option("--steps", lift_o.steps, "Brownian step count");
    lift_c->add_option("--dim", lift_o.dim, "Brownian dimension");
    lift_c->add_option("--horizon", lift_o.horizon, "Brownian horizon");
    lift_c->add_option("--p", lift_o.p, "p-variation exponent in [2,3)");

    ChenOpts chen_o;
    auto* chen_c = app.add_subcommand("chen-check", "validate a lift file");
    chen_c->add_option("--lift", chen_o.lift, "lift JSON")->required();
    chen_c->add_option("--out", chen_o.out, "report JSON output");
    chen_c->add_option("--tol", chen_o.tol, "residual tolerance");

    IntegrateOpts int_o;
    auto* int_c = app.add_subcommand("integrate", "rough self-integral of a driver");
    int_c->add_option("--lift", int_o.lift, "lift JSON")->required();
    int_c->add_option("--out", int_o.out, "running-integral CSV output");

    RdeOpts rde_o;
    auto* rde_c = app.add_subcommand("rde", "solve a rough differential equation");
    rde_c->add_option("--dynamics", rde_o.dynamics, "builtin name or config JSON");
    rde_c->add_option("--lift", rde_o.lift, "driver lift JSON")->required();
    rde_c->add_option("--control", rde_o.control, "parameter path CSV on the driver grid");
    rde_c->add_option("--gamma-const", rde_o.gamma_const, "constant parameter values");
    rde_c->add_option("--x0", rde_o.x0, "initial state, comma separated");
    rde_c->add_option("--out", rde_o.out, "solution CSV output");

    HjbOpts hjb_o;
    auto* hjb_c = app.add_subcommand("hjb", "rough HJB value field via mollified drivers");
    hjb_c->add_option("--problem", hjb_o.problem, "'insider' or config JSON");
    hjb_c->add_option("--lift", hjb_o.lift, "driver lift JSON")->required();
    hjb_c->add_option("--levels", hjb_o.levels, "mollification levels, comma separated");
    hjb_c->add_option("--grid", hjb_o.grid, "state grid description");
    hjb_c->add_option("--tsteps", hjb_o.tsteps, "time steps (0 = auto CFL)");
    hjb_c->add_flag("--auto-refine", hjb_o.auto_refine, "raise tsteps to meet CFL");
    hjb_c->add_option("--epsilon", hjb_o.epsilon, "control cost weight");
    hjb_c->add_option("--u-lo", hjb_o.u_lo, "control box lower bound");
    hjb_c->add_option("--u-hi", hjb_o.u_hi, "control box upper bound");
    hjb_c->add_option("--u-count", hjb_o.u_count, "control grid size");
    hjb_c->add_option("--out", hjb_o.out, "value field CSV output");

    OracleOpts oracle_o;
    auto* oracle_c = app.add_subcommand("insider-oracle", "closed-form trading value");
    oracle_c->add_option("--path", oracle_o.path, "scalar driver CSV")->required();
    oracle_c->add_option("--epsilon", oracle_o.epsilon, "control cost weight");
    oracle_c->add_option("--t", oracle_o.t, "evaluation time (snapped to the grid)");
    oracle_c->add_option("--x", oracle_o.x, "wealth");
    oracle_c->add_option("--a", oracle_o.a, "position");
    oracle_c->add_option("--out", oracle_o.out, "report JSON output");

    DegeneracyOpts deg_o;
    auto* deg_c = app.add_subcommand("degeneracy", "unregularised value growth under refinement");
    deg_c->add_option("--freqs", deg_o.freqs, "sine frequencies, comma separated");
    deg_c->add_option("--epsilon", deg_o.epsilon, "control bound");
    deg_c->add_option("--t", deg_o.t, "start time");
    deg_c->add_option("--x", deg_o.x, "start state");
    deg_c->add_option("--nodes", deg_o.nodes, "grid node hint");
    deg_c->add_option("--out", deg_o.out, "table CSV output");

    SimulateOpts sim_o;
    auto* sim_c = app.add_subcommand("simulate", "sample a signal/observation pair");
    sim_c->add_option("--model", sim_o.model, "model JSON")->required();
    sim_c->add_option("--seed", sim_o.seed, "simulation seed");
    sim_c->add_option("--steps", sim_o.steps, "Euler steps");
    sim_c->add_option("--horizon", sim_o.horizon, "time horizon");
    sim_c->add_option("--out", sim_o.out, "sample CSV output");

    FilterOpts fil_o;
    auto* fil_c = app.add_subcommand("filter", "conditional mean and covariance");
    fil_c->add_option("--model", fil_o.model, "model JSON")->required();
    fil_c->add_option("--obs", fil_o.obs, "observation CSV")->required();
    fil_c->add_option("--out", fil_o.out, "filter CSV output");

    PenaltyOpts pen_o;
    auto* pen_c = app.add_subcommand("penalty", "pathwise misfit of one parameter choice");
    pen_c->add_option("--model", pen_o.model, "model JSON")->required();
    pen_c->add_option("--obs-lift", pen_o.obs_lift, "lifted observation JSON")->required();
    pen_c->add_option("--spec", pen_o.spec, "penalty spec JSON")->required();
    pen_c->add_option("--t", pen_o.t, "evaluation time (default: horizon)");
    pen_c->add_option("--out", pen_o.out, "report JSON output");

    RobustOpts rob_o;
    auto* rob_c = app.add_subcommand("robust", "nonlinear expectation of the filter estimate");
    rob_c->add_option("--reduced", rob_o.reduced, "reduced model JSON")->required();
    rob_c->add_option("--obs-lift", rob_o.obs_lift, "lifted observation JSON")->required();
    rob_c->add_option("--spec", rob_o.spec, "penalty spec JSON")->required();
    rob_c->add_option("--grid", rob_o.grid, "(mu, sigma, alpha) grid description");
    rob_c->add_option("--phi", rob_o.phi, "'id' or 'indicator:a,b'");
    rob_c->add_option("--levels", rob_o.levels, "mollification levels");
    rob_c->add_option("--controls", rob_o.controls, "control grid size");
    rob_c->add_option("--tsteps", rob_o.tsteps, "time steps (0 = auto CFL)");
    rob_c->add_option("--t", rob_o.t, "query time (default: horizon)");
    rob_c->add_option("--eps-u", rob_o.eps_u, "control cost weight");
    rob_c->add_option("--u-cap", rob_o.u_cap, "control box bound");
    rob_c->add_option("--out", rob_o.out, "report JSON output");

    StabilityOpts sta_o;
    auto* sta_c = app.add_subcommand("stability", "solution-map distance ratios");
    sta_c->add_option("--dynamics", sta_o.dynamics, "builtin name or config JSON");
    sta_c->add_option("--seed", sta_o.seed, "driver seed");
    sta_c->add_option("--steps", sta_o.steps, "driver steps");
    sta_c->add_option("--dim", sta_o.dim, "driver dimension");
    sta_c->add_option("--horizon", sta_o.horizon, "time horizon");
    sta_c->add_option("--x0", sta_o.x0, "initial state");
    sta_c->add_option("--scales", sta_o.scales, "perturbation scales, comma separated");
    sta_c->add_option("--out", sta_o.out, "table CSV output");

    AprioriOpts apr_o;
    auto* apr_c = app.add_subcommand("apriori", "solution norms over a parameter sweep");
    apr_c->add_option("--dynamics", apr_o.dynamics, "builtin name or config JSON");
    apr_c->add_option("--seed", apr_o.seed, "driver seed");
    apr_c->add_option("--steps", apr_o.steps, "driver steps");
    apr_c->add_option("--dim", apr_o.dim, "driver dimension");
    apr_c->add_option("--horizon", apr_o.horizon, "time horizon");
    apr_c->add_option("--x0", apr_o.x0, "initial state");
    apr_c->add_option("--amps", apr_o.amps, "parameter amplitudes, comma separated");
    apr_c->add_option("--out", apr_o.out, "table CSV output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (lift_c->parsed()) return cmd_lift(lift_o);
        if (chen_c->parsed()) return cmd_chen_check(chen_o);
        if (int_c->parsed()) return cmd_integrate(int_o);
        if (rde_c->parsed()) return cmd_rde(rde_o);
        if (hjb_c->parsed()) return cmd_hjb(hjb_o);
        if (oracle_c->parsed()) return cmd_insider_oracle(oracle_o);
        if (deg_c->parsed()) return cmd_degeneracy(deg_o);
        if (sim_c->parsed()) return cmd_simulate(sim_o);
        if (fil_c->parsed()) return cmd_filter(fil_o);
        if (pen_c->parsed()) return cmd_penalty(pen_o);
        if (rob_c->parsed()) return cmd_robust(rob_o);
        if (sta_c->parsed()) return cmd_stability(sta_o);
        if (apr_c->parsed()) return cmd_apriori(apr_o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
