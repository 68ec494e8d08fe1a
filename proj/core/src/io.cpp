#include "roughctrl/io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace roughctrl {

namespace {

std::ifstream open_in(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open input file: " + file);
    return in;
}

std::ofstream open_out(const std::string& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open output file: " + file);
    return out;
}

}  // namespace

std::string format_float(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

void write_path_csv(const std::string& file, const SampledPath& path,
                    const std::vector<std::string>& names) {
    std::ofstream out = open_out(file);
    out << "t";
    for (Eigen::Index j = 0; j < path.dim(); ++j) {
        if (static_cast<std::size_t>(j) < names.size())
            out << "," << names[static_cast<std::size_t>(j)];
        else
            out << ",x" << (j + 1);
    }
    out << "\n";
    for (std::size_t i = 0; i < path.size(); ++i) {
        out << format_float(path.time(i));
        for (Eigen::Index j = 0; j < path.dim(); ++j) out << "," << format_float(path.values()(i, j));
        out << "\n";
    }
}

SampledPath read_path_csv(const std::string& file) {
    std::ifstream in = open_in(file);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty path file: " + file);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows[0].size())
            throw std::runtime_error("ragged csv row in " + file);
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows[0].size() < 2)
        throw std::runtime_error("path file needs a time column and at least one value column: " +
                                 file);
    const std::size_t n = rows.size();
    const Eigen::Index dim = static_cast<Eigen::Index>(rows[0].size() - 1);
    std::vector<double> times(n);
    Eigen::MatrixXd vals(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
        times[i] = rows[i][0];
        for (Eigen::Index j = 0; j < dim; ++j) vals(i, j) = rows[i][static_cast<std::size_t>(j) + 1];
    }
    return SampledPath(std::move(times), std::move(vals));
}

void write_lift_json(const std::string& file, const RoughPath& rp) {
    nlohmann::json j;
    j["p"] = rp.p();
    j["geometric"] = rp.geometric();
    j["times"] = rp.times();
    nlohmann::json values = nlohmann::json::array();
    for (std::size_t i = 0; i < rp.size(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < rp.dim(); ++c) row.push_back(rp.first().values()(i, c));
        values.push_back(std::move(row));
    }
    j["values"] = std::move(values);
    nlohmann::json steps = nlohmann::json::array();
    for (std::size_t i = 0; i + 1 < rp.size(); ++i) {
        const Eigen::MatrixXd A = rp.second().step(i);
        nlohmann::json flat = nlohmann::json::array();
        for (Eigen::Index r = 0; r < A.rows(); ++r)
            for (Eigen::Index c = 0; c < A.cols(); ++c) flat.push_back(A(r, c));
        steps.push_back(std::move(flat));
    }
    j["second_level_steps"] = std::move(steps);
    open_out(file) << j.dump(2) << "\n";
}

RoughPath read_lift_json(const std::string& file) {
    nlohmann::json j = nlohmann::json::parse(open_in(file));
    const double p = j.at("p").get<double>();
    const bool geometric = j.at("geometric").get<bool>();
    const auto times = j.at("times").get<std::vector<double>>();
    const auto& values = j.at("values");
    if (values.size() != times.size())
        throw std::runtime_error("lift file: times and values disagree: " + file);
    if (times.empty()) throw std::runtime_error("lift file: empty grid: " + file);
    const Eigen::Index d = static_cast<Eigen::Index>(values[0].size());
    Eigen::MatrixXd first(static_cast<Eigen::Index>(times.size()), d);
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (static_cast<Eigen::Index>(values[i].size()) != d)
            throw std::runtime_error("lift file: ragged first level: " + file);
        for (Eigen::Index c = 0; c < d; ++c) first(static_cast<Eigen::Index>(i), c) =
            values[i][static_cast<std::size_t>(c)].get<double>();
    }
    const auto& steps = j.at("second_level_steps");
    if (steps.size() + 1 != times.size())
        throw std::runtime_error("lift file: need one second-level entry per step: " + file);
    std::vector<Eigen::MatrixXd> second(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (static_cast<Eigen::Index>(steps[i].size()) != d * d)
            throw std::runtime_error("lift file: second-level entry is not d*d: " + file);
        Eigen::MatrixXd A(d, d);
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index c = 0; c < d; ++c)
                A(r, c) = steps[i][static_cast<std::size_t>(r * d + c)].get<double>();
        second[i] = std::move(A);
    }
    return RoughPath(SampledPath(times, std::move(first)), std::move(second), geometric, p);
}

void write_field_csv(const std::string& file, const ValueField& field,
                     const std::vector<std::string>& axis_names) {
    std::ofstream out = open_out(file);
    out << "t";
    for (std::size_t ax = 0; ax < field.grid.num_axes(); ++ax) {
        if (ax < axis_names.size())
            out << "," << axis_names[ax];
        else
            out << ",s" << (ax + 1);
    }
    out << ",value";
    const Eigen::Index udim = field.control_set.empty() ? 0 : field.control_set[0].size();
    for (Eigen::Index j = 0; j < udim; ++j) out << ",u" << (j + 1);
    out << "\n";
    for (std::size_t s = 0; s < field.times.size(); ++s) {
        for (std::size_t node = 0; node < field.grid.num_nodes(); ++node) {
            out << format_float(field.times[s]);
            const Eigen::VectorXd x = field.grid.coords(node);
            for (Eigen::Index j = 0; j < x.size(); ++j) out << "," << format_float(x(j));
            out << "," << format_float(field.values[s](static_cast<Eigen::Index>(node)));
            if (udim > 0) {
                const Eigen::VectorXd& u = field.control_set[field.best_control[s][node]];
                for (Eigen::Index j = 0; j < udim; ++j) out << "," << format_float(u(j));
            }
            out << "\n";
        }
    }
}

namespace {

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const char* what) {
    if (j.is_number()) return Eigen::MatrixXd::Constant(1, 1, j.get<double>());
    if (!j.is_array() || j.empty())
        throw std::runtime_error(std::string(what) + ": expected number or nested array");
    if (j[0].is_number()) {  // flat array -> column vector
        Eigen::MatrixXd M(static_cast<Eigen::Index>(j.size()), 1);
        for (std::size_t i = 0; i < j.size(); ++i) M(static_cast<Eigen::Index>(i), 0) = j[i].get<double>();
        return M;
    }
    const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd M(static_cast<Eigen::Index>(j.size()), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (static_cast<Eigen::Index>(j[r].size()) != cols)
            throw std::runtime_error(std::string(what) + ": ragged matrix");
        for (Eigen::Index c = 0; c < cols; ++c)
            M(static_cast<Eigen::Index>(r), c) = j[r][static_cast<std::size_t>(c)].get<double>();
    }
    return M;
}

ParamTraj param_from_json(const nlohmann::json& j, const char* what) {
    if (j.is_object() && j.contains("times")) {
        const auto times = j.at("times").get<std::vector<double>>();
        const auto& samp = j.at("samples");
        std::vector<Eigen::MatrixXd> samples;
        samples.reserve(samp.size());
        for (const auto& s : samp) samples.push_back(matrix_from_json(s, what));
        return ParamTraj(times, std::move(samples));
    }
    return ParamTraj(matrix_from_json(j, what));
}

FilterModel parse_model_json(const nlohmann::json& spec) {
    FilterModel model;
    model.m = spec.value("m", 1);
    model.d = spec.value("d", 1);
    model.l = spec.value("l", 1);
    model.alpha = param_from_json(spec.at("alpha"), "alpha");
    model.sigma = param_from_json(spec.at("sigma"), "sigma");
    model.c = param_from_json(spec.at("c"), "c");
    if (spec.contains("rho"))
        model.rho = param_from_json(spec.at("rho"), "rho");
    else
        model.rho = ParamTraj(Eigen::MatrixXd::Zero(model.l, model.d));
    const Eigen::MatrixXd mu0 = matrix_from_json(spec.at("mu0"), "mu0");
    model.mu0 = mu0.col(0);
    model.Sigma0 = matrix_from_json(spec.at("Sigma0"), "Sigma0");
    return model;
}

}  // namespace

FilterModel parse_filter_model(const std::string& json_text) {
    return parse_model_json(nlohmann::json::parse(json_text));
}

FilterModel read_filter_model(const std::string& file) {
    return parse_model_json(nlohmann::json::parse(open_in(file)));
}

void write_manifest(const std::string& file, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& params,
                    const std::vector<std::string>& outputs) {
    nlohmann::json j;
    j["version"] = kVersionString;
    j["command"] = command;
    nlohmann::json p = nlohmann::json::object();
    for (const auto& [k, v] : params) p[k] = v;
    j["params"] = p;
    j["outputs"] = outputs;
    open_out(file) << j.dump(2) << "\n";
}

}  // namespace roughctrl
