// End-to-end runs of the command line tool in a scratch directory. Each run
// checks the exit status contract (0 ok, 1 numerical, 2 config) and the
// artifacts written next to the outputs.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = ROUGHCTRL_CLI_PATH;

struct TempDir {
    fs::path path;
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "roughctrl_cli_XXXXXX").string();
        path = mkdtemp(tmpl.data());
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

struct RunResult {
    int exit_code;
    std::string output;  // stdout + stderr
};

RunResult run(const TempDir& dir, const std::string& args) {
    const std::string log = dir.file("run.log");
    const std::string cmd = kCli + " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult res;
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    res.output = ss.str();
    return res;
}

std::string slurp(const std::string& file) {
    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const std::string& file) {
    std::ifstream in(file);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++n;
    return n;
}

void write_line_path(const std::string& file, std::size_t n) {
    std::ofstream out(file);
    out << "t,z\n";
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        out << t << "," << t << "\n";
    }
}

void write_model(const std::string& file) {
    std::ofstream out(file);
    out << R"({"m":1,"d":1,"l":1,"alpha":-1.0,"sigma":1.0,"c":1.0,"rho":0.0,)"
        << R"("mu0":[0.0],"Sigma0":[[1.0]]})" << "\n";
}

void write_spec(const std::string& file) {
    std::ofstream out(file);
    out << R"({"k1":0.5,"k2":2.0})" << "\n";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("version flag prints the version string") {
    TempDir dir;
    const RunResult res = run(dir, "--version");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("roughctrl 0.1.0") != std::string::npos);
}

TEST_CASE("missing input file exits 2 and names the path") {
    TempDir dir;
    const std::string missing = dir.file("does_not_exist.json");
    const RunResult res = run(dir, "chen-check --lift " + missing);
    CHECK(res.exit_code == 2);
    CHECK(res.output.find(missing) != std::string::npos);
}

TEST_CASE("unknown flags and malformed values exit 2") {
    TempDir dir;
    CHECK(run(dir, "frobnicate").exit_code == 2);
    CHECK(run(dir, "lift --no-such-flag").exit_code == 2);

    write_line_path(dir.file("p.csv"), 5);
    REQUIRE(run(dir, "lift --input " + dir.file("p.csv") + " --output " +
                         dir.file("l.json")).exit_code == 0);
    CHECK(run(dir, "rde --lift " + dir.file("l.json") + " --x0 1,2 --out " +
                       dir.file("s.csv")).exit_code == 2);
    CHECK(run(dir, "hjb --lift " + dir.file("l.json") + " --grid bogus --out " +
                       dir.file("f.csv")).exit_code == 2);
}

TEST_CASE("brownian lift passes its own validation and writes a manifest") {
    TempDir dir;
    const std::string lift = dir.file("w.json");
    REQUIRE(run(dir, "lift --brownian --seed 11 --steps 128 --dim 2 --output " + lift)
                .exit_code == 0);
    CHECK(fs::exists(lift));

    const std::string manifest = dir.file("manifest.json");
    REQUIRE(fs::exists(manifest));
    const std::string m = slurp(manifest);
    CHECK(m.find("roughctrl 0.1.0") != std::string::npos);
    CHECK(m.find("\"seed\"") != std::string::npos);
    CHECK(m.find(lift) != std::string::npos);

    const RunResult chen =
        run(dir, "chen-check --lift " + lift + " --out " + dir.file("chen.json"));
    CHECK(chen.exit_code == 0);
    const auto report = nlohmann::json::parse(slurp(dir.file("chen.json")));
    CHECK(report.at("ok").get<bool>());
    CHECK(report.at("chen_residual").get<double>() == 0.0);
}

TEST_CASE("identical seed and config give byte-identical outputs") {
    TempDir dir;
    for (const char* sub : {"a", "b"}) fs::create_directory(dir.path / sub);
    write_model(dir.file("model.json"));
    for (const char* sub : {"a", "b"})
        REQUIRE(run(dir, "simulate --model " + dir.file("model.json") +
                             " --seed 5 --steps 64 --out " +
                             dir.file(std::string(sub) + "/sy.csv"))
                    .exit_code == 0);
    CHECK(slurp(dir.file("a/sy.csv")) == slurp(dir.file("b/sy.csv")));

    for (const char* sub : {"a", "b"})
        REQUIRE(run(dir, "lift --brownian --seed 17 --steps 128 --output " +
                             dir.file(std::string(sub) + "/w.json"))
                    .exit_code == 0);
    CHECK(slurp(dir.file("a/w.json")) == slurp(dir.file("b/w.json")));
}

TEST_CASE("self integral of a line driver gives one half exactly") {
    TempDir dir;
    write_line_path(dir.file("p.csv"), 33);
    REQUIRE(run(dir, "lift --input " + dir.file("p.csv") + " --output " +
                         dir.file("l.json")).exit_code == 0);
    const RunResult res =
        run(dir, "integrate --lift " + dir.file("l.json") + " --out " + dir.file("int.csv"));
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("0.5") != std::string::npos);

    std::ifstream in(dir.file("int.csv"));
    std::string header, line, last;
    std::getline(in, header);
    CHECK(header == "t,i11");
    while (std::getline(in, line))
        if (!line.empty()) last = line;
    CHECK(last.substr(last.find(',') + 1) == "0.5");
}

TEST_CASE("rde subcommand reproduces the exponential") {
    TempDir dir;
    write_line_path(dir.file("p.csv"), 257);
    REQUIRE(run(dir, "lift --input " + dir.file("p.csv") + " --output " +
                         dir.file("l.json")).exit_code == 0);
    const RunResult res = run(dir, "rde --dynamics linear-scalar --lift " + dir.file("l.json") +
                                       " --x0 1 --out " + dir.file("sol.csv"));
    REQUIRE(res.exit_code == 0);
    std::ifstream in(dir.file("sol.csv"));
    std::string line, last;
    while (std::getline(in, line))
        if (!line.empty()) last = line;
    const double endpoint = std::stod(last.substr(last.find(',') + 1));
    CHECK(std::abs(endpoint - std::exp(1.0)) < 1e-4);
}

TEST_CASE("hjb subcommand writes field and convergence artifacts") {
    TempDir dir;
    write_line_path(dir.file("p.csv"), 9);
    REQUIRE(run(dir, "lift --input " + dir.file("p.csv") + " --output " +
                         dir.file("l.json")).exit_code == 0);
    const RunResult res =
        run(dir, "hjb --problem insider --lift " + dir.file("l.json") +
                     " --levels 4,8 --grid \"x=-1:1:11,a=-1:1:21\" --tsteps 80 --out " +
                     dir.file("field.csv"));
    REQUIRE(res.exit_code == 0);
    std::ifstream in(dir.file("field.csv"));
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,x,a,value,u1");
    CHECK(fs::exists(dir.file("field_convergence.csv")));
    CHECK(slurp(dir.file("manifest.json")).find("\"levels\"") != std::string::npos);
}

TEST_CASE("cfl violation without auto refine is a numerical failure") {
    TempDir dir;
    write_line_path(dir.file("p.csv"), 9);
    REQUIRE(run(dir, "lift --input " + dir.file("p.csv") + " --output " +
                         dir.file("l.json")).exit_code == 0);
    const RunResult res =
        run(dir, "hjb --problem insider --lift " + dir.file("l.json") +
                     " --levels 4 --grid \"x=-1:1:11,a=-1:1:21\" --tsteps 2 --out " +
                     dir.file("field.csv"));
    CHECK(res.exit_code == 1);
    CHECK(res.output.find("CFL") != std::string::npos);
}

TEST_CASE("hjb with a driver of the wrong dimension is a config error") {
    TempDir dir;
    REQUIRE(run(dir, "lift --brownian --seed 1 --steps 16 --dim 2 --output " +
                         dir.file("l2.json")).exit_code == 0);
    const RunResult res =
        run(dir, "hjb --problem insider --lift " + dir.file("l2.json") +
                     " --levels 4 --grid \"x=-1:1:11,a=-1:1:21\" --out " +
                     dir.file("field.csv"));
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("d=2") != std::string::npos);
}

TEST_CASE("oracle value matches the quadrature of the closed form") {
    TempDir dir;
    write_line_path(dir.file("p.csv"), 257);
    const RunResult res =
        run(dir, "insider-oracle --path " + dir.file("p.csv") +
                     " --epsilon 0.25 --t 0 --x 0 --a 0 --out " + dir.file("oracle.json"));
    REQUIRE(res.exit_code == 0);
    const auto report = nlohmann::json::parse(slurp(dir.file("oracle.json")));
    CHECK(std::abs(report.at("value").get<double>() - 1.0 / 3.0) < 1e-3);
}

TEST_CASE("degeneracy table scales with the frequency") {
    TempDir dir;
    const RunResult res = run(dir, "degeneracy --freqs 1,2,4 --epsilon 0.5 --nodes 2001 --out " +
                                       dir.file("deg.csv"));
    REQUIRE(res.exit_code == 0);
    std::ifstream in(dir.file("deg.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "freq,nodes,total_variation,value");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        const double freq = std::stod(cell);
        std::getline(ss, cell, ',');
        std::getline(ss, cell, ',');
        std::getline(ss, cell, ',');
        CHECK(std::stod(cell) == doctest::Approx(0.5 * 4.0 * freq));
        ++rows;
    }
    CHECK(rows == 3);
}

TEST_CASE("simulate then filter yields a positive covariance track") {
    TempDir dir;
    write_model(dir.file("model.json"));
    REQUIRE(run(dir, "simulate --model " + dir.file("model.json") +
                         " --seed 3 --steps 256 --out " + dir.file("sy.csv"))
                .exit_code == 0);
    CHECK(line_count(dir.file("sy.csv")) == 258);  // header + nodes

    REQUIRE(run(dir, "filter --model " + dir.file("model.json") + " --obs " +
                         dir.file("sy.csv") + " --out " + dir.file("qr.csv"))
                .exit_code == 0);
    std::ifstream in(dir.file("qr.csv"));
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "t,q1,R11");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto last_comma = line.rfind(',');
        CHECK(std::stod(line.substr(last_comma + 1)) > 0.0);
    }
}

TEST_CASE("penalty run reports a finite value at the horizon") {
    TempDir dir;
    write_model(dir.file("model.json"));
    write_spec(dir.file("spec.json"));
    REQUIRE(run(dir, "simulate --model " + dir.file("model.json") +
                         " --seed 3 --steps 256 --out " + dir.file("sy.csv"))
                .exit_code == 0);
    // lift only the observation columns
    REQUIRE(run(dir, "filter --model " + dir.file("model.json") + " --obs " +
                         dir.file("sy.csv") + " --out " + dir.file("qr.csv"))
                .exit_code == 0);
    {
        std::ifstream in(dir.file("sy.csv"));
        std::ofstream out(dir.file("y.csv"));
        std::string line;
        std::getline(in, line);
        out << "t,y1\n";
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto c1 = line.find(',');
            const auto c2 = line.find(',', c1 + 1);
            out << line.substr(0, c1) << line.substr(c2) << "\n";
        }
    }
    REQUIRE(run(dir, "lift --input " + dir.file("y.csv") + " --output " +
                         dir.file("ylift.json")).exit_code == 0);
    const RunResult res = run(dir, "penalty --model " + dir.file("model.json") + " --obs-lift " +
                                       dir.file("ylift.json") + " --spec " + dir.file("spec.json") +
                                       " --out " + dir.file("pen.json"));
    REQUIRE(res.exit_code == 0);
    const auto report = nlohmann::json::parse(slurp(dir.file("pen.json")));
    CHECK(std::isfinite(report.at("penalty").get<double>()));
    CHECK_FALSE(report.at("sentinel").get<bool>());
    CHECK(report.at("t").get<double>() == 1.0);
}

TEST_CASE("robust run emits report, heat map, and interval track") {
    TempDir dir;
    write_model(dir.file("model.json"));
    write_spec(dir.file("spec.json"));
    REQUIRE(run(dir, "lift --brownian --seed 21 --steps 64 --output " +
                         dir.file("ylift.json")).exit_code == 0);
    const RunResult res = run(
        dir, "robust --reduced " + dir.file("model.json") + " --obs-lift " +
                 dir.file("ylift.json") + " --spec " + dir.file("spec.json") +
                 " --grid \"mu=-2:2:9,sigma=0.1:2:8,alpha=-2:0:5\" --levels 4,8 --controls 5"
                 " --out " +
                 dir.file("report.json"));
    REQUIRE(res.exit_code == 0);
    const auto report = nlohmann::json::parse(slurp(dir.file("report.json")));
    const double lower = report.at("robust_interval").at("lower").get<double>();
    const double upper = report.at("robust_interval").at("upper").get<double>();
    CHECK(lower <= upper);
    CHECK(std::isfinite(report.at("expectation").at("value").get<double>()));
    CHECK(report.at("timing_seconds").get<double>() > 0.0);

    std::ifstream kappa(dir.file("report_kappa.csv"));
    std::string header;
    std::getline(kappa, header);
    CHECK(header == "mu,sigma,kappa,argmin_a");
    CHECK(line_count(dir.file("report_kappa.csv")) == 1 + 9 * 8);
    CHECK(line_count(dir.file("report_intervals.csv")) >= 2);
}

TEST_CASE("stability and apriori sweeps write one row per input") {
    TempDir dir;
    REQUIRE(run(dir, "stability --dynamics linear-scalar --steps 64 --scales 1e-3,1e-2 --out " +
                         dir.file("stab.csv"))
                .exit_code == 0);
    CHECK(line_count(dir.file("stab.csv")) == 3);

    REQUIRE(run(dir, "apriori --dynamics insider --steps 64 --amps 0.5,1,2 --out " +
                         dir.file("apr.csv"))
                .exit_code == 0);
    CHECK(line_count(dir.file("apr.csv")) == 4);
    std::ifstream in(dir.file("apr.csv"));
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "amp,x_pvar,x_remainder,psi_deriv_pvar,psi_remainder,gamma_pvar,driver_holder");
}

}  // TEST_SUITE
