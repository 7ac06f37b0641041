#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "gradphi/error.hpp"
#include "gradphi/experiments.hpp"

using namespace gradphi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const char* env = std::getenv("GRADPHI_TEST_TMP");
    fs::path p = fs::path(env ? env : fs::temp_directory_path().string()) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

int cli(std::vector<std::string> args, std::string* out = nullptr) {
    args.insert(args.begin(), "gradphi");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream o, e;
    const int rc = run_cli(int(argv.size()), argv.data(), o, e);
    if (out) *out = o.str() + e.str();
    return rc;
}

void write(const fs::path& p, const nlohmann::json& j) { std::ofstream(p) << j.dump(); }

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config round trip") {
    ExperimentConfig c;
    c.experiment = "hydro";
    c.params = {{"Ns", {4, 8}}, {"potential", {{"kind", "quadratic"}}}};
    c.seed = 99;
    c.replicas = 3;
    const auto r = ExperimentConfig::from_json(c.to_json());
    CHECK(r.to_json() == c.to_json());
    CHECK_THROWS_AS(ExperimentConfig::from_json({{"schema", 7}}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json({{"replicas", 0}}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json({{"params", 3}}), ConfigError);
}

TEST_CASE("csv output uses 17 significant digits") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CsvTable t({"a", "b"});
    t.add_row({1.0, 0.5});
    CHECK(t.str() == "a,b\n1,0.5\n");
    CHECK_THROWS(t.add_row(std::vector<double>{1.0}));
}

TEST_CASE("corrector subcommand writes csv and summary") {
    const auto dir = scratch("cli_corrector");
    write(dir / "c.json", {{"seed", 3}, {"replicas", 4},
                           {"params", {{"potential", {{"kind", "quadratic"}}}, {"Ls", {2, 3}}}}});
    std::string msg;
    const int rc = cli({"corrector", "--config", (dir / "c.json").string(), "--out", (dir / "out").string()}, &msg);
    CHECK(rc == 0);
    CHECK(fs::exists(dir / "out" / "corrector_fluct.csv"));
    const auto s = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
    CHECK(s["seed"] == 3);
    CHECK(s["version"] == std::string(version()));
    CHECK(s.contains("wall_seconds"));
    CHECK(s["config"]["params"]["Ls"] == nlohmann::json({2, 3}));
    CHECK(s.contains("checks"));
    CHECK(slurp(dir / "out" / "corrector_fluct.csv").rfind("L,var_phi0,var_phi0_se,l2,l2_se,grad_q999,oracle\n", 0) == 0);
}

TEST_CASE("usage and configuration errors exit with 2") {
    const auto dir = scratch("cli_errors");
    write(dir / "h.json", {{"params", {{"Ns", {4, 8}}}}});
    CHECK(cli({"hydro", "--config", (dir / "h.json").string(), "--out", (dir / "o").string()}) == 2);
    CHECK(cli({"teleport", "--config", (dir / "h.json").string()}) == 2);
    CHECK(cli({"hydro"}) == 2);
    CHECK(cli({"hydro", "--config", (dir / "missing.json").string()}) == 2);
    std::ofstream(dir / "bad.json") << "{not json";
    CHECK(cli({"gff", "--config", (dir / "bad.json").string()}) == 2);
    write(dir / "x.json", {{"experiment", "gff"}});
    CHECK(cli({"hydro", "--config", (dir / "x.json").string()}) == 2);
    CHECK(cli({"--version"}) == 0);
}

TEST_CASE("same config and seed give byte-identical csv for any thread count") {
    const auto dir = scratch("cli_repro");
    write(dir / "f.json", {{"seed", 17}, {"replicas", 4},
                           {"params", {{"potential", {{"kind", "soft_quartic"}, {"a", 0.5}}}, {"L", 4}, {"ells", {1, 2, 4}},
                                       {"slope", {0.3, 0.0}}}}});
    cli({"flux-decay", "--config", (dir / "f.json").string(), "--out", (dir / "a").string(), "--threads", "1"});
    cli({"flux-decay", "--config", (dir / "f.json").string(), "--out", (dir / "b").string(), "--threads", "3"});
    const auto a = slurp(dir / "a" / "flux_decay.csv");
    CHECK(!a.empty());
    CHECK(a == slurp(dir / "b" / "flux_decay.csv"));
    cli({"flux-decay", "--config", (dir / "f.json").string(), "--out", (dir / "c").string(), "--seed", "18"});
    CHECK(a != slurp(dir / "c" / "flux_decay.csv"));
}

TEST_CASE("zero-noise hydro reduces to discretization error") {
    ExperimentConfig c;
    c.experiment = "hydro";
    c.params = {{"potential", {{"kind", "quadratic"}}}, {"Ns", {4, 8, 16}}, {"noise_scale", 0.0}};
    const auto out = run_experiment(c);
    CHECK(out.checks["discretization_decreasing"].get<bool>());
    for (const auto& r : out.results["rows"]) CHECK(r["error_mean"].get<double>() <= 1e-12);
}

TEST_CASE("experiment list") {
    const auto names = experiment_names();
    CHECK(names.size() == 10);
    ExperimentConfig c;
    c.experiment = "nope";
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
}

}
