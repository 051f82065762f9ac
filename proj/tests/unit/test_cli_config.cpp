#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "lstrack/config.hpp"
#include "lstrack/experiment.hpp"

using namespace lstrack;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("lstrack_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

int run_cli(const std::string& args) {
    const int status = std::system((std::string(LSTRACK_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config round trip") {
    for (const char* name : {"smoke.json", "megpc_burgers.json", "sop_burgers.json", "fgpc_burgers.json", "fgpc_burgers_fv.json", "co2_fgpc.json"}) {
        const auto cfg = load_config(std::string(LSTRACK_SOURCE_DIR) + "/configs/" + name);
        const auto j = config_to_json(cfg);
        CHECK(config_to_json(config_from_json(j)) == j);
    }
    const ExperimentConfig defaults;
    CHECK(config_to_json(config_from_json(nlohmann::json::object())) == config_to_json(defaults));
}

TEST_CASE("strict parsing") {
    CHECK_THROWS_KIND(config_from_json({{"bogus", 1}}), ErrorKind::ConfigError);
    CHECK_THROWS_KIND(config_from_json({{"tracker", {{"m0", "eleven"}}}}), ErrorKind::ConfigError);
    CHECK_THROWS_KIND(config_from_json({{"schema_version", 99}}), ErrorKind::ConfigError);
    CHECK_THROWS_KIND(config_from_json({{"method", "kriging"}}), ErrorKind::ConfigError);
    CHECK_THROWS_KIND(config_from_json({{"model", {{"name", "nope"}}}}), ErrorKind::ConfigError);
    CHECK_THROWS_KIND(load_config("/nonexistent/config.json"), ErrorKind::ConfigError);
}

TEST_CASE("environment overrides") {
    nlohmann::json j = {{"tracker", {{"m0", 11}}}};
    apply_env_overrides(j, {{"TRACKER__M0", "21"}, {"ID", "renamed"}});
    CHECK(j["tracker"]["m0"] == 21);
    CHECK(j["id"] == "renamed");
    const auto cfg = config_from_json(j);
    CHECK_THROWS_KIND(apply_env_overrides(j, {{"ID__X", "1"}}), ErrorKind::ConfigError);

    setenv("LSTRACK_TEST_ONLY__KEY", "1", 1);
    const auto env = environment_with_prefix("LSTRACK_TEST_ONLY");
    CHECK(env.at("__KEY") == "1");
    unsetenv("LSTRACK_TEST_ONLY__KEY");
    CHECK(cfg.tracker.m0 == 21);
    CHECK(cfg.id == "renamed");
}

TEST_CASE("metrics csv round trip") {
    MetricsRow r;
    r.experiment_id = "x";
    r.method = "SOP";
    r.order = 2;
    r.basis_size = 6;
    r.n_ev = 398;
    r.eps_l1 = 0.0123456789;
    r.eps_mu = std::nan("");
    r.eps_sigma = 1e-5;
    r.levels = 3;
    r.n_elements = 120;
    r.p = 0.215;
    r.solver = "lad";
    r.classifier = "computed";
    r.theta1 = 1e-3;
    std::stringstream ss;
    write_metrics_csv(ss, {r, r});
    const auto back = read_metrics_csv(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[0].eps_l1 == r.eps_l1);
    CHECK(std::isnan(back[0].eps_mu));
    CHECK(back[0].n_ev == r.n_ev);
    CHECK(back[0].levels == 3);
    CHECK(back[0].solver == "lad");
}

TEST_CASE("plot tables") {
    const auto empty = emit_plot_data({});
    REQUIRE(empty.size() == 3);
    for (const auto& [name, content] : empty) CHECK(count_lines(content) == 1);

    std::vector<MetricsRow> rows;
    for (int n = 1; n <= 3; ++n)
        for (const char* solver : {"lad", "ols"}) {
            MetricsRow r;
            r.method = "F-gPC";
            r.order = n;
            r.solver = solver;
            r.classifier = "computed";
            rows.push_back(r);
            r.method = "SOP";
            r.levels = 2 + n % 2;
            rows.push_back(r);
        }
    const auto out = emit_plot_data(rows);
    CHECK(count_lines(out.at("fgpc_series.csv")) == 7);
    CHECK(count_lines(out.at("sop_table.csv")) == 3);
    CHECK(out.at("sop_table.csv").rfind("levels,elements,N_ev,p,N1_LAD,N1_OLS,N2_LAD,N2_OLS,N3_LAD,N3_OLS\n", 0) == 0);
    CHECK(count_lines(out.at("megpc_table.csv")) == 1);
}

TEST_CASE("experiment runs are reproducible and never overwrite") {
    const auto root = scratch_dir("runs");
    auto cfg = load_config(std::string(LSTRACK_SOURCE_DIR) + "/configs/smoke.json");
    const auto a = run_experiment(cfg, root.string());
    const auto b = run_experiment(cfg, root.string());
    CHECK(a.run_dir != b.run_dir);
    REQUIRE(a.rows.size() == b.rows.size());
    REQUIRE_FALSE(a.rows.empty());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].eps_l1 == b.rows[i].eps_l1);
        CHECK(a.rows[i].eps_mu == b.rows[i].eps_mu);
    }
    for (const char* f : {"config.json", "metrics.csv", "events.jsonl", "manifest.json"})
        CHECK(fs::exists(fs::path(a.run_dir) / f));
    const auto manifest = nlohmann::json::parse(slurp(fs::path(a.run_dir) / "manifest.json"));
    CHECK(manifest["status"] == "ok");
    std::ifstream metrics(fs::path(a.run_dir) / "metrics.csv");
    CHECK(read_metrics_csv(metrics).size() == a.rows.size());

    cfg.workers = 2;
    const auto c = run_experiment(cfg, root.string());
    for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].eps_l1 == c.rows[i].eps_l1);
    fs::remove_all(root);
}

TEST_CASE("command line exit codes") {
    const auto root = scratch_dir("cli");
    const std::string smoke = std::string(LSTRACK_SOURCE_DIR) + "/configs/smoke.json";
    CHECK(run_cli("run " + smoke + " --quiet --out " + root.string()) == 0);

    const auto bad = root / "bad.json";
    std::ofstream(bad) << R"({"schema_version": 1, "unknown_key": true})";
    CHECK(run_cli("run " + bad.string() + " --out " + root.string()) == 2);
    const auto broken = root / "broken.json";
    std::ofstream(broken) << "{ not json";
    CHECK(run_cli("run " + broken.string() + " --out " + root.string()) == 2);

    // plot from the produced metrics
    std::string metrics;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.path().filename() == "metrics.csv") metrics = e.path().string();
    REQUIRE_FALSE(metrics.empty());
    CHECK(run_cli("plot " + metrics + " --out " + (root / "plots").string()) == 0);
    CHECK(fs::exists(root / "plots" / "fgpc_series.csv"));
    fs::remove_all(root);
}
