#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "lstrack/config.hpp"
#include "lstrack/error.hpp"
#include "lstrack/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int exit_code(lstrack::ErrorKind kind) {
    using lstrack::ErrorKind;
    switch (kind) {
        case ErrorKind::ConfigError:
        case ErrorKind::InvalidArgument:
        case ErrorKind::UnsupportedConfiguration:
            return kExitConfig;
        default:
            return kExitNumerical;
    }
}

void diagnose(const std::string& kind, const std::string& message) {
    std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Level-set discontinuity tracking and piecewise surrogate experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "runs";
    int workers = 0;
    long long seed = -1;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
    run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    run->add_option("--workers", workers, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "Output root; each run gets a fresh subdirectory");
    run->add_option("--seed", seed, "Seed (overrides the config)")->check(CLI::NonNegativeNumber);
    run->add_flag("--quiet", quiet, "Do not echo events to stderr");

    std::vector<std::string> metrics_files;
    std::string plot_out = ".";
    auto* plot = app.add_subcommand("plot", "Write plot-ready CSV tables from metrics files");
    plot->add_option("metrics", metrics_files, "metrics.csv files")->required();
    plot->add_option("--out", plot_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto env = lstrack::environment_with_prefix("LSTRACK_");
            nlohmann::json j;
            {
                std::ifstream in(config_path);
                j = nlohmann::json::parse(in, nullptr, false, true);
                if (j.is_discarded()) lstrack::fail(lstrack::ErrorKind::ConfigError, config_path + ": not valid JSON");
            }
            lstrack::apply_env_overrides(j, env);
            if (workers > 0) j["workers"] = workers;
            if (seed >= 0) j["seed"] = seed;
            const auto cfg = lstrack::config_from_json(j);
            const auto result = lstrack::run_experiment(cfg, out_dir, quiet ? nullptr : &std::cerr);
            std::cout << result.run_dir << '\n';
            for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
            return 0;
        }
        std::vector<lstrack::MetricsRow> rows;
        for (const auto& f : metrics_files) {
            std::ifstream in(f);
            if (!in) lstrack::fail(lstrack::ErrorKind::MissingData, "cannot open " + f);
            const auto part = lstrack::read_metrics_csv(in);
            rows.insert(rows.end(), part.begin(), part.end());
        }
        std::filesystem::create_directories(plot_out);
        for (const auto& [name, content] : lstrack::emit_plot_data(rows)) {
            std::ofstream(std::filesystem::path(plot_out) / name) << content;
        }
        return 0;
    } catch (const lstrack::Error& e) {
        diagnose(lstrack::to_string(e.kind()), e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        diagnose("internal", e.what());
        return kExitNumerical;
    }
}
