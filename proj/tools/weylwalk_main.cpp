// Command-line frontend: config parsing, hypothesis validation, scenario
// execution and report aggregation. Exit codes: 0 all pass, 1 usage/config/
// hypothesis error, 2 scientific failure.
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "weylwalk/config.hpp"

namespace {

using weylwalk::config::Config;
namespace experiments = weylwalk::experiments;

void apply_env(Config& cfg) {
    if (const char* out = std::getenv("WEYLWALK_OUT")) cfg.out_dir = out;
    if (const char* seed = std::getenv("WEYLWALK_SEED")) {
        weylwalk::config::apply_override(cfg, std::string("seed=") + seed);
    }
}

int cmd_run(Config cfg, const std::string& which) {
    bool any_fail = false;
    bool any_refused = false;
    bool matched = false;
    for (const auto& sc : cfg.scenarios) {
        if (which != "all" && sc.name != which) continue;
        matched = true;
        const experiments::RunRecord rec = experiments::run_scenario(sc, cfg.registry);
        const auto paths = experiments::persist(rec, cfg.out_dir);
        if (rec.refused) {
            any_refused = true;
            std::cout << "[REFUSED] " << rec.scenario << ": " << rec.refusal_reason << "\n";
        } else {
            const bool ok = rec.pass();
            any_fail = any_fail || !ok;
            std::cout << (ok ? "[PASS] " : "[FAIL] ") << rec.scenario << " ("
                      << rec.rows.size() << " rows, " << static_cast<long>(rec.wall_ms)
                      << " ms) -> " << paths.csv_path << "\n";
        }
    }
    if (!matched) {
        std::cerr << "no scenario named '" << which << "' in config; known names:";
        for (const auto& n : experiments::scenario_names()) std::cerr << " " << n;
        std::cerr << "\n";
        return 1;
    }
    if (any_refused) return 1;
    return any_fail ? 2 : 0;
}

int cmd_validate(const Config& cfg) {
    bool all_ok = true;
    for (const auto& sc : cfg.scenarios) {
        const bool walk_scenario = sc.name == "diffusion_chernoff" ||
                                   sc.name == "oscillator_chernoff" || sc.name == "pmix_chernoff";
        if (!walk_scenario) {
            std::cout << sc.name << ": no theorem hypotheses to check\n";
            continue;
        }
        // dry-run the scenario's hypothesis gate with the cheapest settings
        experiments::Scenario probe = sc;
        probe.params["M"] = static_cast<int64_t>(2);
        probe.params["m"] = static_cast<int64_t>(1);
        probe.params["hypotheses_only"] = true;
        experiments::RunRecord rec;
        try {
            rec = experiments::run_scenario(probe, cfg.registry);
        } catch (const std::exception& ex) {
            std::cout << sc.name << ": error: " << ex.what() << "\n";
            all_ok = false;
            continue;
        }
        if (rec.refused) {
            std::cout << sc.name << ": hypothesis violated: " << rec.refusal_reason << "\n";
            all_ok = false;
        } else {
            std::cout << sc.name << ": hypotheses hold\n";
        }
    }
    return all_ok ? 0 : 1;
}

int cmd_report(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        std::cerr << "no runs found: '" << dir << "' is not a directory\n";
        return 1;
    }
    std::vector<fs::path> summaries;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".json") summaries.push_back(entry.path());
    std::sort(summaries.begin(), summaries.end());
    if (summaries.empty()) {
        std::cerr << "no runs found in '" << dir << "'\n";
        return 1;
    }

    int passed = 0, failed = 0;
    std::cout << "| scenario | key metric | verdict |\n";
    std::cout << "|---|---|---|\n";
    for (const auto& path : summaries) {
        std::ifstream in(path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const std::exception&) {
            continue;
        }
        const std::string scenario = j.value("scenario", path.stem().string());
        std::string metric = "-";
        if (j.contains("key_metric")) {
            const auto& km = j["key_metric"];
            metric = km.value("label", "-") + " = " +
                     nlohmann::json(km.value("value", 0.0)).dump();
        }
        std::string verdict;
        if (j.value("refused", false)) {
            verdict = "refused: " + j.value("refusal_reason", std::string("?"));
            ++failed;
        } else if (j.value("pass", false)) {
            verdict = "pass";
            ++passed;
        } else {
            verdict = "fail";
            ++failed;
        }
        std::cout << "| " << scenario << " | " << metric << " | " << verdict << " |\n";
    }
    std::cout << "\n" << passed << " passed, " << failed << " failed or refused\n";
    return 0; // reporting never fails on verdicts
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"shift-invariant-measure quantum walk simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string scenario = "all";
    std::string out_dir;
    std::vector<std::string> overrides;
    long long seed = -1;

    auto add_config_opts = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "TOML config file (bundled defaults if omitted)");
        cmd->add_option("--seed", seed, "override the top-level seed");
        cmd->add_option("--out", out_dir, "override the output directory");
        cmd->add_option("--override", overrides,
                        "key=value override; 'tolerances.eps', '<scenario>.key' or a bare key "
                        "applied to all scenarios")
            ->take_all();
    };

    CLI::App* run = app.add_subcommand("run", "run scenarios and persist CSV/JSON records");
    add_config_opts(run);
    run->add_option("--scenario", scenario, "scenario name or 'all'");

    CLI::App* validate = app.add_subcommand("validate", "check theorem hypotheses per scenario");
    add_config_opts(validate);

    std::string report_dir = "runs";
    CLI::App* report = app.add_subcommand("report", "aggregate run summaries into a table");
    report->add_option("--out", report_dir, "directory containing run summaries");

    CLI::App* list = app.add_subcommand("list", "list known scenarios");
    add_config_opts(list);

    CLI11_PARSE(app, argc, argv);

    try {
        if (report->parsed()) return cmd_report(report_dir);

        Config cfg = config_path.empty() ? weylwalk::config::default_config()
                                         : weylwalk::config::load(config_path);
        apply_env(cfg);
        if (seed >= 0)
            weylwalk::config::apply_override(cfg, "seed=" + std::to_string(seed));
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        for (const auto& o : overrides) weylwalk::config::apply_override(cfg, o);

        if (list->parsed()) {
            std::cout << "built-in scenarios:\n";
            for (const auto& n : experiments::scenario_names()) std::cout << "  " << n << "\n";
            std::cout << "configured:\n";
            for (const auto& sc : cfg.scenarios) std::cout << "  " << sc.name << "\n";
            return 0;
        }
        if (validate->parsed()) return cmd_validate(cfg);
        return cmd_run(std::move(cfg), scenario);
    } catch (const weylwalk::config::ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
