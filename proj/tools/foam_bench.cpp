// foam-bench: run deterministic optimizer experiments, compare configs,
// check the fold/projector properties, and print memory estimates.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "foam/diagnostics.hpp"
#include "foam/errors.hpp"
#include "foam/memory_model.hpp"
#include "foam/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw foam::ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void apply_seed_override(foam::RunConfig& cfg) {
    const char* env = std::getenv("FOAM_SEED_OVERRIDE");
    if (!env || !*env) return;
    try {
        cfg.seed = std::stoull(env);
        cfg.task.seed = cfg.seed;
    } catch (const std::exception&) {
        throw foam::ConfigError("FOAM_SEED_OVERRIDE is not an integer");
    }
    std::cerr << "seed overridden to " << cfg.seed << " (FOAM_SEED_OVERRIDE)\n";
}

int cmd_bench(const std::string& config_path, const std::string& out_override) {
    foam::RunConfig cfg = foam::run_config_from_json(slurp(config_path));
    apply_seed_override(cfg);
    if (!out_override.empty()) cfg.output_path = out_override;
    if (cfg.output_path.empty()) cfg.output_path = "runs/" + foam::config_hash(cfg);

    foam::RunResult result = foam::run_experiment(cfg);
    foam::write_run_outputs(result, cfg.output_path);
    std::cout << foam::summary_to_json(result.summary) << '\n';
    std::cout << "trace: " << cfg.output_path << "/trace.jsonl\n";
    std::cout << "summary: " << cfg.output_path << "/summary.json\n";
    return 0;
}

int cmd_compare(const std::string& path_a, const std::string& path_b,
                const std::string& out_dir, bool as_json) {
    foam::RunConfig a = foam::run_config_from_json(slurp(path_a));
    foam::RunConfig b = foam::run_config_from_json(slurp(path_b));
    apply_seed_override(a);
    apply_seed_override(b);
    foam::CompareReport report = foam::compare_runs(a, b);
    const std::string json_text = foam::compare_report_to_json(report);
    if (as_json) {
        std::cout << json_text << '\n';
    } else {
        std::cout << "A final loss: " << report.summary_a.final_loss << '\n'
                  << "B final loss: " << report.summary_b.final_loss << '\n'
                  << "final loss delta (B - A): " << report.final_loss_delta << '\n';
        if (report.mean_cos_delta) {
            std::cout << "mean shadow-cosine delta (B - A): " << *report.mean_cos_delta
                      << '\n';
        }
        if (report.mean_delta_energy_a) {
            std::cout << "mean residual energy ratio A: " << *report.mean_delta_energy_a
                      << '\n';
        }
        if (report.mean_delta_energy_b) {
            std::cout << "mean residual energy ratio B: " << *report.mean_delta_energy_b
                      << '\n';
        }
    }
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream out(std::filesystem::path(out_dir) / "compare.json",
                          std::ios::binary);
        out << json_text << '\n';
        std::cout << "report: " << out_dir << "/compare.json\n";
    }
    return 0;
}

int cmd_props(const std::string& grid) {
    foam::PropsOptions opts;
    if (grid == "small") {
        opts.oracle_trials = 50;
        opts.split_draws = 1000;
        opts.mc_samples = 30;
        opts.mc_dim = 64;
    } else if (grid != "full") {
        throw foam::ConfigError("--grid must be small or full");
    }
    const foam::PropsReport report = foam::run_property_suite(opts);
    for (const auto& check : report.checks) {
        std::cout << (check.passed ? "[pass] " : "[FAIL] ") << check.name;
        if (!check.passed || check.detail.find('\n') == std::string::npos) {
            std::cout << " -- " << check.detail;
        }
        std::cout << '\n';
    }
    std::cout << (report.all_passed() ? "all properties hold\n"
                                      : "property failures detected\n");
    return report.all_passed() ? 0 : 1;
}

int cmd_memory(const std::string& manifest_path, std::vector<std::string> methods,
               bool as_json) {
    const auto manifest = foam::parse_manifest(slurp(manifest_path));
    if (methods.empty()) {
        methods = {"adam",   "muon",     "adam_mini", "galore",
                   "apollo", "foam:l=2", "foam_mini"};
    }
    std::vector<foam::MemoryReport> reports;
    reports.reserve(methods.size());
    for (const auto& m : methods) {
        reports.push_back(foam::estimate_with_method(manifest, foam::parse_method(m)));
    }
    if (as_json) {
        std::cout << foam::memory_reports_to_json(reports) << '\n';
    } else {
        std::cout << foam::render_memory_table(reports);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"foam-bench: folded-optimizer benchmarks, diagnostics and memory estimates"};
    app.require_subcommand(1);

    auto* bench = app.add_subcommand("bench", "run one configured experiment");
    std::string bench_config, bench_out;
    bench->add_option("--config", bench_config, "run config JSON")->required();
    bench->add_option("--out", bench_out, "output directory (overrides config)");

    auto* compare = app.add_subcommand("compare", "run two configs on one task/seed");
    std::string cfg_a, cfg_b, compare_out;
    bool compare_json = false;
    compare->add_option("--config-a", cfg_a, "first run config")->required();
    compare->add_option("--config-b", cfg_b, "second run config")->required();
    compare->add_option("--out", compare_out, "directory for compare.json");
    compare->add_flag("--json", compare_json, "print the full JSON report");

    auto* props = app.add_subcommand("props", "fold/projector property suite");
    std::string grid = "full";
    props->add_option("--grid", grid, "small|full (default full)");

    auto* memory = app.add_subcommand("memory", "optimizer memory estimates");
    std::string manifest_path, methods_csv;
    bool memory_json = false;
    memory->add_option("--manifest", manifest_path, "layer manifest JSON")->required();
    memory->add_option("--methods", methods_csv,
                       "comma-separated methods (default: all)");
    memory->add_flag("--json", memory_json, "print JSON instead of the table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (bench->parsed()) return cmd_bench(bench_config, bench_out);
        if (compare->parsed()) return cmd_compare(cfg_a, cfg_b, compare_out, compare_json);
        if (props->parsed()) return cmd_props(grid);
        if (memory->parsed()) {
            std::vector<std::string> methods;
            std::stringstream ss(methods_csv);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (!item.empty()) methods.push_back(item);
            }
            return cmd_memory(manifest_path, methods, memory_json);
        }
    } catch (const foam::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << " (step " << e.step() << ")\n";
        return kExitNumerical;
    } catch (const foam::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
