#pragma once

#include <optional>
#include <string>
#include <vector>

#include "foam/diagnostics.hpp"
#include "foam/optim.hpp"
#include "foam/tasks.hpp"

namespace foam {

/// Which optimizer drives a run. "foam" folds weight matrices at the
/// configured level and runs biases on plain Adam; "foam_mini" picks
/// level = floor(log2(task hidden width)) instead; "adam_mini" shares one
/// second moment per weight matrix.
enum class OptimizerChoice { adam, foam, foam_mini, adam_mini };

struct ScheduleSpec {
    enum class Kind { inv_sqrt, warmup_cosine };
    Kind kind = Kind::inv_sqrt;
    double eta0 = 0.1;         // inv_sqrt
    double lr_max = 0.01;      // warmup_cosine
    double warmup_frac = 0.1;  // warmup_cosine
};

/// A fully-specified deterministic experiment (JSON schema v1).
struct RunConfig {
    std::uint64_t seed = 1;
    TaskSpec task;
    OptimizerChoice optimizer_kind = OptimizerChoice::adam;
    OptimizerConfig optimizer;
    ScheduleSpec schedule;
    long steps = 100;
    bool shadow_adam = false;
    long record_every = 1;
    std::string output_path;  // optional directory for trace/summary files

    void validate() const;  // throws ConfigError with a field-level message
};

struct RunSummary {
    double final_loss = 0.0;  // full-dataset loss after the last step
    double min_grad_norm = 0.0;
    std::optional<double> mean_delta_energy_ratio;
    std::optional<double> mean_cos_to_adam;
    long steps = 0;
    std::string config_hash;
};

struct RunResult {
    std::vector<StepRecord> records;
    RunSummary summary;
    std::vector<Param> final_params;  // trained weights, aligned with the task
};

/// Execute the run. Throws NumericalError (with the failing step) if the
/// loss goes non-finite.
RunResult run_experiment(const RunConfig& cfg);

RunConfig run_config_from_json(const std::string& json_text);
std::string run_config_to_json(const RunConfig& cfg);

/// FNV-1a hash of the canonical (sorted-key) config JSON, hex encoded.
std::string config_hash(const RunConfig& cfg);

std::string summary_to_json(const RunSummary& summary);

/// Write trace.jsonl and summary.json into `dir` (created if missing).
void write_run_outputs(const RunResult& result, const std::string& dir);

struct CompareReport {
    RunSummary summary_a, summary_b;
    double final_loss_delta = 0.0;               // b - a
    std::optional<double> mean_cos_delta;        // b - a
    std::optional<double> mean_delta_energy_a, mean_delta_energy_b;
    std::vector<std::pair<long, double>> losses_a, losses_b;  // recorded steps
};

/// Run both configs (they must share task and seed) and pair the results.
CompareReport compare_runs(const RunConfig& a, const RunConfig& b);

std::string compare_report_to_json(const CompareReport& report);

}  // namespace foam
