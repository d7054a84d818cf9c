#include <cmath>

#include "doctest.h"

#include "foam/errors.hpp"
#include "foam/runner.hpp"

using namespace foam;

namespace {

RunConfig small_quadratic(OptimizerChoice kind) {
    RunConfig cfg;
    cfg.seed = 1;
    cfg.task.kind = TaskKind::quadratic;
    cfg.task.rows = 2;
    cfg.task.cols = 4;
    cfg.optimizer_kind = kind;
    cfg.optimizer.alpha = 1.0;
    cfg.optimizer.level = 0;
    cfg.schedule.kind = ScheduleSpec::Kind::inv_sqrt;
    cfg.schedule.eta0 = 0.05;
    cfg.steps = 60;
    return cfg;
}

constexpr const char* kMlpConfigJson = R"({
  "schema": 1,
  "seed": 3,
  "task": {"kind": "mlp", "d_in": 8, "d_hidden": 8, "d_out": 2,
           "dataset_size": 64, "batch_size": 16},
  "optimizer": {"kind": "foam", "level": 1, "alpha": 1.0},
  "schedule": {"kind": "warmup_cosine", "lr_max": 0.02, "warmup_frac": 0.1},
  "steps": 40,
  "shadow_adam": true,
  "record_every": 5
})";

}  // namespace

TEST_CASE("config JSON round trip and validation") {
    const RunConfig cfg = run_config_from_json(kMlpConfigJson);
    CHECK(cfg.seed == 3);
    CHECK(cfg.task.kind == TaskKind::mlp);
    CHECK(cfg.task.seed == 3);
    CHECK(cfg.optimizer_kind == OptimizerChoice::foam);
    CHECK(cfg.optimizer.level == 1);
    CHECK(cfg.schedule.kind == ScheduleSpec::Kind::warmup_cosine);
    CHECK(cfg.record_every == 5);

    const RunConfig again = run_config_from_json(run_config_to_json(cfg));
    CHECK(config_hash(again) == config_hash(cfg));

    CHECK_THROWS_AS(run_config_from_json("{"), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(R"({"schema":1})"), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(R"({"schema":2,"task":{"kind":"mlp"},
        "optimizer":{"kind":"adam"},"schedule":{"kind":"inv_sqrt"}})"), ConfigError);

    // unknown keys are rejected with the offending field named
    try {
        run_config_from_json(R"({"schema":1,"seed":1,
            "task":{"kind":"quadratic","bogus":3},
            "optimizer":{"kind":"adam"},
            "schedule":{"kind":"inv_sqrt","eta0":0.1},"steps":5})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }

    CHECK_THROWS_AS(run_config_from_json(R"({"schema":1,"seed":1,
        "task":{"kind":"quadratic"},
        "optimizer":{"kind":"adam"},
        "schedule":{"kind":"inv_sqrt","eta0":0.1},
        "steps":5,"record_every":9})"), ConfigError);
}

TEST_CASE("config hashes are stable and sensitive") {
    const RunConfig a = small_quadratic(OptimizerChoice::adam);
    const RunConfig b = small_quadratic(OptimizerChoice::adam);
    CHECK(config_hash(a) == config_hash(b));
    RunConfig c = b;
    c.seed = 2;
    CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("identical configs give identical traces") {
    const RunConfig cfg = run_config_from_json(kMlpConfigJson);
    const RunResult r1 = run_experiment(cfg);
    const RunResult r2 = run_experiment(cfg);
    REQUIRE(r1.records.size() == r2.records.size());
    for (std::size_t i = 0; i < r1.records.size(); ++i) {
        CHECK(to_jsonl(r1.records[i]) == to_jsonl(r2.records[i]));
    }
    CHECK(summary_to_json(r1.summary) == summary_to_json(r2.summary));
}

TEST_CASE("foam level 0 run equals the adam run") {
    const RunResult adam = run_experiment(small_quadratic(OptimizerChoice::adam));
    const RunResult foam0 = run_experiment(small_quadratic(OptimizerChoice::foam));
    CHECK(std::fabs(adam.summary.final_loss - foam0.summary.final_loss) <= 1e-12);
    CHECK(std::fabs(adam.summary.min_grad_norm - foam0.summary.min_grad_norm) <= 1e-12);
    REQUIRE(adam.final_params.size() == foam0.final_params.size());
    for (std::size_t i = 0; i < adam.final_params.size(); ++i) {
        CHECK(max_abs_diff(adam.final_params[i].value, foam0.final_params[i].value) <=
              1e-12);
    }
}

TEST_CASE("shadow cosine is exactly 1 at level 0") {
    RunConfig cfg = small_quadratic(OptimizerChoice::foam);
    cfg.shadow_adam = true;
    const RunResult result = run_experiment(cfg);
    REQUIRE(result.summary.mean_cos_to_adam.has_value());
    CHECK(std::fabs(*result.summary.mean_cos_to_adam - 1.0) <= 1e-12);
    for (const auto& rec : result.records) {
        REQUIRE(rec.cos_to_adam.has_value());
        CHECK(std::fabs(*rec.cos_to_adam - 1.0) <= 1e-12);
    }
}

TEST_CASE("adam runs carry no residual diagnostics") {
    const RunResult result = run_experiment(small_quadratic(OptimizerChoice::adam));
    CHECK_FALSE(result.summary.mean_delta_energy_ratio.has_value());
    for (const auto& rec : result.records) {
        CHECK_FALSE(rec.delta_norm_ratio.has_value());
    }
}

TEST_CASE("residual ratio diagnostics stay within the unit bound") {
    RunConfig cfg = small_quadratic(OptimizerChoice::foam);
    cfg.optimizer.level = 2;
    const RunResult result = run_experiment(cfg);
    for (const auto& rec : result.records) {
        REQUIRE(rec.delta_norm_ratio.has_value());
        CHECK(*rec.delta_norm_ratio >= 0.0);
        CHECK(*rec.delta_norm_ratio <= 1.0 + 1e-12);
        CHECK(std::fabs(*rec.delta_energy_ratio -
                        *rec.delta_norm_ratio * *rec.delta_norm_ratio) <= 1e-12);
    }
}

TEST_CASE("foam_mini picks the rank-1-equivalent level") {
    RunConfig cfg = run_config_from_json(kMlpConfigJson);
    cfg.optimizer_kind = OptimizerChoice::foam_mini;
    const RunResult result = run_experiment(cfg);  // d_hidden 8 -> level 3
    CHECK(result.summary.final_loss >= 0.0);
    REQUIRE(result.summary.mean_delta_energy_ratio.has_value());
}

TEST_CASE("divergence raises NumericalError with the failing step") {
    RunConfig cfg = small_quadratic(OptimizerChoice::adam);
    cfg.schedule.eta0 = 1e200;
    cfg.steps = 10;
    try {
        run_experiment(cfg);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(e.step() >= 1);
        CHECK(e.step() <= 10);
    }
}

TEST_CASE("compare_runs pairs results and validates the task/seed contract") {
    const RunConfig a = small_quadratic(OptimizerChoice::adam);
    const CompareReport same = compare_runs(a, a);
    CHECK(same.final_loss_delta == 0.0);
    CHECK(same.summary_a.config_hash == same.summary_b.config_hash);
    REQUIRE(same.losses_a.size() == same.losses_b.size());
    for (std::size_t i = 0; i < same.losses_a.size(); ++i) {
        CHECK(same.losses_a[i].second == same.losses_b[i].second);
    }

    RunConfig b = a;
    b.seed = 99;
    CHECK_THROWS_AS(compare_runs(a, b), ConfigError);
    RunConfig c = a;
    c.task.cols = 8;
    CHECK_THROWS_AS(compare_runs(a, c), ConfigError);

    RunConfig foam2 = small_quadratic(OptimizerChoice::foam);
    foam2.optimizer.level = 2;
    const CompareReport report = compare_runs(a, foam2);
    CHECK(report.mean_delta_energy_b.has_value());
    CHECK_FALSE(report.mean_delta_energy_a.has_value());
    const std::string json_text = compare_report_to_json(report);
    CHECK(json_text.find("final_loss_delta") != std::string::npos);
}
