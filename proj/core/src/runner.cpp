#include "foam/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "json_detail.hpp"

#include "foam/errors.hpp"

namespace foam {

namespace {

using nlohmann::json;

std::string optimizer_choice_name(OptimizerChoice c) {
    switch (c) {
        case OptimizerChoice::adam: return "adam";
        case OptimizerChoice::foam: return "foam";
        case OptimizerChoice::foam_mini: return "foam_mini";
        case OptimizerChoice::adam_mini: return "adam_mini";
    }
    return "?";
}

OptimizerChoice optimizer_choice_from_name(const std::string& name) {
    if (name == "adam") return OptimizerChoice::adam;
    if (name == "foam") return OptimizerChoice::foam;
    if (name == "foam_mini") return OptimizerChoice::foam_mini;
    if (name == "adam_mini") return OptimizerChoice::adam_mini;
    throw ConfigError("optimizer.kind must be adam, foam, foam_mini or adam_mini");
}

std::string task_kind_name(TaskKind k) {
    switch (k) {
        case TaskKind::quadratic: return "quadratic";
        case TaskKind::logistic: return "logistic";
        case TaskKind::mlp: return "mlp";
    }
    return "?";
}

TaskKind task_kind_from_name(const std::string& name) {
    if (name == "quadratic") return TaskKind::quadratic;
    if (name == "logistic") return TaskKind::logistic;
    if (name == "mlp") return TaskKind::mlp;
    throw ConfigError("task.kind must be quadratic, logistic or mlp");
}

json task_to_json(const TaskSpec& t) {
    json j;
    j["kind"] = task_kind_name(t.kind);
    switch (t.kind) {
        case TaskKind::quadratic:
            j["rows"] = t.rows;
            j["cols"] = t.cols;
            j["noise_std"] = t.noise_std;
            break;
        case TaskKind::logistic:
            j["features"] = t.features;
            break;
        case TaskKind::mlp:
            j["d_in"] = t.d_in;
            j["d_hidden"] = t.d_hidden;
            j["d_out"] = t.d_out;
            break;
    }
    j["dataset_size"] = t.dataset_size;
    j["batch_size"] = t.batch_size;
    return j;
}

TaskSpec task_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("task: expected an object");
    if (!j.contains("kind")) throw ConfigError("task.kind is required");
    TaskSpec t;
    t.kind = task_kind_from_name(j["kind"].get<std::string>());
    switch (t.kind) {
        case TaskKind::quadratic:
            json_detail::reject_unknown_keys(
                j, {"kind", "rows", "cols", "noise_std", "dataset_size", "batch_size"},
                "task");
            if (j.contains("rows")) t.rows = j["rows"].get<std::size_t>();
            if (j.contains("cols")) t.cols = j["cols"].get<std::size_t>();
            if (j.contains("noise_std")) t.noise_std = j["noise_std"].get<double>();
            break;
        case TaskKind::logistic:
            json_detail::reject_unknown_keys(
                j, {"kind", "features", "dataset_size", "batch_size"}, "task");
            if (j.contains("features")) t.features = j["features"].get<std::size_t>();
            break;
        case TaskKind::mlp:
            json_detail::reject_unknown_keys(
                j, {"kind", "d_in", "d_hidden", "d_out", "dataset_size", "batch_size"},
                "task");
            if (j.contains("d_in")) t.d_in = j["d_in"].get<std::size_t>();
            if (j.contains("d_hidden")) t.d_hidden = j["d_hidden"].get<std::size_t>();
            if (j.contains("d_out")) t.d_out = j["d_out"].get<std::size_t>();
            break;
    }
    if (j.contains("dataset_size")) t.dataset_size = j["dataset_size"].get<std::size_t>();
    if (j.contains("batch_size")) t.batch_size = j["batch_size"].get<std::size_t>();
    return t;
}

json schedule_to_json(const ScheduleSpec& s) {
    if (s.kind == ScheduleSpec::Kind::inv_sqrt) {
        return json{{"kind", "inv_sqrt"}, {"eta0", s.eta0}};
    }
    return json{{"kind", "warmup_cosine"},
                {"lr_max", s.lr_max},
                {"warmup_frac", s.warmup_frac}};
}

ScheduleSpec schedule_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind")) {
        throw ConfigError("schedule: expected an object with 'kind'");
    }
    ScheduleSpec s;
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "inv_sqrt") {
        json_detail::reject_unknown_keys(j, {"kind", "eta0"}, "schedule");
        if (j.contains("eta0")) s.eta0 = j["eta0"].get<double>();
        s.kind = ScheduleSpec::Kind::inv_sqrt;
        if (!(s.eta0 > 0.0)) throw ConfigError("schedule.eta0 must be > 0");
    } else if (kind == "warmup_cosine") {
        json_detail::reject_unknown_keys(j, {"kind", "lr_max", "warmup_frac"}, "schedule");
        if (j.contains("lr_max")) s.lr_max = j["lr_max"].get<double>();
        if (j.contains("warmup_frac")) s.warmup_frac = j["warmup_frac"].get<double>();
        s.kind = ScheduleSpec::Kind::warmup_cosine;
        if (!(s.lr_max > 0.0)) throw ConfigError("schedule.lr_max must be > 0");
        if (s.warmup_frac <= 0.0 || s.warmup_frac >= 1.0) {
            throw ConfigError("schedule.warmup_frac must be in (0,1)");
        }
    } else {
        throw ConfigError("schedule.kind must be inv_sqrt or warmup_cosine");
    }
    return s;
}

double schedule_lr(const ScheduleSpec& s, long t, long total) {
    return s.kind == ScheduleSpec::Kind::inv_sqrt
               ? lr_inv_sqrt(t, s.eta0)
               : lr_warmup_cosine(t, total, s.lr_max, s.warmup_frac);
}

json run_config_to_json_obj(const RunConfig& cfg) {
    json j;
    j["schema"] = 1;
    j["seed"] = cfg.seed;
    j["task"] = task_to_json(cfg.task);
    json opt = json_detail::optimizer_config_to_json(cfg.optimizer);
    opt.erase("lr");  // the schedule owns the step size
    opt["kind"] = optimizer_choice_name(cfg.optimizer_kind);
    j["optimizer"] = std::move(opt);
    j["schedule"] = schedule_to_json(cfg.schedule);
    j["steps"] = cfg.steps;
    j["shadow_adam"] = cfg.shadow_adam;
    j["record_every"] = cfg.record_every;
    if (!cfg.output_path.empty()) j["output_path"] = cfg.output_path;
    return j;
}

}  // namespace

void RunConfig::validate() const {
    task.validate();
    optimizer.validate();
    if (steps < 1) throw ConfigError("steps must be >= 1");
    if (record_every < 1 || record_every > steps) {
        throw ConfigError("record_every must be in [1, steps]");
    }
}

RunConfig run_config_from_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    json_detail::reject_unknown_keys(doc,
                                     {"schema", "seed", "task", "optimizer", "schedule",
                                      "steps", "shadow_adam", "record_every",
                                      "output_path"},
                                     "config");
    if (!doc.contains("schema") || !doc["schema"].is_number_integer() ||
        doc["schema"].get<int>() != 1) {
        throw ConfigError("config.schema must be 1");
    }
    RunConfig cfg;
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (!doc.contains("task")) throw ConfigError("config.task is required");
    cfg.task = task_from_json(doc["task"]);
    if (!doc.contains("optimizer") || !doc["optimizer"].is_object()) {
        throw ConfigError("config.optimizer is required");
    }
    if (!doc["optimizer"].contains("kind")) {
        throw ConfigError("config.optimizer.kind is required");
    }
    cfg.optimizer_kind =
        optimizer_choice_from_name(doc["optimizer"]["kind"].get<std::string>());
    cfg.optimizer = json_detail::optimizer_config_from_json(doc["optimizer"], "optimizer");
    if (!doc.contains("schedule")) throw ConfigError("config.schedule is required");
    cfg.schedule = schedule_from_json(doc["schedule"]);
    // keep the config's base rate in sync with the schedule
    cfg.optimizer.lr = cfg.schedule.kind == ScheduleSpec::Kind::inv_sqrt
                           ? cfg.schedule.eta0
                           : cfg.schedule.lr_max;
    if (doc.contains("steps")) cfg.steps = doc["steps"].get<long>();
    if (doc.contains("shadow_adam")) cfg.shadow_adam = doc["shadow_adam"].get<bool>();
    if (doc.contains("record_every")) cfg.record_every = doc["record_every"].get<long>();
    if (doc.contains("output_path")) cfg.output_path = doc["output_path"].get<std::string>();
    cfg.task.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
    return run_config_to_json_obj(cfg).dump(2);
}

std::string config_hash(const RunConfig& cfg) {
    json j = run_config_to_json_obj(cfg);
    j.erase("output_path");  // identifies the experiment, not where it writes
    const std::string canonical = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

RunResult run_experiment(const RunConfig& cfg_in) {
    RunConfig cfg = cfg_in;
    cfg.task.seed = cfg.seed;
    cfg.validate();

    TaskState task = make_task(cfg.task);

    // Re-kind parameters for the chosen optimizer; tasks tag weight matrices
    // foam-kind and biases adam-kind by construction.
    OptimizerConfig eff = cfg.optimizer;
    switch (cfg.optimizer_kind) {
        case OptimizerChoice::adam:
            for (auto& p : task.params) {
                p.group.kind = ParamKind::adam;
                p.group.applies_alpha = false;
            }
            break;
        case OptimizerChoice::adam_mini:
            for (auto& p : task.params) {
                if (p.group.kind == ParamKind::foam) p.group.kind = ParamKind::adam_mini;
                p.group.applies_alpha = false;
            }
            break;
        case OptimizerChoice::foam_mini:
            eff.level = foam_mini_level(hidden_dim(cfg.task));
            break;
        case OptimizerChoice::foam:
            break;
    }

    std::vector<ParamState> states;
    states.reserve(task.params.size());
    for (const auto& p : task.params) states.push_back(init_state(p, eff.level));

    // Shadow Adam: parallel full-Adam moments fed the same gradients, never
    // applied to the weights; used only for the update-direction cosine.
    std::vector<AdamState> shadow;
    if (cfg.shadow_adam) {
        for (const auto& p : task.params) {
            shadow.push_back(AdamState::init(p.value.rows(), p.value.cols()));
        }
    }

    RunResult result;
    double min_grad_norm = std::numeric_limits<double>::infinity();
    double sum_energy_ratio = 0.0;
    long energy_count = 0;
    double sum_cos = 0.0;
    long cos_count = 0;

    for (long t = 1; t <= cfg.steps; ++t) {
        std::vector<std::size_t> batch;
        if (cfg.task.kind == TaskKind::quadratic) {
            batch = {0};  // full objective; batching does not apply
        } else {
            batch = draw_batch(task);
        }
        const double lr_t = schedule_lr(cfg.schedule, t, cfg.steps);
        LossAndGrad lg = loss_and_grad(task, batch);
        if (!std::isfinite(lg.loss)) {
            throw NumericalError("non-finite loss at step " + std::to_string(t), t);
        }

        double grad_sq = 0.0;
        for (const auto& g : lg.grads) grad_sq += dot(g, g);
        const double grad_norm = std::sqrt(grad_sq);
        min_grad_norm = std::min(min_grad_norm, grad_norm);

        // residual ratios over folded parameters (global energy view)
        std::optional<double> delta_norm_ratio, delta_energy_ratio;
        double res_sq = 0.0, foam_sq = 0.0;
        bool any_foam = false;
        for (std::size_t i = 0; i < task.params.size(); ++i) {
            if (task.params[i].group.kind != ParamKind::foam) continue;
            any_foam = true;
            const auto& st = std::get<FoamState>(states[i]);
            const Matrix res = residual(lg.grads[i], st.spec);
            res_sq += dot(res, res);
            foam_sq += dot(lg.grads[i], lg.grads[i]);
        }
        if (any_foam && foam_sq > 0.0) {
            delta_norm_ratio = std::sqrt(res_sq / foam_sq);
            delta_energy_ratio = res_sq / foam_sq;
            sum_energy_ratio += *delta_energy_ratio;
            ++energy_count;
        }

        std::optional<double> cos_to_adam;
        double cos_sum_step = 0.0;
        long cos_params = 0;

        for (std::size_t i = 0; i < task.params.size(); ++i) {
            Param& p = task.params[i];
            const Matrix& g = lg.grads[i];
            Matrix foam_direction;
            switch (p.group.kind) {
                case ParamKind::foam: {
                    auto& st = std::get<FoamState>(states[i]);
                    FoamStepDetail sd = foam_step_detailed(p.value, g, st, eff, lr_t);
                    p.value = std::move(sd.w);
                    if (cfg.shadow_adam) {
                        foam_direction = Matrix(sd.m_eff.rows(), sd.m_eff.cols());
                        for (std::size_t k = 0; k < foam_direction.size(); ++k) {
                            const double v = sd.v_eff.data()[k];
                            const double denom =
                                eff.denom == DenomConvention::sqrt_then_eps
                                    ? std::sqrt(v) + eff.eps
                                    : std::sqrt(v + eff.eps);
                            foam_direction.data()[k] = sd.m_eff.data()[k] / denom;
                        }
                    }
                    break;
                }
                case ParamKind::adam_mini: {
                    auto& st = std::get<AdamMiniState>(states[i]);
                    p.value = adam_mini_step(p.value, g, st, eff, lr_t);
                    break;
                }
                case ParamKind::adam: {
                    auto& st = std::get<AdamState>(states[i]);
                    p.value = adam_step(p.value, g, st, eff, lr_t);
                    break;
                }
            }
            if (cfg.shadow_adam) {
                AdamState& sh = shadow[i];
                auto& m = sh.m.data();
                auto& v = sh.v.data();
                const auto& gd = g.data();
                for (std::size_t k = 0; k < gd.size(); ++k) {
                    m[k] = eff.beta1 * m[k] + (1.0 - eff.beta1) * gd[k];
                    v[k] = eff.beta2 * v[k] + (1.0 - eff.beta2) * (gd[k] * gd[k]);
                }
                ++sh.step;
                if (p.group.kind == ParamKind::foam) {
                    Matrix shadow_direction(sh.m.rows(), sh.m.cols());
                    for (std::size_t k = 0; k < shadow_direction.size(); ++k) {
                        const double denom = eff.denom == DenomConvention::sqrt_then_eps
                                                 ? std::sqrt(v[k]) + eff.eps
                                                 : std::sqrt(v[k] + eff.eps);
                        shadow_direction.data()[k] = m[k] / denom;
                    }
                    if (frobenius_norm(foam_direction) > 0.0 &&
                        frobenius_norm(shadow_direction) > 0.0) {
                        cos_sum_step += cosine_similarity(foam_direction, shadow_direction);
                        ++cos_params;
                    }
                }
            }
        }
        if (cfg.shadow_adam && cos_params > 0) {
            cos_to_adam = cos_sum_step / static_cast<double>(cos_params);
            sum_cos += *cos_to_adam;
            ++cos_count;
        }

        if (t % cfg.record_every == 0 || t == cfg.steps) {
            StepRecord rec;
            rec.step = t;
            rec.loss = lg.loss;
            rec.grad_norm = grad_norm;
            rec.lr_t = lr_t;
            rec.delta_norm_ratio = delta_norm_ratio;
            rec.delta_energy_ratio = delta_energy_ratio;
            rec.cos_to_adam = cos_to_adam;
            result.records.push_back(rec);
        }
    }

    result.summary.final_loss = full_loss(task);
    result.summary.min_grad_norm = min_grad_norm;
    if (energy_count > 0) {
        result.summary.mean_delta_energy_ratio =
            sum_energy_ratio / static_cast<double>(energy_count);
    }
    if (cos_count > 0) {
        result.summary.mean_cos_to_adam = sum_cos / static_cast<double>(cos_count);
    }
    result.summary.steps = cfg.steps;
    result.summary.config_hash = config_hash(cfg_in);
    result.final_params = task.params;
    if (!std::isfinite(result.summary.final_loss)) {
        throw NumericalError("non-finite final loss", cfg.steps);
    }
    return result;
}

std::string summary_to_json(const RunSummary& summary) {
    json j;
    j["schema"] = 1;
    j["final_loss"] = summary.final_loss;
    j["min_grad_norm"] = summary.min_grad_norm;
    j["mean_delta_energy_ratio"] = summary.mean_delta_energy_ratio
                                       ? json(*summary.mean_delta_energy_ratio)
                                       : json();
    j["mean_cos_to_adam"] =
        summary.mean_cos_to_adam ? json(*summary.mean_cos_to_adam) : json();
    j["steps"] = summary.steps;
    j["config_hash"] = summary.config_hash;
    return j.dump(2);
}

void write_run_outputs(const RunResult& result, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path trace_path = fs::path(dir) / "trace.jsonl";
    std::ofstream trace(trace_path, std::ios::binary);
    if (!trace) throw ConfigError("cannot write " + trace_path.string());
    for (const auto& rec : result.records) trace << to_jsonl(rec) << '\n';
    const fs::path summary_path = fs::path(dir) / "summary.json";
    std::ofstream summary(summary_path, std::ios::binary);
    if (!summary) throw ConfigError("cannot write " + summary_path.string());
    summary << summary_to_json(result.summary) << '\n';
}

CompareReport compare_runs(const RunConfig& a, const RunConfig& b) {
    const std::string task_a = task_to_json(a.task).dump();
    const std::string task_b = task_to_json(b.task).dump();
    if (task_a != task_b || a.seed != b.seed) {
        throw ConfigError("compare: configs must share task and seed");
    }
    CompareReport report;
    RunResult ra = run_experiment(a);
    RunResult rb = run_experiment(b);
    report.summary_a = ra.summary;
    report.summary_b = rb.summary;
    report.final_loss_delta = rb.summary.final_loss - ra.summary.final_loss;
    if (ra.summary.mean_cos_to_adam && rb.summary.mean_cos_to_adam) {
        report.mean_cos_delta = *rb.summary.mean_cos_to_adam - *ra.summary.mean_cos_to_adam;
    }
    report.mean_delta_energy_a = ra.summary.mean_delta_energy_ratio;
    report.mean_delta_energy_b = rb.summary.mean_delta_energy_ratio;
    for (const auto& rec : ra.records) report.losses_a.emplace_back(rec.step, rec.loss);
    for (const auto& rec : rb.records) report.losses_b.emplace_back(rec.step, rec.loss);
    return report;
}

std::string compare_report_to_json(const CompareReport& report) {
    json j;
    j["schema"] = 1;
    j["a"] = json::parse(summary_to_json(report.summary_a));
    j["b"] = json::parse(summary_to_json(report.summary_b));
    j["final_loss_delta"] = report.final_loss_delta;
    j["mean_cos_delta"] =
        report.mean_cos_delta ? json(*report.mean_cos_delta) : json();
    j["mean_delta_energy_a"] =
        report.mean_delta_energy_a ? json(*report.mean_delta_energy_a) : json();
    j["mean_delta_energy_b"] =
        report.mean_delta_energy_b ? json(*report.mean_delta_energy_b) : json();
    auto curve = [](const std::vector<std::pair<long, double>>& xs) {
        json arr = json::array();
        for (const auto& [step, loss] : xs) arr.push_back({{"step", step}, {"loss", loss}});
        return arr;
    };
    j["losses_a"] = curve(report.losses_a);
    j["losses_b"] = curve(report.losses_b);
    return j.dump(2);
}

}  // namespace foam
