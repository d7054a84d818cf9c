#include "foam/optim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "foam/errors.hpp"
#include "foam/quant.hpp"

namespace foam {

void OptimizerConfig::validate() const {
    if (!(lr > 0.0)) throw ConfigError("optimizer.lr must be > 0");
    if (beta1 < 0.0 || beta1 >= 1.0) throw ConfigError("optimizer.beta1 must be in [0,1)");
    if (beta2 < 0.0 || beta2 >= 1.0) throw ConfigError("optimizer.beta2 must be in [0,1)");
    if (!(eps > 0.0)) throw ConfigError("optimizer.eps must be > 0");
    if (!(alpha > 0.0)) throw ConfigError("optimizer.alpha must be > 0");
    if (level < 0) throw ConfigError("optimizer.level must be >= 0");
    if (weight_decay < 0.0) throw ConfigError("optimizer.weight_decay must be >= 0");
}

namespace {

void check_grad(const Matrix& w, const Matrix& g, const char* where) {
    detail::check_same_shape(w, g, where);
    if (!g.all_finite()) throw DomainError(std::string(where) + ": non-finite gradient");
}

double denom_of(double v, const OptimizerConfig& cfg) {
    return cfg.denom == DenomConvention::sqrt_then_eps ? std::sqrt(v) + cfg.eps
                                                       : std::sqrt(v + cfg.eps);
}

void apply_weight_decay(Matrix& w, const OptimizerConfig& cfg, double lr_t) {
    if (cfg.weight_decay == 0.0) return;
    const double keep = 1.0 - lr_t * cfg.weight_decay;
    for (double& x : w.data()) x *= keep;
}

}  // namespace

Matrix adam_step(const Matrix& w, const Matrix& g, AdamState& state,
                 const OptimizerConfig& cfg, double lr_t) {
    check_grad(w, g, "adam_step");
    detail::check_same_shape(w, state.m, "adam_step state");
    Matrix out = w;
    apply_weight_decay(out, cfg, lr_t);
    auto& m = state.m.data();
    auto& v = state.v.data();
    const auto& gd = g.data();
    auto& wd = out.data();
    for (std::size_t i = 0; i < gd.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gd[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * (gd[i] * gd[i]);
    }
    if (cfg.quant8) {
        quant_roundtrip(state.m);
        quant_roundtrip(state.v);
    }
    for (std::size_t i = 0; i < gd.size(); ++i) {
        wd[i] -= lr_t * m[i] / denom_of(v[i], cfg);
    }
    ++state.step;
    detail::check_finite(out, "adam_step");
    return out;
}

FoamStepDetail foam_step_detailed(const Matrix& w, const Matrix& g, FoamState& state,
                                  const OptimizerConfig& cfg, double lr_t) {
    check_grad(w, g, "foam_step");
    if (g.cols() != state.spec.input_cols) {
        throw ShapeError("foam_step: gradient columns do not match fold spec");
    }
    const Matrix g_folded = fold(g, state.spec);
    const Matrix g_coarse = unfold(g_folded, state.spec);
    const Matrix res = elementwise(g, g_coarse, BinaryOp::sub);

    state.m_tilde = scale_add(state.m_tilde, cfg.beta1, g_folded, 1.0 - cfg.beta1);
    state.v_tilde = scale_add(state.v_tilde, cfg.beta2,
                              elementwise(g_folded, g_folded, BinaryOp::mul),
                              1.0 - cfg.beta2);
    if (cfg.quant8) {
        quant_roundtrip(state.m_tilde);
        quant_roundtrip(state.v_tilde);
    }

    Matrix m_eff = unfold(state.m_tilde, state.spec);
    Matrix v_eff = unfold(state.v_tilde, state.spec);
    if (cfg.residual_first) m_eff = elementwise(m_eff, res, BinaryOp::add);
    if (cfg.residual_second) {
        v_eff = elementwise(v_eff, elementwise(res, res, BinaryOp::mul), BinaryOp::add);
    }

    Matrix out = w;
    apply_weight_decay(out, cfg, lr_t);
    const double step_size = lr_t * cfg.alpha;
    auto& wd = out.data();
    const auto& md = m_eff.data();
    const auto& vd = v_eff.data();
    for (std::size_t i = 0; i < wd.size(); ++i) {
        wd[i] -= step_size * md[i] / denom_of(vd[i], cfg);
    }
    ++state.step;
    detail::check_finite(out, "foam_step");
    return FoamStepDetail{std::move(out), std::move(m_eff), std::move(v_eff)};
}

Matrix foam_step(const Matrix& w, const Matrix& g, FoamState& state,
                 const OptimizerConfig& cfg, double lr_t) {
    return foam_step_detailed(w, g, state, cfg, lr_t).w;
}

Matrix adam_mini_step(const Matrix& w, const Matrix& g, AdamMiniState& state,
                      const OptimizerConfig& cfg, double lr_t) {
    check_grad(w, g, "adam_mini_step");
    detail::check_same_shape(w, state.m, "adam_mini_step state");
    Matrix out = w;
    apply_weight_decay(out, cfg, lr_t);
    const auto& gd = g.data();
    double mean_sq = 0.0;
    for (double x : gd) mean_sq += x * x;
    mean_sq /= static_cast<double>(gd.size());
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * mean_sq;
    const double denom = denom_of(state.v, cfg);
    auto& m = state.m.data();
    auto& wd = out.data();
    for (std::size_t i = 0; i < gd.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gd[i];
        wd[i] -= lr_t * m[i] / denom;
    }
    ++state.step;
    detail::check_finite(out, "adam_mini_step");
    return out;
}

int foam_mini_level(std::size_t hidden_dim) {
    if (hidden_dim == 0) throw DomainError("foam_mini_level: hidden_dim must be >= 1");
    int level = 0;
    while ((std::size_t{1} << (level + 1)) <= hidden_dim) ++level;
    return level;
}

double lr_inv_sqrt(long t, double eta0) {
    if (t <= 0) throw DomainError("lr_inv_sqrt: t must be >= 1");
    return eta0 / std::sqrt(static_cast<double>(t));
}

double lr_warmup_cosine(long t, long total, double lr_max, double warmup_frac) {
    if (total <= 0) throw DomainError("lr_warmup_cosine: total must be >= 1");
    if (t < 0 || t > total) throw DomainError("lr_warmup_cosine: t out of [0, total]");
    if (warmup_frac <= 0.0 || warmup_frac >= 1.0) {
        throw DomainError("lr_warmup_cosine: warmup_frac must be in (0,1)");
    }
    const long warmup = static_cast<long>(
        std::ceil(warmup_frac * static_cast<double>(total)));
    if (t <= warmup) {
        return lr_max * static_cast<double>(t) / static_cast<double>(warmup);
    }
    const double progress =
        static_cast<double>(t - warmup) / static_cast<double>(total - warmup);
    return lr_max * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

ParamState init_state(const Param& p, int level) {
    switch (p.group.kind) {
        case ParamKind::foam:
            return FoamState::init(p.value.rows(), FoldSpec::make(level, p.value.cols()));
        case ParamKind::adam_mini:
            return AdamMiniState::init(p.value.rows(), p.value.cols());
        case ParamKind::adam:
            break;
    }
    return AdamState::init(p.value.rows(), p.value.cols());
}

void route_and_step(std::vector<Param>& params, const std::vector<Matrix>& grads,
                    std::vector<ParamState>& states, const OptimizerConfig& cfg,
                    double lr_t) {
    if (params.size() != grads.size() || params.size() != states.size()) {
        throw ShapeError("route_and_step: params/grads/states size mismatch");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        Param& p = params[i];
        const Matrix& g = grads[i];
        switch (p.group.kind) {
            case ParamKind::foam: {
                auto* st = std::get_if<FoamState>(&states[i]);
                if (!st) throw ConfigError("route_and_step: state kind mismatch for " +
                                           p.group.name);
                p.value = foam_step(p.value, g, *st, cfg, lr_t);
                break;
            }
            case ParamKind::adam_mini: {
                auto* st = std::get_if<AdamMiniState>(&states[i]);
                if (!st) throw ConfigError("route_and_step: state kind mismatch for " +
                                           p.group.name);
                p.value = adam_mini_step(p.value, g, *st, cfg, lr_t);
                break;
            }
            case ParamKind::adam: {
                auto* st = std::get_if<AdamState>(&states[i]);
                if (!st) throw ConfigError("route_and_step: state kind mismatch for " +
                                           p.group.name);
                p.value = adam_step(p.value, g, *st, cfg, lr_t);
                break;
            }
        }
    }
}

}  // namespace foam
