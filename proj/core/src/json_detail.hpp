// Internal JSON helpers shared by snapshot/runner. Not installed.
#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "json.hpp"

#include "foam/errors.hpp"
#include "foam/optim.hpp"

namespace foam::json_detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                const std::vector<std::string>& allowed,
                                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
        }
    }
}

inline std::string denom_name(DenomConvention d) {
    return d == DenomConvention::sqrt_then_eps ? "sqrt_then_eps" : "eps_inside_sqrt";
}

inline DenomConvention denom_from_name(const std::string& name) {
    if (name == "sqrt_then_eps") return DenomConvention::sqrt_then_eps;
    if (name == "eps_inside_sqrt") return DenomConvention::eps_inside_sqrt;
    throw ConfigError("optimizer.denom_convention must be sqrt_then_eps or eps_inside_sqrt");
}

inline nlohmann::json optimizer_config_to_json(const OptimizerConfig& cfg) {
    return nlohmann::json{{"lr", cfg.lr},
                          {"beta1", cfg.beta1},
                          {"beta2", cfg.beta2},
                          {"eps", cfg.eps},
                          {"alpha", cfg.alpha},
                          {"level", cfg.level},
                          {"residual_first", cfg.residual_first},
                          {"residual_second", cfg.residual_second},
                          {"denom_convention", denom_name(cfg.denom)},
                          {"weight_decay", cfg.weight_decay},
                          {"quant8", cfg.quant8}};
}

inline OptimizerConfig optimizer_config_from_json(const nlohmann::json& j,
                                                  const std::string& where) {
    reject_unknown_keys(j,
                        {"lr", "beta1", "beta2", "eps", "alpha", "level",
                         "residual_first", "residual_second", "denom_convention",
                         "weight_decay", "quant8", "kind"},
                        where);
    OptimizerConfig cfg;
    if (j.contains("lr")) cfg.lr = j["lr"].get<double>();
    if (j.contains("beta1")) cfg.beta1 = j["beta1"].get<double>();
    if (j.contains("beta2")) cfg.beta2 = j["beta2"].get<double>();
    if (j.contains("eps")) cfg.eps = j["eps"].get<double>();
    if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
    if (j.contains("level")) cfg.level = j["level"].get<int>();
    if (j.contains("residual_first")) cfg.residual_first = j["residual_first"].get<bool>();
    if (j.contains("residual_second"))
        cfg.residual_second = j["residual_second"].get<bool>();
    if (j.contains("denom_convention"))
        cfg.denom = denom_from_name(j["denom_convention"].get<std::string>());
    if (j.contains("weight_decay")) cfg.weight_decay = j["weight_decay"].get<double>();
    if (j.contains("quant8")) cfg.quant8 = j["quant8"].get<bool>();
    cfg.validate();
    return cfg;
}

}  // namespace foam::json_detail
