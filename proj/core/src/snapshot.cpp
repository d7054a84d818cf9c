#include "foam/snapshot.hpp"

#include <fstream>
#include <sstream>

#include "json_detail.hpp"

#include "foam/quant.hpp"

namespace foam {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m, bool quantized) {
    if (!quantized) return json(m.data());
    const auto blocks = quantize(std::span<const double>(m.data()));
    json scales = json::array();
    json codes = json::array();
    for (const auto& b : blocks) {
        scales.push_back(b.scale);
        for (std::int8_t c : b.codes) codes.push_back(static_cast<int>(c));
    }
    return json{{"block_len", kDefaultQuantBlockLen},
                {"scales", std::move(scales)},
                {"codes", std::move(codes)}};
}

Matrix matrix_from_json(const json& j, std::size_t rows, std::size_t cols,
                        bool quantized, const std::string& where) {
    Matrix m(rows, cols);
    if (!quantized) {
        if (!j.is_array() || j.size() != rows * cols) {
            throw ConfigError(where + ": bad dense tensor payload");
        }
        for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = j[i].get<double>();
        return m;
    }
    json_detail::reject_unknown_keys(j, {"block_len", "scales", "codes"}, where);
    const std::size_t block_len = j.at("block_len").get<std::size_t>();
    const auto& scales = j.at("scales");
    const auto& codes = j.at("codes");
    if (codes.size() != rows * cols) throw ConfigError(where + ": code count mismatch");
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double scale = scales.at(i / block_len).get<double>();
        m.data()[i] = static_cast<double>(codes[i].get<int>()) * scale;
    }
    return m;
}

}  // namespace

std::string snapshot_to_json(const OptimizerConfig& cfg,
                             const std::vector<Param>& params,
                             const std::vector<ParamState>& states) {
    if (params.size() != states.size()) {
        throw ConfigError("snapshot: params/states size mismatch");
    }
    json doc;
    doc["schema"] = 1;
    doc["config"] = json_detail::optimizer_config_to_json(cfg);
    json jparams = json::array();
    for (std::size_t i = 0; i < params.size(); ++i) {
        json jp;
        jp["name"] = params[i].group.name;
        jp["shape"] = {params[i].value.rows(), params[i].value.cols()};
        if (const auto* st = std::get_if<FoamState>(&states[i])) {
            jp["kind"] = "foam";
            jp["level"] = st->spec.level;
            jp["step"] = st->step;
            jp["m_tilde"] = matrix_to_json(st->m_tilde, cfg.quant8);
            jp["v_tilde"] = matrix_to_json(st->v_tilde, cfg.quant8);
        } else if (const auto* st2 = std::get_if<AdamMiniState>(&states[i])) {
            // adam_mini states are never quantized (scalar v has no blocks)
            jp["kind"] = "adam_mini";
            jp["step"] = st2->step;
            jp["m"] = matrix_to_json(st2->m, false);
            jp["v_scalar"] = st2->v;
        } else {
            const auto& st3 = std::get<AdamState>(states[i]);
            jp["kind"] = "adam";
            jp["step"] = st3.step;
            jp["m"] = matrix_to_json(st3.m, cfg.quant8);
            jp["v"] = matrix_to_json(st3.v, cfg.quant8);
        }
        jparams.push_back(std::move(jp));
    }
    doc["params"] = std::move(jparams);
    return doc.dump();
}

Snapshot snapshot_from_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("snapshot: invalid JSON: ") + e.what());
    }
    json_detail::reject_unknown_keys(doc, {"schema", "config", "params"}, "snapshot");
    if (doc.at("schema").get<int>() != 1) throw ConfigError("snapshot: unknown schema");
    Snapshot snap;
    snap.config = json_detail::optimizer_config_from_json(doc.at("config"), "snapshot.config");
    for (const auto& jp : doc.at("params")) {
        json_detail::reject_unknown_keys(
            jp, {"name", "shape", "kind", "level", "step", "m_tilde", "v_tilde", "m", "v",
                 "v_scalar"},
            "snapshot param");
        snap.names.push_back(jp.at("name").get<std::string>());
        const std::size_t rows = jp.at("shape").at(0).get<std::size_t>();
        const std::size_t cols = jp.at("shape").at(1).get<std::size_t>();
        const std::string kind = jp.at("kind").get<std::string>();
        const long step = jp.at("step").get<long>();
        const std::string where = "snapshot param " + snap.names.back();
        if (kind == "foam") {
            const int level = jp.at("level").get<int>();
            FoamState st = FoamState::init(rows, FoldSpec::make(level, cols));
            st.step = step;
            st.m_tilde = matrix_from_json(jp.at("m_tilde"), rows, st.spec.folded_cols,
                                          snap.config.quant8, where);
            st.v_tilde = matrix_from_json(jp.at("v_tilde"), rows, st.spec.folded_cols,
                                          snap.config.quant8, where);
            snap.states.emplace_back(std::move(st));
        } else if (kind == "adam_mini") {
            AdamMiniState st = AdamMiniState::init(rows, cols);
            st.step = step;
            st.m = matrix_from_json(jp.at("m"), rows, cols, false, where);
            st.v = jp.at("v_scalar").get<double>();
            snap.states.emplace_back(std::move(st));
        } else if (kind == "adam") {
            AdamState st = AdamState::init(rows, cols);
            st.step = step;
            st.m = matrix_from_json(jp.at("m"), rows, cols, snap.config.quant8, where);
            st.v = matrix_from_json(jp.at("v"), rows, cols, snap.config.quant8, where);
            snap.states.emplace_back(std::move(st));
        } else {
            throw ConfigError("snapshot: unknown state kind '" + kind + "'");
        }
    }
    return snap;
}

void save_snapshot(const std::string& path, const OptimizerConfig& cfg,
                   const std::vector<Param>& params,
                   const std::vector<ParamState>& states) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("snapshot: cannot open '" + path + "' for writing");
    out << snapshot_to_json(cfg, params, states) << '\n';
}

Snapshot load_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("snapshot: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return snapshot_from_json(ss.str());
}

}  // namespace foam
