#pragma once

#include <string>
#include <vector>

#include "foam/optim.hpp"

namespace foam {

/// Serialized optimizer state: config plus per-parameter
/// {name, shape, kind, level, moments, step}. Doubles round-trip exactly
/// (shortest-representation JSON), so a reloaded snapshot resumes a run
/// bit-exactly. With quant8 on, folded/plain moments are stored as
/// codes + scales instead of doubles.
struct Snapshot {
    OptimizerConfig config;
    std::vector<std::string> names;
    std::vector<ParamState> states;
};

std::string snapshot_to_json(const OptimizerConfig& cfg,
                             const std::vector<Param>& params,
                             const std::vector<ParamState>& states);

Snapshot snapshot_from_json(const std::string& json_text);

void save_snapshot(const std::string& path, const OptimizerConfig& cfg,
                   const std::vector<Param>& params,
                   const std::vector<ParamState>& states);

Snapshot load_snapshot(const std::string& path);

}  // namespace foam
