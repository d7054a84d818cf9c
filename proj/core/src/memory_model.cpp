#include "foam/memory_model.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "foam/errors.hpp"

namespace foam {

std::uint64_t state_elements(const Routing& routed, std::uint64_t m, std::uint64_t n) {
    switch (routed.kind) {
        case RoutedKind::adam:
            return 2 * m * n;
        case RoutedKind::muon:
        case RoutedKind::adam_mini:
            return m * n;
        case RoutedKind::galore:
        case RoutedKind::apollo: {
            const std::uint64_t lo = std::min(m, n);
            const std::uint64_t hi = std::max(m, n);
            const std::uint64_t r = routed.rank > 0 ? routed.rank : std::max<std::uint64_t>(1, lo / 4);
            if (r > lo) {
                throw ConfigError("rank " + std::to_string(r) + " exceeds min(m,n)=" +
                                  std::to_string(lo));
            }
            return lo * r + 2 * hi * r;
        }
        case RoutedKind::foam: {
            if (routed.level < 0 || routed.level >= 63) {
                throw ConfigError("foam level out of range");
            }
            const std::uint64_t block = std::uint64_t{1} << routed.level;
            return 2 * m * ((n + block - 1) / block);
        }
        case RoutedKind::foam_mini:
            return 2 * m;
    }
    return 0;
}

std::string routed_kind_name(RoutedKind kind) {
    switch (kind) {
        case RoutedKind::adam: return "adam";
        case RoutedKind::muon: return "muon";
        case RoutedKind::adam_mini: return "adam_mini";
        case RoutedKind::galore: return "galore";
        case RoutedKind::apollo: return "apollo";
        case RoutedKind::foam: return "foam";
        case RoutedKind::foam_mini: return "foam_mini";
    }
    return "?";
}

std::string table_formula(RoutedKind kind) {
    switch (kind) {
        case RoutedKind::adam: return "2mn";
        case RoutedKind::muon: return "mn";
        case RoutedKind::adam_mini: return "mn";
        case RoutedKind::galore:
        case RoutedKind::apollo: return "mr + 2nr (m <= n; swapped otherwise)";
        case RoutedKind::foam: return "mn / 2^(l-1)";
        case RoutedKind::foam_mini: return "2m";
    }
    return "?";
}

namespace {

std::string method_label(const Routing& r) {
    std::ostringstream os;
    os << routed_kind_name(r.kind);
    if (r.kind == RoutedKind::foam) os << "(l=" << r.level << ")";
    if ((r.kind == RoutedKind::galore || r.kind == RoutedKind::apollo)) {
        if (r.rank > 0) {
            os << "(r=" << r.rank << ")";
        } else {
            os << "(r=dim/4)";
        }
    }
    return os.str();
}

MemoryReport estimate_impl(const std::vector<LayerManifest>& manifest,
                           const Routing* method) {
    if (manifest.empty()) throw ConfigError("manifest is empty");
    MemoryReport report;
    report.method_label = method ? method_label(*method) : "manifest";
    report.formula = method ? table_formula(method->kind) : "per-layer";
    for (const auto& layer : manifest) {
        const Routing& routing =
            (method && layer.routed.kind != RoutedKind::adam) ? *method : layer.routed;
        LayerMemory mem;
        mem.name = layer.name;
        mem.param_bytes = layer.rows * layer.cols * layer.dtype_bytes;
        mem.state_bytes =
            state_elements(routing, layer.rows, layer.cols) * layer.dtype_bytes;
        report.param_bytes_total += mem.param_bytes;
        report.state_bytes_total += mem.state_bytes;
        report.layers.push_back(std::move(mem));
    }
    report.grand_total = report.param_bytes_total + report.state_bytes_total;
    return report;
}

RoutedKind kind_from_name(const std::string& name) {
    if (name == "adam") return RoutedKind::adam;
    if (name == "muon") return RoutedKind::muon;
    if (name == "adam_mini") return RoutedKind::adam_mini;
    if (name == "galore") return RoutedKind::galore;
    if (name == "apollo") return RoutedKind::apollo;
    if (name == "foam") return RoutedKind::foam;
    if (name == "foam_mini") return RoutedKind::foam_mini;
    throw ConfigError("unknown optimizer kind '" + name + "'");
}

void reject_unknown_keys(const nlohmann::json& obj,
                         const std::vector<std::string>& allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
        }
    }
}

}  // namespace

MemoryReport estimate(const std::vector<LayerManifest>& manifest) {
    return estimate_impl(manifest, nullptr);
}

MemoryReport estimate_with_method(const std::vector<LayerManifest>& manifest,
                                  const Routing& method) {
    return estimate_impl(manifest, &method);
}

std::vector<LayerManifest> parse_manifest(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("manifest: invalid JSON: ") + e.what());
    }
    if (!doc.is_array() || doc.empty()) {
        throw ConfigError("manifest: expected a non-empty JSON array of layers");
    }
    std::vector<LayerManifest> manifest;
    for (const auto& entry : doc) {
        if (!entry.is_object()) throw ConfigError("manifest: layer must be an object");
        reject_unknown_keys(entry, {"name", "shape", "dtype_bytes", "routed"}, "manifest layer");
        LayerManifest layer;
        if (!entry.contains("name") || !entry["name"].is_string()) {
            throw ConfigError("manifest layer: missing string 'name'");
        }
        layer.name = entry["name"].get<std::string>();
        if (!entry.contains("shape") || !entry["shape"].is_array() ||
            entry["shape"].empty() || entry["shape"].size() > 2) {
            throw ConfigError("manifest layer '" + layer.name +
                              "': 'shape' must be [len] or [rows, cols]");
        }
        if (entry["shape"].size() == 1) {
            layer.rows = 1;
            layer.cols = entry["shape"][0].get<std::uint64_t>();
        } else {
            layer.rows = entry["shape"][0].get<std::uint64_t>();
            layer.cols = entry["shape"][1].get<std::uint64_t>();
        }
        if (layer.rows == 0 || layer.cols == 0) {
            throw ConfigError("manifest layer '" + layer.name + "': zero dimension");
        }
        if (!entry.contains("dtype_bytes") || !entry["dtype_bytes"].is_number_unsigned()) {
            throw ConfigError("manifest layer '" + layer.name +
                              "': missing unsigned 'dtype_bytes'");
        }
        layer.dtype_bytes = entry["dtype_bytes"].get<std::uint64_t>();
        if (layer.dtype_bytes != 1 && layer.dtype_bytes != 2 && layer.dtype_bytes != 4 &&
            layer.dtype_bytes != 8) {
            throw ConfigError("manifest layer '" + layer.name +
                              "': dtype_bytes must be 1, 2, 4 or 8");
        }
        if (!entry.contains("routed") || !entry["routed"].is_object()) {
            throw ConfigError("manifest layer '" + layer.name + "': missing 'routed'");
        }
        const auto& routed = entry["routed"];
        reject_unknown_keys(routed, {"kind", "level", "rank"}, "manifest routed");
        if (!routed.contains("kind") || !routed["kind"].is_string()) {
            throw ConfigError("manifest layer '" + layer.name +
                              "': routed needs string 'kind'");
        }
        layer.routed.kind = kind_from_name(routed["kind"].get<std::string>());
        if (routed.contains("level")) layer.routed.level = routed["level"].get<int>();
        if (routed.contains("rank")) layer.routed.rank = routed["rank"].get<std::uint64_t>();
        manifest.push_back(std::move(layer));
    }
    return manifest;
}

Routing parse_method(const std::string& method) {
    Routing r;
    const auto colon = method.find(':');
    const std::string base = method.substr(0, colon);
    r.kind = kind_from_name(base);
    if (colon == std::string::npos) return r;
    const std::string arg = method.substr(colon + 1);
    try {
        if (arg.rfind("l=", 0) == 0 && r.kind == RoutedKind::foam) {
            r.level = std::stoi(arg.substr(2));
        } else if (arg.rfind("r=", 0) == 0 &&
                   (r.kind == RoutedKind::galore || r.kind == RoutedKind::apollo)) {
            r.rank = std::stoull(arg.substr(2));
        } else {
            throw ConfigError("");
        }
    } catch (const std::exception&) {
        throw ConfigError("bad method argument '" + method +
                          "' (expected e.g. foam:l=2 or galore:r=128)");
    }
    return r;
}

std::string render_memory_table(const std::vector<MemoryReport>& reports) {
    std::ostringstream os;
    os << std::left << std::setw(18) << "method" << std::right << std::setw(14)
       << "params (MB)" << std::setw(14) << "states (MB)" << std::setw(14)
       << "total (MB)" << "  " << std::left << "state formula" << '\n';
    os << std::string(78, '-') << '\n';
    os << std::fixed << std::setprecision(2);
    for (const auto& r : reports) {
        os << std::left << std::setw(18) << r.method_label << std::right << std::setw(14)
           << static_cast<double>(r.param_bytes_total) / 1e6 << std::setw(14)
           << static_cast<double>(r.state_bytes_total) / 1e6 << std::setw(14)
           << static_cast<double>(r.grand_total) / 1e6 << "  " << std::left << r.formula
           << '\n';
    }
    return os.str();
}

std::string memory_reports_to_json(const std::vector<MemoryReport>& reports) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json jr;
        jr["method"] = r.method_label;
        jr["formula"] = r.formula;
        jr["totals"] = {{"param_bytes", r.param_bytes_total},
                        {"state_bytes", r.state_bytes_total},
                        {"grand_total", r.grand_total}};
        nlohmann::json layers = nlohmann::json::array();
        for (const auto& l : r.layers) {
            layers.push_back({{"name", l.name},
                              {"param_bytes", l.param_bytes},
                              {"state_bytes", l.state_bytes}});
        }
        jr["layers"] = std::move(layers);
        out.push_back(std::move(jr));
    }
    return out.dump(2);
}

}  // namespace foam
