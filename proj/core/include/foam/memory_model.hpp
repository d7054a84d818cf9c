#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace foam {

enum class RoutedKind { adam, muon, adam_mini, galore, apollo, foam, foam_mini };

/// Optimizer assignment for one layer; level applies to foam, rank to
/// galore/apollo (rank 0 means "min(m,n)/4 per layer").
struct Routing {
    RoutedKind kind = RoutedKind::adam;
    int level = 2;
    std::uint64_t rank = 0;
};

/// One weight tensor in a model manifest. Vectors are (1 x length).
struct LayerManifest {
    std::string name;
    std::uint64_t rows = 1;
    std::uint64_t cols = 1;
    std::uint64_t dtype_bytes = 2;
    Routing routed;
};

/// Optimizer-state element count for an m x n layer (both moments where the
/// method keeps two). Symbolic column of the memory comparison table:
///   adam 2mn | muon mn | adam_mini mn | galore/apollo mr+2nr (m<=n)
///   | foam 2m*ceil(n/2^l) (== mn/2^(l-1) for divisible n) | foam_mini 2m
std::uint64_t state_elements(const Routing& routed, std::uint64_t m, std::uint64_t n);

std::string routed_kind_name(RoutedKind kind);

/// Symbolic formula string for the method column.
std::string table_formula(RoutedKind kind);

struct LayerMemory {
    std::string name;
    std::uint64_t param_bytes = 0;
    std::uint64_t state_bytes = 0;
};

/// Parameter + optimizer-state bytes, exact integer sums. Activations,
/// batches and allocator overhead are out of scope of this accounting.
struct MemoryReport {
    std::string method_label;
    std::string formula;
    std::vector<LayerMemory> layers;
    std::uint64_t param_bytes_total = 0;
    std::uint64_t state_bytes_total = 0;
    std::uint64_t grand_total = 0;
};

/// Estimate using each layer's own routing.
MemoryReport estimate(const std::vector<LayerManifest>& manifest);

/// Estimate with `method` applied to every compressible layer (those not
/// routed adam in the manifest); adam-routed layers (embeddings, norms,
/// biases) always stay on adam.
MemoryReport estimate_with_method(const std::vector<LayerManifest>& manifest,
                                  const Routing& method);

/// Parse a JSON manifest: array of {name, shape, dtype_bytes, routed{kind,
/// level?, rank?}}. Unknown keys are rejected. Throws ConfigError.
std::vector<LayerManifest> parse_manifest(const std::string& json_text);

/// "adam" | "muon" | "adam_mini" | "foam:l=2" | "foam_mini" | "galore:r=128"
/// | "galore" (per-layer rank) | "apollo[:r=..]". Throws ConfigError.
Routing parse_method(const std::string& method);

/// Aligned plain-text table over several method reports (one row per method).
std::string render_memory_table(const std::vector<MemoryReport>& reports);

/// JSON rendering of the reports (array of objects, exact byte counts).
std::string memory_reports_to_json(const std::vector<MemoryReport>& reports);

}  // namespace foam
