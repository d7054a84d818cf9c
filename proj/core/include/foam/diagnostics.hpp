#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "foam/fold.hpp"
#include "foam/matrix.hpp"

namespace foam {

/// One recorded training step. Serialized as one JSON object per line in
/// trace files (schema field is versioned).
struct StepRecord {
    long step = 0;
    double loss = 0.0;
    double grad_norm = 0.0;
    std::optional<double> delta_norm_ratio;    // ||R|| / ||G|| over folded params
    std::optional<double> delta_energy_ratio;  // its square
    std::optional<double> cos_to_adam;         // shadow-Adam update cosine
    double lr_t = 0.0;
};

/// JSONL encoding (keys sorted, "schema": 1).
std::string to_jsonl(const StepRecord& rec);

struct ResidualRatios {
    double norm_ratio = 0.0;    // in [0, 1]
    double energy_ratio = 0.0;  // norm_ratio^2
};

/// ||residual(g)|| / ||g|| and its square. Throws DomainError on a zero
/// gradient (callers record the ratio as absent).
ResidualRatios residual_ratios(const Matrix& g, const FoldSpec& spec);

/// Largest-magnitude eigenvalue estimate of a symmetric matrix by power
/// iteration from a seeded start vector.
double power_iteration(const Matrix& a, int iters = 64, std::uint64_t seed = 12345);

struct ProjectorCheck {
    std::string name;
    bool passed = false;
    double observed = 0.0;
    double expected = 0.0;
};

struct ProjectorReport {
    FoldSpec spec;
    std::vector<ProjectorCheck> checks;
    bool all_passed() const;
    std::string describe() const;  // itemized failure report
};

/// Verify the fold-unfold composition is a well-behaved averaging projector:
/// exact symmetry, idempotency, eigenvalues in {0,1} with folded_cols ones
/// (independent dense eigensolve), and unit spectral radius of P and, for
/// level >= 1, of I - P. Intended for input_cols <= 64.
ProjectorReport verify_projector(const FoldSpec& spec, double tolerance);

// ---- property suite (backs the props CLI command) ----

struct PropsOptions {
    std::vector<int> levels{0, 1, 2, 3};
    std::vector<std::size_t> widths{5, 8, 12, 64};
    double projector_tolerance = 1e-9;
    int oracle_trials = 200;        // random fold/unfold vs dense operators
    std::size_t oracle_max_dim = 64;
    int split_draws = 10000;        // energy-split / reconstruction draws
    int mc_samples = 100;           // residual-energy concentration samples
    std::size_t mc_dim = 256;
    double mc_tolerance = 0.02;
    std::uint64_t seed = 2024;
};

struct PropsCheck {
    std::string name;
    bool passed = false;
    std::string detail;  // observed vs expected
};

struct PropsReport {
    std::vector<PropsCheck> checks;
    bool all_passed() const;
};

PropsReport run_property_suite(const PropsOptions& opts);

}  // namespace foam
