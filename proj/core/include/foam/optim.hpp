#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "foam/fold.hpp"
#include "foam/matrix.hpp"

namespace foam {

/// Where epsilon sits in the adaptive denominator. The folded update rule
/// writes sqrt(V) + eps; the plain moment update is also seen written as
/// sqrt(V + eps), so both are supported.
enum class DenomConvention { sqrt_then_eps, eps_inside_sqrt };

struct OptimizerConfig {
    double lr = 1e-3;          // base step size fed to the schedule
    double beta1 = 0.9;
    double beta2 = 0.95;
    double eps = 1e-8;
    double alpha = 0.25;       // LR ratio of folded modules vs plain-Adam modules
    int level = 2;             // fold level l; block size 2^l; 0 == plain Adam
    bool residual_first = true;    // inject R_t into the unfolded first moment
    bool residual_second = true;   // inject R_t^2 into the unfolded second moment
    DenomConvention denom = DenomConvention::sqrt_then_eps;
    double weight_decay = 0.0;     // decoupled: w *= (1 - lr_t * wd) before the update
    bool quant8 = false;           // store moments 8-bit block-quantized

    void validate() const;  // throws ConfigError
};

/// Full Adam state. No bias correction anywhere in this library: the folded
/// update rule carries none, and the reference Adam matches it exactly at
/// level 0.
struct AdamState {
    Matrix m, v;
    long step = 0;

    static AdamState init(std::size_t rows, std::size_t cols) {
        return AdamState{Matrix(rows, cols), Matrix(rows, cols), 0};
    }
};

/// Adam with one shared scalar second moment per weight matrix, updated with
/// mean(g^2). Coarsest block-sharing baseline.
struct AdamMiniState {
    Matrix m;
    double v = 0.0;
    long step = 0;

    static AdamMiniState init(std::size_t rows, std::size_t cols) {
        return AdamMiniState{Matrix(rows, cols), 0.0, 0};
    }
};

/// Folded moments: one column of state per block of 2^l parameter columns.
struct FoamState {
    Matrix m_tilde, v_tilde;  // rows x spec.folded_cols
    FoldSpec spec;
    long step = 0;

    static FoamState init(std::size_t rows, const FoldSpec& spec) {
        return FoamState{Matrix(rows, spec.folded_cols), Matrix(rows, spec.folded_cols),
                         spec, 0};
    }
};

/// One Adam step; returns the updated weights, mutates state.
Matrix adam_step(const Matrix& w, const Matrix& g, AdamState& state,
                 const OptimizerConfig& cfg, double lr_t);

/// Folded step with the transient unfolded moments exposed (diagnostics need
/// the update direction M/(sqrt(V)+eps); M and V are never stored).
struct FoamStepDetail {
    Matrix w;
    Matrix m_eff;  // unfold(m_tilde) [+ residual]
    Matrix v_eff;  // unfold(v_tilde) [+ residual^2]
};
FoamStepDetail foam_step_detailed(const Matrix& w, const Matrix& g, FoamState& state,
                                  const OptimizerConfig& cfg, double lr_t);

/// One folded step: compress the gradient, update the folded moments, unfold
/// with residual correction, apply with step size lr_t * alpha.
Matrix foam_step(const Matrix& w, const Matrix& g, FoamState& state,
                 const OptimizerConfig& cfg, double lr_t);

Matrix adam_mini_step(const Matrix& w, const Matrix& g, AdamMiniState& state,
                      const OptimizerConfig& cfg, double lr_t);

/// floor(log2(hidden_dim)): the level at which a matrix's folded width drops
/// to 1 or 2 columns (rank-1-equivalent state memory).
int foam_mini_level(std::size_t hidden_dim);

/// eta0 / sqrt(t), t >= 1.
double lr_inv_sqrt(long t, double eta0);

/// Linear ramp to lr_max over ceil(warmup_frac * total) steps, then cosine
/// decay to 0 at t == total.
double lr_warmup_cosine(long t, long total, double lr_max, double warmup_frac);

// ---- per-parameter routing ----

enum class ParamKind { foam, adam, adam_mini };

struct ParamGroup {
    std::string name;
    ParamKind kind = ParamKind::adam;
    bool applies_alpha = false;  // true iff kind == foam
};

struct Param {
    ParamGroup group;
    Matrix value;
};

using ParamState = std::variant<AdamState, AdamMiniState, FoamState>;

/// Fresh zero state matching the parameter's kind. Foam-kind parameters fold
/// their columns at `level`.
ParamState init_state(const Param& p, int level);

/// Step every parameter exactly once: foam-kind with lr_t (alpha applied
/// inside), adam/adam_mini kinds with lr_t. Gradients align with params by
/// index.
void route_and_step(std::vector<Param>& params, const std::vector<Matrix>& grads,
                    std::vector<ParamState>& states, const OptimizerConfig& cfg,
                    double lr_t);

}  // namespace foam
