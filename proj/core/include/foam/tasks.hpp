#pragma once

#include <cstdint>
#include <vector>

#include "foam/matrix.hpp"
#include "foam/optim.hpp"
#include "foam/rng.hpp"

namespace foam {

enum class TaskKind { quadratic, logistic, mlp };

/// Deterministic desk-scale training problem. Everything (data, init,
/// batching, gradient noise) is derived from `seed` via splitmix64, so a
/// spec regenerates bit-identically.
struct TaskSpec {
    TaskKind kind = TaskKind::quadratic;

    // quadratic: 0.5 * ||W - W*||_F^2 over an m x n weight matrix
    std::size_t rows = 4;
    std::size_t cols = 8;

    // logistic: binary cross-entropy on two Gaussian clusters, d features
    std::size_t features = 16;

    // mlp: tanh hidden layer + softmax cross-entropy on Gaussian blobs
    std::size_t d_in = 16;
    std::size_t d_hidden = 32;
    std::size_t d_out = 2;

    std::size_t dataset_size = 256;
    std::size_t batch_size = 32;
    double noise_std = 0.0;  // additive Gaussian gradient noise (quadratic only)
    std::uint64_t seed = 1;

    void validate() const;  // throws ConfigError
};

struct TaskState {
    TaskSpec spec;
    std::vector<Param> params;  // weight matrices foam-kind, bias rows adam-kind
    Matrix features;            // dataset_size x d (logistic / mlp)
    std::vector<int> labels;    // class ids (logistic: 0/1)
    Matrix target;              // quadratic W*
    SplitMix64 rng{0};          // consumed by batching and gradient noise
};

/// Build data and initial parameters from the seeded stream. Identical specs
/// produce bit-identical states.
TaskState make_task(const TaskSpec& spec);

struct LossAndGrad {
    double loss = 0.0;
    std::vector<Matrix> grads;  // aligned with state.params
};

/// Loss and hand-derived analytic gradients on the given batch (dataset
/// indices). The quadratic task uses its full objective regardless of the
/// batch and draws noise from state.rng when configured.
LossAndGrad loss_and_grad(TaskState& state, const std::vector<std::size_t>& batch);

/// Loss over the entire dataset; consumes no randomness.
double full_loss(const TaskState& state);

/// Draw batch_size indices (uniform with replacement) from state.rng.
std::vector<std::size_t> draw_batch(TaskState& state);

/// The width used by the rank-1-equivalent fold level: quadratic -> cols,
/// logistic -> features, mlp -> d_hidden.
std::size_t hidden_dim(const TaskSpec& spec);

}  // namespace foam
