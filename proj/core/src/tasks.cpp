#include "foam/tasks.hpp"

#include <cmath>
#include <string>

#include "foam/errors.hpp"

namespace foam {

namespace {

// Data-distribution constants. The logistic clusters sit at +-margin along a
// planted unit direction; mlp blobs have centers ~ N(0, spread^2 I) and
// per-class noise N(0, blob_std^2 I).
constexpr double kLogisticMargin = 1.0;
constexpr double kBlobSpread = 0.5;
constexpr double kBlobStd = 2.0;

Matrix gaussian_matrix(SplitMix64& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& x : m.data()) x = rng.next_gaussian();
    return m;
}

// Scaled uniform fan-in init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Matrix fanin_uniform(SplitMix64& rng, std::size_t rows, std::size_t cols,
                     std::size_t fan_in) {
    const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Matrix m(rows, cols);
    for (double& x : m.data()) x = (2.0 * rng.next_double() - 1.0) * s;
    return m;
}

Param weight_param(std::string name, Matrix value) {
    return Param{ParamGroup{std::move(name), ParamKind::foam, true}, std::move(value)};
}

Param bias_param(std::string name, Matrix value) {
    return Param{ParamGroup{std::move(name), ParamKind::adam, false}, std::move(value)};
}

void check_batch(const TaskState& state, const std::vector<std::size_t>& batch) {
    if (batch.empty()) throw DomainError("loss_and_grad: empty batch");
    for (std::size_t idx : batch) {
        if (idx >= state.spec.dataset_size) {
            throw DomainError("loss_and_grad: batch index out of range");
        }
    }
}

double logistic_loss_on(const TaskState& state, const std::vector<std::size_t>& batch,
                        std::vector<double>* out_p) {
    const Matrix& w = state.params[0].value;  // 1 x d
    const double b = state.params[1].value(0, 0);
    double loss = 0.0;
    for (std::size_t r = 0; r < batch.size(); ++r) {
        const std::size_t i = batch[r];
        double z = b;
        for (std::size_t j = 0; j < w.cols(); ++j) z += w(0, j) * state.features(i, j);
        const double p = 1.0 / (1.0 + std::exp(-z));
        const double y = static_cast<double>(state.labels[i]);
        loss -= y * std::log(p + 1e-30) + (1.0 - y) * std::log(1.0 - p + 1e-30);
        if (out_p) (*out_p)[r] = p;
    }
    return loss / static_cast<double>(batch.size());
}

struct MlpForward {
    Matrix hidden;  // batch x d_hidden, tanh activations
    Matrix probs;   // batch x d_out, softmax
    double loss = 0.0;
};

MlpForward mlp_forward(const TaskState& state, const std::vector<std::size_t>& batch) {
    const Matrix& w1 = state.params[0].value;
    const Matrix& b1 = state.params[1].value;
    const Matrix& w2 = state.params[2].value;
    const Matrix& b2 = state.params[3].value;
    const std::size_t bs = batch.size();
    MlpForward f;
    f.hidden = Matrix(bs, w1.cols());
    f.probs = Matrix(bs, w2.cols());
    for (std::size_t r = 0; r < bs; ++r) {
        const std::size_t i = batch[r];
        for (std::size_t h = 0; h < w1.cols(); ++h) {
            double z = b1(0, h);
            for (std::size_t j = 0; j < w1.rows(); ++j) {
                z += state.features(i, j) * w1(j, h);
            }
            f.hidden(r, h) = std::tanh(z);
        }
        double zmax = -1e300;
        std::vector<double> logits(w2.cols());
        for (std::size_t k = 0; k < w2.cols(); ++k) {
            double z = b2(0, k);
            for (std::size_t h = 0; h < w2.rows(); ++h) z += f.hidden(r, h) * w2(h, k);
            logits[k] = z;
            if (z > zmax) zmax = z;
        }
        double denom = 0.0;
        for (double z : logits) denom += std::exp(z - zmax);
        for (std::size_t k = 0; k < w2.cols(); ++k) {
            f.probs(r, k) = std::exp(logits[k] - zmax) / denom;
        }
        f.loss -= std::log(f.probs(r, static_cast<std::size_t>(state.labels[i])) + 1e-30);
    }
    f.loss /= static_cast<double>(bs);
    return f;
}

}  // namespace

void TaskSpec::validate() const {
    if (dataset_size == 0) throw ConfigError("task.dataset_size must be >= 1");
    if (batch_size == 0 || batch_size > dataset_size) {
        throw ConfigError("task.batch_size must be in [1, dataset_size]");
    }
    if (noise_std < 0.0) throw ConfigError("task.noise_std must be >= 0");
    switch (kind) {
        case TaskKind::quadratic:
            if (rows == 0 || cols == 0) throw ConfigError("task dims must be >= 1");
            break;
        case TaskKind::logistic:
            if (features == 0) throw ConfigError("task.features must be >= 1");
            break;
        case TaskKind::mlp:
            if (d_in == 0 || d_hidden == 0 || d_out < 2) {
                throw ConfigError("task mlp dims must be >= 1 (d_out >= 2)");
            }
            break;
    }
}

TaskState make_task(const TaskSpec& spec) {
    spec.validate();
    TaskState state;
    state.spec = spec;
    state.rng = SplitMix64(spec.seed);
    SplitMix64& rng = state.rng;

    switch (spec.kind) {
        case TaskKind::quadratic: {
            state.target = gaussian_matrix(rng, spec.rows, spec.cols);
            state.params.push_back(weight_param("W", Matrix(spec.rows, spec.cols)));
            break;
        }
        case TaskKind::logistic: {
            const std::size_t d = spec.features;
            Matrix u = gaussian_matrix(rng, 1, d);
            const double norm = frobenius_norm(u);
            for (double& x : u.data()) x /= norm;
            state.features = Matrix(spec.dataset_size, d);
            state.labels.resize(spec.dataset_size);
            for (std::size_t i = 0; i < spec.dataset_size; ++i) {
                const int y = rng.next_double() < 0.5 ? 0 : 1;
                state.labels[i] = y;
                const double side = (2.0 * y - 1.0) * kLogisticMargin;
                for (std::size_t j = 0; j < d; ++j) {
                    state.features(i, j) = side * u(0, j) + rng.next_gaussian();
                }
            }
            state.params.push_back(weight_param("W", fanin_uniform(rng, 1, d, d)));
            state.params.push_back(bias_param("b", Matrix(1, 1)));
            break;
        }
        case TaskKind::mlp: {
            Matrix centers = gaussian_matrix(rng, spec.d_out, spec.d_in);
            for (double& x : centers.data()) x *= kBlobSpread;
            state.features = Matrix(spec.dataset_size, spec.d_in);
            state.labels.resize(spec.dataset_size);
            for (std::size_t i = 0; i < spec.dataset_size; ++i) {
                const int y = static_cast<int>(rng.next_below(spec.d_out));
                state.labels[i] = y;
                for (std::size_t j = 0; j < spec.d_in; ++j) {
                    state.features(i, j) =
                        centers(static_cast<std::size_t>(y), j) +
                        kBlobStd * rng.next_gaussian();
                }
            }
            state.params.push_back(
                weight_param("W1", fanin_uniform(rng, spec.d_in, spec.d_hidden, spec.d_in)));
            state.params.push_back(bias_param("b1", Matrix(1, spec.d_hidden)));
            state.params.push_back(
                weight_param("W2", fanin_uniform(rng, spec.d_hidden, spec.d_out, spec.d_hidden)));
            state.params.push_back(bias_param("b2", Matrix(1, spec.d_out)));
            break;
        }
    }
    return state;
}

LossAndGrad loss_and_grad(TaskState& state, const std::vector<std::size_t>& batch) {
    check_batch(state, batch);
    LossAndGrad out;
    switch (state.spec.kind) {
        case TaskKind::quadratic: {
            const Matrix& w = state.params[0].value;
            Matrix diff = elementwise(w, state.target, BinaryOp::sub);
            out.loss = 0.5 * dot(diff, diff);
            if (state.spec.noise_std > 0.0) {
                for (double& x : diff.data()) {
                    x += state.spec.noise_std * state.rng.next_gaussian();
                }
            }
            out.grads.push_back(std::move(diff));
            break;
        }
        case TaskKind::logistic: {
            const std::size_t d = state.spec.features;
            std::vector<double> p(batch.size());
            out.loss = logistic_loss_on(state, batch, &p);
            Matrix gw(1, d);
            Matrix gb(1, 1);
            const double inv_b = 1.0 / static_cast<double>(batch.size());
            for (std::size_t r = 0; r < batch.size(); ++r) {
                const std::size_t i = batch[r];
                const double diff = (p[r] - static_cast<double>(state.labels[i])) * inv_b;
                for (std::size_t j = 0; j < d; ++j) {
                    gw(0, j) += diff * state.features(i, j);
                }
                gb(0, 0) += diff;
            }
            out.grads.push_back(std::move(gw));
            out.grads.push_back(std::move(gb));
            break;
        }
        case TaskKind::mlp: {
            const Matrix& w1 = state.params[0].value;
            const Matrix& w2 = state.params[2].value;
            const std::size_t bs = batch.size();
            MlpForward f = mlp_forward(state, batch);
            out.loss = f.loss;
            // dL/dlogits = (softmax - onehot) / batch
            Matrix dlogits = f.probs;
            const double inv_b = 1.0 / static_cast<double>(bs);
            for (std::size_t r = 0; r < bs; ++r) {
                dlogits(r, static_cast<std::size_t>(state.labels[batch[r]])) -= 1.0;
                for (std::size_t k = 0; k < dlogits.cols(); ++k) dlogits(r, k) *= inv_b;
            }
            Matrix gw2(w2.rows(), w2.cols());
            Matrix gb2(1, w2.cols());
            for (std::size_t r = 0; r < bs; ++r) {
                for (std::size_t k = 0; k < w2.cols(); ++k) {
                    const double dk = dlogits(r, k);
                    gb2(0, k) += dk;
                    for (std::size_t h = 0; h < w2.rows(); ++h) {
                        gw2(h, k) += f.hidden(r, h) * dk;
                    }
                }
            }
            // back through tanh: dpre = (dlogits W2^T) * (1 - h^2)
            Matrix gw1(w1.rows(), w1.cols());
            Matrix gb1(1, w1.cols());
            for (std::size_t r = 0; r < bs; ++r) {
                const std::size_t i = batch[r];
                for (std::size_t h = 0; h < w2.rows(); ++h) {
                    double dh = 0.0;
                    for (std::size_t k = 0; k < w2.cols(); ++k) {
                        dh += dlogits(r, k) * w2(h, k);
                    }
                    const double th = f.hidden(r, h);
                    const double dpre = dh * (1.0 - th * th);
                    gb1(0, h) += dpre;
                    for (std::size_t j = 0; j < w1.rows(); ++j) {
                        gw1(j, h) += state.features(i, j) * dpre;
                    }
                }
            }
            out.grads.push_back(std::move(gw1));
            out.grads.push_back(std::move(gb1));
            out.grads.push_back(std::move(gw2));
            out.grads.push_back(std::move(gb2));
            break;
        }
    }
    for (const Matrix& g : out.grads) detail::check_finite(g, "loss_and_grad");
    return out;
}

double full_loss(const TaskState& state) {
    switch (state.spec.kind) {
        case TaskKind::quadratic: {
            Matrix diff = elementwise(state.params[0].value, state.target, BinaryOp::sub);
            return 0.5 * dot(diff, diff);
        }
        case TaskKind::logistic: {
            std::vector<std::size_t> all(state.spec.dataset_size);
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            return logistic_loss_on(state, all, nullptr);
        }
        case TaskKind::mlp: {
            std::vector<std::size_t> all(state.spec.dataset_size);
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            return mlp_forward(state, all).loss;
        }
    }
    return 0.0;
}

std::vector<std::size_t> draw_batch(TaskState& state) {
    std::vector<std::size_t> batch(state.spec.batch_size);
    for (std::size_t& idx : batch) {
        idx = static_cast<std::size_t>(state.rng.next_below(state.spec.dataset_size));
    }
    return batch;
}

std::size_t hidden_dim(const TaskSpec& spec) {
    switch (spec.kind) {
        case TaskKind::quadratic: return spec.cols;
        case TaskKind::logistic: return spec.features;
        case TaskKind::mlp: return spec.d_hidden;
    }
    return 1;
}

}  // namespace foam
