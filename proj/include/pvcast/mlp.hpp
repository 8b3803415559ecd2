#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "features.hpp"
#include "linear.hpp"
#include "rng.hpp"

namespace pvcast::models {

enum class Activation { relu, tanh };

inline std::string_view to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

inline Activation parse_activation(std::string_view s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    throw PreconditionError("unknown activation: " + std::string(s));
}

// Fully connected layer; weights are row-major (outputs x inputs).
struct DenseLayer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<double> weights;
    std::vector<double> biases;

    DenseLayer() = default;
    DenseLayer(std::size_t in, std::size_t out) : inputs(in), outputs(out), weights(in * out, 0.0), biases(out, 0.0) {}

    double& w(std::size_t o, std::size_t i) { return weights[o * inputs + i]; }
    double w(std::size_t o, std::size_t i) const { return weights[o * inputs + i]; }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Hidden layers use `activations[k]`; the output layer is affine.
struct MlpModel {
    std::vector<std::size_t> layer_sizes;
    std::vector<DenseLayer> layers;
    std::vector<Activation> activations;
    std::uint64_t seed = 0;
    std::vector<std::string> feature_order;
    std::vector<double> training_loss;
    std::vector<double> validation_loss;

    std::size_t input_dims() const { return layer_sizes.empty() ? 0 : layer_sizes.front(); }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.weights.size() + l.biases.size();
        return n;
    }

    void validate() const {
        if (layer_sizes.size() < 2) throw PreconditionError("MLP needs at least an input and an output layer");
        if (layer_sizes.back() != 1) throw PreconditionError("MLP output layer width must be 1");
        if (layers.size() != layer_sizes.size() - 1) throw PreconditionError("MLP layer count mismatch");
        if (activations.size() != layers.size() - 1) throw PreconditionError("MLP activation count mismatch");
        if (feature_order.size() != layer_sizes.front())
            throw PreconditionError("MLP feature_order length must equal input width");
        for (std::size_t k = 0; k < layers.size(); ++k) {
            const auto& l = layers[k];
            if (l.inputs != layer_sizes[k] || l.outputs != layer_sizes[k + 1] ||
                l.weights.size() != l.inputs * l.outputs || l.biases.size() != l.outputs)
                throw PreconditionError("MLP adjacent layer dimensions disagree");
            for (double v : l.weights)
                if (!std::isfinite(v)) throw PreconditionError("MLP has non-finite weights");
            for (double v : l.biases)
                if (!std::isfinite(v)) throw PreconditionError("MLP has non-finite biases");
        }
    }

    friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

namespace detail {

inline double activate(Activation a, double z) { return a == Activation::relu ? (z > 0.0 ? z : 0.0) : std::tanh(z); }

// Derivative expressed through the activation output h.
inline double activate_grad(Activation a, double z, double h) {
    return a == Activation::relu ? (z > 0.0 ? 1.0 : 0.0) : 1.0 - h * h;
}

inline void check_layer_sizes(const std::vector<std::size_t>& sizes, std::size_t hidden_activations) {
    if (sizes.size() < 2) throw PreconditionError("MLP needs at least an input and an output layer");
    if (sizes.back() != 1) throw PreconditionError("MLP output layer width must be 1");
    for (auto s : sizes)
        if (s == 0) throw PreconditionError("MLP layer widths must be positive");
    if (hidden_activations != sizes.size() - 2)
        throw PreconditionError("MLP needs one activation per hidden layer");
}

}  // namespace detail

// Xavier-uniform weights, U(-a, a) with a = sqrt(6 / (fan_in + fan_out)),
// drawn layer by layer in row-major order from SplitMix64(seed); zero biases.
inline MlpModel init_mlp(std::vector<std::size_t> layer_sizes, std::vector<Activation> activations,
                         std::uint64_t seed, std::vector<std::string> feature_order, SplitMix64* rng_out = nullptr) {
    detail::check_layer_sizes(layer_sizes, activations.size());
    MlpModel m;
    m.layer_sizes = std::move(layer_sizes);
    m.activations = std::move(activations);
    m.seed = seed;
    m.feature_order = std::move(feature_order);
    SplitMix64 rng(seed);
    for (std::size_t k = 0; k + 1 < m.layer_sizes.size(); ++k) {
        DenseLayer l(m.layer_sizes[k], m.layer_sizes[k + 1]);
        const double a = std::sqrt(6.0 / static_cast<double>(l.inputs + l.outputs));
        for (auto& w : l.weights) w = rng.uniform(-a, a);
        m.layers.push_back(std::move(l));
    }
    m.validate();
    if (rng_out) *rng_out = rng;
    return m;
}

inline std::vector<Activation> uniform_activations(std::size_t hidden_layers, Activation a) {
    return std::vector<Activation>(hidden_layers, a);
}

// Zero-hidden-layer network computing exactly the linear model.
inline MlpModel mlp_from_linear(const LinearModel& lin) {
    MlpModel m;
    m.layer_sizes = {lin.weights.size(), 1};
    DenseLayer l(lin.weights.size(), 1);
    l.weights = lin.weights;
    l.biases = {lin.bias};
    m.layers.push_back(std::move(l));
    m.feature_order = lin.feature_order;
    m.validate();
    return m;
}

// Rows of a row-major input block plus per-row targets.
struct Batch {
    std::span<const double> inputs;
    std::span<const double> targets;
    std::size_t cols = 0;

    std::size_t rows() const { return targets.size(); }
    std::span<const double> row(std::size_t i) const { return inputs.subspan(i * cols, cols); }

    static Batch of(const features::FeatureMatrix& m) { return {m.values(), m.target(), m.cols()}; }
};

// Per-layer gradient with the model's shapes.
struct Gradients {
    std::vector<DenseLayer> layers;

    static Gradients zeros_like(const MlpModel& m) {
        Gradients g;
        for (const auto& l : m.layers) g.layers.emplace_back(l.inputs, l.outputs);
        return g;
    }

    template <class F>
    void for_each(const Gradients& other, F&& f) const {
        for (std::size_t k = 0; k < layers.size(); ++k) {
            for (std::size_t i = 0; i < layers[k].weights.size(); ++i) f(layers[k].weights[i], other.layers[k].weights[i]);
            for (std::size_t i = 0; i < layers[k].biases.size(); ++i) f(layers[k].biases[i], other.layers[k].biases[i]);
        }
    }

    void scale(double s) {
        for (auto& l : layers) {
            for (auto& v : l.weights) v *= s;
            for (auto& v : l.biases) v *= s;
        }
    }
};

// Reusable forward/backward buffers for one sample.
class Workspace {
public:
    explicit Workspace(const MlpModel& m) {
        for (auto s : m.layer_sizes) {
            act_.emplace_back(s, 0.0);
            pre_.emplace_back(s, 0.0);
            delta_.emplace_back(s, 0.0);
        }
    }

    double forward(const MlpModel& m, std::span<const double> x) {
        std::copy(x.begin(), x.end(), act_[0].begin());
        const std::size_t last = m.layers.size() - 1;
        for (std::size_t k = 0; k < m.layers.size(); ++k) {
            const auto& l = m.layers[k];
            const auto& in = act_[k];
            auto& z = pre_[k + 1];
            auto& h = act_[k + 1];
            for (std::size_t o = 0; o < l.outputs; ++o) {
                double s = l.biases[o];
                const double* wr = l.weights.data() + o * l.inputs;
                for (std::size_t i = 0; i < l.inputs; ++i) s += wr[i] * in[i];
                z[o] = s;
                h[o] = k == last ? s : detail::activate(m.activations[k], s);
            }
        }
        return act_.back()[0];
    }

    // Accumulates d(scale * (y_hat - y)^2)/d(theta) for the last forward pass.
    void backward(const MlpModel& m, double y_hat, double y, double scale, Gradients& g) {
        const std::size_t nl = m.layers.size();
        delta_[nl][0] = 2.0 * (y_hat - y) * scale;
        for (std::size_t k = nl; k-- > 0;) {
            const auto& l = m.layers[k];
            auto& gl = g.layers[k];
            const auto& in = act_[k];
            const auto& d = delta_[k + 1];
            for (std::size_t o = 0; o < l.outputs; ++o) {
                gl.biases[o] += d[o];
                double* gw = gl.weights.data() + o * l.inputs;
                for (std::size_t i = 0; i < l.inputs; ++i) gw[i] += d[o] * in[i];
            }
            if (k == 0) break;
            auto& dp = delta_[k];
            std::fill(dp.begin(), dp.end(), 0.0);
            for (std::size_t o = 0; o < l.outputs; ++o) {
                const double* wr = l.weights.data() + o * l.inputs;
                for (std::size_t i = 0; i < l.inputs; ++i) dp[i] += wr[i] * d[o];
            }
            const Activation act = m.activations[k - 1];
            for (std::size_t i = 0; i < l.inputs; ++i) dp[i] *= detail::activate_grad(act, pre_[k][i], act_[k][i]);
        }
    }

private:
    std::vector<std::vector<double>> act_;
    std::vector<std::vector<double>> pre_;
    std::vector<std::vector<double>> delta_;
};

inline double predict_row(const MlpModel& m, std::span<const double> x) {
    Workspace ws(m);
    return ws.forward(m, x);
}

inline std::vector<double> predict(const MlpModel& model, const features::FeatureMatrix& m) {
    if (model.feature_order != m.columns())
        throw ColumnMismatchError("model feature order does not match matrix columns");
    Workspace ws(model);
    std::vector<double> out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) out[i] = ws.forward(model, m.row(i));
    return out;
}

// Mean squared error over the batch.
inline double mse(const MlpModel& m, const Batch& b) {
    Workspace ws(m);
    double s = 0.0;
    for (std::size_t i = 0; i < b.rows(); ++i) {
        double e = ws.forward(m, b.row(i)) - b.targets[i];
        s += e * e;
    }
    return b.rows() ? s / static_cast<double>(b.rows()) : 0.0;
}

// Backpropagated gradient of mse().
inline Gradients mse_gradients(const MlpModel& m, const Batch& b) {
    if (b.rows() == 0) throw PreconditionError("gradient needs a nonempty batch");
    auto g = Gradients::zeros_like(m);
    Workspace ws(m);
    const double scale = 1.0 / static_cast<double>(b.rows());
    for (std::size_t i = 0; i < b.rows(); ++i) ws.backward(m, ws.forward(m, b.row(i)), b.targets[i], scale, g);
    return g;
}

// Central differences of mse(), one parameter at a time.
inline Gradients numeric_gradients(const MlpModel& model, const Batch& b, double epsilon = 1e-5) {
    if (b.rows() == 0) throw PreconditionError("gradient needs a nonempty batch");
    MlpModel m = model;
    auto g = Gradients::zeros_like(m);
    auto probe = [&](double& param) {
        const double saved = param;
        param = saved + epsilon;
        const double up = mse(m, b);
        param = saved - epsilon;
        const double down = mse(m, b);
        param = saved;
        return (up - down) / (2.0 * epsilon);
    };
    for (std::size_t k = 0; k < m.layers.size(); ++k) {
        for (std::size_t i = 0; i < m.layers[k].weights.size(); ++i) g.layers[k].weights[i] = probe(m.layers[k].weights[i]);
        for (std::size_t i = 0; i < m.layers[k].biases.size(); ++i) g.layers[k].biases[i] = probe(m.layers[k].biases[i]);
    }
    return g;
}

// max |a - n| / max(|a|, |n|, 1e-12) over every parameter.
inline double max_relative_error(const Gradients& analytic, const Gradients& numeric) {
    double worst = 0.0;
    analytic.for_each(numeric, [&](double a, double n) {
        const double denom = std::max({std::abs(a), std::abs(n), 1e-12});
        worst = std::max(worst, std::abs(a - n) / denom);
    });
    return worst;
}

inline double gradient_check(const MlpModel& m, const Batch& b, double epsilon = 1e-5) {
    return max_relative_error(mse_gradients(m, b), numeric_gradients(m, b, epsilon));
}

struct TrainConfig {
    std::size_t epochs = 200;
    std::size_t batch_size = 64;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::uint64_t seed = 0;
    std::optional<std::size_t> early_stop_patience;
    // chronological tail held out for validation / early stopping
    double validation_fraction = 0.0;

    void validate() const {
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
            throw PreconditionError("learning_rate must be positive");
        if (batch_size < 1) throw PreconditionError("batch_size must be at least 1");
        if (!(momentum >= 0.0 && momentum < 1.0)) throw PreconditionError("momentum must lie in [0, 1)");
        if (!(validation_fraction >= 0.0 && validation_fraction <= 0.5))
            throw PreconditionError("validation_fraction must lie in [0, 0.5]");
        if (early_stop_patience && validation_fraction == 0.0)
            throw PreconditionError("early stopping needs validation_fraction > 0");
    }
};

inline std::vector<std::size_t> default_hidden_layers() { return {32, 16}; }

// Mini-batch SGD with classical momentum on the MSE:
//   v <- momentum * v - learning_rate * grad;  theta <- theta + v
// The PRNG that drew the initial weights then drives the per-epoch
// Fisher-Yates shuffle of the training rows. With early stopping the
// parameters from the best validation epoch are returned.
inline MlpModel fit_mlp(const features::FeatureMatrix& train, const TrainConfig& config,
                        std::vector<std::size_t> layer_sizes, std::vector<Activation> activations) {
    config.validate();
    if (train.empty()) throw EmptyDatasetError("fit_mlp: empty training set");
    detail::check_layer_sizes(layer_sizes, activations.size());
    if (layer_sizes.front() != train.cols())
        throw PreconditionError("first layer width must equal the number of input columns");

    SplitMix64 rng(config.seed);
    MlpModel m = init_mlp(std::move(layer_sizes), std::move(activations), config.seed, train.columns(), &rng);

    const auto all = Batch::of(train);
    const std::size_t n_val = static_cast<std::size_t>(std::floor(config.validation_fraction * static_cast<double>(train.rows())));
    const std::size_t n_fit = train.rows() - n_val;
    if (n_fit == 0) throw EmptyDatasetError("fit_mlp: validation split leaves no training rows");
    const Batch val{all.inputs.subspan(n_fit * all.cols), all.targets.subspan(n_fit), all.cols};

    std::vector<std::size_t> order(n_fit);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto velocity = Gradients::zeros_like(m);
    auto grad = Gradients::zeros_like(m);
    Workspace ws(m);

    double best_val = std::numeric_limits<double>::infinity();
    std::vector<DenseLayer> best_layers;
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = n_fit; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n_fit; start += config.batch_size) {
            const std::size_t end = std::min(n_fit, start + config.batch_size);
            const double scale = 1.0 / static_cast<double>(end - start);
            grad.scale(0.0);
            for (std::size_t b = start; b < end; ++b) {
                const std::size_t r = order[b];
                const double y_hat = ws.forward(m, all.row(r));
                const double e = y_hat - all.targets[r];
                loss_sum += e * e;
                ws.backward(m, y_hat, all.targets[r], scale, grad);
            }
            for (std::size_t k = 0; k < m.layers.size(); ++k) {
                auto& L = m.layers[k];
                auto& V = velocity.layers[k];
                const auto& G = grad.layers[k];
                for (std::size_t i = 0; i < L.weights.size(); ++i) {
                    V.weights[i] = config.momentum * V.weights[i] - config.learning_rate * G.weights[i];
                    L.weights[i] += V.weights[i];
                }
                for (std::size_t i = 0; i < L.biases.size(); ++i) {
                    V.biases[i] = config.momentum * V.biases[i] - config.learning_rate * G.biases[i];
                    L.biases[i] += V.biases[i];
                }
            }
        }
        const double epoch_loss = loss_sum / static_cast<double>(n_fit);
        if (!std::isfinite(epoch_loss))
            throw DivergenceError(epoch + 1, "training diverged: non-finite loss at epoch " + std::to_string(epoch + 1));
        m.training_loss.push_back(epoch_loss);

        if (n_val > 0) {
            const double v = mse(m, val);
            if (!std::isfinite(v))
                throw DivergenceError(epoch + 1, "training diverged: non-finite validation loss at epoch " +
                                                     std::to_string(epoch + 1));
            m.validation_loss.push_back(v);
            if (config.early_stop_patience) {
                if (v < best_val) {
                    best_val = v;
                    best_layers = m.layers;
                    since_best = 0;
                } else if (++since_best >= *config.early_stop_patience) {
                    break;
                }
            }
        }
    }
    if (!best_layers.empty()) m.layers = std::move(best_layers);
    m.validate();
    return m;
}

inline MlpModel fit_mlp(const features::FeatureMatrix& train, const TrainConfig& config,
                        const std::vector<std::size_t>& hidden = default_hidden_layers(),
                        Activation activation = Activation::tanh) {
    std::vector<std::size_t> sizes{train.cols()};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(1);
    return fit_mlp(train, config, std::move(sizes), uniform_activations(hidden.size(), activation));
}

}  // namespace pvcast::models
