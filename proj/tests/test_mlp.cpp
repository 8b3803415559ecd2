#include <gtest/gtest.h>

#include <pvcast/linear.hpp>
#include <pvcast/mlp.hpp>
#include <pvcast/rng.hpp>
#include <pvcast/synthetic.hpp>

#include "support.hpp"

using namespace pvcast;
using namespace pvcast::models;
using pvcast::testing::make_matrix;

namespace {

features::FeatureMatrix random_inputs(std::uint64_t seed, std::size_t rows, std::size_t cols) {
    SplitMix64 rng(seed);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            x.push_back(rng.uniform(-1.0, 1.0));
            s += x.back() * static_cast<double>(j + 1);
        }
        y.push_back(std::sin(s));
    }
    std::vector<std::string> names;
    for (std::size_t j = 0; j < cols; ++j) names.push_back("x" + std::to_string(j));
    return make_matrix(names, x, y);
}

std::vector<std::string> names_of(std::size_t n) {
    std::vector<std::string> v;
    for (std::size_t j = 0; j < n; ++j) v.push_back("x" + std::to_string(j));
    return v;
}

}  // namespace

TEST(GradientCheck, TanhNetwork) {
    auto data = random_inputs(1, 20, 5);
    auto m = init_mlp({5, 8, 4, 1}, uniform_activations(2, Activation::tanh), 11, names_of(5));
    EXPECT_LT(gradient_check(m, Batch::of(data)), 1e-4);
}

TEST(GradientCheck, ReluNetwork) {
    auto data = random_inputs(2, 20, 5);
    auto m = init_mlp({5, 8, 4, 1}, uniform_activations(2, Activation::relu), 12, names_of(5));
    for (auto& l : m.layers)
        for (auto& b : l.biases) b = 0.05;
    EXPECT_LT(gradient_check(m, Batch::of(data)), 1e-4);
}

TEST(GradientCheck, ZeroNetworkOnZeroData) {
    auto m = init_mlp({3, 4, 1}, uniform_activations(1, Activation::tanh), 1, names_of(3));
    for (auto& l : m.layers) {
        std::fill(l.weights.begin(), l.weights.end(), 0.0);
        std::fill(l.biases.begin(), l.biases.end(), 0.0);
    }
    auto data = make_matrix(names_of(3), std::vector<double>(30, 0.0), std::vector<double>(10, 0.0));
    EXPECT_EQ(gradient_check(m, Batch::of(data)), 0.0);
}

TEST(GradientCheck, DetectsSignFlip) {
    auto data = random_inputs(3, 20, 4);
    auto m = init_mlp({4, 6, 1}, uniform_activations(1, Activation::tanh), 13, names_of(4));
    auto b = Batch::of(data);
    auto analytic = mse_gradients(m, b);
    analytic.scale(-1.0);
    EXPECT_NEAR(max_relative_error(analytic, numeric_gradients(m, b)), 2.0, 1e-3);
}

TEST(GradientCheck, MseDefinition) {
    auto m = init_mlp({2, 3, 1}, uniform_activations(1, Activation::tanh), 4, names_of(2));
    auto data = random_inputs(4, 7, 2);
    double s = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const double e = predict_row(m, data.row(i)) - data.target()[i];
        s += e * e;
    }
    EXPECT_NEAR(mse(m, Batch::of(data)), s / 7.0, 1e-15);
}

TEST(Init, DeterministicAndXavierBounded) {
    auto a = init_mlp({5, 32, 16, 1}, uniform_activations(2, Activation::tanh), 7, names_of(5));
    auto b = init_mlp({5, 32, 16, 1}, uniform_activations(2, Activation::tanh), 7, names_of(5));
    auto c = init_mlp({5, 32, 16, 1}, uniform_activations(2, Activation::tanh), 8, names_of(5));
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    for (const auto& l : a.layers) {
        const double lim = std::sqrt(6.0 / static_cast<double>(l.inputs + l.outputs));
        for (double w : l.weights) EXPECT_LE(std::abs(w), lim);
        for (double v : l.biases) EXPECT_EQ(v, 0.0);
    }
    EXPECT_THROW(init_mlp({5, 0, 1}, uniform_activations(1, Activation::tanh), 1, names_of(5)), PreconditionError);
    EXPECT_THROW(init_mlp({5, 4, 1}, {}, 1, names_of(5)), PreconditionError);
}

TEST(Predict, ZeroWeightsGiveZero) {
    auto m = init_mlp({3, 4, 1}, uniform_activations(1, Activation::relu), 1, names_of(3));
    for (auto& l : m.layers) {
        std::fill(l.weights.begin(), l.weights.end(), 0.0);
        std::fill(l.biases.begin(), l.biases.end(), 0.0);
    }
    auto data = random_inputs(5, 10, 3);
    for (double y : predict(m, data)) EXPECT_EQ(y, 0.0);
}

TEST(Predict, ColumnMismatch) {
    auto m = init_mlp({3, 4, 1}, uniform_activations(1, Activation::relu), 1, names_of(3));
    auto data = random_inputs(5, 10, 2);
    EXPECT_THROW(predict(m, data), ColumnMismatchError);
}

TEST(Predict, LinearEquivalentNetwork) {
    auto data = random_inputs(6, 200, 4);
    auto lin = fit_linear(data);
    auto net = mlp_from_linear(lin);
    auto a = predict(lin, data);
    auto b = predict(net, data);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(FitMlp, ZeroEpochsReturnsInitialWeights) {
    auto data = random_inputs(7, 50, 3);
    TrainConfig cfg;
    cfg.epochs = 0;
    cfg.seed = 9;
    auto m = fit_mlp(data, cfg, {4}, Activation::tanh);
    auto init = init_mlp({3, 4, 1}, uniform_activations(1, Activation::tanh), 9, data.columns());
    EXPECT_EQ(m.layers, init.layers);
    EXPECT_TRUE(m.training_loss.empty());
}

TEST(FitMlp, DeterministicForSeed) {
    auto data = random_inputs(8, 300, 4);
    TrainConfig cfg;
    cfg.epochs = 15;
    cfg.seed = 7;
    auto a = fit_mlp(data, cfg, {8, 4});
    auto b = fit_mlp(data, cfg, {8, 4});
    EXPECT_EQ(a, b);
    cfg.seed = 8;
    EXPECT_NE(a, fit_mlp(data, cfg, {8, 4}));
}

TEST(FitMlp, LossDecreases) {
    auto data = random_inputs(9, 500, 3);
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.seed = 1;
    auto m = fit_mlp(data, cfg, {16, 8});
    ASSERT_EQ(m.training_loss.size(), 60u);
    EXPECT_LT(m.training_loss.back(), 0.5 * m.training_loss.front());
}

TEST(FitMlp, EarlyStoppingKeepsBestValidationEpoch) {
    auto data = random_inputs(10, 400, 3);
    TrainConfig cfg;
    cfg.epochs = 300;
    cfg.seed = 2;
    cfg.validation_fraction = 0.25;
    cfg.early_stop_patience = 5;
    auto m = fit_mlp(data, cfg, {8});
    ASSERT_FALSE(m.validation_loss.empty());
    EXPECT_EQ(m.validation_loss.size(), m.training_loss.size());
    const double best = *std::min_element(m.validation_loss.begin(), m.validation_loss.end());
    const std::size_t n_fit = 300;
    const Batch val{data.values().subspan(n_fit * 3), std::span<const double>(data.target()).subspan(n_fit), 3};
    EXPECT_DOUBLE_EQ(mse(m, val), best);
}

TEST(FitMlp, DivergenceNamesEpoch) {
    auto data = random_inputs(11, 200, 3);
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.learning_rate = 1e6;
    try {
        fit_mlp(data, cfg, {8}, Activation::relu);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_GE(e.epoch(), 1u);
        EXPECT_NE(std::string(e.what()).find("epoch " + std::to_string(e.epoch())), std::string::npos);
    }
}

TEST(FitMlp, RejectsBadConfig) {
    auto data = random_inputs(12, 20, 3);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    EXPECT_THROW(fit_mlp(data, cfg), PreconditionError);
    cfg = {};
    cfg.early_stop_patience = 3;
    EXPECT_THROW(fit_mlp(data, cfg), PreconditionError);
    features::FeatureMatrix empty(names_of(3), "target");
    EXPECT_THROW(fit_mlp(empty, TrainConfig{}), EmptyDatasetError);
}

// On linear synthetic data a single hidden layer should not do worse than
// least squares on the held-out rows.
TEST(FitMlp, MatchesLinearOnLinearData) {
    auto recs = synthetic::generate(13, 120, 0.05, synthetic::Relation::linear);
    auto data = features::build_dataset(recs, default_feature_spec(), features::DatasetLayout{}, physics::PanelArray()).matrix;
    auto split = features::chronological_split(data, recs[90 * 144].time);
    const double lin_mse = mean_squared_error(predict(fit_linear(split.train), split.test), split.test.target());
    TrainConfig cfg;
    cfg.epochs = 400;
    cfg.seed = 3;
    auto m = fit_mlp(split.train, cfg, {16});
    EXPECT_LE(mean_squared_error(predict(m, split.test), split.test.target()), 1.05 * lin_mse);
}
