#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "feature_spec.hpp"
#include "features.hpp"
#include "fsutil.hpp"
#include "linear.hpp"
#include "mlp.hpp"

// Model artifact file: a JSON document followed by one integrity line
//
//   { ...pretty-printed JSON... }
//   fnv1a64:<16 lowercase hex digits of FNV-1a over the JSON bytes>
//
// Checks on load run in order: structure (corrupt), format_version
// (version), checksum, then field decoding (corrupt).
namespace pvcast::models {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kChecksumPrefix = "fnv1a64:";

struct ModelArtifact {
    std::variant<LinearModel, MlpModel> model;
    FeatureSpec bounds;
    std::vector<std::string> raw_inputs;
    features::TargetMode target_mode = features::TargetMode::irradiance;
    std::uint64_t seed = 0;
    int format_version = kFormatVersion;

    std::string_view kind() const { return std::holds_alternative<LinearModel>(model) ? "linear" : "mlp"; }

    const std::vector<std::string>& feature_order() const {
        return std::visit([](const auto& m) -> const std::vector<std::string>& { return m.feature_order; }, model);
    }
};

inline std::vector<double> predict(const ModelArtifact& a, const features::FeatureMatrix& m) {
    return std::visit([&](const auto& model) { return predict(model, m); }, a.model);
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

namespace detail {

using nlohmann::json;

inline json layer_to_json(const DenseLayer& l) {
    json rows = json::array();
    for (std::size_t o = 0; o < l.outputs; ++o) {
        json r = json::array();
        for (std::size_t i = 0; i < l.inputs; ++i) r.push_back(l.w(o, i));
        rows.push_back(std::move(r));
    }
    return {{"weights", std::move(rows)}, {"biases", l.biases}};
}

inline DenseLayer layer_from_json(const json& j, std::size_t in, std::size_t out) {
    DenseLayer l(in, out);
    const auto& rows = j.at("weights");
    if (rows.size() != out) throw CorruptArtifactError("corrupt artifact: layer row count mismatch");
    for (std::size_t o = 0; o < out; ++o) {
        const auto& r = rows.at(o);
        if (r.size() != in) throw CorruptArtifactError("corrupt artifact: layer column count mismatch");
        for (std::size_t i = 0; i < in; ++i) l.w(o, i) = r.at(i).get<double>();
    }
    l.biases = j.at("biases").get<std::vector<double>>();
    if (l.biases.size() != out) throw CorruptArtifactError("corrupt artifact: bias count mismatch");
    return l;
}

inline json document(const ModelArtifact& a, int version) {
    json bounds = json::array();
    for (const auto& b : a.bounds.bounds())
        bounds.push_back({{"name", b.name}, {"min", b.min}, {"max", b.max}, {"unit", b.unit}});
    json doc{
        {"format_version", version},
        {"kind", std::string(a.kind())},
        {"feature_order", a.feature_order()},
        {"raw_inputs", a.raw_inputs},
        {"target_mode", std::string(features::to_string(a.target_mode))},
        {"bounds", std::move(bounds)},
        {"seed", a.seed},
    };
    if (const auto* lin = std::get_if<LinearModel>(&a.model)) {
        doc["weights"] = lin->weights;
        doc["bias"] = lin->bias;
        doc["ridge_lambda"] = lin->ridge_lambda;
        doc["training_loss_curve"] = json::array();
    } else {
        const auto& mlp = std::get<MlpModel>(a.model);
        json layers = json::array();
        for (const auto& l : mlp.layers) layers.push_back(layer_to_json(l));
        json acts = json::array();
        for (auto act : mlp.activations) acts.push_back(std::string(to_string(act)));
        doc["layer_sizes"] = mlp.layer_sizes;
        doc["activations"] = std::move(acts);
        doc["layers"] = std::move(layers);
        doc["training_loss_curve"] = mlp.training_loss;
        doc["validation_loss_curve"] = mlp.validation_loss;
    }
    return doc;
}

}  // namespace detail

// Serializes with an explicit format_version; tests use this to produce
// well-formed artifacts of other versions.
inline std::string serialize_artifact(const ModelArtifact& a, int version) {
    std::string body = detail::document(a, version).dump(1);
    return body + "\n" + std::string(kChecksumPrefix) + hex64(fnv1a64(body)) + "\n";
}

inline std::string serialize_artifact(const ModelArtifact& a) { return serialize_artifact(a, a.format_version); }

inline ModelArtifact deserialize_artifact(std::string_view text) {
    using nlohmann::json;
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.remove_suffix(1);
    auto nl = text.rfind('\n');
    if (nl == std::string_view::npos) throw CorruptArtifactError("corrupt artifact: missing checksum line");
    std::string_view body = text.substr(0, nl);
    std::string_view check = text.substr(nl + 1);
    if (!check.starts_with(kChecksumPrefix) || check.size() != kChecksumPrefix.size() + 16)
        throw CorruptArtifactError("corrupt artifact: missing checksum line");

    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw CorruptArtifactError(std::string("corrupt artifact: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("format_version") || !doc["format_version"].is_number_integer())
        throw CorruptArtifactError("corrupt artifact: no format_version");
    const auto version = doc["format_version"].get<std::int64_t>();
    if (version != kFormatVersion)
        throw VersionError("unsupported artifact format_version " + std::to_string(version) + " (expected " +
                           std::to_string(kFormatVersion) + ")");
    if (check.substr(kChecksumPrefix.size()) != hex64(fnv1a64(body)))
        throw ChecksumError("artifact checksum mismatch");

    try {
        ModelArtifact a;
        a.format_version = static_cast<int>(version);
        a.seed = doc.at("seed").get<std::uint64_t>();
        a.raw_inputs = doc.at("raw_inputs").get<std::vector<std::string>>();
        a.target_mode = features::parse_target_mode(doc.at("target_mode").get<std::string>());
        for (const auto& b : doc.at("bounds"))
            a.bounds.set({b.at("name").get<std::string>(), b.at("min").get<double>(), b.at("max").get<double>(),
                          b.at("unit").get<std::string>()});
        auto order = doc.at("feature_order").get<std::vector<std::string>>();
        const auto kind = doc.at("kind").get<std::string>();
        if (kind == "linear") {
            LinearModel lin;
            lin.weights = doc.at("weights").get<std::vector<double>>();
            lin.bias = doc.at("bias").get<double>();
            lin.ridge_lambda = doc.at("ridge_lambda").get<double>();
            lin.feature_order = std::move(order);
            lin.validate();
            a.model = std::move(lin);
        } else if (kind == "mlp") {
            MlpModel mlp;
            mlp.layer_sizes = doc.at("layer_sizes").get<std::vector<std::size_t>>();
            for (const auto& s : doc.at("activations")) mlp.activations.push_back(parse_activation(s.get<std::string>()));
            const auto& layers = doc.at("layers");
            if (mlp.layer_sizes.size() < 2 || layers.size() != mlp.layer_sizes.size() - 1)
                throw CorruptArtifactError("corrupt artifact: layer count mismatch");
            for (std::size_t k = 0; k < layers.size(); ++k)
                mlp.layers.push_back(detail::layer_from_json(layers[k], mlp.layer_sizes[k], mlp.layer_sizes[k + 1]));
            mlp.seed = a.seed;
            mlp.feature_order = std::move(order);
            mlp.training_loss = doc.at("training_loss_curve").get<std::vector<double>>();
            mlp.validation_loss = doc.value("validation_loss_curve", std::vector<double>{});
            mlp.validate();
            a.model = std::move(mlp);
        } else {
            throw CorruptArtifactError("corrupt artifact: unknown model kind " + kind);
        }
        return a;
    } catch (const json::exception& e) {
        throw CorruptArtifactError(std::string("corrupt artifact: ") + e.what());
    } catch (const PreconditionError& e) {
        throw CorruptArtifactError(std::string("corrupt artifact: ") + e.what());
    }
}

inline void save_model(const std::filesystem::path& path, const ModelArtifact& a) {
    fsutil::write_atomic(path, serialize_artifact(a));
}

inline ModelArtifact load_model(const std::filesystem::path& path) {
    return deserialize_artifact(fsutil::read_file(path));
}

}  // namespace pvcast::models
