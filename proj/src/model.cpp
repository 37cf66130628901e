#include "hypc/model.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "hypc/error.hpp"

namespace hypc {

namespace {

EncodeParams merge(EncodeParams base, const nlohmann::json& j) {
    if (!j.is_object()) {
        throw DomainError("per-layer parameters must be JSON objects");
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "l") {
            base.side = value.get<double>();
        } else if (key == "u") {
            const auto u = value.get<std::int64_t>();
            if (u < 1 || u > 0xFFFFFFFFLL) throw DomainError("u out of range");
            base.index_bound = static_cast<std::uint32_t>(u);
        } else if (key == "max_class") {
            const auto m = value.get<std::int64_t>();
            if (m < 0 || m > 0xFFFF) throw DomainError("max_class out of range");
            base.max_class = static_cast<std::uint16_t>(m);
        } else if (key == "direction") {
            base.direction = parse_direction_mode(value.get<std::string>());
        } else {
            throw DomainError("unknown per-layer key '" + key + "'");
        }
    }
    return base;
}

}  // namespace

void LayerParams::apply_json(const nlohmann::json& doc) {
    try {
        if (!doc.is_object()) {
            throw DomainError("per-layer document must be a JSON object");
        }
        if (doc.contains("default")) {
            defaults_ = merge(defaults_, doc.at("default"));
        }
        if (doc.contains("layers")) {
            for (const auto& [name, value] : doc.at("layers").items()) {
                overrides_[name] = merge(defaults_, value);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("per-layer parameters: ") + e.what());
    }
}

void LayerParams::set_override(const std::string& name, EncodeParams params) {
    overrides_[name] = params;
}

EncodeParams LayerParams::for_layer(const std::string& name) const {
    auto it = overrides_.find(name);
    return it == overrides_.end() ? defaults_ : it->second;
}

CompressedModel compress_bundle(const TensorBundle& bundle, const LayerParams& params,
                                unsigned jobs, const EncodeOptions& options) {
    bundle.validate();
    const std::size_t n = bundle.tensors.size();
    CompressedModel model;
    model.layers.resize(n);

    auto encode_one = [&](std::size_t i) {
        const Tensor& t = bundle.tensors[i];
        model.layers[i] = encode_layer(t.data, t.name, t.shape, params.for_layer(t.name), options);
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) encode_one(i);
        return model;
    }

    // Workers claim layers in order; the first failure (lowest index) wins.
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        encode_one(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return model;
}

TensorBundle decompress_model(const CompressedModel& model) {
    model.validate();
    TensorBundle bundle;
    bundle.tensors.reserve(model.layers.size());
    for (const auto& layer : model.layers) {
        bundle.tensors.push_back(Tensor{layer.name, layer.shape, decode_layer(layer)});
    }
    return bundle;
}

BenchMode parse_bench_mode(std::string_view text) {
    if (text == "full") return BenchMode::Full;
    if (text == "no-kd") return BenchMode::NoKd;
    if (text == "no-matrix") return BenchMode::NoMatrix;
    if (text == "naive") return BenchMode::Naive;
    throw DomainError("unknown bench mode '" + std::string(text) +
                      "' (expected full|no-kd|no-matrix|naive)");
}

std::string_view to_string(BenchMode mode) noexcept {
    switch (mode) {
        case BenchMode::Full: return "full";
        case BenchMode::NoKd: return "no-kd";
        case BenchMode::NoMatrix: return "no-matrix";
        case BenchMode::Naive: return "naive";
    }
    return "full";
}

EncodeOptions options_for(BenchMode mode) noexcept {
    switch (mode) {
        case BenchMode::Full: return {SearchStrategy::KdTree, Evaluation::Batched};
        case BenchMode::NoKd: return {SearchStrategy::LinearScan, Evaluation::Batched};
        case BenchMode::NoMatrix: return {SearchStrategy::KdTree, Evaluation::PerGroup};
        case BenchMode::Naive: return {SearchStrategy::LinearScan, Evaluation::PerGroup};
    }
    return {};
}

}  // namespace hypc
