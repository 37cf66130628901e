#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "hypc/codec.hpp"
#include "hypc/container.hpp"

namespace hypc {

/// Encoding parameters for a whole bundle: a default plus per-tensor overrides.
class LayerParams {
public:
    LayerParams() = default;
    explicit LayerParams(EncodeParams defaults) : defaults_(defaults) {}

    /// Applies a document of the form
    ///   {"default": {"l": .., "u": .., "max_class": .., "direction": "grid"},
    ///    "layers": {"<name>": {...}}}
    /// on top of the current defaults. Missing keys inherit.
    void apply_json(const nlohmann::json& doc);

    void set_override(const std::string& name, EncodeParams params);
    const EncodeParams& defaults() const noexcept { return defaults_; }
    EncodeParams for_layer(const std::string& name) const;

private:
    EncodeParams defaults_;
    std::map<std::string, EncodeParams> overrides_;
};

/// Encodes every tensor of `bundle`. Up to `jobs` layers are encoded at the
/// same time; the result keeps the bundle's tensor order and does not depend
/// on `jobs`.
CompressedModel compress_bundle(const TensorBundle& bundle, const LayerParams& params,
                                unsigned jobs = 1, const EncodeOptions& options = {});

TensorBundle decompress_model(const CompressedModel& model);

/// Arms of the acceleration ablation.
enum class BenchMode {
    Full,      // k-d tree + batched arrays
    NoKd,      // batched arrays, brute-force trajectory search
    NoMatrix,  // k-d tree, one group at a time
    Naive,     // one group at a time, re-evaluating the trajectory per query
};

BenchMode parse_bench_mode(std::string_view text);
std::string_view to_string(BenchMode mode) noexcept;
EncodeOptions options_for(BenchMode mode) noexcept;

}  // namespace hypc
