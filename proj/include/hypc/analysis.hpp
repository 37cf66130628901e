#pragma once

#include <cstdint>
#include <span>

#include <json.hpp>

#include "hypc/codec.hpp"

namespace hypc {

struct ErrorStats {
    double max_abs = 0.0;
    double mean_abs = 0.0;
    double rmse = 0.0;
    std::size_t count = 0;
};

/// Element-wise error between two equally long vectors (DataError otherwise).
ErrorStats error_stats(std::span<const float> original, std::span<const float> restored);
nlohmann::json to_json(const ErrorStats& stats);

/// original / compressed; both must be positive.
double compression_ratio(double original_bytes, double compressed_bytes);

/// Ratio of raw f32 pairs to bit-packed indices: 64 / bit_width.
double payload_ratio(unsigned bit_width);

/// The reconstruction error bound for one group: covering radius of the
/// grid codebook divided by the group's scale factor,
/// (sqrt(2) * l / floor(sqrt(U))) / s_m.
double group_error_bound(const CodebookConfig& config, std::uint16_t category);

/// Per-weight bounds for an encoded layer, recomputed from the stored thetas.
std::vector<double> weight_error_bounds(const EncodedLayer& layer);

/// Both sides of the error inequality for one draw. `inputs` is m x N0
/// row-major; rhs = 2 m N0 max|w - q|.
struct BoundCheck {
    double lhs_pre = 0.0;   // ||Xw - Xq||_1
    double lhs_relu = 0.0;  // ||relu(Xw) - relu(Xq)||_1
    double rhs = 0.0;
    double epsilon = 0.0;
};
BoundCheck check_linear_error_bound(std::span<const double> inputs, std::span<const float> w,
                                    std::span<const float> q, std::size_t samples);

struct ErrorBoundReport {
    std::size_t trials = 0;
    double pass_fraction_pre = 0.0;   // ||Xw - Xq||_1 <= 2 m N0 eps
    double pass_fraction_relu = 0.0;  // same with ReLU applied to both sides
    double max_ratio_observed = 0.0;  // largest lhs / rhs over all checks
    double epsilon_max = 0.0;         // largest max|w - q| over all trials
    bool relu_never_exceeds_pre = true;
};

/// Empirical check of the linear-layer error theorem with c = 1 and a
/// 1-Lipschitz ReLU. Each trial draws X ~ U[0,1]^{m x N0} and w ~ U[0,1]^N0,
/// compresses and restores w into q and tests both inequalities.
/// Trial t uses seed mix64(seed + t).
ErrorBoundReport validate_error_bound(std::size_t samples, std::size_t dims,
                                      const EncodeParams& params, std::size_t trials,
                                      std::uint64_t seed);
nlohmann::json to_json(const ErrorBoundReport& report);

}  // namespace hypc
