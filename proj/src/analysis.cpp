#include "hypc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hypc/error.hpp"
#include "hypc/random.hpp"

namespace hypc {

ErrorStats error_stats(std::span<const float> original, std::span<const float> restored) {
    if (original.size() != restored.size()) {
        throw DataError("error_stats: lengths differ (" + std::to_string(original.size()) +
                        " vs " + std::to_string(restored.size()) + ")");
    }
    ErrorStats s;
    s.count = original.size();
    if (s.count == 0) return s;
    double sum_abs = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < original.size(); ++i) {
        const double e = std::abs(static_cast<double>(original[i]) - restored[i]);
        s.max_abs = std::max(s.max_abs, e);
        sum_abs += e;
        sum_sq += e * e;
    }
    const double n = static_cast<double>(s.count);
    s.mean_abs = sum_abs / n;
    s.rmse = std::sqrt(sum_sq / n);
    return s;
}

nlohmann::json to_json(const ErrorStats& stats) {
    return {{"count", stats.count},
            {"max_abs", stats.max_abs},
            {"mean_abs", stats.mean_abs},
            {"rmse", stats.rmse}};
}

double compression_ratio(double original_bytes, double compressed_bytes) {
    if (!(original_bytes > 0.0) || !(compressed_bytes > 0.0)) {
        throw DomainError("compression_ratio: sizes must be > 0");
    }
    return original_bytes / compressed_bytes;
}

double payload_ratio(unsigned bit_width) {
    if (bit_width == 0) {
        throw DomainError("payload_ratio: bit width must be > 0");
    }
    return 64.0 / bit_width;
}

double group_error_bound(const CodebookConfig& config, std::uint16_t category) {
    const double rows = std::floor(std::sqrt(static_cast<double>(config.index_bound)));
    const double covering = std::numbers::sqrt2 * config.side / rows;
    return covering / scale_factor(category, config.side, config.farthest, config.max_class);
}

std::vector<double> weight_error_bounds(const EncodedLayer& layer) {
    const auto thetas = layer.thetas();
    std::vector<double> out(layer.element_count);
    for (std::size_t g = 0; g < thetas.size(); ++g) {
        const auto m = static_cast<std::uint16_t>(thetas[g] / layer.config.index_bound);
        const double b = group_error_bound(layer.config, m);
        out[2 * g] = b;
        if (2 * g + 1 < out.size()) out[2 * g + 1] = b;
    }
    return out;
}

BoundCheck check_linear_error_bound(std::span<const double> inputs, std::span<const float> w,
                                    std::span<const float> q, std::size_t samples) {
    const std::size_t dims = w.size();
    if (q.size() != dims || inputs.size() != samples * dims) {
        throw DataError("check_linear_error_bound: dimension mismatch");
    }
    BoundCheck out;
    for (std::size_t k = 0; k < dims; ++k) {
        out.epsilon = std::max(out.epsilon, std::abs(static_cast<double>(w[k]) - q[k]));
    }
    for (std::size_t i = 0; i < samples; ++i) {
        double xw = 0.0, xq = 0.0;
        for (std::size_t k = 0; k < dims; ++k) {
            xw += inputs[i * dims + k] * w[k];
            xq += inputs[i * dims + k] * q[k];
        }
        out.lhs_pre += std::abs(xw - xq);
        out.lhs_relu += std::abs(std::max(xw, 0.0) - std::max(xq, 0.0));
    }
    out.rhs = 2.0 * static_cast<double>(samples) * static_cast<double>(dims) * out.epsilon;
    return out;
}

ErrorBoundReport validate_error_bound(std::size_t samples, std::size_t dims,
                                      const EncodeParams& params, std::size_t trials,
                                      std::uint64_t seed) {
    if (samples == 0 || dims == 0) {
        throw DomainError("validate_error_bound: m and N0 must be >= 1");
    }
    ErrorBoundReport report;
    report.trials = trials;
    std::size_t pass_pre = 0, pass_relu = 0;

    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(mix64(seed + t));
        std::vector<double> x(samples * dims);
        for (auto& v : x) v = rng.uniform();
        std::vector<float> w(dims);
        for (auto& v : w) v = static_cast<float>(rng.uniform());

        const EncodedLayer enc = encode_layer(w, "w", {dims}, params);
        const std::vector<float> q = decode_layer(enc);

        const BoundCheck check = check_linear_error_bound(x, w, q, samples);
        const double lhs_pre = check.lhs_pre, lhs_relu = check.lhs_relu, rhs = check.rhs;
        report.epsilon_max = std::max(report.epsilon_max, check.epsilon);
        if (lhs_pre <= rhs) ++pass_pre;
        if (lhs_relu <= rhs) ++pass_relu;
        if (lhs_relu > lhs_pre) report.relu_never_exceeds_pre = false;
        if (rhs > 0.0) {
            report.max_ratio_observed = std::max(report.max_ratio_observed, lhs_pre / rhs);
        }
    }
    if (trials > 0) {
        report.pass_fraction_pre = static_cast<double>(pass_pre) / static_cast<double>(trials);
        report.pass_fraction_relu = static_cast<double>(pass_relu) / static_cast<double>(trials);
    }
    return report;
}

nlohmann::json to_json(const ErrorBoundReport& report) {
    return {{"trials", report.trials},
            {"pass_fraction", std::min(report.pass_fraction_pre, report.pass_fraction_relu)},
            {"pass_fraction_pre", report.pass_fraction_pre},
            {"pass_fraction_relu", report.pass_fraction_relu},
            {"max_ratio_observed", report.max_ratio_observed},
            {"epsilon_max", report.epsilon_max}};
}

}  // namespace hypc
