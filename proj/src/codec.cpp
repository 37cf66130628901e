#include "hypc/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "hypc/bitpack.hpp"
#include "hypc/error.hpp"

namespace hypc {

namespace {

Point2 scale_about(Point2 p, Point2 centroid, double s) noexcept {
    return {(p.x - centroid.x) * s + centroid.x, (p.y - centroid.y) * s + centroid.y};
}

Point2 unscale_about(Point2 p, Point2 centroid, double s) noexcept {
    return {(p.x - centroid.x) / s + centroid.x, (p.y - centroid.y) / s + centroid.y};
}

double ring_bound(std::uint16_t m, double half, double farthest, std::uint16_t max_class) {
    return half + (farthest / max_class) * m;
}

void check_params(const EncodeParams& params) {
    if (!(params.side > 0.0) || !std::isfinite(params.side)) {
        throw DomainError("box side l must be finite and > 0");
    }
    if (params.index_bound == 0) {
        throw DomainError("index bound U must be >= 1");
    }
}

}  // namespace

GroupedPoints group_pairs(std::span<const float> weights) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!std::isfinite(weights[i])) {
            throw DataError("non-finite weight at index " + std::to_string(i));
        }
    }

    GroupedPoints out;
    const std::size_t pairs = weights.size() / 2;
    out.points.reserve(pairs + 1);
    for (std::size_t g = 0; g < pairs; ++g) {
        out.points.push_back({weights[2 * g], weights[2 * g + 1]});
    }
    if (weights.size() % 2 == 1) {
        // Mean x over the prefix pairs and the lone element's pair.
        double sum_x = 0.0;
        for (std::size_t i = 0; i < weights.size(); i += 2) {
            sum_x += weights[i];
        }
        out.pad_value = sum_x / static_cast<double>(pairs + 1);
        out.padded = true;
        out.points.push_back({weights.back(), out.pad_value});
    }
    return out;
}

LayerGeometry analyze(std::span<const Point2> points) {
    if (points.empty()) {
        throw DomainError("analyze: no points");
    }
    double sx = 0.0, sy = 0.0;
    for (const auto& p : points) {
        sx += p.x;
        sy += p.y;
    }
    const double n = static_cast<double>(points.size());
    LayerGeometry geom{{sx / n, sy / n}, 0.0};
    for (const auto& p : points) {
        geom.farthest = std::max(geom.farthest, distance(p, geom.centroid));
    }
    return geom;
}

std::uint16_t categorize(double dist, double side, double farthest, std::uint16_t max_class) {
    const double half = side / 2;
    if (dist <= half || farthest == 0.0) {
        return 0;
    }
    if (max_class == 0) {
        throw DomainError("max class 0 requires every group within l/2 of the centroid (distance " +
                          std::to_string(dist) + " > " + std::to_string(half) + ")");
    }
    const double tolerance = 1e-9 * std::max(1.0, half + farthest);
    if (dist > half + farthest + tolerance) {
        throw ConsistencyError("group distance " + std::to_string(dist) +
                               " exceeds l/2 + l_f = " + std::to_string(half + farthest));
    }

    const double estimate = std::ceil((dist - half) * max_class / farthest);
    auto m = static_cast<std::uint16_t>(std::clamp(estimate, 1.0, static_cast<double>(max_class)));
    while (m > 1 && dist <= ring_bound(m - 1, half, farthest, max_class)) {
        --m;
    }
    while (m < max_class && dist > ring_bound(m, half, farthest, max_class)) {
        ++m;
    }
    return m;
}

std::uint16_t categorize(Point2 point, Point2 centroid, double farthest, double side,
                         std::uint16_t max_class) {
    return categorize(distance(point, centroid), side, farthest, max_class);
}

double scale_factor(std::uint16_t m, double side, double farthest, std::uint16_t max_class) {
    if (m > max_class) {
        throw DomainError("category " + std::to_string(m) + " exceeds max class " +
                          std::to_string(max_class));
    }
    if (m == 0 || farthest == 0.0) {
        return 1.0;
    }
    const double half = side / 2;
    return half / ring_bound(m, half, farthest, max_class);
}

unsigned bit_width_for(std::uint32_t max_theta) noexcept {
    return std::max(1u, static_cast<unsigned>(std::bit_width(max_theta)));
}

std::uint32_t EncodedLayer::theta_limit() const noexcept {
    const std::uint64_t limit = (static_cast<std::uint64_t>(config.max_class) + 1) *
                                config.index_bound;
    return static_cast<std::uint32_t>(std::min<std::uint64_t>(limit, 0xFFFFFFFFu));
}

std::vector<std::uint32_t> EncodedLayer::thetas() const {
    const std::size_t expected = packed_size(group_count(), bit_width);
    if (payload.size() < expected) {
        throw FormatError("layer '" + name + "': payload has " + std::to_string(payload.size()) +
                          " bytes, expected " + std::to_string(expected));
    }
    auto values = unpack_bits(payload, bit_width, group_count());
    const std::uint64_t limit =
        (static_cast<std::uint64_t>(config.max_class) + 1) * config.index_bound;
    for (std::size_t g = 0; g < values.size(); ++g) {
        if (values[g] >= limit) {
            throw FormatError("layer '" + name + "': theta " + std::to_string(values[g]) +
                              " at group " + std::to_string(g) + " >= (M+1)*U = " +
                              std::to_string(limit));
        }
    }
    return values;
}

EncodedLayer encode_layer(std::span<const float> weights, std::string name,
                          std::vector<std::uint64_t> shape, const EncodeParams& params,
                          const EncodeOptions& options) {
    check_params(params);
    const std::uint64_t product = std::accumulate(shape.begin(), shape.end(), std::uint64_t{1},
                                                  std::multiplies<>());
    if (product != weights.size()) {
        throw DataError("layer '" + name + "': shape holds " + std::to_string(product) +
                        " elements but " + std::to_string(weights.size()) + " weights given");
    }

    EncodedLayer out;
    out.name = std::move(name);
    out.shape = std::move(shape);
    out.element_count = weights.size();

    GroupedPoints grouped = group_pairs(weights);
    out.padded = grouped.padded;
    out.pad_value = grouped.pad_value;

    const std::span<const Point2> points = grouped.points;
    const LayerGeometry geom = points.empty() ? LayerGeometry{} : analyze(points);
    out.config = CodebookConfig{params.side, params.index_bound, params.max_class,
                                params.direction, geom.centroid, geom.farthest};
    out.config.validate();

    const std::size_t groups = points.size();
    const CodebookConfig& cfg = out.config;
    const std::uint32_t U = cfg.index_bound;
    std::vector<std::uint32_t> thetas(groups);

    // The linear-scan arms never materialize the codebook.
    std::unique_ptr<Codebook> codebook;
    if (options.search == SearchStrategy::KdTree && groups > 0) {
        codebook = std::make_unique<Codebook>(cfg);
    }

    if (options.evaluation == Evaluation::Batched) {
        std::vector<double> dist(groups);
        std::vector<std::uint16_t> category(groups);
        std::vector<double> factor(groups);
        std::vector<Point2> scaled(groups);

        for (std::size_t g = 0; g < groups; ++g) {
            dist[g] = distance(points[g], cfg.centroid);
        }
        for (std::size_t g = 0; g < groups; ++g) {
            category[g] = categorize(dist[g], cfg.side, cfg.farthest, cfg.max_class);
        }
        for (std::size_t g = 0; g < groups; ++g) {
            factor[g] = scale_factor(category[g], cfg.side, cfg.farthest, cfg.max_class);
        }
        for (std::size_t g = 0; g < groups; ++g) {
            scaled[g] = scale_about(points[g], cfg.centroid, factor[g]);
        }

        std::vector<std::uint32_t> lambda(groups, 0);
        if (codebook) {
            for (std::size_t g = 0; g < groups; ++g) {
                lambda[g] = codebook->nearest(scaled[g]).index;
            }
        } else if (groups > 0) {
            // Brute force over the trajectory, one trajectory point against
            // every group at a time. Ascending lambda with strict `<` keeps
            // the smallest index on ties.
            const Direction a = direction_vector(U, cfg.side, cfg.direction);
            std::vector<double> best(groups, std::numeric_limits<double>::infinity());
            for (std::uint32_t l = 0; l < U; ++l) {
                const Point2 p = trajectory_point(l, a, cfg);
                for (std::size_t g = 0; g < groups; ++g) {
                    const double d2 = squared_distance(p, scaled[g]);
                    if (d2 < best[g]) {
                        best[g] = d2;
                        lambda[g] = l;
                    }
                }
            }
        }
        for (std::size_t g = 0; g < groups; ++g) {
            thetas[g] = lambda[g] + U * category[g];
        }
    } else {
        for (std::size_t g = 0; g < groups; ++g) {
            const double d = distance(points[g], cfg.centroid);
            const std::uint16_t m = categorize(d, cfg.side, cfg.farthest, cfg.max_class);
            const double s = scale_factor(m, cfg.side, cfg.farthest, cfg.max_class);
            const Point2 o = scale_about(points[g], cfg.centroid, s);
            const std::uint32_t l =
                codebook ? codebook->nearest(o).index : nearest_on_trajectory(o, cfg).index;
            thetas[g] = l + U * m;
        }
    }

    const std::uint32_t max_theta =
        thetas.empty() ? 0u : *std::max_element(thetas.begin(), thetas.end());
    out.bit_width = static_cast<std::uint8_t>(bit_width_for(max_theta));
    out.payload = pack_bits(thetas, out.bit_width);
    return out;
}

Point2 decode_theta(std::uint32_t theta, const Codebook& codebook) {
    const CodebookConfig& cfg = codebook.config();
    const std::uint32_t m = theta / cfg.index_bound;
    const std::uint32_t lambda = theta % cfg.index_bound;
    if (m > cfg.max_class) {
        throw FormatError("theta " + std::to_string(theta) + " >= (M+1)*U");
    }
    const double s =
        scale_factor(static_cast<std::uint16_t>(m), cfg.side, cfg.farthest, cfg.max_class);
    return unscale_about(codebook[lambda], cfg.centroid, s);
}

LayerDecoder::LayerDecoder(std::shared_ptr<const EncodedLayer> layer) : layer_(std::move(layer)) {}

const Codebook& LayerDecoder::codebook() const {
    std::call_once(once_, [this] {
        codebook_ = std::make_unique<const Codebook>(layer_->config);
        ++builds_;
    });
    return *codebook_;
}

int LayerDecoder::codebook_builds() const {
    return builds_.load();
}

std::vector<float> LayerDecoder::decode() const {
    const EncodedLayer& layer = *layer_;
    const std::vector<std::uint32_t> thetas = layer.thetas();
    std::vector<float> out(layer.element_count);
    if (thetas.empty()) {
        return out;
    }
    const Codebook& book = codebook();
    for (std::size_t g = 0; g < thetas.size(); ++g) {
        const Point2 p = decode_theta(thetas[g], book);
        out[2 * g] = static_cast<float>(p.x);
        if (2 * g + 1 < out.size()) {
            out[2 * g + 1] = static_cast<float>(p.y);
        }
    }
    return out;
}

std::vector<float> decode_layer(const EncodedLayer& layer) {
    // Non-owning alias; the decoder does not outlive this call.
    LayerDecoder decoder(std::shared_ptr<const EncodedLayer>(std::shared_ptr<void>{}, &layer));
    return decoder.decode();
}

}  // namespace hypc
