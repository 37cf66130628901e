#pragma once

#include <cstdint>
#include <atomic>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hypc/ergodic.hpp"

namespace hypc {

/// User-facing compression knobs for one layer.
struct EncodeParams {
    double side = 0.1;              // l
    std::uint32_t index_bound = 225;  // U
    std::uint16_t max_class = 3;    // M
    DirectionMode direction = DirectionMode::GridShear;
};

/// Nearest-neighbour backend used while encoding.
enum class SearchStrategy {
    KdTree,      // query the stored codebook through its k-d tree
    LinearScan,  // brute force over the trajectory, no index
};

/// Whether the scale/translate/search stages run over whole arrays of groups
/// or one group at a time.
enum class Evaluation {
    Batched,
    PerGroup,
};

struct EncodeOptions {
    SearchStrategy search = SearchStrategy::KdTree;
    Evaluation evaluation = Evaluation::Batched;
};

/// A layer's weights split into consecutive pairs.
struct GroupedPoints {
    std::vector<Point2> points;
    bool padded = false;
    double pad_value = 0.0;
};

/// Pairs (w0, w1), (w2, w3), ... For odd lengths the last pair is completed
/// with the mean of the even-indexed weights, which is also the x-coordinate
/// of the padded layer's centroid. Throws DataError on NaN/Inf.
GroupedPoints group_pairs(std::span<const float> weights);

struct LayerGeometry {
    Point2 centroid{};
    double farthest = 0.0;
};

/// Centroid and farthest centroid distance. Throws DomainError when empty.
LayerGeometry analyze(std::span<const Point2> points);

/// Ring index of a point at `dist` from the centroid: 0 inside radius l/2,
/// otherwise the smallest m in [1, M] with dist <= l/2 + (l_f / M) * m.
std::uint16_t categorize(double dist, double side, double farthest, std::uint16_t max_class);
std::uint16_t categorize(Point2 point, Point2 centroid, double farthest, double side,
                         std::uint16_t max_class);

/// s_m = (l/2) / (l/2 + (l_f / M) * m); 1 for m = 0 or l_f = 0.
double scale_factor(std::uint16_t m, double side, double farthest, std::uint16_t max_class);

/// Smallest width that can hold `max_theta`, never below 1.
unsigned bit_width_for(std::uint32_t max_theta) noexcept;

/// Everything needed to restore one compressed tensor.
struct EncodedLayer {
    std::string name;
    std::vector<std::uint64_t> shape;
    std::uint64_t element_count = 0;
    bool padded = false;
    CodebookConfig config;
    double pad_value = 0.0;
    std::uint8_t bit_width = 1;
    std::vector<std::uint8_t> payload;

    std::uint64_t group_count() const noexcept { return (element_count + 1) / 2; }
    std::uint32_t theta_limit() const noexcept;

    /// Unpacks every theta, checking each against (M + 1) * U.
    std::vector<std::uint32_t> thetas() const;

    friend bool operator==(const EncodedLayer&, const EncodedLayer&) = default;
};

/// Compresses a flat weight vector. `shape` is stored as metadata and must
/// multiply out to weights.size() (an empty shape denotes a scalar).
EncodedLayer encode_layer(std::span<const float> weights, std::string name,
                          std::vector<std::uint64_t> shape, const EncodeParams& params,
                          const EncodeOptions& options = {});

/// Restores the pair for one theta. Throws FormatError when theta is out of
/// range for the codebook's configuration.
Point2 decode_theta(std::uint32_t theta, const Codebook& codebook);

/// Decodes one layer, memoizing its codebook across calls. The memo is
/// guarded so one decoder may be shared between threads.
class LayerDecoder {
public:
    explicit LayerDecoder(std::shared_ptr<const EncodedLayer> layer);

    const EncodedLayer& layer() const noexcept { return *layer_; }
    const Codebook& codebook() const;
    std::vector<float> decode() const;

    /// Number of times the codebook was built (0 or 1).
    int codebook_builds() const;

private:
    std::shared_ptr<const EncodedLayer> layer_;
    mutable std::once_flag once_;
    mutable std::unique_ptr<const Codebook> codebook_;
    mutable std::atomic<int> builds_{0};
};

std::vector<float> decode_layer(const EncodedLayer& layer);

}  // namespace hypc
