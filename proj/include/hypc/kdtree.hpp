#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hypc/geometry.hpp"

namespace hypc {

/// Static 2-d tree over a fixed point set.
///
/// Queries return exactly the exhaustive-scan argmin, with ties resolved in
/// favour of the smallest original index. Pruning uses `<=` against the best
/// squared distance so that equally distant candidates in a sibling subtree
/// are still visited.
class KdTree2 {
public:
    KdTree2() = default;
    explicit KdTree2(std::span<const Point2> points, std::uint32_t leaf_size = 8);

    Neighbor nearest(Point2 query) const;

    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }

private:
    struct Node {
        double split = 0.0;
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint8_t axis = 0;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);
    void search(std::int32_t node, Point2 query, double& best_d2,
                std::uint32_t& best_index) const;

    // Points reordered into tree order, with their original indices.
    std::vector<Point2> points_;
    std::vector<std::uint32_t> ids_;
    std::vector<Node> nodes_;
    std::uint32_t leaf_size_ = 8;
};

}  // namespace hypc
