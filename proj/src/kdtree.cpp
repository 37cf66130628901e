#include "hypc/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace hypc {

KdTree2::KdTree2(std::span<const Point2> points, std::uint32_t leaf_size)
    : points_(points.begin(), points.end()),
      ids_(points.size()),
      leaf_size_(std::max<std::uint32_t>(1, leaf_size)) {
    std::iota(ids_.begin(), ids_.end(), 0u);
    if (!points_.empty()) {
        nodes_.reserve(2 * points_.size() / leaf_size_ + 2);
        build(0, static_cast<std::uint32_t>(points_.size()));
    }
}

std::int32_t KdTree2::build(std::uint32_t begin, std::uint32_t end) {
    const auto self = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{0.0, begin, end, -1, -1, 0});
    if (end - begin <= leaf_size_) {
        return self;
    }

    double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
    double min_y = min_x, max_y = -min_x;
    for (std::uint32_t i = begin; i < end; ++i) {
        min_x = std::min(min_x, points_[i].x);
        max_x = std::max(max_x, points_[i].x);
        min_y = std::min(min_y, points_[i].y);
        max_y = std::max(max_y, points_[i].y);
    }
    const std::uint8_t axis = (max_y - min_y) > (max_x - min_x) ? 1 : 0;

    // Sort a permutation so points and ids move together.
    std::vector<std::uint32_t> perm(end - begin);
    std::iota(perm.begin(), perm.end(), begin);
    const std::uint32_t mid_offset = (end - begin) / 2;
    auto coord = [&](std::uint32_t i) { return axis == 0 ? points_[i].x : points_[i].y; };
    std::nth_element(perm.begin(), perm.begin() + mid_offset, perm.end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                         const double ca = coord(a), cb = coord(b);
                         return ca < cb || (ca == cb && ids_[a] < ids_[b]);
                     });
    std::vector<Point2> tmp_points(perm.size());
    std::vector<std::uint32_t> tmp_ids(perm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) {
        tmp_points[k] = points_[perm[k]];
        tmp_ids[k] = ids_[perm[k]];
    }
    std::copy(tmp_points.begin(), tmp_points.end(), points_.begin() + begin);
    std::copy(tmp_ids.begin(), tmp_ids.end(), ids_.begin() + begin);

    const std::uint32_t mid = begin + mid_offset;
    const double split = axis == 0 ? points_[mid].x : points_[mid].y;
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    Node& node = nodes_[static_cast<std::size_t>(self)];
    node.split = split;
    node.axis = axis;
    node.left = left;
    node.right = right;
    return self;
}

Neighbor KdTree2::nearest(Point2 query) const {
    double best_d2 = std::numeric_limits<double>::infinity();
    std::uint32_t best_index = std::numeric_limits<std::uint32_t>::max();
    if (!nodes_.empty()) {
        search(0, query, best_d2, best_index);
    }
    return Neighbor{best_index, std::sqrt(best_d2)};
}

void KdTree2::search(std::int32_t node_id, Point2 query, double& best_d2,
                     std::uint32_t& best_index) const {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (node.left < 0) {
        for (std::uint32_t i = node.begin; i < node.end; ++i) {
            const double d2 = squared_distance(points_[i], query);
            if (d2 < best_d2 || (d2 == best_d2 && ids_[i] < best_index)) {
                best_d2 = d2;
                best_index = ids_[i];
            }
        }
        return;
    }

    const double q = node.axis == 0 ? query.x : query.y;
    const double diff = q - node.split;
    const bool go_left = diff < 0.0;
    search(go_left ? node.left : node.right, query, best_d2, best_index);
    // Left holds coordinates <= split and right holds >= split, so diff^2 is a
    // lower bound on the squared distance to anything in the far subtree.
    if (diff * diff <= best_d2) {
        search(go_left ? node.right : node.left, query, best_d2, best_index);
    }
}

}  // namespace hypc
