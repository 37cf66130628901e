#pragma once

#include <cmath>
#include <cstdint>

namespace hypc {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

// Every distance comparison in the library goes through these two helpers so
// that the k-d tree, the linear scans and the test oracles agree bit for bit.
inline double squared_distance(Point2 a, Point2 b) noexcept {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

inline double distance(Point2 a, Point2 b) noexcept {
    return std::sqrt(squared_distance(a, b));
}

/// Result of a nearest-neighbour query: codebook index and Euclidean distance.
struct Neighbor {
    std::uint32_t index = 0;
    double distance = 0.0;
};

}  // namespace hypc
