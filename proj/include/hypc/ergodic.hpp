#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hypc/geometry.hpp"
#include "hypc/kdtree.hpp"

namespace hypc {

/// How the per-step increment of the winding trajectory is chosen.
///
/// `GridShear` steps by (l/U, l/floor(sqrt U)), which turns the first U
/// trajectory points into a sheared floor(sqrt U) x floor(sqrt U) lattice.
/// `PaperEq` evaluates the original trig direction/step-size construction
/// literally; its points cluster in a thin vertical strip of the box.
enum class DirectionMode : std::uint8_t {
    GridShear = 0,
    PaperEq = 1,
};

std::string_view to_string(DirectionMode mode) noexcept;
DirectionMode parse_direction_mode(std::string_view text);

/// Per-layer encoding parameters together with the layer geometry they were
/// derived from. Rebuilding a codebook from the stored fields reproduces it
/// exactly.
struct CodebookConfig {
    double side = 0.1;            // l, side of the box around the centroid
    std::uint32_t index_bound = 1;  // U, number of codebook points
    std::uint16_t max_class = 0;  // M, number of scaling rings outside the box
    DirectionMode direction = DirectionMode::GridShear;
    Point2 centroid{};
    double farthest = 0.0;        // l_f, largest distance from the centroid

    /// Throws DomainError when a field is out of range.
    void validate() const;

    double box_min_x() const noexcept { return centroid.x - side / 2; }
    double box_max_x() const noexcept { return centroid.x + side / 2; }
    double box_min_y() const noexcept { return centroid.y - side / 2; }
    double box_max_y() const noexcept { return centroid.y + side / 2; }

    friend bool operator==(const CodebookConfig&, const CodebookConfig&) = default;
};

/// Per-index increment of the winding line.
struct Direction {
    double a1 = 0.0;
    double a2 = 0.0;
};

/// Fractional part x - floor(x), in [0, 1). Throws DomainError for NaN/Inf.
double frac(double x);

/// Wraps each component into [0, l) and shifts the result into the box.
Point2 generalized_tau(Point2 v, const CodebookConfig& config);

Direction direction_vector(std::uint32_t index_bound, double side, DirectionMode mode);

/// The trajectory point for index `lambda`: generalized_tau(lambda * a).
Point2 trajectory_point(std::uint32_t lambda, Direction a, const CodebookConfig& config);

/// The U trajectory points of a layer's box plus a nearest-neighbour index.
/// Immutable after construction; safe for concurrent readers.
class Codebook {
public:
    explicit Codebook(const CodebookConfig& config);

    const CodebookConfig& config() const noexcept { return config_; }
    const Direction& direction() const noexcept { return direction_; }
    std::span<const Point2> points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    const Point2& operator[](std::size_t i) const { return points_[i]; }

    /// Closest codebook point; ties go to the smallest index.
    Neighbor nearest(Point2 query) const { return tree_.nearest(query); }

    /// Same contract as nearest(), by scanning every stored point.
    Neighbor nearest_linear(Point2 query) const;

private:
    CodebookConfig config_;
    Direction direction_;
    std::vector<Point2> points_;
    KdTree2 tree_;
};

Codebook build_codebook(const CodebookConfig& config);

/// Nearest trajectory point found by re-evaluating the trajectory for every
/// candidate index instead of consulting stored points. This is the
/// unaccelerated search used as a baseline; it returns the same answer as
/// Codebook::nearest.
Neighbor nearest_on_trajectory(Point2 query, const CodebookConfig& config);

}  // namespace hypc
