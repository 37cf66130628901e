#include "hypc/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hypc/error.hpp"

namespace hypc {

std::string_view to_string(DirectionMode mode) noexcept {
    return mode == DirectionMode::PaperEq ? "paper" : "grid";
}

DirectionMode parse_direction_mode(std::string_view text) {
    if (text == "grid") return DirectionMode::GridShear;
    if (text == "paper") return DirectionMode::PaperEq;
    throw DomainError("unknown direction mode '" + std::string(text) + "' (expected grid|paper)");
}

void CodebookConfig::validate() const {
    if (!(side > 0.0) || !std::isfinite(side)) {
        throw DomainError("box side must be finite and > 0");
    }
    if (index_bound == 0) {
        throw DomainError("index bound U must be >= 1");
    }
    // theta = m * U + lambda must fit in 32 bits.
    if ((static_cast<std::uint64_t>(max_class) + 1) * index_bound > (std::uint64_t{1} << 32)) {
        throw DomainError("(M + 1) * U exceeds 2^32");
    }
    if (!std::isfinite(centroid.x) || !std::isfinite(centroid.y)) {
        throw DomainError("centroid must be finite");
    }
    if (!(farthest >= 0.0) || !std::isfinite(farthest)) {
        throw DomainError("farthest distance must be finite and >= 0");
    }
    if (direction != DirectionMode::GridShear && direction != DirectionMode::PaperEq) {
        throw DomainError("invalid direction mode");
    }
}

double frac(double x) {
    if (!std::isfinite(x)) {
        throw DomainError("frac: non-finite input");
    }
    const double r = x - std::floor(x);
    // x - floor(x) rounds up to 1.0 for tiny negative x.
    return r < 1.0 ? r : 0.0;
}

namespace {

double wrap(double v, double side) {
    double r = std::fmod(v, side);
    if (r < 0.0) {
        r += side;
    }
    // A product like 15 * (l / 15) can land a few ulps below a multiple of
    // l; treat that as the multiple itself so lattice points stay on one edge.
    const double slack = 8 * std::numeric_limits<double>::epsilon() * std::max(std::abs(v), side);
    return side - r > slack ? r : 0.0;
}

}  // namespace

Point2 generalized_tau(Point2 v, const CodebookConfig& config) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
        throw DomainError("generalized_tau: non-finite input");
    }
    const double half = config.side / 2;
    const double x = wrap(v.x, config.side) + (config.centroid.x - half);
    const double y = wrap(v.y, config.side) + (config.centroid.y - half);
    return {std::clamp(x, config.box_min_x(), config.box_max_x()),
            std::clamp(y, config.box_min_y(), config.box_max_y())};
}

Direction direction_vector(std::uint32_t index_bound, double side, DirectionMode mode) {
    if (index_bound == 0) {
        throw DomainError("direction_vector: U must be >= 1");
    }
    if (!(side > 0.0) || !std::isfinite(side)) {
        throw DomainError("direction_vector: side must be finite and > 0");
    }
    const double u = static_cast<double>(index_bound);
    const double rows = std::floor(std::sqrt(u));

    if (mode == DirectionMode::GridShear) {
        return {side / u, side / rows};
    }

    // Unit direction along (l/U, l), scaled by the step l / (sin(alpha) * rows)
    // with tan(alpha) = U.
    const double dx = side / u;
    const double dy = side;
    const double norm = std::hypot(dx, dy);
    const double alpha = std::atan(u);
    const double step = side / (std::sin(alpha) * rows);
    return {dx / norm * step, dy / norm * step};
}

Point2 trajectory_point(std::uint32_t lambda, Direction a, const CodebookConfig& config) {
    const double t = static_cast<double>(lambda);
    return generalized_tau({t * a.a1, t * a.a2}, config);
}

Codebook::Codebook(const CodebookConfig& config) : config_(config) {
    config_.validate();
    direction_ = direction_vector(config_.index_bound, config_.side, config_.direction);
    points_.reserve(config_.index_bound);
    for (std::uint32_t lambda = 0; lambda < config_.index_bound; ++lambda) {
        points_.push_back(trajectory_point(lambda, direction_, config_));
    }
    tree_ = KdTree2(points_);
}

Neighbor Codebook::nearest_linear(Point2 query) const {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_index = 0;
    for (std::uint32_t i = 0; i < points_.size(); ++i) {
        const double d2 = squared_distance(points_[i], query);
        if (d2 < best) {
            best = d2;
            best_index = i;
        }
    }
    return {best_index, std::sqrt(best)};
}

Codebook build_codebook(const CodebookConfig& config) { return Codebook(config); }

Neighbor nearest_on_trajectory(Point2 query, const CodebookConfig& config) {
    const Direction a = direction_vector(config.index_bound, config.side, config.direction);
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_index = 0;
    for (std::uint32_t lambda = 0; lambda < config.index_bound; ++lambda) {
        const double d2 = squared_distance(trajectory_point(lambda, a, config), query);
        if (d2 < best) {
            best = d2;
            best_index = lambda;
        }
    }
    return {best_index, std::sqrt(best)};
}

}  // namespace hypc
