#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include <json.hpp>

namespace hypc {

/// Bond percolation on the kernel-size-r convolution graph: vertices (m, n)
/// with m a column in [0, W) and n a row in [0, H), and undirected edges
/// (m, n) - (m + 1, (n + i) mod H) for i in [0, r). Rows wrap around.
struct LatticeSpec {
    int r = 2;
    int width = 2;   // W, number of columns (network depth)
    int height = 2;  // H, number of rows
    double p = 0.5;  // probability that an edge is open
    std::uint64_t seed = 0;

    void validate() const;
};

/// Uniform draw attached to one edge. An edge is open iff its draw < p, so the
/// same seed gives a monotone coupling across p.
double edge_draw(std::uint64_t seed, const LatticeSpec& spec, int m, int n, int i);

/// True iff an open path joins column 0 to column W - 1.
bool percolation_trial(const LatticeSpec& spec);

/// Seed of trial `index` in a batch seeded with `seed`.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t index);

/// Fraction of `trials` crossing trials at probability p.
double crossing_fraction(int r, int height, int width, double p, std::size_t trials,
                         std::uint64_t seed);

struct PercolationEstimate {
    int r = 0;
    int height = 0;
    int width = 0;
    std::size_t trials = 0;
    int probes = 0;
    std::uint64_t seed = 0;
    double p_hat = 0.0;
    double lo = 0.0;
    double hi = 1.0;

    double half_width() const noexcept { return (hi - lo) / 2; }
};

/// Bisection on p for crossing frequency 1/2, starting from [0, 1] and halving
/// the bracket once per probe. Requires trials >= 50 and probes >= 10.
PercolationEstimate estimate_threshold(int r, int height, int width, std::size_t trials,
                                       int probes = 10, std::uint64_t seed = 0);
nlohmann::json to_json(const PercolationEstimate& estimate);

/// Root of 2p + p^2 - p^4 = 1 in (0, 1), by bisection to 1e-10.
double solve_p0();

/// Checks that `map` sends every kernel-2 edge inside a patch x patch block of
/// vertices to a unit horizontal or vertical square-lattice edge, and is
/// injective on the block's vertices.
bool check_lattice_map(int patch, const std::function<std::pair<long, long>(long, long)>& map);

/// check_lattice_map with the shear (m, n) -> (m - n, n).
bool check_g2_isomorphism(int patch);

}  // namespace hypc
