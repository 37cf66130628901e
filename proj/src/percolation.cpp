#include "hypc/percolation.hpp"

#include <cmath>
#include <set>
#include <vector>

#include "hypc/error.hpp"
#include "hypc/random.hpp"

namespace hypc {

void LatticeSpec::validate() const {
    if (r < 2) throw DomainError("kernel size r must be >= 2");
    if (width < 2 || height < 2) throw DomainError("lattice must be at least 2 x 2");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0, 1]");
}

double edge_draw(std::uint64_t seed, const LatticeSpec& spec, int m, int n, int i) {
    const std::uint64_t id =
        (static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(spec.height) +
         static_cast<std::uint64_t>(n)) *
            static_cast<std::uint64_t>(spec.r) +
        static_cast<std::uint64_t>(i);
    return to_unit(mix64(mix64(seed) + id));
}

bool percolation_trial(const LatticeSpec& spec) {
    spec.validate();
    const int W = spec.width, H = spec.height, r = spec.r;
    const double p = spec.p;
    auto is_open = [&](int m, int n, int i) { return edge_draw(spec.seed, spec, m, n, i) < p; };

    std::vector<std::uint8_t> seen(static_cast<std::size_t>(W) * H, 0);
    std::vector<int> queue;
    queue.reserve(seen.size());
    auto index = [H](int m, int n) { return static_cast<std::size_t>(m) * H + n; };
    for (int n = 0; n < H; ++n) {
        seen[index(0, n)] = 1;
        queue.push_back(n);
    }

    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int v = queue[head];
        const int m = v / H, n = v % H;
        if (m == W - 1) return true;
        auto visit = [&](int mm, int nn) {
            auto& s = seen[index(mm, nn)];
            if (!s) {
                s = 1;
                queue.push_back(mm * H + nn);
            }
        };
        for (int i = 0; i < r; ++i) {
            if (m + 1 < W) {
                const int nn = (n + i) % H;
                if (!seen[index(m + 1, nn)] && is_open(m, n, i)) visit(m + 1, nn);
            }
            if (m > 0) {
                const int nn = ((n - i) % H + H) % H;
                if (!seen[index(m - 1, nn)] && is_open(m - 1, nn, i)) visit(m - 1, nn);
            }
        }
    }
    return false;
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t index) {
    return mix64(mix64(seed) + index);
}

double crossing_fraction(int r, int height, int width, double p, std::size_t trials,
                         std::uint64_t seed) {
    if (trials == 0) throw DomainError("crossing_fraction: need at least one trial");
    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        if (percolation_trial({r, width, height, p, trial_seed(seed, t)})) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

PercolationEstimate estimate_threshold(int r, int height, int width, std::size_t trials,
                                       int probes, std::uint64_t seed) {
    if (trials < 50) throw DomainError("estimate_threshold: trials must be >= 50");
    if (probes < 10) throw DomainError("estimate_threshold: probes must be >= 10");
    LatticeSpec{r, width, height, 0.5, seed}.validate();

    PercolationEstimate est{r, height, width, trials, probes, seed, 0.5, 0.0, 1.0};
    for (int k = 0; k < probes; ++k) {
        const double mid = (est.lo + est.hi) / 2;
        if (crossing_fraction(r, height, width, mid, trials, seed) >= 0.5) {
            est.hi = mid;
        } else {
            est.lo = mid;
        }
    }
    est.p_hat = (est.lo + est.hi) / 2;
    return est;
}

nlohmann::json to_json(const PercolationEstimate& e) {
    return {{"r", e.r},           {"H", e.height},         {"W", e.width},
            {"trials", e.trials}, {"probes", e.probes},    {"seed", e.seed},
            {"p_hat", e.p_hat},   {"interval", {e.lo, e.hi}}};
}

double solve_p0() {
    auto f = [](double p) { return 2 * p + p * p - p * p * p * p - 1; };
    double lo = 0.0, hi = 1.0;  // f(0) = -1, f(1) = 1
    while (hi - lo > 1e-10) {
        const double mid = (lo + hi) / 2;
        (f(mid) < 0 ? lo : hi) = mid;
    }
    return (lo + hi) / 2;
}

bool check_lattice_map(int patch, const std::function<std::pair<long, long>(long, long)>& map) {
    if (patch < 2) throw DomainError("patch size must be >= 2");
    std::set<std::pair<long, long>> images;
    for (long m = 0; m < patch; ++m) {
        for (long n = 0; n < patch; ++n) {
            if (!images.insert(map(m, n)).second) return false;
        }
    }
    for (long m = 0; m + 1 < patch; ++m) {
        for (long n = 0; n < patch; ++n) {
            for (long i = 0; i < 2 && n + i < patch; ++i) {
                const auto [ax, ay] = map(m, n);
                const auto [bx, by] = map(m + 1, n + i);
                const long dx = std::labs(bx - ax), dy = std::labs(by - ay);
                if (dx + dy != 1) return false;
            }
        }
    }
    return true;
}

bool check_g2_isomorphism(int patch) {
    return check_lattice_map(patch, [](long m, long n) { return std::pair{m - n, n}; });
}

}  // namespace hypc
