// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hypc/analysis.hpp"
#include "hypc/bitpack.hpp"
#include "hypc/codec.hpp"
#include "hypc/container.hpp"
#include "hypc/ergodic.hpp"
#include "hypc/inference.hpp"
#include "hypc/model.hpp"
#include "hypc/percolation.hpp"

using namespace hypc;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<float> uniform_weights(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<float> u(-0.5f, 0.5f);
    std::vector<float> w(n);
    for (auto& x : w) x = u(gen);
    return w;
}

MlpNetwork random_mlp(const std::vector<std::size_t>& dims, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<float> u(-0.5f, 0.5f);
    MlpNetwork net;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        DenseLayer l{dims[i], dims[i + 1], std::vector<float>(dims[i] * dims[i + 1]),
                     std::vector<float>(dims[i + 1]),
                     i + 2 == dims.size() ? Activation::Identity : Activation::ReLU};
        for (auto& w : l.weight) w = u(gen);
        for (auto& b : l.bias) b = u(gen);
        net.layers.push_back(std::move(l));
    }
    return net;
}

// Independent restatement of the per-weight bound.
double weight_bound(const CodebookConfig& c, std::uint32_t theta) {
    const std::uint32_t m = theta / c.index_bound;
    double s = 1.0;
    if (m > 0 && c.farthest > 0.0) s = (c.side / 2) / (c.side / 2 + (c.farthest / c.max_class) * m);
    return std::numbers::sqrt2 * c.side / std::floor(std::sqrt(double(c.index_bound))) / s;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome roundtrip_bound() {
    const auto t0 = Clock::now();
    const auto w = uniform_weights(1'000'000, 1);
    const auto enc = encode_layer(w, "w", {1000, 1000}, {0.1, 225, 3, DirectionMode::GridShear});
    const auto q = decode_layer(enc);
    const auto thetas = enc.thetas();
    std::size_t violations = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (std::abs(double(w[i]) - q[i]) > weight_bound(enc.config, thetas[i / 2])) ++violations;
    }
    const double t = seconds_since(t0);
    std::ostringstream os;
    os << "violations=" << violations << "/" << w.size() << " time=" << t << "s";
    return {violations == 0 && t < 30.0, os.str()};
}

Outcome payload_ratio_check() {
    const auto w = uniform_weights(1'000'000, 2);
    const auto enc = encode_layer(w, "w", {1000000}, {0.1, 225, 3, DirectionMode::GridShear});
    const double pr = payload_ratio(enc.bit_width);

    const auto net = random_mlp({512, 1024, 1024, 512}, 3);
    const auto bundle = network_to_bundle(net);
    const auto ntb = serialize_ntb(bundle);
    const auto hcmp = serialize_hcmp(compress_bundle(bundle, LayerParams{}));
    const double file_ratio = compression_ratio(double(ntb.size()), double(hcmp.size()));
    std::ostringstream os;
    os << "bit_width=" << unsigned(enc.bit_width) << " payload_ratio=" << pr << " ntb=" << ntb.size()
       << "B file_ratio=" << file_ratio;
    return {enc.bit_width == 10 && pr == 6.4 && ntb.size() >= 4'000'000 && file_ratio >= 6.2,
            os.str()};
}

Outcome kd_oracle() {
    std::size_t mismatches = 0, total = 0;
    for (std::uint32_t U : {4u, 225u, 361u, 4096u}) {
        CodebookConfig c;
        c.side = 0.1;
        c.index_bound = U;
        c.centroid = {0.013, -0.027};
        const Codebook book(c);
        std::mt19937_64 gen(U);
        std::uniform_real_distribution<double> u(-0.08, 0.08);
        for (int k = 0; k < 10'000; ++k) {
            const Point2 q{c.centroid.x + u(gen), c.centroid.y + u(gen)};
            std::uint32_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::uint32_t i = 0; i < U; ++i) {
                const double d = squared_distance(q, book[i]);
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            if (book.nearest(q).index != best) ++mismatches;
            ++total;
        }
    }
    return {mismatches == 0, "mismatches=" + std::to_string(mismatches) + "/" + std::to_string(total)};
}

Outcome covering_radius() {
    CodebookConfig c;
    c.side = 0.1;
    c.index_bound = 225;
    const Codebook book(c);
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    double worst = 0.0;
    for (int k = 0; k < 100'000; ++k) {
        worst = std::max(worst, book.nearest({u(gen), u(gen)}).distance);
    }
    std::ostringstream os;
    os << "max_nearest=" << worst << " limit=0.009428";
    return {worst <= 0.009428, os.str()};
}

Outcome toy_accuracy() {
    const auto t0 = Clock::now();
    const auto net = train_toy(7);
    const auto test = toy_test_set();
    const double base = eval_accuracy(net, test);
    LayerParams params(EncodeParams{0.01, 361, 3, DirectionMode::GridShear});
    const CompressedMlp compressed(compress_bundle(network_to_bundle(net), params));
    const double after = eval_accuracy(compressed, test);
    const double t = seconds_since(t0);
    std::ostringstream os;
    os << "accuracy=" << base << " compressed=" << after << " drop_pp=" << 100 * (base - after)
       << " time=" << t << "s";
    return {base >= 0.95 && base - after <= 0.01 && t < 60.0, os.str()};
}

Outcome pipeline_equality() {
    const auto net = random_mlp({32, 64, 64, 64, 64, 64, 64, 64, 10}, 6);
    const CompressedMlp model(compress_bundle(network_to_bundle(net), LayerParams{}));
    std::string detail = "depth=" + std::to_string(model.depth());
    bool ok = model.depth() == 8;
    std::mt19937_64 gen(6);
    std::normal_distribution<float> d;
    for (std::size_t batch : {1u, 2u, 4u, 8u}) {
        Matrix x(batch, 32);
        for (auto& v : x.data) v = d(gen);
        const bool eq = pipelined_forward(model.model(), x) == model.forward_sequential(x);
        ok = ok && eq;
        detail += " b" + std::to_string(batch) + (eq ? "=eq" : "=DIFF");
    }
    return {ok, detail};
}

Outcome percolation_r2() {
    const auto t0 = Clock::now();
    const auto e = estimate_threshold(2, 200, 200, 200);
    const double t = seconds_since(t0);
    std::ostringstream os;
    os << "p_hat=" << e.p_hat << " time=" << t << "s";
    return {e.p_hat >= 0.48 && e.p_hat <= 0.52 && t < 60.0, os.str()};
}

Outcome root_p0() {
    const double p = solve_p0();
    const double residual = std::abs(2 * p + p * p - std::pow(p, 4) - 1);
    std::ostringstream os;
    os.precision(10);
    os << "p0=" << p << " residual=" << residual;
    return {std::abs(p - 0.425787) <= 1e-5 && residual < 1e-9, os.str()};
}

Outcome percolation_r3() {
    const auto e = estimate_threshold(3, 200, 200, 200);
    std::ostringstream os;
    os << "p_hat=" << e.p_hat << " window=[0.3333,0.431]";
    return {e.p_hat >= 1.0 / 3.0 && e.p_hat <= 0.431, os.str()};
}

Outcome error_bound_theorem() {
    const auto r = validate_error_bound(64, 128, EncodeParams{}, 100, 10);
    std::ostringstream os;
    os << "pre=" << r.pass_fraction_pre << " relu=" << r.pass_fraction_relu
       << " max_ratio=" << r.max_ratio_observed;
    return {r.pass_fraction_pre == 1.0 && r.pass_fraction_relu == 1.0, os.str()};
}

Outcome format_roundtrips() {
    std::mt19937_64 gen(11);
    std::size_t failures = 0, empty = 0, odd = 0, constant = 0;
    for (int c = 0; c < 1000; ++c) {
        TensorBundle b;
        const int tensors = int(gen() % 5);
        for (int t = 0; t < tensors; ++t) {
            const int kind = int(gen() % 4);
            std::size_t n = gen() % 300;
            if (kind == 0) n = 0;
            if (kind == 1) n |= 1;
            Tensor x{"t" + std::to_string(t) + "_" + std::to_string(gen() % 1000), {n}, std::vector<float>(n)};
            std::normal_distribution<float> d(0.0f, 0.1f + float(gen() % 10));
            const float cval = d(gen);
            for (auto& v : x.data) v = kind == 2 ? cval : d(gen);
            empty += n == 0;
            odd += n % 2 == 1;
            constant += kind == 2 && n > 0;
            b.tensors.push_back(std::move(x));
        }
        const auto ntb = serialize_ntb(b);
        const auto b2 = parse_ntb(ntb);
        bool ok = serialize_ntb(b2) == ntb && b2.tensors.size() == b.tensors.size();
        for (std::size_t i = 0; ok && i < b.tensors.size(); ++i) {
            ok = b2.tensors[i].name == b.tensors[i].name && b2.tensors[i].shape == b.tensors[i].shape &&
                 std::memcmp(b2.tensors[i].data.data(), b.tensors[i].data.data(),
                             b.tensors[i].data.size() * sizeof(float)) == 0;
        }
        const EncodeParams p{0.01 + 0.2 * double(gen() % 100) / 100, std::uint32_t(1 + gen() % 600),
                             std::uint16_t(1 + gen() % 6),
                             gen() % 2 ? DirectionMode::GridShear : DirectionMode::PaperEq};
        const auto model = compress_bundle(b, LayerParams(p));
        const auto hcmp = serialize_hcmp(model);
        const auto model2 = parse_hcmp(hcmp);
        ok = ok && model2.layers == model.layers && serialize_hcmp(model2) == hcmp;
        for (std::size_t i = 0; ok && i < model.layers.size(); ++i) {
            ok = decode_layer(model.layers[i]) == decode_layer(model2.layers[i]);
        }
        failures += !ok;
    }
    std::ostringstream os;
    os << "failures=" << failures << "/1000 empty_layers=" << empty << " odd_layers=" << odd
       << " constant_layers=" << constant;
    return {failures == 0 && empty > 0 && odd > 0 && constant > 0, os.str()};
}

Outcome ablation_speedup() {
    TensorBundle b;
    b.tensors.push_back({"w", {1000, 1000}, uniform_weights(1'000'000, 12)});
    auto time_arm = [&](BenchMode mode) {
        const auto t0 = Clock::now();
        compress_bundle(b, LayerParams{}, 1, options_for(mode));
        return seconds_since(t0);
    };
    const double full = time_arm(BenchMode::Full);
    const double naive = time_arm(BenchMode::Naive);
    std::ostringstream os;
    os << "full=" << full << "s naive=" << naive << "s speedup=" << naive / full;
    return {naive >= 10.0 * full, os.str()};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"roundtrip error bound on 1e6 weights", roundtrip_bound},
        {"payload and file compression ratio", payload_ratio_check},
        {"k-d tree equals exhaustive nearest", kd_oracle},
        {"covering radius U=225 l=0.1", covering_radius},
        {"toy accuracy and compression drop", toy_accuracy},
        {"pipelined forward bitwise equal", pipeline_equality},
        {"percolation threshold r=2", percolation_r2},
        {"root p0 of 2p+p^2-p^4=1", root_p0},
        {"percolation threshold r=3", percolation_r3},
        {"linear-layer error bound pass fraction", error_bound_theorem},
        {"NTB/HCMP randomized round trips", format_roundtrips},
        {"full encoder 10x faster than naive", ablation_speedup},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
