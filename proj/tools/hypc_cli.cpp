// hypc: command-line front end for the compression toolkit.

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hypc/analysis.hpp"
#include "hypc/container.hpp"
#include "hypc/error.hpp"
#include "hypc/inference.hpp"
#include "hypc/model.hpp"
#include "hypc/percolation.hpp"
#include "hypc/random.hpp"

using nlohmann::json;

namespace {

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("HYPC_SEED")) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used, 0);
            if (used == std::string_view(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw hypc::DomainError("HYPC_SEED is not an unsigned integer: '" + std::string(env) + "'");
    }
    return 0;
}

void print(const json& j) { std::cout << j.dump() << "\n"; }

std::vector<std::size_t> parse_dims(const std::string& text) {
    std::vector<std::size_t> dims;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || item.empty() || v == 0) {
            throw hypc::DomainError("--layers: bad dimension '" + item + "'");
        }
        dims.push_back(v);
    }
    if (dims.size() < 2) throw hypc::DomainError("--layers needs at least two dimensions");
    return dims;
}

hypc::MlpNetwork random_network(const std::vector<std::size_t>& dims, std::uint64_t seed) {
    hypc::Rng rng(seed);
    hypc::MlpNetwork net;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        hypc::DenseLayer l;
        l.in = dims[i];
        l.out = dims[i + 1];
        l.weight.resize(l.in * l.out);
        l.bias.resize(l.out);
        for (auto& w : l.weight) w = static_cast<float>(rng.uniform(-0.5, 0.5));
        for (auto& b : l.bias) b = static_cast<float>(rng.uniform(-0.5, 0.5));
        l.activation = i + 2 == dims.size() ? hypc::Activation::Identity : hypc::Activation::ReLU;
        net.layers.push_back(std::move(l));
    }
    return net;
}

bool is_hcmp(const std::vector<std::uint8_t>& bytes) {
    return bytes.size() >= 4 && bytes[0] == 'H' && bytes[1] == 'C' && bytes[2] == 'M' &&
           bytes[3] == 'P';
}

std::string shape_text(const std::vector<std::uint64_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trajectory-codebook compression of neural network weights"};
    app.require_subcommand(1);

    // compress
    std::string in_path, out_path, per_layer;
    double side = 0.1;
    std::uint32_t index_bound = 225;
    std::uint16_t max_class = 3;
    std::string direction = "grid";
    unsigned jobs = 1;
    auto* compress = app.add_subcommand("compress", "Encode an NTB bundle into an HCMP file");
    compress->add_option("--input", in_path)->required();
    compress->add_option("--output", out_path)->required();
    compress->add_option("--l", side, "Box side length");
    compress->add_option("--u", index_bound, "Codebook size");
    compress->add_option("--max-class", max_class, "Number of scaling rings");
    compress->add_option("--direction", direction)->check(CLI::IsMember({"grid", "paper"}));
    compress->add_option("--per-layer", per_layer, "JSON file with per-layer parameters");
    compress->add_option("--jobs", jobs, "Concurrent layer encoders")->check(CLI::Range(1u, 1024u));

    auto* decompress = app.add_subcommand("decompress", "Restore an NTB bundle from HCMP");
    decompress->add_option("--input", in_path)->required();
    decompress->add_option("--output", out_path)->required();

    bool pretty = false;
    auto* inspect = app.add_subcommand("inspect", "List the layers of an HCMP file");
    inspect->add_option("file", in_path)->required();
    inspect->add_flag("--pretty", pretty, "Human-readable table");

    std::string original, restored;
    auto* eval = app.add_subcommand("eval", "Error statistics between two NTB bundles");
    eval->add_option("--original", original)->required();
    eval->add_option("--restored", restored)->required();

    std::string layers;
    std::optional<std::uint64_t> seed;
    auto* gen = app.add_subcommand("gen", "Write random MLP weights");
    gen->add_option("--layers", layers, "Comma-separated widths d0,...,dk")->required();
    gen->add_option("--seed", seed);
    gen->add_option("--output", out_path)->required();

    std::string dump_data;
    auto* train = app.add_subcommand("train-toy", "Train the toy classifier");
    train->add_option("--seed", seed);
    train->add_option("--output", out_path)->required();
    train->add_option("--dump-data", dump_data, "Also write the toy test set as CSV");

    std::string model_path, data_path;
    bool pipeline = false;
    auto* infer = app.add_subcommand("infer", "Classification accuracy of a model on CSV data");
    infer->add_option("--model", model_path)->required();
    infer->add_option("--data", data_path)->required();
    infer->add_flag("--pipeline", pipeline, "Overlap layer decoding with compute");

    std::string mode = "full";
    auto* bench = app.add_subcommand("bench", "Time compression under one ablation arm");
    bench->add_option("--input", in_path)->required();
    bench->add_option("--mode", mode)->check(CLI::IsMember({"full", "no-kd", "no-matrix", "naive"}));
    bench->add_option("--l", side);
    bench->add_option("--u", index_bound);
    bench->add_option("--max-class", max_class);

    auto* perc = app.add_subcommand("perc", "Percolation experiments");
    perc->require_subcommand(1);
    auto* p0 = perc->add_subcommand("p0", "Root of 2p + p^2 - p^4 = 1");
    int r = 2, height = 200, width = 200, probes = 10;
    std::size_t trials = 200;
    auto* estimate = perc->add_subcommand("estimate", "Crossing threshold by bisection");
    estimate->add_option("--r", r)->required();
    estimate->add_option("--height", height)->required();
    estimate->add_option("--width", width)->required();
    estimate->add_option("--trials", trials)->required();
    estimate->add_option("--seed", seed);
    estimate->add_option("--probes", probes);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    }

    try {
        if (*compress) {
            hypc::LayerParams params(hypc::EncodeParams{
                side, index_bound, max_class, hypc::parse_direction_mode(direction)});
            if (!per_layer.empty()) {
                const auto bytes = hypc::read_file(per_layer);
                json doc;
                try {
                    doc = json::parse(bytes.begin(), bytes.end());
                } catch (const json::exception& e) {
                    throw hypc::FormatError(per_layer + ": " + e.what());
                }
                params.apply_json(doc);
            }
            const auto input = hypc::read_file(in_path);
            const auto bundle = hypc::parse_ntb(input);
            const auto bytes = hypc::serialize_hcmp(hypc::compress_bundle(bundle, params, jobs));
            hypc::write_file_atomic(out_path, bytes);
            print({{"input_bytes", input.size()},
                   {"output_bytes", bytes.size()},
                   {"layers", bundle.tensors.size()},
                   {"weights", bundle.element_count()},
                   {"ratio", static_cast<double>(input.size()) / bytes.size()}});
        } else if (*decompress) {
            hypc::write_ntb(out_path, hypc::decompress_model(hypc::read_hcmp(in_path)));
        } else if (*inspect) {
            const auto model = hypc::read_hcmp(in_path);
            if (pretty) {
                std::cout << std::left << std::setw(24) << "name" << std::setw(16) << "shape"
                          << std::setw(8) << "U" << std::setw(6) << "M" << std::setw(10) << "l"
                          << std::setw(6) << "bits" << "payload_bytes\n";
                for (const auto& l : model.layers) {
                    std::cout << std::setw(24) << l.name << std::setw(16) << shape_text(l.shape)
                              << std::setw(8) << l.config.index_bound << std::setw(6)
                              << l.config.max_class << std::setw(10) << l.config.side
                              << std::setw(6) << unsigned(l.bit_width) << l.payload.size() << "\n";
                }
            } else {
                json rows = json::array();
                for (const auto& l : model.layers) {
                    rows.push_back({{"name", l.name},
                                    {"shape", l.shape},
                                    {"u", l.config.index_bound},
                                    {"max_class", l.config.max_class},
                                    {"l", l.config.side},
                                    {"direction", hypc::to_string(l.config.direction)},
                                    {"bit_width", l.bit_width},
                                    {"payload_bytes", l.payload.size()}});
                }
                print(rows);
            }
        } else if (*eval) {
            const auto a = hypc::read_ntb(original);
            const auto b = hypc::read_ntb(restored);
            if (a.tensors.size() != b.tensors.size()) {
                throw hypc::DataError("bundles hold different numbers of tensors");
            }
            std::vector<float> wa, wb;
            for (std::size_t i = 0; i < a.tensors.size(); ++i) {
                const auto& ta = a.tensors[i];
                const auto& tb = b.tensors[i];
                if (ta.name != tb.name || ta.shape != tb.shape) {
                    throw hypc::DataError("tensor " + std::to_string(i) + " differs in name or shape");
                }
                wa.insert(wa.end(), ta.data.begin(), ta.data.end());
                wb.insert(wb.end(), tb.data.begin(), tb.data.end());
            }
            print(hypc::to_json(hypc::error_stats(wa, wb)));
        } else if (*gen) {
            const auto net = random_network(parse_dims(layers), resolve_seed(seed));
            hypc::write_ntb(out_path, hypc::network_to_bundle(net));
        } else if (*train) {
            const auto net = hypc::train_toy(resolve_seed(seed));
            const auto test = hypc::toy_test_set();
            hypc::write_ntb(out_path, hypc::network_to_bundle(net));
            if (!dump_data.empty()) hypc::write_dataset_csv(dump_data, test);
            print({{"test_accuracy", hypc::eval_accuracy(net, test)}});
        } else if (*infer) {
            const auto data = hypc::read_dataset_csv(data_path);
            const auto bytes = hypc::read_file(model_path);
            hypc::Matrix out;
            if (is_hcmp(bytes)) {
                const hypc::CompressedMlp mlp(hypc::parse_hcmp(bytes));
                out = pipeline ? mlp.forward_pipelined(data.x) : mlp.forward_sequential(data.x);
            } else {
                out = hypc::mlp_forward(hypc::network_from_bundle(hypc::parse_ntb(bytes)), data.x);
            }
            const double acc = hypc::accuracy_of(out, data.labels);
            print({{"accuracy", acc}, {"samples", data.labels.size()}});
        } else if (*bench) {
            const auto bundle = hypc::read_ntb(in_path);
            const auto arm = hypc::parse_bench_mode(mode);
            hypc::LayerParams params(hypc::EncodeParams{side, index_bound, max_class});
            const auto t0 = std::chrono::steady_clock::now();
            const auto model = hypc::compress_bundle(bundle, params, 1, hypc::options_for(arm));
            const auto t1 = std::chrono::steady_clock::now();
            print({{"mode", hypc::to_string(arm)},
                   {"weights", bundle.element_count()},
                   {"seconds", std::chrono::duration<double>(t1 - t0).count()},
                   {"payload_bytes", hypc::serialize_hcmp(model).size()}});
        } else if (*p0) {
            std::cout << std::setprecision(10) << hypc::solve_p0() << "\n";
        } else if (*estimate) {
            print(hypc::to_json(
                hypc::estimate_threshold(r, height, width, trials, probes, resolve_seed(seed))));
        }
    } catch (const hypc::Error& e) {
        std::cerr << json{{"error", e.kind()}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}
