#include "hypc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "hypc/error.hpp"
#include "hypc/random.hpp"

namespace hypc {

void MlpNetwork::validate() const {
    if (layers.empty()) {
        throw DataError("network has no layers");
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const DenseLayer& l = layers[i];
        if (l.weight.size() != l.in * l.out || l.bias.size() != l.out) {
            throw DataError("layer " + std::to_string(i) + ": parameter sizes disagree with " +
                            std::to_string(l.out) + "x" + std::to_string(l.in));
        }
        if (i > 0 && layers[i - 1].out != l.in) {
            throw DataError("layer " + std::to_string(i) + ": input width " +
                            std::to_string(l.in) + " does not match previous output " +
                            std::to_string(layers[i - 1].out));
        }
    }
    if (layers.back().activation != Activation::Identity) {
        throw DataError("final layer must use the identity activation");
    }
}

Matrix apply_layer(const DenseLayer& layer, const Matrix& batch) {
    if (batch.cols != layer.in) {
        throw DataError("dimension mismatch: batch width " + std::to_string(batch.cols) +
                        ", layer expects " + std::to_string(layer.in));
    }
    Matrix out(batch.rows, layer.out);
    for (std::size_t r = 0; r < batch.rows; ++r) {
        const float* x = batch.data.data() + r * batch.cols;
        for (std::size_t o = 0; o < layer.out; ++o) {
            const float* w = layer.weight.data() + o * layer.in;
            float acc = 0.0f;
            for (std::size_t k = 0; k < layer.in; ++k) {
                acc += w[k] * x[k];
            }
            acc += layer.bias[o];
            if (layer.activation == Activation::ReLU && acc < 0.0f) {
                acc = 0.0f;
            }
            out(r, o) = acc;
        }
    }
    return out;
}

Matrix mlp_forward(const MlpNetwork& net, const Matrix& batch) {
    net.validate();
    Matrix h = batch;
    for (const auto& layer : net.layers) {
        h = apply_layer(layer, h);
    }
    return h;
}

std::string weight_name(std::size_t layer) { return "layer" + std::to_string(layer) + ".weight"; }
std::string bias_name(std::size_t layer) { return "layer" + std::to_string(layer) + ".bias"; }

TensorBundle network_to_bundle(const MlpNetwork& net) {
    net.validate();
    TensorBundle bundle;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const DenseLayer& l = net.layers[i];
        bundle.tensors.push_back({weight_name(i), {l.out, l.in}, l.weight});
        bundle.tensors.push_back({bias_name(i), {l.out}, l.bias});
    }
    return bundle;
}

namespace {

DenseLayer make_layer(std::size_t index, const std::vector<std::uint64_t>& wshape,
                      std::vector<float> weight, const std::vector<std::uint64_t>& bshape,
                      std::vector<float> bias) {
    if (wshape.size() != 2 || bshape.size() != 1 || bshape[0] != wshape[0]) {
        throw DataError("layer " + std::to_string(index) +
                        ": expected weight [out, in] and bias [out]");
    }
    DenseLayer layer;
    layer.out = wshape[0];
    layer.in = wshape[1];
    layer.weight = std::move(weight);
    layer.bias = std::move(bias);
    layer.activation = Activation::ReLU;
    return layer;
}

std::size_t count_layers(auto&& has) {
    std::size_t n = 0;
    while (has(weight_name(n)) && has(bias_name(n))) ++n;
    if (n == 0) {
        throw DataError("no 'layer0.weight'/'layer0.bias' tensors found");
    }
    return n;
}

}  // namespace

MlpNetwork network_from_bundle(const TensorBundle& bundle) {
    const std::size_t n = count_layers([&](const std::string& s) { return bundle.find(s) != nullptr; });
    MlpNetwork net;
    for (std::size_t i = 0; i < n; ++i) {
        const Tensor* w = bundle.find(weight_name(i));
        const Tensor* b = bundle.find(bias_name(i));
        net.layers.push_back(make_layer(i, w->shape, w->data, b->shape, b->data));
    }
    net.layers.back().activation = Activation::Identity;
    net.validate();
    return net;
}

CompressedMlp::CompressedMlp(CompressedModel model)
    : model_(std::make_shared<const CompressedModel>(std::move(model))) {
    model_->validate();
    depth_ = count_layers([&](const std::string& s) { return model_->find(s) != nullptr; });
    for (std::size_t i = 0; i < depth_; ++i) {
        // Aliasing pointers keep the model alive for as long as the decoders.
        weight_decoders_.push_back(std::make_unique<LayerDecoder>(
            std::shared_ptr<const EncodedLayer>(model_, model_->find(weight_name(i)))));
        bias_decoders_.push_back(std::make_unique<LayerDecoder>(
            std::shared_ptr<const EncodedLayer>(model_, model_->find(bias_name(i)))));
    }
}

DenseLayer CompressedMlp::decode_layer(std::size_t i) const {
    const LayerDecoder& w = *weight_decoders_.at(i);
    const LayerDecoder& b = *bias_decoders_.at(i);
    DenseLayer layer = make_layer(i, w.layer().shape, w.decode(), b.layer().shape, b.decode());
    if (i + 1 == depth_) {
        layer.activation = Activation::Identity;
    }
    ++decode_count_;
    return layer;
}

MlpNetwork CompressedMlp::decode_all() const {
    MlpNetwork net;
    for (std::size_t i = 0; i < depth_; ++i) {
        net.layers.push_back(decode_layer(i));
    }
    return net;
}

Matrix CompressedMlp::forward_sequential(const Matrix& batch) const {
    return mlp_forward(decode_all(), batch);
}

namespace {

/// Single-slot blocking hand-off between one producer and one consumer.
template <typename T>
class HandOff {
public:
    /// Blocks while the slot is full. Returns false once closed.
    bool push(T value) {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return !slot_.has_value() || closed_; });
        if (closed_) return false;
        slot_.emplace(std::move(value));
        cv_.notify_all();
        return true;
    }

    /// Blocks until a value arrives; nullopt once closed and drained.
    std::optional<T> pop() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return slot_.has_value() || closed_; });
        if (!slot_) return std::nullopt;
        std::optional<T> out = std::move(slot_);
        slot_.reset();
        cv_.notify_all();
        return out;
    }

    void close() {
        std::lock_guard lock(mutex_);
        closed_ = true;
        cv_.notify_all();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::optional<T> slot_;
    bool closed_ = false;
};

struct Decoded {
    std::size_t index = 0;
    DenseLayer layer;
    std::exception_ptr error;
    LayerTiming::Clock::time_point begin, end;
};

}  // namespace

Matrix CompressedMlp::forward_pipelined(const Matrix& batch, PipelineTrace* trace) const {
    using Clock = LayerTiming::Clock;
    if (trace) {
        trace->layers.assign(depth_, LayerTiming{});
        trace->begin = Clock::now();
    }

    HandOff<Decoded> handoff;
    std::jthread decoder([&] {
        for (std::size_t i = 0; i < depth_; ++i) {
            Decoded item;
            item.index = i;
            item.begin = Clock::now();
            try {
                item.layer = decode_layer(i);
            } catch (...) {
                item.error = std::current_exception();
            }
            item.end = Clock::now();
            const bool failed = item.error != nullptr;
            if (!handoff.push(std::move(item)) || failed) break;
        }
        handoff.close();
    });

    Matrix h = batch;
    try {
        for (std::size_t i = 0; i < depth_; ++i) {
            std::optional<Decoded> item = handoff.pop();
            if (!item) {
                throw ConsistencyError("pipeline decoder stopped early");
            }
            if (item->error) {
                std::rethrow_exception(item->error);
            }
            const auto compute_begin = Clock::now();
            h = apply_layer(item->layer, h);
            if (trace) {
                trace->layers[i] = {item->begin, item->end, compute_begin, Clock::now()};
            }
        }
    } catch (...) {
        handoff.close();
        throw;
    }
    if (trace) {
        trace->end = Clock::now();
    }
    return h;
}

Matrix pipelined_forward(const CompressedModel& model, const Matrix& batch) {
    return CompressedMlp(model).forward_pipelined(batch);
}

Dataset make_blobs(std::uint64_t seed, std::size_t count) {
    static constexpr float kMean[4] = {1.0f, -1.0f, 1.0f, -1.0f};
    Rng rng(seed);
    Dataset d;
    d.x = Matrix(count, 4);
    d.labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const int label = static_cast<int>(i % 2);
        const float sign = label == 1 ? 1.0f : -1.0f;
        d.labels[i] = label;
        for (std::size_t k = 0; k < 4; ++k) {
            d.x(i, k) = sign * kMean[k] + static_cast<float>(rng.normal());
        }
    }
    return d;
}

Dataset toy_train_set() { return make_blobs(0x5EED0001, 2000); }
Dataset toy_test_set() { return make_blobs(0x5EED0002, 1000); }

MlpNetwork train_toy(std::uint64_t seed) {
    constexpr std::size_t kDims[] = {4, 32, 16, 2};
    constexpr float kStep = 0.1f;
    constexpr int kEpochs = 500;

    Rng rng(seed);
    MlpNetwork net;
    for (std::size_t i = 0; i + 1 < std::size(kDims); ++i) {
        DenseLayer l;
        l.in = kDims[i];
        l.out = kDims[i + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
        l.weight.resize(l.in * l.out);
        for (auto& w : l.weight) w = static_cast<float>(rng.uniform(-limit, limit));
        l.bias.assign(l.out, 0.0f);
        l.activation = i + 2 == std::size(kDims) ? Activation::Identity : Activation::ReLU;
        net.layers.push_back(std::move(l));
    }

    const Dataset train = toy_train_set();
    const std::size_t n = train.x.rows;
    const float inv_n = 1.0f / static_cast<float>(n);

    for (int epoch = 0; epoch < kEpochs; ++epoch) {
        // Forward, keeping every activation.
        std::vector<Matrix> acts{train.x};
        for (const auto& layer : net.layers) {
            acts.push_back(apply_layer(layer, acts.back()));
        }

        // Softmax cross-entropy gradient w.r.t. logits, averaged over the batch.
        Matrix grad = acts.back();
        for (std::size_t r = 0; r < n; ++r) {
            float mx = grad(r, 0);
            for (std::size_t c = 1; c < grad.cols; ++c) mx = std::max(mx, grad(r, c));
            float sum = 0.0f;
            for (std::size_t c = 0; c < grad.cols; ++c) {
                grad(r, c) = std::exp(grad(r, c) - mx);
                sum += grad(r, c);
            }
            for (std::size_t c = 0; c < grad.cols; ++c) {
                grad(r, c) /= sum;
                if (static_cast<int>(c) == train.labels[r]) grad(r, c) -= 1.0f;
                grad(r, c) *= inv_n;
            }
        }

        for (std::size_t li = net.layers.size(); li-- > 0;) {
            DenseLayer& layer = net.layers[li];
            const Matrix& input = acts[li];
            const Matrix& output = acts[li + 1];
            if (layer.activation == Activation::ReLU) {
                for (std::size_t k = 0; k < grad.data.size(); ++k) {
                    if (output.data[k] <= 0.0f) grad.data[k] = 0.0f;
                }
            }
            Matrix grad_in(n, layer.in);
            if (li > 0) {
                for (std::size_t r = 0; r < n; ++r) {
                    for (std::size_t o = 0; o < layer.out; ++o) {
                        const float g = grad(r, o);
                        if (g == 0.0f) continue;
                        const float* w = layer.weight.data() + o * layer.in;
                        for (std::size_t k = 0; k < layer.in; ++k) grad_in(r, k) += g * w[k];
                    }
                }
            }
            for (std::size_t o = 0; o < layer.out; ++o) {
                float gb = 0.0f;
                for (std::size_t r = 0; r < n; ++r) gb += grad(r, o);
                layer.bias[o] -= kStep * gb;
                float* w = layer.weight.data() + o * layer.in;
                for (std::size_t k = 0; k < layer.in; ++k) {
                    float gw = 0.0f;
                    for (std::size_t r = 0; r < n; ++r) gw += grad(r, o) * input(r, k);
                    w[k] -= kStep * gw;
                }
            }
            grad = std::move(grad_in);
        }
    }
    return net;
}

double accuracy_of(const Matrix& outputs, const std::vector<int>& labels) {
    if (outputs.rows != labels.size()) {
        throw DataError("output rows and label count differ");
    }
    if (labels.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t r = 0; r < outputs.rows; ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < outputs.cols; ++c) {
            if (outputs(r, c) > outputs(r, best)) best = c;
        }
        if (static_cast<int>(best) == labels[r]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double eval_accuracy(const MlpNetwork& net, const Dataset& data) {
    return accuracy_of(mlp_forward(net, data.x), data.labels);
}

double eval_accuracy(const CompressedMlp& model, const Dataset& data) {
    return accuracy_of(model.forward_sequential(data.x), data.labels);
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
    std::ostringstream out;
    out.precision(9);
    for (std::size_t c = 0; c < data.x.cols; ++c) out << 'x' << c + 1 << ',';
    out << "label\n";
    for (std::size_t r = 0; r < data.x.rows; ++r) {
        for (std::size_t c = 0; c < data.x.cols; ++c) out << data.x(r, c) << ',';
        out << data.labels[r] << '\n';
    }
    write_file_atomic(path, out.str());
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("io", "cannot open '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("CSV: missing header");
    }
    std::size_t fields = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (fields < 2 || line.substr(line.rfind(',') + 1) != "label") {
        throw FormatError("CSV: header must be x1,...,xd,label");
    }
    const std::size_t width = fields - 1;

    Dataset d;
    d.x.cols = width;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        std::istringstream ls(line);
        std::string cell;
        for (std::size_t c = 0; c < fields; ++c) {
            if (!std::getline(ls, cell, ',')) {
                throw FormatError("CSV: row " + std::to_string(row) + " has too few fields");
            }
            try {
                if (c < width) {
                    d.x.data.push_back(std::stof(cell));
                } else {
                    d.labels.push_back(std::stoi(cell));
                }
            } catch (const std::exception&) {
                throw FormatError("CSV: row " + std::to_string(row) + ": bad value '" + cell + "'");
            }
        }
    }
    d.x.rows = d.labels.size();
    return d;
}

}  // namespace hypc
