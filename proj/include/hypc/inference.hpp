#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "hypc/codec.hpp"
#include "hypc/container.hpp"

namespace hypc {

/// Row-major f32 matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, float fill = 0.0f) : rows(r), cols(c), data(r * c, fill) {}

    float& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    float operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

enum class Activation : std::uint8_t { ReLU, Identity };

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<float> weight;  // out x in, row-major
    std::vector<float> bias;    // out
    Activation activation = Activation::Identity;
};

struct MlpNetwork {
    std::vector<DenseLayer> layers;

    /// Throws DataError unless dimensions chain and the last layer is Identity.
    void validate() const;
    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().in; }
    std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().out; }
};

/// act(W x + b) for every row of `batch`; dot products accumulate in f32 in
/// index order.
Matrix apply_layer(const DenseLayer& layer, const Matrix& batch);
Matrix mlp_forward(const MlpNetwork& net, const Matrix& batch);

// Bundles store layer i as "layer<i>.weight" [out, in] and "layer<i>.bias"
// [out]; every layer but the last uses ReLU.
std::string weight_name(std::size_t layer);
std::string bias_name(std::size_t layer);
TensorBundle network_to_bundle(const MlpNetwork& net);
MlpNetwork network_from_bundle(const TensorBundle& bundle);

/// Per-layer timestamps recorded by the pipelined forward pass.
struct LayerTiming {
    using Clock = std::chrono::steady_clock;
    Clock::time_point decode_begin, decode_end, compute_begin, compute_end;
};

struct PipelineTrace {
    LayerTiming::Clock::time_point begin, end;
    std::vector<LayerTiming> layers;
};

/// An MLP whose parameters stay compressed until a forward pass needs them.
/// Codebooks are built on first use and reused by later passes.
class CompressedMlp {
public:
    explicit CompressedMlp(CompressedModel model);

    std::size_t depth() const noexcept { return depth_; }

    /// Decodes weight and bias of layer `i`.
    DenseLayer decode_layer(std::size_t i) const;
    MlpNetwork decode_all() const;

    /// Decodes every layer, then runs mlp_forward.
    Matrix forward_sequential(const Matrix& batch) const;

    /// Two workers: a decoder thread restores layer i+1 while the calling
    /// thread computes layer i, handing layers over through a slot of
    /// capacity one. Output is bitwise equal to forward_sequential.
    Matrix forward_pipelined(const Matrix& batch, PipelineTrace* trace = nullptr) const;

    /// Total layer decodes performed so far.
    std::size_t decode_count() const noexcept { return decode_count_.load(); }

    const CompressedModel& model() const noexcept { return *model_; }

private:
    std::shared_ptr<const CompressedModel> model_;
    std::vector<std::unique_ptr<LayerDecoder>> weight_decoders_;
    std::vector<std::unique_ptr<LayerDecoder>> bias_decoders_;
    std::size_t depth_ = 0;
    mutable std::atomic<std::size_t> decode_count_{0};
};

Matrix pipelined_forward(const CompressedModel& model, const Matrix& batch);

/// Labelled samples; `labels[i]` is the class of row i of `x`.
struct Dataset {
    Matrix x;
    std::vector<int> labels;
};

/// Two Gaussian blobs in 4-D (unit variance, means -mu and +mu with
/// mu = (1, -1, 1, -1)), classes alternating so the set is balanced.
Dataset make_blobs(std::uint64_t seed, std::size_t count);
Dataset toy_train_set();  // 2000 samples, fixed seed
Dataset toy_test_set();   // 1000 samples, fixed seed

/// 4 -> 32 -> 16 -> 2 MLP trained by full-batch gradient descent on the toy
/// training set (softmax cross-entropy, step 0.1, 500 epochs). `seed` drives
/// the weight initialization.
MlpNetwork train_toy(std::uint64_t seed);

/// Top-1 accuracy; ties in the output go to the lower class index.
double eval_accuracy(const MlpNetwork& net, const Dataset& data);
double eval_accuracy(const CompressedMlp& model, const Dataset& data);
double accuracy_of(const Matrix& outputs, const std::vector<int>& labels);

/// CSV with header x1,...,xd,label.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace hypc
