#pragma once

#include <Eigen/Core>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sgn/rng.hpp"

namespace sgn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct NetConfig {
    std::vector<int> dilations{1, 2};
    int filter_width = 2;
    int residual_channels = 32;
    int skip_channels = 256;
    int num_classes = 256;

    void validate() const;
};

/// `blocks` repetitions of the doubling cycle [1, 2, 4, ..., max_dilation].
std::vector<int> make_dilations(int blocks, int max_dilation);

/// Number of trailing input positions that influence one output position:
/// 1 + (filter_width - 1) * (1 + sum of dilations).
int receptive_field(const NetConfig& config);

/// One dilated gated layer. Convolution taps are stored as separate
/// out x in matrices; tap j reads the input j*dilation positions after the
/// oldest sample in its window, so the last tap sees the current sample.
struct LayerParams {
    std::vector<Matrix> filter;  // filter_width x [R x R]
    Matrix filter_bias;          // R x 1
    std::vector<Matrix> gate;
    Matrix gate_bias;
    Matrix residual;             // R x R
    Matrix residual_bias;
    Matrix skip;                 // S x R
    Matrix skip_bias;
};

struct NetParams {
    std::vector<Matrix> input;   // filter_width x [R x K]
    Matrix input_bias;           // R x 1
    std::vector<LayerParams> layers;
    Matrix out1;                 // S x S
    Matrix out1_bias;
    Matrix out2;                 // K x S
    Matrix out2_bias;

    /// Visits every tensor in a fixed order with its serialization name.
    void for_each(const std::function<void(const std::string&, Matrix&)>& fn);
    void for_each(const std::function<void(const std::string&, const Matrix&)>& fn) const;

    std::size_t parameter_count() const;
};

/// All tensors zero, shaped for `config`.
NetParams zero_params(const NetConfig& config);

/// Throws ValidationError if any tensor is missing, misshaped or non-finite.
void check_params(const NetParams& params, const NetConfig& config);

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases, and a zero
/// output projection so the untrained predictive distribution is uniform.
NetParams build_network(const NetConfig& config, RngStream& rng);

/// Per-position logits. Column i holds the logits computed at input
/// position first_valid_index + i and predicts the class at the next
/// position. first_valid_index = receptive_field - 1.
struct LogitsSeq {
    Matrix logits;  // K x rows
    int first_valid_index = 0;

    Eigen::Index rows() const { return logits.cols(); }
    Vector row(Eigen::Index i) const { return logits.col(i); }
};

LogitsSeq forward(const NetParams& params, const NetConfig& config, std::span<const int> input);

Vector softmax(const Eigen::Ref<const Vector>& logits);

/// -log softmax(logits)[target].
double cross_entropy(const Eigen::Ref<const Vector>& logits, int target);

/// z = tanh(filter) * logistic(gate), one element of the gated unit.
double gated_unit(double filter_preactivation, double gate_preactivation);

/// Inputs and next-sample targets for one training crop. A crop of length L
/// feeds positions [0, L-1) and scores the targets at [receptive_field, L).
struct Crop {
    std::span<const int> classes;
};

struct GradientResult {
    NetParams grads;
    double mean_loss = 0.0;
    std::size_t positions = 0;
};

/// Exact reverse-mode gradient of the mean cross-entropy over every scored
/// position of every crop.
GradientResult backward(const NetParams& params, const NetConfig& config, std::span<const Crop> batch);

/// Mean cross-entropy and argmax hit rate of teacher-forced next-sample
/// predictions for the targets at positions [first_target, size).
/// Requires first_target >= receptive_field.
struct Evaluation {
    double loss = 0.0;
    double accuracy = 0.0;
    std::size_t positions = 0;
};
Evaluation evaluate(const NetParams& params, const NetConfig& config, std::span<const int> classes,
                    std::size_t first_target);

/// Lowest index among the maximal entries.
int argmax(const Eigen::Ref<const Vector>& v);

}  // namespace sgn
