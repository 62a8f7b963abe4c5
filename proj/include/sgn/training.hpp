#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "sgn/codec.hpp"
#include "sgn/processes.hpp"
#include "sgn/wavenet.hpp"

namespace sgn {

struct TrainConfig {
    int steps = 20000;
    int batch_size = 4;
    int crop_length = 0;  ///< 0 selects receptive_field + 256
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 1;
    std::size_t train_count = 10000;
    std::size_t backtest_count = 2000;
    Scheme scheme = Scheme::Linear;
    double margin_fraction = 0.005;
    double mu = 255.0;

    int effective_crop_length(const NetConfig& net) const;
};

struct TrainReport {
    std::vector<std::pair<int, double>> loss_history;
    double backtest_loss = 0.0;
    double backtest_accuracy = 0.0;
    double wall_time_seconds = 0.0;
};

/// Adaptive-moment optimizer state (first and second moments per tensor).
struct AdamState {
    NetParams m;
    NetParams v;

    static AdamState zeros(const NetConfig& config);
};

/// One adaptive-moment update at step t >= 1 (bias-corrected).
void optimizer_step(NetParams& params, const NetParams& grads, AdamState& state, int t, const TrainConfig& cfg);

struct TrainResult {
    NetParams params;
    Quantizer quantizer;
    TrainReport report;
};

using ProgressFn = std::function<void(int step, double loss)>;

/// Fits the quantizer on the first train_count samples, then runs `steps`
/// updates on uniformly drawn crops of the training region and scores
/// teacher-forced predictions on the following backtest_count samples.
/// Throws NumericalError if the loss diverges.
TrainResult train(const SeriesF& series, const NetConfig& net, const TrainConfig& cfg, const ProgressFn& progress = {});

/// Mean cross-entropy over the scored positions of a batch, evaluated with
/// the forward pass only.
double batch_loss(const NetParams& params, const NetConfig& config, std::span<const Crop> batch);

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::string worst_tensor;
    std::size_t coordinates = 0;
};

/// Compares backward() against central differences of batch_loss() for
/// every coordinate of randomly drawn parameters and crops. The relative
/// error denominator is floored at 1e-8.
GradCheckResult gradient_check(const NetConfig& config, std::uint64_t seed, double step = 1e-5);

// ---------------------------------------------------------------------------
// Forward hyperparameter search
// ---------------------------------------------------------------------------

struct SearchConfig {
    int max_blocks = 9;
    int max_dilation_cap = 256;
    double improvement_threshold = 0.02;
    int budget_steps_per_trial = 2000;

    void validate() const;
    /// Upper bound on evaluator invocations.
    int trial_bound() const;
};

struct SearchTrial {
    int blocks = 0;
    int max_dilation = 0;
    double loss = 0.0;
};

struct SearchResult {
    NetConfig config;
    int blocks = 0;
    int max_dilation = 0;
    double loss = 0.0;
    std::vector<SearchTrial> trials;
};

/// Backtest loss of one candidate architecture.
using TrialEvaluator = std::function<double(const NetConfig&)>;

/// Starts at two blocks of dilations [1, 2]; doubles the maximum dilation
/// while the relative loss improvement stays above the threshold, then adds
/// a block (restarting at dilation 2) until blocks reach max_blocks or a
/// new block stops helping. `base` supplies the channel counts.
SearchResult hyper_search(const SearchConfig& search, const NetConfig& base, const TrialEvaluator& evaluate);

/// Search driven by real training runs of budget_steps_per_trial steps.
SearchResult hyper_search(const SeriesF& series, const SearchConfig& search, const NetConfig& base,
                          const TrainConfig& train_config);

}  // namespace sgn
