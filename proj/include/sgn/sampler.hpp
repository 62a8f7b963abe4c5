#pragma once

#include <span>
#include <string>
#include <vector>

#include "sgn/codec.hpp"
#include "sgn/processes.hpp"
#include "sgn/rng.hpp"
#include "sgn/wavenet.hpp"

namespace sgn {

enum class SampleMode { Deterministic, Stochastic };

struct GenRequest {
    std::vector<int> context;  ///< at least receptive_field classes
    int horizon = 1;
    SampleMode mode = SampleMode::Stochastic;
    RngStream rng;
    int sims = 1;
    double dt = 1.0;  ///< sampling interval stamped on the decoded series
};

struct Generated {
    std::vector<SeriesF> series;             ///< decoded, one per simulation
    std::vector<std::vector<int>> classes;   ///< generated classes (context excluded)
    std::vector<std::string> warnings;
};

/// Softmax of the last logits row computed on the trailing receptive-field
/// window of the context.
Vector next_distribution(const NetParams& params, const NetConfig& config, std::span<const int> context);

/// Inverse-CDF categorical draw for one uniform u in [0, 1).
int draw_categorical(const Eigen::Ref<const Vector>& probabilities, double u);

/// Appends `horizon` classes to `classes`, consuming one uniform per step in
/// stochastic mode. Deterministic mode takes the most probable class (lowest
/// index on ties) and leaves rng untouched.
void extend(const NetParams& params, const NetConfig& config, std::vector<int>& classes, int horizon,
            SampleMode mode, RngStream& rng);

/// Autoregressive generation. Simulation i draws from request.rng.substream(i).
Generated generate(const NetParams& params, const NetConfig& config, const Quantizer& quantizer,
                   const GenRequest& request);

/// The last receptive_field classes of `classes`.
std::vector<int> tail_context(std::span<const int> classes, int receptive_field);
/// receptive_field copies of quantize(0).
std::vector<int> zero_context(const Quantizer& quantizer, int receptive_field);

struct BacktestRow {
    std::size_t t = 0;
    int true_class = 0;
    int predicted_class = 0;
    double predicted_value = 0.0;
    double true_value = 0.0;
};

struct BacktestResult {
    std::vector<BacktestRow> rows;          ///< teacher-forced one-step predictions
    std::vector<int> free_run_classes;      ///< deterministic continuation from the split
    std::vector<double> free_run_values;
    double accuracy = 0.0;
};

/// Teacher-forced argmax predictions for every position in [split, size)
/// plus a deterministic free run of the same length seeded by the
/// receptive-field window ending at the split.
BacktestResult backtest(const NetParams& params, const NetConfig& config, const Quantizer& quantizer,
                        const SeriesF& series, std::size_t split);

}  // namespace sgn
