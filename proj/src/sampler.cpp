#include "sgn/sampler.hpp"

#include <sstream>

#include "sgn/error.hpp"

namespace sgn {

Vector next_distribution(const NetParams& params, const NetConfig& config, std::span<const int> context) {
    const auto rf = static_cast<std::size_t>(receptive_field(config));
    if (context.size() < rf) {
        std::ostringstream os;
        os << "context has " << context.size() << " classes; the receptive field needs " << rf;
        throw ValidationError(os.str());
    }
    const LogitsSeq logits = forward(params, config, context.last(rf));
    return softmax(logits.logits.col(logits.rows() - 1));
}

int draw_categorical(const Eigen::Ref<const Vector>& probabilities, double u) {
    double cumulative = 0.0;
    const auto k = probabilities.size();
    for (Eigen::Index i = 0; i < k; ++i) {
        cumulative += probabilities(i);
        if (u < cumulative) return static_cast<int>(i);
    }
    // Rounding left the total below u; fall back to the last class with mass.
    for (Eigen::Index i = k; i-- > 0;)
        if (probabilities(i) > 0.0) return static_cast<int>(i);
    return static_cast<int>(k - 1);
}

void extend(const NetParams& params, const NetConfig& config, std::vector<int>& classes, int horizon,
            SampleMode mode, RngStream& rng) {
    if (horizon < 1) throw ValidationError("horizon must be >= 1");
    classes.reserve(classes.size() + static_cast<std::size_t>(horizon));
    for (int h = 0; h < horizon; ++h) {
        const Vector p = next_distribution(params, config, classes);
        classes.push_back(mode == SampleMode::Deterministic ? argmax(p) : draw_categorical(p, rng.uniform()));
    }
}

Generated generate(const NetParams& params, const NetConfig& config, const Quantizer& quantizer,
                   const GenRequest& request) {
    if (request.sims < 1) throw ValidationError("sims must be >= 1");
    if (request.horizon < 1) throw ValidationError("horizon must be >= 1");
    const auto rf = static_cast<std::size_t>(receptive_field(config));
    if (request.context.size() < rf) {
        std::ostringstream os;
        os << "context has " << request.context.size() << " classes; the receptive field needs " << rf;
        throw ValidationError(os.str());
    }
    Generated out;
    if (request.mode == SampleMode::Deterministic && request.sims > 1)
        out.warnings.push_back("deterministic mode with sims > 1 yields identical series");

    for (int s = 0; s < request.sims; ++s) {
        if (request.mode == SampleMode::Deterministic && s > 0) {
            out.classes.push_back(out.classes.front());
            out.series.push_back(out.series.front());
            continue;
        }
        RngStream rng = request.rng.substream(static_cast<std::uint64_t>(s));
        std::vector<int> buf(request.context.end() - static_cast<std::ptrdiff_t>(rf), request.context.end());
        extend(params, config, buf, request.horizon, request.mode, rng);
        std::vector<int> generated(buf.begin() + static_cast<std::ptrdiff_t>(rf), buf.end());
        SeriesF series;
        series.dt = request.dt;
        series.values = decode(quantizer, generated);
        out.series.push_back(std::move(series));
        out.classes.push_back(std::move(generated));
    }
    return out;
}

std::vector<int> tail_context(std::span<const int> classes, int receptive_field) {
    const auto rf = static_cast<std::size_t>(receptive_field);
    if (classes.size() < rf) throw ValidationError("not enough classes for a receptive-field context");
    const auto tail = classes.last(rf);
    return {tail.begin(), tail.end()};
}

std::vector<int> zero_context(const Quantizer& quantizer, int receptive_field) {
    return std::vector<int>(static_cast<std::size_t>(receptive_field), quantizer.quantize(0.0));
}

BacktestResult backtest(const NetParams& params, const NetConfig& config, const Quantizer& quantizer,
                        const SeriesF& series, std::size_t split) {
    validate(series);
    const auto rf = static_cast<std::size_t>(receptive_field(config));
    if (split < rf || split >= series.size()) {
        std::ostringstream os;
        os << "split " << split << " must lie in [" << rf << ", " << series.size() << ")";
        throw ValidationError(os.str());
    }
    const ClassSeries encoded = encode(quantizer, series.values);
    const std::span<const int> classes(encoded.classes);

    BacktestResult out;
    const auto inputs = classes.subspan(split - rf, classes.size() - 1 - (split - rf));
    const LogitsSeq logits = forward(params, config, inputs);
    std::size_t hits = 0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        BacktestRow row;
        row.t = split + static_cast<std::size_t>(i);
        row.true_class = classes[row.t];
        row.predicted_class = argmax(logits.logits.col(i));
        row.predicted_value = quantizer.dequantize(row.predicted_class);
        row.true_value = series.values[row.t];
        if (row.predicted_class == row.true_class) ++hits;
        out.rows.push_back(row);
    }
    out.accuracy = static_cast<double>(hits) / static_cast<double>(out.rows.size());

    std::vector<int> buf(classes.begin() + static_cast<std::ptrdiff_t>(split - rf),
                         classes.begin() + static_cast<std::ptrdiff_t>(split));
    RngStream unused;
    extend(params, config, buf, static_cast<int>(series.size() - split), SampleMode::Deterministic, unused);
    out.free_run_classes.assign(buf.begin() + static_cast<std::ptrdiff_t>(rf), buf.end());
    out.free_run_values = decode(quantizer, out.free_run_classes);
    return out;
}

}  // namespace sgn
