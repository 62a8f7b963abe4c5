#include "sgn/training.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "sgn/error.hpp"

namespace sgn {

int TrainConfig::effective_crop_length(const NetConfig& net) const {
    return crop_length > 0 ? crop_length : receptive_field(net) + 256;
}

AdamState AdamState::zeros(const NetConfig& config) { return {zero_params(config), zero_params(config)}; }

void optimizer_step(NetParams& params, const NetParams& grads, AdamState& state, int t, const TrainConfig& cfg) {
    if (t < 1) throw ValidationError("optimizer step index must be >= 1");
    std::vector<Matrix*> p, m, v;
    std::vector<const Matrix*> g;
    params.for_each([&](const std::string&, Matrix& x) { p.push_back(&x); });
    state.m.for_each([&](const std::string&, Matrix& x) { m.push_back(&x); });
    state.v.for_each([&](const std::string&, Matrix& x) { v.push_back(&x); });
    grads.for_each([&](const std::string&, const Matrix& x) { g.push_back(&x); });
    if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size())
        throw ValidationError("optimizer tensors do not match parameters");

    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (g[i]->rows() != p[i]->rows() || g[i]->cols() != p[i]->cols())
            throw ValidationError("gradient shape mismatch");
        auto mi = m[i]->array();
        auto vi = v[i]->array();
        const auto gi = g[i]->array();
        mi = cfg.beta1 * mi + (1.0 - cfg.beta1) * gi;
        vi = cfg.beta2 * vi + (1.0 - cfg.beta2) * gi.square();
        p[i]->array() -= cfg.learning_rate * (mi / c1) / ((vi / c2).sqrt() + cfg.epsilon);
    }
}

TrainResult train(const SeriesF& series, const NetConfig& net, const TrainConfig& cfg, const ProgressFn& progress) {
    const auto start = std::chrono::steady_clock::now();
    validate(series);
    net.validate();
    if (cfg.steps < 1 || cfg.batch_size < 1) throw ValidationError("steps and batch size must be >= 1");
    if (cfg.train_count < 1 || cfg.backtest_count < 1) throw ValidationError("split sizes must be >= 1");
    const int rf = receptive_field(net);
    const int crop = cfg.effective_crop_length(net);
    if (crop <= rf) throw ValidationError("crop length must exceed the receptive field");
    if (series.size() < cfg.train_count + cfg.backtest_count) {
        std::ostringstream os;
        os << "series has " << series.size() << " samples; need " << cfg.train_count + cfg.backtest_count;
        throw ValidationError(os.str());
    }
    if (cfg.train_count <= static_cast<std::size_t>(crop))
        throw ValidationError("training region must be longer than the crop length");

    TrainResult out;
    const std::span<const double> values(series.values);
    out.quantizer = fit_quantizer(values.first(cfg.train_count), net.num_classes, cfg.scheme, cfg.margin_fraction,
                                  cfg.mu);
    const ClassSeries encoded = encode(out.quantizer, values.first(cfg.train_count + cfg.backtest_count));
    const std::span<const int> classes(encoded.classes);

    RngStream init_rng(cfg.seed, 0);
    RngStream crop_rng(cfg.seed, 1);
    out.params = build_network(net, init_rng);
    AdamState state = AdamState::zeros(net);

    const double divergence = 10.0 * std::log(static_cast<double>(net.num_classes));
    const std::uint64_t starts = cfg.train_count - static_cast<std::size_t>(crop) + 1;
    std::vector<Crop> batch(static_cast<std::size_t>(cfg.batch_size));
    out.report.loss_history.reserve(static_cast<std::size_t>(cfg.steps));
    for (int step = 1; step <= cfg.steps; ++step) {
        for (auto& c : batch) c.classes = classes.subspan(crop_rng.below(starts), static_cast<std::size_t>(crop));
        const GradientResult g = backward(out.params, net, batch);
        if (!std::isfinite(g.mean_loss) || g.mean_loss > divergence) {
            std::ostringstream os;
            os << "training diverged at step " << step << " (loss " << g.mean_loss << ")";
            throw NumericalError(os.str());
        }
        optimizer_step(out.params, g.grads, state, step, cfg);
        out.report.loss_history.emplace_back(step, g.mean_loss);
        if (progress) progress(step, g.mean_loss);
    }

    const Evaluation ev = evaluate(out.params, net, classes, cfg.train_count);
    out.report.backtest_loss = ev.loss;
    out.report.backtest_accuracy = ev.accuracy;
    out.report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

double batch_loss(const NetParams& params, const NetConfig& config, std::span<const Crop> batch) {
    const auto rf = static_cast<std::size_t>(receptive_field(config));
    double total = 0.0;
    std::size_t positions = 0;
    for (const auto& crop : batch) {
        const Evaluation ev = evaluate(params, config, crop.classes, rf);
        total += ev.loss * static_cast<double>(ev.positions);
        positions += ev.positions;
    }
    if (positions == 0) throw ValidationError("empty batch");
    return total / static_cast<double>(positions);
}

GradCheckResult gradient_check(const NetConfig& config, std::uint64_t seed, double step) {
    config.validate();
    RngStream rng(seed, 7);
    NetParams params = zero_params(config);
    params.for_each([&](const std::string&, Matrix& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform() - 0.5;
    });
    const int rf = receptive_field(config);
    std::vector<std::vector<int>> storage(2);
    for (std::size_t b = 0; b < storage.size(); ++b)
        for (int i = 0; i < rf + 6 + static_cast<int>(b); ++i)
            storage[b].push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(config.num_classes))));
    std::vector<Crop> batch;
    for (const auto& s : storage) batch.push_back({s});

    const GradientResult analytic = backward(params, config, batch);
    std::vector<const Matrix*> grads;
    analytic.grads.for_each([&](const std::string&, const Matrix& m) { grads.push_back(&m); });

    GradCheckResult out;
    std::size_t idx = 0;
    params.for_each([&](const std::string& name, Matrix& m) {
        const Matrix& g = *grads[idx++];
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            const double saved = m.data()[i];
            m.data()[i] = saved + step;
            const double up = batch_loss(params, config, batch);
            m.data()[i] = saved - step;
            const double down = batch_loss(params, config, batch);
            m.data()[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double a = g.data()[i];
            const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
            if (err > out.max_relative_error) {
                out.max_relative_error = err;
                out.worst_tensor = name;
            }
            ++out.coordinates;
        }
    });
    return out;
}

void SearchConfig::validate() const {
    if (max_blocks < 2) throw ValidationError("max_blocks must be >= 2");
    if (max_dilation_cap < 2 || (max_dilation_cap & (max_dilation_cap - 1)) != 0)
        throw ValidationError("max_dilation_cap must be a power of two >= 2");
    if (!(improvement_threshold > 0.0)) throw ValidationError("improvement threshold must be > 0");
    if (budget_steps_per_trial < 1) throw ValidationError("budget_steps_per_trial must be >= 1");
}

int SearchConfig::trial_bound() const {
    int log2cap = 0;
    while ((1 << log2cap) < max_dilation_cap) ++log2cap;
    return max_blocks * log2cap + 1;
}

SearchResult hyper_search(const SearchConfig& search, const NetConfig& base, const TrialEvaluator& evaluate) {
    search.validate();
    SearchResult result;
    std::map<std::pair<int, int>, double> seen;
    auto config_for = [&](int blocks, int dmax) {
        NetConfig c = base;
        c.dilations = make_dilations(blocks, dmax);
        return c;
    };
    auto trial = [&](int blocks, int dmax) {
        const auto key = std::make_pair(blocks, dmax);
        if (auto it = seen.find(key); it != seen.end()) return it->second;
        const double loss = evaluate(config_for(blocks, dmax));
        if (!std::isfinite(loss)) throw NumericalError("search trial produced a non-finite loss");
        seen[key] = loss;
        result.trials.push_back({blocks, dmax, loss});
        return loss;
    };
    auto improves = [&](double current, double candidate) {
        return (current - candidate) / std::max(std::abs(current), 1e-300) >= search.improvement_threshold;
    };

    int blocks = 2;
    int dmax = 2;
    double current = trial(blocks, dmax);
    for (;;) {
        while (dmax < search.max_dilation_cap) {
            const double cand = trial(blocks, dmax * 2);
            if (!improves(current, cand)) break;
            dmax *= 2;
            current = cand;
        }
        if (blocks >= search.max_blocks) break;
        const double cand = trial(blocks + 1, 2);
        if (!improves(current, cand)) break;
        ++blocks;
        dmax = 2;
        current = cand;
    }
    result.blocks = blocks;
    result.max_dilation = dmax;
    result.loss = current;
    result.config = config_for(blocks, dmax);
    return result;
}

SearchResult hyper_search(const SeriesF& series, const SearchConfig& search, const NetConfig& base,
                          const TrainConfig& train_config) {
    TrainConfig cfg = train_config;
    cfg.steps = search.budget_steps_per_trial;
    return hyper_search(search, base, [&](const NetConfig& net) {
        TrainConfig trial_cfg = cfg;
        trial_cfg.crop_length = 0;
        if (train_config.crop_length > 0)
            trial_cfg.crop_length = std::max(train_config.crop_length, receptive_field(net) + 1);
        return train(series, net, trial_cfg).report.backtest_loss;
    });
}

}  // namespace sgn
