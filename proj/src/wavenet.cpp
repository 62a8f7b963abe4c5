#include "sgn/wavenet.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "kernels.hpp"
#include "sgn/error.hpp"

namespace sgn {

using Eigen::Index;

void NetConfig::validate() const {
    if (dilations.empty()) throw ValidationError("dilation list must not be empty");
    for (int d : dilations)
        if (d < 1) throw ValidationError("every dilation must be >= 1");
    if (filter_width < 1) throw ValidationError("filter width must be >= 1");
    if (residual_channels < 1 || skip_channels < 1) throw ValidationError("channel counts must be >= 1");
    if (num_classes < 2) throw ValidationError("need at least 2 classes");
    if (receptive_field(*this) < filter_width) throw ValidationError("receptive field smaller than filter width");
}

std::vector<int> make_dilations(int blocks, int max_dilation) {
    if (blocks < 1) throw ValidationError("blocks must be >= 1");
    if (max_dilation < 1 || (max_dilation & (max_dilation - 1)) != 0)
        throw ValidationError("max dilation must be a power of two");
    std::vector<int> out;
    for (int b = 0; b < blocks; ++b)
        for (int d = 1; d <= max_dilation; d *= 2) out.push_back(d);
    return out;
}

int receptive_field(const NetConfig& config) {
    const int span = std::accumulate(config.dilations.begin(), config.dilations.end(), 1);
    return 1 + (config.filter_width - 1) * span;
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

namespace {

template <class Params, class Fn>
void visit_tensors(Params& p, Fn&& fn) {
    for (std::size_t j = 0; j < p.input.size(); ++j) fn("input.tap" + std::to_string(j), p.input[j]);
    fn("input.bias", p.input_bias);
    for (std::size_t k = 0; k < p.layers.size(); ++k) {
        auto& l = p.layers[k];
        const std::string pre = "layer" + std::to_string(k) + ".";
        for (std::size_t j = 0; j < l.filter.size(); ++j) fn(pre + "filter.tap" + std::to_string(j), l.filter[j]);
        fn(pre + "filter.bias", l.filter_bias);
        for (std::size_t j = 0; j < l.gate.size(); ++j) fn(pre + "gate.tap" + std::to_string(j), l.gate[j]);
        fn(pre + "gate.bias", l.gate_bias);
        fn(pre + "residual", l.residual);
        fn(pre + "residual.bias", l.residual_bias);
        fn(pre + "skip", l.skip);
        fn(pre + "skip.bias", l.skip_bias);
    }
    fn("head.out1", p.out1);
    fn("head.out1.bias", p.out1_bias);
    fn("head.out2", p.out2);
    fn("head.out2.bias", p.out2_bias);
}

}  // namespace

void NetParams::for_each(const std::function<void(const std::string&, Matrix&)>& fn) { visit_tensors(*this, fn); }

void NetParams::for_each(const std::function<void(const std::string&, const Matrix&)>& fn) const {
    visit_tensors(*this, fn);
}

std::size_t NetParams::parameter_count() const {
    std::size_t n = 0;
    for_each([&](const std::string&, const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
}

NetParams zero_params(const NetConfig& config) {
    config.validate();
    const int w = config.filter_width, r = config.residual_channels, s = config.skip_channels, k = config.num_classes;
    NetParams p;
    p.input.assign(w, Matrix::Zero(r, k));
    p.input_bias = Matrix::Zero(r, 1);
    p.layers.resize(config.dilations.size());
    for (auto& l : p.layers) {
        l.filter.assign(w, Matrix::Zero(r, r));
        l.filter_bias = Matrix::Zero(r, 1);
        l.gate.assign(w, Matrix::Zero(r, r));
        l.gate_bias = Matrix::Zero(r, 1);
        l.residual = Matrix::Zero(r, r);
        l.residual_bias = Matrix::Zero(r, 1);
        l.skip = Matrix::Zero(s, r);
        l.skip_bias = Matrix::Zero(s, 1);
    }
    p.out1 = Matrix::Zero(s, s);
    p.out1_bias = Matrix::Zero(s, 1);
    p.out2 = Matrix::Zero(k, s);
    p.out2_bias = Matrix::Zero(k, 1);
    return p;
}

void check_params(const NetParams& params, const NetConfig& config) {
    const NetParams ref = zero_params(config);
    std::vector<std::pair<std::string, std::pair<Index, Index>>> want;
    ref.for_each([&](const std::string& name, const Matrix& m) { want.push_back({name, {m.rows(), m.cols()}}); });
    std::size_t i = 0;
    bool count_ok = params.input.size() == ref.input.size() && params.layers.size() == ref.layers.size();
    for (std::size_t k = 0; count_ok && k < params.layers.size(); ++k)
        count_ok = params.layers[k].filter.size() == ref.layers[k].filter.size() &&
                   params.layers[k].gate.size() == ref.layers[k].gate.size();
    if (!count_ok) throw ValidationError("parameter tensors do not match the network configuration");
    params.for_each([&](const std::string& name, const Matrix& m) {
        const auto& [wname, shape] = want[i++];
        if (name != wname || m.rows() != shape.first || m.cols() != shape.second) {
            std::ostringstream os;
            os << "tensor " << name << " has shape [" << m.rows() << ", " << m.cols() << "], expected ["
               << shape.first << ", " << shape.second << "]";
            throw ValidationError(os.str());
        }
        if (!m.allFinite()) throw ValidationError("tensor " + name + " contains non-finite values");
    });
}

NetParams build_network(const NetConfig& config, RngStream& rng) {
    NetParams p = zero_params(config);
    auto fill = [&](Matrix& m, double fan_in) {
        const double bound = 1.0 / std::sqrt(fan_in);
        for (Index c = 0; c < m.cols(); ++c)
            for (Index r = 0; r < m.rows(); ++r) m(r, c) = bound * (2.0 * rng.uniform() - 1.0);
    };
    const double w = config.filter_width;
    // The one-hot input has a single active class per tap.
    for (auto& m : p.input) fill(m, w);
    for (auto& l : p.layers) {
        for (auto& m : l.filter) fill(m, w * config.residual_channels);
        for (auto& m : l.gate) fill(m, w * config.residual_channels);
        fill(l.residual, config.residual_channels);
        fill(l.skip, config.residual_channels);
    }
    fill(p.out1, config.skip_channels);
    return p;
}

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LayerCache {
    Matrix input;  // R x L
    Matrix tanh_f; // R x L'
    Matrix sig_g;
    Matrix z;
};

struct ForwardCache {
    std::vector<LayerCache> layers;
    Matrix skip_sum;  // S x T_out
    Matrix hidden;    // S x T_out, out1 pre-activation
    Matrix logits;    // K x T_out
};

void check_input(const NetConfig& config, std::span<const int> input) {
    const auto rf = static_cast<std::size_t>(receptive_field(config));
    if (input.size() < rf) {
        std::ostringstream os;
        os << "input length " << input.size() << " is shorter than the receptive field " << rf;
        throw ValidationError(os.str());
    }
    for (int c : input)
        if (c < 0 || c >= config.num_classes)
            throw ValidationError("input class " + std::to_string(c) + " outside [0, " +
                                  std::to_string(config.num_classes) + ")");
}

void add_bias(Matrix& m, const Matrix& bias) {
    for (Index t = 0; t < m.cols(); ++t) m.col(t) = bias.col(0);
}

// Valid-mode forward pass: every layer output column is computed from
// exactly the input columns it depends on, so no padding is read.
void run_forward(const NetParams& p, const NetConfig& config, std::span<const int> input, ForwardCache& cache,
                 bool keep) {
    const Index fw = config.filter_width;
    const Index total = static_cast<Index>(input.size());
    const Index rf = receptive_field(config);
    const Index t_out = total - rf + 1;

    Matrix h(config.residual_channels, total - (fw - 1));
    add_bias(h, p.input_bias);
    for (Index t = 0; t < h.cols(); ++t)
        for (Index j = 0; j < fw; ++j) h.col(t) += p.input[j].col(input[t + j]);

    Matrix skip_sum = Matrix::Zero(config.skip_channels, t_out);
    const std::size_t n_layers = p.layers.size();
    if (keep) cache.layers.resize(n_layers);

    for (std::size_t k = 0; k < n_layers; ++k) {
        const auto& l = p.layers[k];
        const Index d = config.dilations[k];
        const Index len = h.cols() - (fw - 1) * d;

        Matrix af(config.residual_channels, len), ag(config.residual_channels, len);
        add_bias(af, l.filter_bias);
        add_bias(ag, l.gate_bias);
        for (Index j = 0; j < fw; ++j) {
            detail::accumulate_product(l.filter[j], h.middleCols(j * d, len), af);
            detail::accumulate_product(l.gate[j], h.middleCols(j * d, len), ag);
        }
        af = af.unaryExpr([](double v) { return std::tanh(v); });
        ag = ag.unaryExpr([](double v) { return logistic(v); });
        Matrix z = af.cwiseProduct(ag);

        Matrix sk(config.skip_channels, t_out);
        add_bias(sk, l.skip_bias);
        detail::accumulate_product(l.skip, z.rightCols(t_out), sk);
        skip_sum += sk;

        Matrix next;
        if (k + 1 < n_layers) {
            Matrix res(config.residual_channels, len);
            add_bias(res, l.residual_bias);
            detail::accumulate_product(l.residual, z, res);
            next = h.rightCols(len) + res;
        }
        if (keep) {
            auto& c = cache.layers[k];
            c.input = std::move(h);
            c.tanh_f = std::move(af);
            c.sig_g = std::move(ag);
            c.z = std::move(z);
        }
        h = std::move(next);
    }

    Matrix hidden(config.skip_channels, t_out);
    add_bias(hidden, p.out1_bias);
    detail::accumulate_product(p.out1, skip_sum.cwiseMax(0.0), hidden);
    Matrix logits(config.num_classes, t_out);
    add_bias(logits, p.out2_bias);
    detail::accumulate_product(p.out2, hidden.cwiseMax(0.0), logits);

    cache.logits = std::move(logits);
    if (keep) {
        cache.skip_sum = std::move(skip_sum);
        cache.hidden = std::move(hidden);
    }
}

}  // namespace

LogitsSeq forward(const NetParams& params, const NetConfig& config, std::span<const int> input) {
    config.validate();
    check_input(config, input);
    ForwardCache cache;
    run_forward(params, config, input, cache, false);
    LogitsSeq out;
    out.logits = std::move(cache.logits);
    out.first_valid_index = receptive_field(config) - 1;
    return out;
}

Vector softmax(const Eigen::Ref<const Vector>& logits) {
    const double mx = logits.maxCoeff();
    Vector e = (logits.array() - mx).exp().matrix();
    return e / e.sum();
}

double cross_entropy(const Eigen::Ref<const Vector>& logits, int target) {
    if (target < 0 || target >= logits.size())
        throw ValidationError("target class " + std::to_string(target) + " outside [0, " +
                              std::to_string(logits.size()) + ")");
    const double mx = logits.maxCoeff();
    const double lse = mx + std::log((logits.array() - mx).exp().sum());
    return std::max(0.0, lse - logits(target));
}

double gated_unit(double filter_preactivation, double gate_preactivation) {
    return std::tanh(filter_preactivation) * logistic(gate_preactivation);
}

int argmax(const Eigen::Ref<const Vector>& v) {
    int best = 0;
    for (Index i = 1; i < v.size(); ++i)
        if (v(i) > v(best)) best = static_cast<int>(i);
    return best;
}

// ---------------------------------------------------------------------------
// Backward
// ---------------------------------------------------------------------------

namespace {

// Accumulates scale * d(sum of cross-entropies)/d(params) into grads and
// returns the unscaled loss sum. Column i of the logits is scored against
// targets[i].
double backprop(const NetParams& p, const NetConfig& config, std::span<const int> input, std::span<const int> targets,
                double scale, NetParams& g) {
    ForwardCache cache;
    run_forward(p, config, input, cache, true);
    const Index fw = config.filter_width;
    const Index t_out = cache.logits.cols();

    double loss = 0.0;
    Matrix d_logits(config.num_classes, t_out);
    for (Index t = 0; t < t_out; ++t) {
        const auto col = cache.logits.col(t);
        loss += cross_entropy(col, targets[t]);
        d_logits.col(t) = softmax(col);
        d_logits(targets[t], t) -= 1.0;
    }
    d_logits *= scale;

    const Matrix a_hidden = cache.hidden.cwiseMax(0.0);
    g.out2.noalias() += d_logits * a_hidden.transpose();
    g.out2_bias += d_logits.rowwise().sum();
    Matrix d_hidden = p.out2.transpose() * d_logits;
    d_hidden = (cache.hidden.array() > 0.0).select(d_hidden, 0.0);

    const Matrix a_skip = cache.skip_sum.cwiseMax(0.0);
    g.out1.noalias() += d_hidden * a_skip.transpose();
    g.out1_bias += d_hidden.rowwise().sum();
    Matrix d_skip = p.out1.transpose() * d_hidden;
    d_skip = (cache.skip_sum.array() > 0.0).select(d_skip, 0.0);

    Matrix d_next;  // gradient w.r.t. the residual output of the current layer
    for (std::size_t kk = p.layers.size(); kk-- > 0;) {
        const auto& l = p.layers[kk];
        auto& gl = g.layers[kk];
        const auto& c = cache.layers[kk];
        const Index d = config.dilations[kk];
        const Index len = c.z.cols();

        Matrix dz = Matrix::Zero(config.residual_channels, len);
        if (d_next.size() > 0) {
            dz.noalias() += l.residual.transpose() * d_next;
            gl.residual.noalias() += d_next * c.z.transpose();
            gl.residual_bias += d_next.rowwise().sum();
        }
        dz.rightCols(t_out).noalias() += l.skip.transpose() * d_skip;
        gl.skip.noalias() += d_skip * c.z.rightCols(t_out).transpose();
        gl.skip_bias += d_skip.rowwise().sum();

        const Matrix daf =
            (dz.array() * c.sig_g.array() * (1.0 - c.tanh_f.array().square())).matrix();
        const Matrix dag =
            (dz.array() * c.tanh_f.array() * c.sig_g.array() * (1.0 - c.sig_g.array())).matrix();
        gl.filter_bias += daf.rowwise().sum();
        gl.gate_bias += dag.rowwise().sum();

        Matrix dh = Matrix::Zero(config.residual_channels, c.input.cols());
        for (Index j = 0; j < fw; ++j) {
            const auto window = c.input.middleCols(j * d, len);
            gl.filter[j].noalias() += daf * window.transpose();
            gl.gate[j].noalias() += dag * window.transpose();
            dh.middleCols(j * d, len).noalias() += l.filter[j].transpose() * daf;
            dh.middleCols(j * d, len).noalias() += l.gate[j].transpose() * dag;
        }
        if (d_next.size() > 0) dh.rightCols(len) += d_next;
        d_next = std::move(dh);
    }

    g.input_bias += d_next.rowwise().sum();
    for (Index t = 0; t < d_next.cols(); ++t)
        for (Index j = 0; j < fw; ++j) g.input[j].col(input[t + j]) += d_next.col(t);
    return loss;
}

}  // namespace

GradientResult backward(const NetParams& params, const NetConfig& config, std::span<const Crop> batch) {
    config.validate();
    const auto rf = static_cast<std::size_t>(receptive_field(config));
    if (batch.empty()) throw ValidationError("empty batch");
    std::size_t positions = 0;
    for (const auto& crop : batch) {
        if (crop.classes.size() <= rf) throw ValidationError("crop must be longer than the receptive field");
        check_input(config, crop.classes);
        positions += crop.classes.size() - rf;
    }
    GradientResult out;
    out.grads = zero_params(config);
    out.positions = positions;
    const double scale = 1.0 / static_cast<double>(positions);
    double loss = 0.0;
    for (const auto& crop : batch) {
        const auto inputs = crop.classes.first(crop.classes.size() - 1);
        const auto targets = crop.classes.subspan(rf);
        loss += backprop(params, config, inputs, targets, scale, out.grads);
    }
    out.mean_loss = loss / static_cast<double>(positions);
    return out;
}

Evaluation evaluate(const NetParams& params, const NetConfig& config, std::span<const int> classes,
                    std::size_t first_target) {
    const auto rf = static_cast<std::size_t>(receptive_field(config));
    if (first_target < rf || first_target >= classes.size())
        throw ValidationError("evaluation targets must start at or after the receptive field and inside the series");
    const auto inputs = classes.subspan(first_target - rf, classes.size() - 1 - (first_target - rf));
    const LogitsSeq logits = forward(params, config, inputs);
    Evaluation ev;
    ev.positions = classes.size() - first_target;
    std::size_t hits = 0;
    for (Index i = 0; i < logits.rows(); ++i) {
        const int target = classes[first_target + static_cast<std::size_t>(i)];
        const auto col = logits.logits.col(i);
        ev.loss += cross_entropy(col, target);
        if (argmax(col) == target) ++hits;
    }
    ev.loss /= static_cast<double>(ev.positions);
    ev.accuracy = static_cast<double>(hits) / static_cast<double>(ev.positions);
    return ev;
}

}  // namespace sgn
