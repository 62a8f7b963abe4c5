// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance                    run every criterion
//   acceptance --criterion 7      run one (repeatable)
//   acceptance --work-dir DIR     keep intermediate artifacts in DIR

#include <CLI11.hpp>
#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <unistd.h>

#include "cli.hpp"
#include "sgn/codec.hpp"
#include "sgn/error.hpp"
#include "sgn/inference.hpp"
#include "sgn/io.hpp"
#include "sgn/processes.hpp"
#include "sgn/rng.hpp"
#include "sgn/sampler.hpp"
#include "sgn/training.hpp"
#include "sgn/wavenet.hpp"

namespace fs = std::filesystem;
using namespace sgn;

namespace {

// ---- Budgets ----------------------------------------------------------------

constexpr std::uint64_t kDataSeed = 42;
constexpr std::size_t kSeriesLength = 12000;
constexpr int kLogisticSteps = 500;
constexpr int kHarmonicSteps = 1500;
constexpr int kMonteCarloSteps = 600;
constexpr int kSims = 100;
constexpr int kHorizon = 2000;

// ---- Plumbing ---------------------------------------------------------------

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Context {
    fs::path work_dir;
};

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;  ///< CPU budget; exceeding it fails the criterion
    std::function<Outcome(const Context&)> run;
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

void note(const std::string& line) { std::cout << "    " << line << std::endl; }

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

SeriesF realization(const ProcessSpec& spec, std::uint64_t seed, std::size_t n = kSeriesLength) {
    RngStream rng(seed);
    return generate(spec, n, default_dt(spec), rng);
}

NetConfig reference_net(int blocks, int max_dilation) {
    NetConfig c;
    c.dilations = make_dilations(blocks, max_dilation);
    return c;
}

TrainConfig train_config(int steps) {
    TrainConfig t;
    t.steps = steps;
    return t;
}

TrainResult train_logged(const SeriesF& series, const NetConfig& net, const TrainConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    auto result = train(series, net, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    note("trained " + std::to_string(cfg.steps) + " steps, receptive field " + std::to_string(receptive_field(net)) +
         ", " + fmt(secs, 3) + " s; final loss " + fmt(result.report.loss_history.back().second) +
         ", backtest loss " + fmt(result.report.backtest_loss) + ", backtest accuracy " +
         fmt(result.report.backtest_accuracy));
    return result;
}

// ---- 1. Gradient correctness ----------------------------------------------

Outcome gradient_correctness(const Context&) {
    // Five seeded random configs (blocks <= 2, max dilation <= 2, R, S <= 8,
    // K <= 16) through the command-line checker.
    std::ostringstream out, err;
    const int code = cli::run({"gradcheck", "--seed", "1", "--configs", "5"}, out, err);
    std::istringstream lines(out.str());
    std::string line, last;
    while (std::getline(lines, line)) {
        note(line);
        last = line;
    }
    if (code != 0 && code != 3) return {false, "gradcheck exited " + std::to_string(code) + ": " + err.str()};
    const double worst = std::stod(last.substr(last.rfind(' ') + 1));
    return {code == 0 && worst < 1e-4, "max relative error " + fmt(worst, 3) + " over 5 configs (limit 1e-4)"};
}

// ---- 2. Causality and receptive field --------------------------------------

NetParams random_params(const NetConfig& config, RngStream& rng) {
    NetParams p = zero_params(config);
    p.for_each([&](const std::string&, Matrix& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform() - 0.5;
    });
    return p;
}

// Random weights under which every input in the field visibly reaches the
// output: doubled fan-in scaled convolutions keep the gain along the oldest
// path near one per layer, and positive skip and head biases with
// non-negative out1 weights hold every ReLU in its active region while the
// logits stay O(1).
NetParams propagating_params(const NetConfig& config, RngStream& rng) {
    NetParams p = build_network(config, rng);
    for (auto& l : p.layers) {
        for (auto& m : l.filter) m *= 2.0;
        l.residual *= 2.0;
        for (Eigen::Index i = 0; i < l.skip.size(); ++i) l.skip.data()[i] = (rng.uniform() - 0.5) / config.residual_channels;
        l.skip_bias.setConstant(1.0);
        for (Eigen::Index i = 0; i < l.gate_bias.size(); ++i) l.gate_bias.data()[i] = rng.uniform() - 0.5;
    }
    for (Eigen::Index i = 0; i < p.out1.size(); ++i) p.out1.data()[i] = 0.5 * rng.uniform();
    p.out1_bias.setConstant(0.1);
    for (Eigen::Index i = 0; i < p.out2.size(); ++i) p.out2.data()[i] = rng.uniform() - 0.5;
    return p;
}

NetConfig random_config(RngStream& rng) {
    NetConfig c;
    c.dilations = make_dilations(1 + static_cast<int>(rng.below(3)), 1 << rng.below(4));
    c.filter_width = 2 + static_cast<int>(rng.below(2));
    c.residual_channels = 2 + static_cast<int>(rng.below(5));
    c.skip_channels = 2 + static_cast<int>(rng.below(5));
    c.num_classes = 2 + static_cast<int>(rng.below(15));
    return c;
}

std::vector<int> random_classes(std::size_t n, int k, RngStream& rng) {
    std::vector<int> v(n);
    for (auto& x : v) x = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    return v;
}

int bump(int cls, int k, RngStream& rng) { return (cls + 1 + static_cast<int>(rng.below(k - 1))) % k; }

Outcome causality_and_field(const Context&) {
    constexpr int kTrials = 200;
    RngStream rng(2024);
    int causal_ok = 0, tight_ok = 0, shift_ok = 0;
    for (int trial = 0; trial < kTrials; ++trial) {
        const NetConfig c = random_config(rng);
        const NetParams p = random_params(c, rng);
        const int rf = receptive_field(c);
        const std::size_t len = static_cast<std::size_t>(rf) + 1 + rng.below(40);
        const auto x = random_classes(len, c.num_classes, rng);
        const auto ref = forward(p, c, x);

        // Causal masking: outputs at positions before the perturbation are unchanged.
        {
            const std::size_t pos = rng.below(len);
            auto y = x;
            y[pos] = bump(y[pos], c.num_classes, rng);
            const auto out = forward(p, c, y);
            bool ok = true;
            for (Eigen::Index r = 0; r < ref.rows(); ++r)
                if (static_cast<std::size_t>(ref.first_valid_index + r) < pos)
                    ok &= out.logits.col(r) == ref.logits.col(r);
            causal_ok += ok;
        }
        // Field tightness: the oldest position in the field matters, one older does not.
        {
            const NetParams active = propagating_params(c, rng);
            const auto base = forward(active, c, x);
            const std::size_t out_pos = len - 1;
            auto inside = x, outside = x;
            const std::size_t oldest = out_pos - static_cast<std::size_t>(rf - 1);
            inside[oldest] = bump(inside[oldest], c.num_classes, rng);
            const auto last = base.rows() - 1;
            bool ok = forward(active, c, inside).logits.col(last) != base.logits.col(last);
            if (oldest > 0) {
                outside[oldest - 1] = bump(outside[oldest - 1], c.num_classes, rng);
                ok &= forward(active, c, outside).logits.col(last) == base.logits.col(last);
            }
            tight_ok += ok;
        }
        // Shift equivariance: appending a sample leaves earlier outputs untouched and
        // dropping the first sample shifts them by one.
        {
            auto longer = x;
            longer.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(c.num_classes))));
            const auto a = forward(p, c, longer);
            bool ok = a.logits.leftCols(ref.rows()) == ref.logits;
            if (len > static_cast<std::size_t>(rf)) {
                const auto b = forward(p, c, std::span<const int>(x).subspan(1));
                ok &= b.logits == ref.logits.rightCols(ref.rows() - 1);
            }
            shift_ok += ok;
        }
    }
    const bool pass = causal_ok == kTrials && tight_ok == kTrials && shift_ok == kTrials;
    return {pass, "causal " + std::to_string(causal_ok) + "/200, field tightness " + std::to_string(tight_ok) +
                      "/200, shift equivariance " + std::to_string(shift_ok) + "/200 (exact equality)"};
}

// ---- 3. Codec ---------------------------------------------------------------

Outcome codec(const Context&) {
    bool pass = true;
    double worst_ratio = 0.0;
    for (Scheme scheme : {Scheme::Linear, Scheme::MuLaw}) {
        for (int k : {2, 16, 256}) {
            Quantizer q;
            q.num_classes = k;
            q.lo = -1.5;
            q.hi = 2.5;
            q.scheme = scheme;
            // Bin edges computed from the companding curve directly.
            auto edge = [&](int j) {
                const double y = -1.0 + 2.0 * j / k;
                const double u =
                    scheme == Scheme::Linear ? y : std::copysign(std::expm1(std::abs(y) * std::log1p(q.mu)) / q.mu, y);
                return q.lo + 0.5 * (u + 1.0) * (q.hi - q.lo);
            };
            constexpr int n = 100000;
            int prev = -1;
            for (int i = 0; i < n; ++i) {
                const double x = q.lo + (q.hi - q.lo) * i / (n - 1);
                const int c = q.quantize(x);
                if (c < prev) pass = false;
                prev = c;
                const double half = 0.5 * (edge(c + 1) - edge(c));
                const double err = std::abs(q.dequantize(c) - x);
                worst_ratio = std::max(worst_ratio, err / half);
                if (err > half * (1.0 + 1e-9)) pass = false;
            }
            for (int c = 0; c < k; ++c)
                if (q.quantize(q.dequantize(c)) != c) pass = false;
        }
    }
    return {pass, "worst round-trip error " + fmt(worst_ratio, 6) +
                      " half-bins; monotone and centre-idempotent for K in {2,16,256}, linear and mu-law"};
}

// ---- 4. Estimator oracle ----------------------------------------------------

struct OracleModel {
    std::string name;
    ProcessSpec spec;
    FitKind kind;
    std::map<std::string, double> truth;
    std::map<std::string, double> se;
};

// Inverse information of the Gaussian ARCH(1) likelihood, from a long path.
std::map<std::string, double> arch_standard_errors(const ARCH1& spec, std::size_t n) {
    RngStream rng(99991);
    const auto x = generate(spec, 2000000, 1.0, rng).values;
    Eigen::Matrix2d info = Eigen::Matrix2d::Zero();
    for (std::size_t t = 1; t < x.size(); ++t) {
        const double x2 = x[t - 1] * x[t - 1];
        const double h = spec.c + spec.phi1 * x2;
        const Eigen::Vector2d g(1.0, x2);
        info += g * g.transpose() / (2.0 * h * h);
    }
    info /= static_cast<double>(x.size() - 1);
    const Eigen::Matrix2d cov = info.inverse() / static_cast<double>(n);
    return {{"c", std::sqrt(cov(0, 0))}, {"phi1", std::sqrt(cov(1, 1))}};
}

Outcome estimator_oracle(const Context&) {
    constexpr std::size_t n = 10000;
    const double dn = static_cast<double>(n);
    std::vector<OracleModel> models;
    {
        const AR1 s;
        models.push_back({"ar1", s, FitKind::AR1, {{"phi", s.phi}, {"c", s.c}, {"sigma_eps", s.sigma_eps}},
                          {{"phi", std::sqrt((1 - s.phi * s.phi) / dn)},
                           {"c", s.sigma_eps / std::sqrt(dn)},
                           {"sigma_eps", s.sigma_eps / std::sqrt(2 * dn)}}});
    }
    {
        const ARMA11 s;
        const double k = (1 + s.phi * s.theta_ma) / (s.phi + s.theta_ma);
        models.push_back({"arma11", s, FitKind::ARMA11, {{"phi", s.phi}, {"theta_ma", s.theta_ma}, {"c", s.c}},
                          {{"phi", k * std::sqrt((1 - s.phi * s.phi) / dn)},
                           {"theta_ma", k * std::sqrt((1 - s.theta_ma * s.theta_ma) / dn)},
                           {"c", s.sigma_eps * (1 + s.theta_ma) / std::sqrt(dn)}}});
    }
    {
        const ARCH1 s;
        models.push_back({"arch1", s, FitKind::ARCH1, {{"c", s.c}, {"phi1", s.phi1}}, arch_standard_errors(s, n)});
    }
    {
        const OU s;
        const double phi = std::exp(-s.theta);
        const double sd_eps = s.sigma * std::sqrt((1 - phi * phi) / (2 * s.theta));
        models.push_back({"ou", s, FitKind::OU, {{"theta", s.theta}, {"mu", s.mu}},
                          {{"theta", std::sqrt((1 - phi * phi) / dn) / phi},
                           {"mu", sd_eps / ((1 - phi) * std::sqrt(dn))}}});
    }

    bool pass = true;
    std::string summary;
    for (const auto& m : models) {
        std::string se_text;
        for (const auto& [name, se] : m.se) se_text += " " + name + "=" + fmt(se, 3);
        note(m.name + " asymptotic standard errors:" + se_text);
        int inside = 0;
        for (int trial = 0; trial < 100; ++trial) {
            RngStream rng(1000 + static_cast<std::uint64_t>(trial));
            const auto x = generate(m.spec, n, 1.0, rng).values;
            const auto f = fit(m.kind, x, 1.0);
            bool ok = f.converged;
            for (const auto& [name, truth] : m.truth)
                ok = ok && std::abs(f.estimates.at(name) - truth) <= 3.0 * m.se.at(name);
            inside += ok;
        }
        note(m.name + ": " + std::to_string(inside) + "/100 trials with every parameter within 3 SE");
        pass &= inside >= 95;
        summary += (summary.empty() ? "" : ", ") + m.name + " " + std::to_string(inside) + "/100";
    }
    return {pass, summary + " (need >= 95 each)"};
}

// ---- 5. Logistic map --------------------------------------------------------

Outcome logistic_map(const Context&) {
    const Logistic spec;
    const SeriesF series = realization(spec, kDataSeed);
    const NetConfig net = reference_net(5, 2);
    const TrainConfig cfg = train_config(kLogisticSteps);
    const auto trained = train_logged(series, net, cfg);
    const auto bt = backtest(trained.params, net, trained.quantizer, series, cfg.train_count);
    int run = 0;
    while (run < static_cast<int>(bt.free_run_classes.size()) &&
           std::abs(bt.free_run_classes[static_cast<std::size_t>(run)] - bt.rows[static_cast<std::size_t>(run)].true_class) <= 1)
        ++run;
    std::string first;
    for (std::size_t i = 0; i < 12; ++i)
        first += std::to_string(bt.free_run_classes[i]) + "/" + std::to_string(bt.rows[i].true_class) + " ";
    note("free run vs truth (classes): " + first);
    note("teacher-forced accuracy " + fmt(bt.accuracy));
    return {run >= 5, "free run within +-1 class for the first " + std::to_string(run) + " steps (need >= 5)"};
}

// ---- 6. Harmonic oscillator --------------------------------------------------

Outcome harmonic(const Context&) {
    const Harmonic spec;
    const SeriesF series = realization(spec, kDataSeed);
    const NetConfig net = reference_net(2, 8);
    const TrainConfig cfg = train_config(kHarmonicSteps);
    const auto trained = train_logged(series, net, cfg);
    const auto bt = backtest(trained.params, net, trained.quantizer, series, cfg.train_count);
    std::size_t near = 0;
    for (const auto& r : bt.rows) near += std::abs(r.predicted_class - r.true_class) <= 1;
    const double frac = static_cast<double>(near) / static_cast<double>(bt.rows.size());

    // Free-run persistence, reported only: zero crossings against the truth.
    auto crossings = [&](const std::vector<double>& v) {
        const double mid = 0.5 * (trained.quantizer.lo + trained.quantizer.hi);
        int n = 0;
        for (std::size_t i = 1; i < v.size(); ++i) n += (v[i - 1] - mid) * (v[i] - mid) < 0;
        return n;
    };
    std::vector<double> truth;
    for (const auto& r : bt.rows) truth.push_back(r.true_value);
    double amp = 0.0;
    for (double v : bt.free_run_values) amp = std::max(amp, std::abs(v));
    note("free run: " + std::to_string(crossings(bt.free_run_values)) + " mid-level crossings (truth " +
         std::to_string(crossings(truth)) + "), peak |value| " + fmt(amp) + " (not gated)");
    return {frac >= 0.9, "teacher-forced within +-1 class on " + fmt(100 * frac, 4) + "% of " +
                             std::to_string(bt.rows.size()) + " held-out samples (need >= 90%)"};
}

// ---- 7-10. Monte Carlo experiments -------------------------------------------

struct MonteCarlo {
    EstimateReport report;
    std::vector<double> pooled;
};

MonteCarlo monte_carlo(const ProcessSpec& spec, FitKind kind, int blocks, int max_dilation) {
    const SeriesF series = realization(spec, kDataSeed);
    const NetConfig net = reference_net(blocks, max_dilation);
    const TrainConfig cfg = train_config(kMonteCarloSteps);
    const auto trained = train_logged(series, net, cfg);

    const auto training_classes =
        encode(trained.quantizer, std::span<const double>(series.values).first(cfg.train_count));
    GenRequest req;
    req.context = tail_context(training_classes.classes, receptive_field(net));
    req.horizon = kHorizon;
    req.mode = SampleMode::Stochastic;
    req.rng = RngStream(kDataSeed + 1);
    req.sims = kSims;
    req.dt = series.dt;
    const auto gen = generate(trained.params, net, trained.quantizer, req);

    MonteCarlo mc;
    std::vector<FitResult> fits;
    for (const auto& s : gen.series) {
        fits.push_back(fit(kind, s.values, s.dt));
        mc.pooled.insert(mc.pooled.end(), s.values.begin(), s.values.end());
    }
    mc.report = monte_carlo_report(fits, spec);
    for (const auto& [name, p] : mc.report.params)
        note(name + ": median " + fmt(p.median) + " [q05 " + fmt(p.quantiles.at(0.05)) + ", q95 " +
             fmt(p.quantiles.at(0.95)) + "], true " + fmt(p.true_value));
    note(std::to_string(mc.report.num_converged) + "/" + std::to_string(mc.report.num_sims) + " fits converged");
    return mc;
}

std::optional<MonteCarlo> g_ar1;

const MonteCarlo& ar1_monte_carlo() {
    if (!g_ar1) g_ar1 = monte_carlo(AR1{}, FitKind::AR1, 5, 4);
    return *g_ar1;
}

Outcome ar1_experiment(const Context&) {
    const AR1 truth;
    const auto& mc = ar1_monte_carlo();
    const double phi = mc.report.params.at("phi").median;
    const double c = mc.report.params.at("c").median;
    const bool pass = std::abs(phi - truth.phi) <= 0.15 && std::abs(c - truth.c) <= 0.3 * truth.sigma_eps;
    return {pass, "median phi " + fmt(phi) + " (need within 0.15 of " + fmt(truth.phi) + "), median c " + fmt(c) +
                      " (need within " + fmt(0.3 * truth.sigma_eps) + " of " + fmt(truth.c) + ")"};
}

Outcome ou_experiment(const Context&) {
    const auto mc = monte_carlo(OU{}, FitKind::OU, 5, 4);
    const double theta = mc.report.params.at("theta").median;
    return {theta >= 0.04 && theta <= 0.25, "median theta " + fmt(theta) + " (need within [0.04, 0.25])"};
}

Outcome arch_experiment(const Context&) {
    const ARCH1 truth;
    const auto mc = monte_carlo(truth, FitKind::ARCH1, 5, 4);
    const double phi1 = mc.report.params.at("phi1").median;
    return {phi1 > 0.0 && std::abs(phi1 - truth.phi1) <= 0.2,
            "median phi1 " + fmt(phi1) + " (need > 0 and within 0.2 of " + fmt(truth.phi1) + ")"};
}

Outcome distribution_recovery(const Context&) {
    const auto& mc = ar1_monte_carlo();
    const SeriesF fresh = realization(AR1{}, kDataSeed + 1000, 10000);
    const double d = ks_distance(mc.pooled, fresh.values);
    return {d < 0.15, "KS distance " + fmt(d) + " between " + std::to_string(mc.pooled.size()) +
                          " pooled simulated values and a fresh 10000-sample realization (need < 0.15)"};
}

// ---- 11. Hyperparameter search ------------------------------------------------

Outcome search(const Context&) {
    bool stubs_ok = true;
    auto check = [&](const std::string& what, const SearchConfig& s, const TrialEvaluator& ev, int blocks, int dmax) {
        int calls = 0;
        const auto r = hyper_search(s, NetConfig{}, [&](const NetConfig& c) {
            ++calls;
            return ev(c);
        });
        const bool ok = r.blocks == blocks && r.max_dilation == dmax && calls <= s.trial_bound();
        note("stub '" + what + "': blocks " + std::to_string(r.blocks) + ", max dilation " +
             std::to_string(r.max_dilation) + ", " + std::to_string(calls) + " trials (bound " +
             std::to_string(s.trial_bound()) + ")" + (ok ? "" : " WRONG"));
        stubs_ok &= ok;
    };
    auto dmax_of = [](const NetConfig& c) { return *std::max_element(c.dilations.begin(), c.dilations.end()); };
    auto blocks_of = [](const NetConfig& c) { return static_cast<int>(std::count(c.dilations.begin(), c.dilations.end(), 1)); };
    SearchConfig defaults;
    check("flat", defaults, [](const NetConfig&) { return 1.0; }, 2, 2);
    check("dilation until 8", defaults, [&](const NetConfig& c) { return 1.0 / std::min(dmax_of(c), 8); }, 2, 8);
    check("blocks only", defaults, [&](const NetConfig& c) { return 10.0 / blocks_of(c); }, defaults.max_blocks, 2);
    double loss = 1e9;
    check("always improving", defaults, [&](const NetConfig&) { return loss *= 0.5; }, defaults.max_blocks,
          defaults.max_dilation_cap);

    SearchConfig real;
    real.budget_steps_per_trial = 2000;
    const SeriesF series = realization(AR1{}, kDataSeed);
    const auto r = hyper_search(series, real, NetConfig{}, TrainConfig{});
    for (const auto& t : r.trials)
        note("trial blocks " + std::to_string(t.blocks) + " max dilation " + std::to_string(t.max_dilation) +
             ": backtest loss " + fmt(t.loss));
    const bool real_ok = !r.trials.empty() && r.trials.front().blocks == 2 && r.trials.front().max_dilation == 2 &&
                         r.loss <= r.trials.front().loss &&
                         static_cast<int>(r.trials.size()) <= real.trial_bound();
    return {stubs_ok && real_ok, std::string("stub examples ") + (stubs_ok ? "ok" : "WRONG") + "; real search chose blocks " +
                                     std::to_string(r.blocks) + " max dilation " + std::to_string(r.max_dilation) +
                                     " with loss " + fmt(r.loss) + " vs start " + fmt(r.trials.front().loss) + " after " +
                                     std::to_string(r.trials.size()) + " trials"};
}

// ---- 12. Reproducibility ------------------------------------------------------

std::map<std::string, std::string> data_artifacts(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        const auto name = e.path().filename().string();
        const auto ext = e.path().extension().string();
        if (name.find("manifest") != std::string::npos) continue;
        if (ext != ".csv" && ext != ".json" && ext != ".sgn") continue;
        out[fs::relative(e.path(), root).string()] = io::read_file(e.path());
    }
    return out;
}

Outcome reproducibility(const Context& ctx) {
    const fs::path a = ctx.work_dir / "reproduce_a", b = ctx.work_dir / "reproduce_b";
    fs::remove_all(a);
    fs::remove_all(b);
    for (const auto& dir : {a, b}) {
        std::ostringstream out, err;
        const int code = cli::run({"reproduce", "--out-dir", dir.string(), "--steps", "4", "--sims", "3", "--horizon",
                                   "120", "--n", "2400", "--train-count", "2000", "--backtest-count", "400",
                                   "--residual-channels", "4", "--skip-channels", "8"},
                                  out, err);
        if (code != 0) return {false, "reproduce exited " + std::to_string(code) + ": " + err.str()};
    }
    const auto fa = data_artifacts(a), fb = data_artifacts(b);
    std::set<std::string> dirs;
    int differing = 0;
    for (const auto& [name, text] : fa) {
        dirs.insert(fs::path(name).begin()->string());
        auto it = fb.find(name);
        if (it == fb.end() || it->second != text) {
            ++differing;
            note("differs: " + name);
        }
    }
    const bool pass = !fa.empty() && fa.size() == fb.size() && differing == 0;
    return {pass, std::to_string(fa.size()) + " CSV/JSON/model artifacts across " + std::to_string(dirs.size()) +
                      " experiments, " + std::to_string(differing) + " differing"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance suite"};
    std::vector<int> only;
    std::string work_dir;
    app.add_option("--criterion", only, "Criterion number (repeatable; default all)");
    app.add_option("--work-dir", work_dir, "Directory for intermediate artifacts");
    CLI11_PARSE(app, argc, argv);

    Context ctx;
    const bool temporary = work_dir.empty();
    ctx.work_dir = temporary ? fs::temp_directory_path() / ("sgn_acceptance_" + std::to_string(::getpid())) : fs::path(work_dir);
    fs::create_directories(ctx.work_dir);

    const std::vector<Criterion> criteria{
        {1, "gradient correctness", 120, gradient_correctness},
        {2, "causality and receptive field", 60, causality_and_field},
        {3, "codec", 30, codec},
        {4, "estimator oracle", 300, estimator_oracle},
        {5, "logistic map free run", 1800, logistic_map},
        {6, "harmonic oscillator", 1800, harmonic},
        {7, "AR(1) Monte Carlo", 2700, ar1_experiment},
        {8, "OU Monte Carlo", 2700, ou_experiment},
        {9, "ARCH(1) Monte Carlo", 2700, arch_experiment},
        {10, "distribution recovery", 2700, distribution_recovery},
        {11, "hyperparameter search", 3600, search},
        {12, "reproducibility", 600, reproducibility},
    };

    int failures = 0;
    std::vector<std::string> lines;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        std::cout << "criterion " << c.id << " (" << c.name << ") running" << std::endl;
        const double start = cpu_seconds();
        Outcome o;
        try {
            o = c.run(ctx);
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = cpu_seconds() - start;
        if (secs > c.budget_seconds) {
            o.pass = false;
            o.detail += "; over the CPU budget";
        }
        std::ostringstream line;
        line << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.name << "): " << o.detail << " ["
             << fmt(secs, 3) << " s CPU, budget " << c.budget_seconds << " s]";
        std::cout << line.str() << std::endl;
        lines.push_back(line.str());
        failures += !o.pass;
    }
    std::cout << "\nsummary\n";
    for (const auto& l : lines) std::cout << l << "\n";
    if (temporary) fs::remove_all(ctx.work_dir);
    return failures == 0 ? 0 : 1;
}
