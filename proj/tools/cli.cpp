#include "cli.hpp"

#include <fnmatch.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <map>
#include <sstream>

#include "sgn/error.hpp"
#include "sgn/inference.hpp"
#include "sgn/io.hpp"
#include "sgn/processes.hpp"
#include "sgn/sampler.hpp"
#include "sgn/training.hpp"

namespace sgn::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

struct Context {
    std::ostream& out;
    std::ostream& err;
    std::vector<std::string> argv;
};

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Run record next to every artifact. Timestamps live here and nowhere
/// else, so data artifacts stay byte-reproducible.
void write_manifest(const fs::path& path, const Context& ctx, const std::string& command, Json seeds, Json inputs,
                    Json outputs, Json params) {
    Json m{{"command", command},
           {"argv", ctx.argv},
           {"timestamp", utc_timestamp()},
           {"seeds", std::move(seeds)},
           {"inputs", std::move(inputs)},
           {"outputs", std::move(outputs)},
           {"parameters", std::move(params)}};
    io::write_atomic(path, m.dump(2) + "\n");
}

fs::path manifest_for(const fs::path& artifact) {
    fs::path p = artifact;
    p += ".manifest.json";
    return p;
}

std::pair<std::string, double> parse_assignment(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("expected key=value, got '" + text + "'");
    const std::string value = text.substr(eq + 1);
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return {text.substr(0, eq), v};
    } catch (const std::exception&) {
        throw ValidationError("cannot parse a number from '" + text + "'");
    }
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw ValidationError("cannot parse integer list '" + text + "'");
        }
    }
    return out;
}

Scheme parse_scheme(const std::string& s) {
    if (s == "linear") return Scheme::Linear;
    if (s == "mulaw") return Scheme::MuLaw;
    throw ValidationError("scheme must be 'linear' or 'mulaw'");
}

/// Expands '*' and '?' in the file-name part of each pattern; sorted.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& patterns) {
    std::vector<fs::path> out;
    for (const auto& pattern : patterns) {
        const fs::path p(pattern);
        const std::string name = p.filename().string();
        if (name.find_first_of("*?[") == std::string::npos) {
            out.push_back(p);
            continue;
        }
        const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
        std::vector<fs::path> matches;
        std::error_code ec;
        for (const auto& entry : fs::directory_iterator(dir, ec)) {
            if (entry.is_regular_file() && fnmatch(name.c_str(), entry.path().filename().c_str(), 0) == 0)
                matches.push_back(entry.path());
        }
        if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
        std::sort(matches.begin(), matches.end());
        if (matches.empty()) throw IoError("no files match '" + pattern + "'");
        out.insert(out.end(), matches.begin(), matches.end());
    }
    return out;
}

// ---- shared flag groups ----------------------------------------------------

struct NetFlags {
    int blocks = 0;
    int max_dilation = 0;
    std::string dilations;
    int filter_width = 2;
    int residual_channels = 32;
    int skip_channels = 256;
    int classes = 256;

    void add(CLI::App* app, bool with_layout = true) {
        if (with_layout) {
            app->add_option("--blocks", blocks, "Repetitions of the dilation cycle");
            app->add_option("--max-dilation", max_dilation, "Largest dilation in each cycle (power of two)");
            app->add_option("--dilations", dilations, "Explicit comma-separated dilation list");
        }
        app->add_option("--filter-width", filter_width, "Convolution filter width")->capture_default_str();
        app->add_option("--residual-channels", residual_channels)->capture_default_str();
        app->add_option("--skip-channels", skip_channels)->capture_default_str();
        app->add_option("--classes", classes, "Quantization classes K")->capture_default_str();
    }

    NetConfig build(bool need_layout = true) const {
        NetConfig c;
        c.filter_width = filter_width;
        c.residual_channels = residual_channels;
        c.skip_channels = skip_channels;
        c.num_classes = classes;
        if (!dilations.empty()) {
            c.dilations = parse_int_list(dilations);
        } else if (blocks > 0 && max_dilation > 0) {
            c.dilations = make_dilations(blocks, max_dilation);
        } else if (need_layout) {
            throw ValidationError("give --blocks and --max-dilation, or --dilations");
        }
        c.validate();
        return c;
    }
};

struct TrainFlags {
    TrainConfig cfg;
    std::string scheme = "linear";

    void add(CLI::App* app) {
        app->add_option("--steps", cfg.steps)->capture_default_str();
        app->add_option("--batch-size", cfg.batch_size)->capture_default_str();
        app->add_option("--crop-length", cfg.crop_length, "0 = receptive field + 256")->capture_default_str();
        app->add_option("--lr", cfg.learning_rate)->capture_default_str();
        app->add_option("--seed", cfg.seed)->capture_default_str();
        app->add_option("--train-count", cfg.train_count)->capture_default_str();
        app->add_option("--backtest-count", cfg.backtest_count)->capture_default_str();
        app->add_option("--scheme", scheme, "linear or mulaw")->capture_default_str();
        app->add_option("--mu", cfg.mu, "mu-law strength")->capture_default_str();
        app->add_option("--margin", cfg.margin_fraction, "Quantizer range margin fraction")->capture_default_str();
    }

    TrainConfig build() const {
        TrainConfig c = cfg;
        c.scheme = parse_scheme(scheme);
        return c;
    }
};

// ---- gen ------------------------------------------------------------------

struct GenFlags {
    std::string process;
    std::vector<std::string> sets;
    std::size_t n = 12000;
    double dt = 0.0;
    std::uint64_t seed = 42;
    std::uint64_t stream = 0;
    std::string out = "data.csv";
};

int cmd_gen(const GenFlags& f, Context& ctx) {
    ProcessSpec spec = default_process(f.process);
    for (const auto& s : f.sets) {
        const auto [k, v] = parse_assignment(s);
        set_parameter(spec, k, v);
    }
    validate(spec);
    const double dt = f.dt > 0.0 ? f.dt : default_dt(spec);
    RngStream rng(f.seed, f.stream);
    const SeriesF series = generate(spec, f.n, dt, rng);
    io::write_atomic(f.out, io::series_csv(series));
    Json params{{"process", process_name(spec)}, {"n", f.n}, {"dt", series.dt}, {"values", parameters(spec)}};
    write_manifest(manifest_for(f.out), ctx, "gen", Json{{"seed", f.seed}, {"stream", f.stream}}, Json::array(),
                   Json::array({f.out}), params);
    ctx.out << "wrote " << f.n << " samples of " << process_name(spec) << " to " << f.out << "\n";
    return 0;
}

// ---- train ----------------------------------------------------------------

struct TrainCmdFlags {
    std::string data;
    std::string out = "model.sgn";
    std::string loss_out;
    NetFlags net;
    TrainFlags train;
    bool quiet = false;
};

int cmd_train(const TrainCmdFlags& f, Context& ctx) {
    const NetConfig net = f.net.build();
    const TrainConfig cfg = f.train.build();
    const SeriesF series = io::read_series_csv(f.data);
    const int log_every = std::max(1, cfg.steps / 20);
    const TrainResult res = train(series, net, cfg, [&](int step, double loss) {
        if (!f.quiet && (step % log_every == 0 || step == 1)) ctx.err << "step " << step << " loss " << loss << "\n";
    });

    const ClassSeries encoded = encode(res.quantizer, std::span<const double>(series.values).first(cfg.train_count));
    const int rf = receptive_field(net);
    double tail_loss = 0.0;
    const std::size_t tail = std::min<std::size_t>(100, res.report.loss_history.size());
    for (std::size_t i = res.report.loss_history.size() - tail; i < res.report.loss_history.size(); ++i)
        tail_loss += res.report.loss_history[i].second;
    tail_loss /= static_cast<double>(tail);

    io::ModelFile model;
    model.config = net;
    model.quantizer = res.quantizer;
    model.params = res.params;
    model.training_meta = Json{{"train_config", io::to_json(cfg)},
                               {"dt", series.dt},
                               {"backtest_loss", res.report.backtest_loss},
                               {"backtest_accuracy", res.report.backtest_accuracy},
                               {"final_train_loss", tail_loss},
                               {"context_tail", tail_context(encoded.classes, rf)}};
    io::save_model(f.out, model);
    const std::string loss_path = f.loss_out.empty() ? f.out + ".loss.csv" : f.loss_out;
    io::write_atomic(loss_path, io::loss_csv(res.report.loss_history));
    write_manifest(manifest_for(f.out), ctx, "train", Json{{"seed", cfg.seed}}, Json::array({f.data}),
                   Json::array({f.out, loss_path}),
                   Json{{"net_config", io::to_json(net)},
                        {"train_config", io::to_json(cfg)},
                        {"wall_time_seconds", res.report.wall_time_seconds}});
    ctx.out << "receptive field " << rf << ", " << model.params.parameter_count() << " parameters\n"
            << "backtest loss " << res.report.backtest_loss << ", accuracy " << res.report.backtest_accuracy << "\n";
    return 0;
}

// ---- sample ---------------------------------------------------------------

struct SampleFlags {
    std::string model;
    std::string mode = "stochastic";
    int sims = 0;
    int n = 2000;
    std::uint64_t seed = 7;
    std::string context = "tail";
    std::string out_dir = "sims";
};

int cmd_sample(const SampleFlags& f, Context& ctx) {
    io::ModelFile model = io::load_model(f.model);
    GenRequest req;
    if (f.mode == "stochastic") req.mode = SampleMode::Stochastic;
    else if (f.mode == "deterministic") req.mode = SampleMode::Deterministic;
    else throw ValidationError("mode must be 'stochastic' or 'deterministic'");
    req.sims = f.sims > 0 ? f.sims : (req.mode == SampleMode::Stochastic ? 100 : 1);
    req.horizon = f.n;
    req.rng = RngStream(f.seed, 0);
    const int rf = receptive_field(model.config);
    const auto& meta = model.training_meta;
    req.dt = meta.value("dt", 1.0);
    double t0 = 0.0;
    if (f.context == "tail") {
        if (!meta.contains("context_tail")) throw ValidationError("model has no stored training context; use --context zero");
        req.context = meta.at("context_tail").get<std::vector<int>>();
        t0 = static_cast<double>(meta.at("train_config").value("train_count", 0)) * req.dt;
    } else if (f.context == "zero") {
        req.context = zero_context(model.quantizer, rf);
    } else {
        throw ValidationError("context must be 'tail' or 'zero'");
    }
    const Generated gen = generate(model.params, model.config, model.quantizer, req);
    for (const auto& w : gen.warnings) ctx.err << "warning: " << w << "\n";

    Json outputs = Json::array();
    for (int s = 0; s < req.sims; ++s) {
        char name[32];
        std::snprintf(name, sizeof name, "sim_%04d.csv", s);
        const fs::path path = fs::path(f.out_dir) / name;
        io::write_atomic(path, io::class_series_csv(gen.classes[s], gen.series[s].values, req.dt, t0));
        outputs.push_back(path.string());
    }
    write_manifest(fs::path(f.out_dir) / "manifest.json", ctx, "sample", Json{{"seed", f.seed}},
                   Json::array({f.model}), outputs,
                   Json{{"mode", f.mode}, {"sims", req.sims}, {"n", f.n}, {"context", f.context}});
    ctx.out << "wrote " << req.sims << " simulation(s) of " << f.n << " samples to " << f.out_dir << "\n";
    return 0;
}

// ---- estimate -------------------------------------------------------------

struct EstimateFlags {
    std::string process;
    std::vector<std::string> truths;
    std::vector<std::string> data;
    double dt = 0.0;
    std::string out = "estimate.json";
    std::string svg;
};

int cmd_estimate(const EstimateFlags& f, Context& ctx) {
    const FitKind kind = parse_fit_kind(f.process);
    std::map<std::string, double> truth;
    for (const auto& t : f.truths) truth.insert(parse_assignment(t));
    if (f.data.empty()) throw ValidationError("no input series given (--data)");
    const auto files = expand_inputs(f.data);
    std::vector<FitResult> fits;
    Json per_sim = Json::array();
    for (const auto& file : files) {
        const SeriesF s = io::read_series_csv(file);
        const double dt = f.dt > 0.0 ? f.dt : s.dt;
        fits.push_back(fit(kind, s.values, dt));
        Json j = io::to_json(fits.back());
        j["file"] = file.filename().string();
        per_sim.push_back(std::move(j));
    }
    const EstimateReport rep = monte_carlo_report(fits, truth);
    Json doc = io::to_json(rep);
    doc["fits"] = std::move(per_sim);
    io::write_atomic(f.out, doc.dump(2) + "\n");
    const std::string svg = f.svg.empty() ? (fs::path(f.out).replace_extension(".svg")).string() : f.svg;
    io::write_atomic(svg, io::render_estimate_svg(rep));
    Json inputs = Json::array();
    for (const auto& file : files) inputs.push_back(file.string());
    write_manifest(manifest_for(f.out), ctx, "estimate", Json::object(), inputs, Json::array({f.out, svg}),
                   Json{{"process", f.process}, {"true", truth}});
    ctx.out << fit_kind_name(kind) << ": " << rep.num_converged << "/" << rep.num_sims << " fits converged\n";
    for (const auto& [name, s] : rep.params) {
        ctx.out << "  " << name << " median " << s.median;
        if (s.has_true_value) ctx.out << " (true " << s.true_value << ")";
        ctx.out << "\n";
    }
    return 0;
}

// ---- backtest -------------------------------------------------------------

struct BacktestFlags {
    std::string model;
    std::string data;
    long split = -1;
    int window = 300;
    std::string out_dir = "backtest";
};

int cmd_backtest(const BacktestFlags& f, Context& ctx) {
    const io::ModelFile model = io::load_model(f.model);
    SeriesF series = io::read_series_csv(f.data);
    std::size_t split = 0;
    if (f.split >= 0) {
        split = static_cast<std::size_t>(f.split);
    } else {
        split = model.training_meta.contains("train_config")
                    ? model.training_meta.at("train_config").value("train_count", std::size_t{0})
                    : series.size() * 5 / 6;
    }
    const auto bt = backtest(model.params, model.config, model.quantizer, series, split);
    const fs::path dir(f.out_dir);
    io::write_atomic(dir / "backtest.csv", io::backtest_csv(bt));
    io::write_atomic(dir / "freerun.csv",
                     io::class_series_csv(bt.free_run_classes, bt.free_run_values, series.dt,
                                          static_cast<double>(split) * series.dt));

    io::Plot plot;
    plot.title = "backtest";
    const std::size_t start = split > static_cast<std::size_t>(f.window) ? split - static_cast<std::size_t>(f.window) : 0;
    io::PlotLine train_line{"training data", {}, {}, "#000000", true};
    for (std::size_t i = start; i <= split && i < series.size(); ++i) {
        train_line.x.push_back(static_cast<double>(i) * series.dt);
        train_line.y.push_back(series.values[i]);
    }
    io::PlotLine held{"held-out data", {}, {}, "#2ca02c", true};
    io::PlotLine free{"free run", {}, {}, "#d62728", false};
    io::PlotLine teacher{"one-step prediction", {}, {}, "#ff7f0e", false};
    for (std::size_t i = 0; i < bt.rows.size(); ++i) {
        const double t = static_cast<double>(bt.rows[i].t) * series.dt;
        held.x.push_back(t);
        held.y.push_back(bt.rows[i].true_value);
        teacher.x.push_back(t);
        teacher.y.push_back(bt.rows[i].predicted_value);
        free.x.push_back(t);
        free.y.push_back(bt.free_run_values[i]);
    }
    plot.lines = {train_line, held, teacher, free};
    io::write_atomic(dir / "backtest.svg", io::render_svg(plot));
    write_manifest(dir / "manifest.json", ctx, "backtest", Json::object(), Json::array({f.model, f.data}),
                   Json::array({(dir / "backtest.csv").string(), (dir / "freerun.csv").string(),
                                (dir / "backtest.svg").string()}),
                   Json{{"split", split}});
    ctx.out << bt.rows.size() << " prediction rows, one-step accuracy " << bt.accuracy << "\n";
    return 0;
}

// ---- gradcheck ------------------------------------------------------------

struct GradcheckFlags {
    std::uint64_t seed = 1;
    int configs = 5;
};

int cmd_gradcheck(const GradcheckFlags& f, Context& ctx) {
    double worst = 0.0;
    for (int i = 0; i < f.configs; ++i) {
        RngStream pick(f.seed, 100 + static_cast<std::uint64_t>(i));
        NetConfig c;
        c.dilations = make_dilations(1 + static_cast<int>(pick.below(2)), 1 << pick.below(2));
        c.residual_channels = 2 + static_cast<int>(pick.below(7));
        c.skip_channels = 2 + static_cast<int>(pick.below(7));
        c.num_classes = 2 + static_cast<int>(pick.below(15));
        const GradCheckResult r = gradient_check(c, f.seed + static_cast<std::uint64_t>(i));
        ctx.out << "config " << i << ": dilations [";
        for (std::size_t k = 0; k < c.dilations.size(); ++k) ctx.out << (k ? "," : "") << c.dilations[k];
        ctx.out << "] R=" << c.residual_channels << " S=" << c.skip_channels << " K=" << c.num_classes << "  "
                << r.coordinates << " coordinates, max relative error " << r.max_relative_error << " ("
                << r.worst_tensor << ")\n";
        worst = std::max(worst, r.max_relative_error);
    }
    ctx.out << "max relative error " << worst << "\n";
    return worst < 1e-4 ? 0 : 3;
}

// ---- search ---------------------------------------------------------------

struct SearchFlags {
    std::string data;
    std::string out;
    NetFlags net;
    TrainFlags train;
    SearchConfig search;
};

int cmd_search(const SearchFlags& f, Context& ctx) {
    const NetConfig base = f.net.build(false);
    const TrainConfig cfg = f.train.build();
    const SeriesF series = io::read_series_csv(f.data);
    const SearchResult r = hyper_search(series, f.search, base, cfg);
    Json trials = Json::array();
    for (const auto& t : r.trials) trials.push_back(Json{{"blocks", t.blocks}, {"max_dilation", t.max_dilation}, {"loss", t.loss}});
    Json doc{{"blocks", r.blocks},
             {"max_dilation", r.max_dilation},
             {"loss", r.loss},
             {"net_config", io::to_json(r.config)},
             {"trials", trials}};
    for (const auto& t : r.trials)
        ctx.err << "trial blocks=" << t.blocks << " max_dilation=" << t.max_dilation << " loss=" << t.loss << "\n";
    ctx.out << doc.dump(2) << "\n";
    if (!f.out.empty()) {
        io::write_atomic(f.out, doc.dump(2) + "\n");
        write_manifest(manifest_for(f.out), ctx, "search", Json{{"seed", cfg.seed}}, Json::array({f.data}),
                       Json::array({f.out}), Json{{"train_config", io::to_json(cfg)}});
    }
    return 0;
}

// ---- plot -----------------------------------------------------------------

struct PlotFlags {
    std::vector<std::string> inputs;
    std::string out = "plot.svg";
    std::string title;
};

int cmd_plot(const PlotFlags& f, Context& ctx) {
    static const char* palette[] = {"#000000", "#d62728", "#2ca02c", "#1f77b4", "#ff7f0e", "#9467bd"};
    io::Plot plot;
    plot.title = f.title;
    const auto files = expand_inputs(f.inputs);
    for (std::size_t i = 0; i < files.size(); ++i) {
        const SeriesF s = io::read_series_csv(files[i]);
        io::PlotLine line{files[i].filename().string(), {}, {}, palette[i % 6], false};
        for (std::size_t k = 0; k < s.size(); ++k) {
            line.x.push_back(static_cast<double>(k) * s.dt);
            line.y.push_back(s.values[k]);
        }
        plot.lines.push_back(std::move(line));
    }
    io::write_atomic(f.out, io::render_svg(plot));
    Json inputs = Json::array();
    for (const auto& p : files) inputs.push_back(p.string());
    write_manifest(manifest_for(f.out), ctx, "plot", Json::object(), inputs, Json::array({f.out}), Json::object());
    ctx.out << "wrote " << f.out << "\n";
    return 0;
}

// ---- reproduce ------------------------------------------------------------

struct Experiment {
    std::string id;
    std::string process;
    int blocks;
    int max_dilation;
    bool stochastic;
};

const std::vector<Experiment>& experiments() {
    static const std::vector<Experiment> all = {
        {"harmonic", "harmonic", 2, 8, false},
        {"harmonic_wide", "harmonic", 3, 256, false},
        {"damped", "damped", 9, 4, false},
        {"lorenz", "lorenz", 9, 4, false},
        {"logistic", "logistic", 5, 2, false},
        {"jumpdiffusion", "jumpdiffusion", 5, 4, true},
        {"ou", "ou", 5, 4, true},
        {"ar1", "ar1", 5, 4, true},
        {"arma11", "arma11", 5, 4, true},
        {"arch1", "arch1", 5, 4, true},
    };
    return all;
}

struct ReproduceFlags {
    std::string out_dir = "reproduce";
    std::string only;
    int steps = 20000;
    int sims = 100;
    int horizon = 2000;
    std::size_t n = 12000;
    std::size_t train_count = 10000;
    std::size_t backtest_count = 2000;
    std::uint64_t seed = 42;
    int batch_size = 4;
    int residual_channels = 32;
    int skip_channels = 256;
};

int run_args(const std::vector<std::string>& args, Context& ctx) {
    const int code = run(args, ctx.out, ctx.err);
    if (code != 0) {
        std::string joined;
        for (const auto& a : args) joined += a + ' ';
        throw Error(static_cast<ExitCode>(code), "reproduce step failed: " + joined);
    }
    return code;
}

int cmd_reproduce(const ReproduceFlags& f, Context& ctx) {
    std::vector<std::string> wanted;
    if (!f.only.empty()) {
        std::stringstream ss(f.only);
        std::string item;
        while (std::getline(ss, item, ',')) wanted.push_back(item);
    }
    for (const auto& w : wanted) {
        const bool known = std::any_of(experiments().begin(), experiments().end(),
                                       [&](const Experiment& e) { return e.id == w || e.process == w; });
        if (!known) throw ValidationError("unknown experiment '" + w + "'");
    }
    const auto S = [](auto v) { return std::to_string(v); };
    for (const auto& e : experiments()) {
        if (!wanted.empty() &&
            std::find_if(wanted.begin(), wanted.end(), [&](const std::string& w) { return w == e.id || w == e.process; }) ==
                wanted.end())
            continue;
        const fs::path dir = fs::path(f.out_dir) / e.id;
        const std::string data = (dir / "data.csv").string();
        const std::string model = (dir / "model.sgn").string();
        ctx.out << "== " << e.id << "\n";
        run_args({"gen", "--process", e.process, "--n", S(f.n), "--seed", S(f.seed), "--out", data}, ctx);
        run_args({"train", "--data", data, "--blocks", S(e.blocks), "--max-dilation", S(e.max_dilation), "--steps",
                  S(f.steps), "--batch-size", S(f.batch_size), "--residual-channels", S(f.residual_channels),
                  "--skip-channels", S(f.skip_channels), "--train-count", S(f.train_count), "--backtest-count",
                  S(f.backtest_count), "--seed", S(f.seed), "--out", model, "--quiet"},
                 ctx);
        run_args({"backtest", "--model", model, "--data", data, "--split", S(f.train_count), "--out-dir",
                  (dir / "backtest").string()},
                 ctx);
        if (!e.stochastic) {
            run_args({"sample", "--model", model, "--mode", "deterministic", "--sims", "1", "--n", S(f.horizon),
                      "--out-dir", (dir / "deterministic").string()},
                     ctx);
            continue;
        }
        const std::string sims = (dir / "sims").string();
        run_args({"sample", "--model", model, "--mode", "stochastic", "--sims", S(f.sims), "--n", S(f.horizon),
                  "--seed", S(f.seed + 1), "--out-dir", sims},
                 ctx);
        if (e.process == "jumpdiffusion") {
            std::vector<std::string> args{"plot", "--out", (dir / "sims.svg").string(), "--title", e.id};
            for (int s = 0; s < std::min(f.sims, 10); ++s) {
                char name[32];
                std::snprintf(name, sizeof name, "sim_%04d.csv", s);
                args.push_back("--in");
                args.push_back((fs::path(sims) / name).string());
            }
            run_args(args, ctx);
            continue;
        }
        std::vector<std::string> args{"estimate", "--process", e.process, "--data", (fs::path(sims) / "sim_*.csv").string(),
                                      "--out", (dir / "estimate.json").string()};
        for (const auto& [k, v] : parameters(default_process(e.process))) {
            if (k == "x0") continue;
            args.push_back("--true");
            args.push_back(k + "=" + io::format_double(v));
        }
        run_args(args, ctx);
    }
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Context ctx{out, err, args};
    CLI::App app{"Generative dilated-convolution models for stochastic processes"};
    app.name("sgn");
    app.require_subcommand(1);

    GenFlags gen;
    auto* g = app.add_subcommand("gen", "Generate a process realization as CSV");
    g->add_option("--process", gen.process, "Process name")->required();
    g->add_option("--set", gen.sets, "Parameter override key=value (repeatable)");
    g->add_option("--n", gen.n, "Number of samples")->capture_default_str();
    g->add_option("--dt", gen.dt, "Sampling interval (default per process)");
    g->add_option("--seed", gen.seed)->capture_default_str();
    g->add_option("--stream", gen.stream)->capture_default_str();
    g->add_option("--out", gen.out)->capture_default_str();

    TrainCmdFlags tr;
    auto* t = app.add_subcommand("train", "Train a model on a CSV series");
    t->add_option("--data", tr.data)->required();
    t->add_option("--out", tr.out)->capture_default_str();
    t->add_option("--loss-out", tr.loss_out, "Loss history CSV (default <out>.loss.csv)");
    t->add_flag("--quiet", tr.quiet, "No progress output");
    tr.net.add(t);
    tr.train.add(t);

    SampleFlags sa;
    auto* s = app.add_subcommand("sample", "Generate series from a trained model");
    s->add_option("--model", sa.model)->required();
    s->add_option("--mode", sa.mode, "stochastic or deterministic")->capture_default_str();
    s->add_option("--sims", sa.sims, "Number of series (default 100 stochastic, 1 deterministic)");
    s->add_option("--n", sa.n, "Samples per series")->capture_default_str();
    s->add_option("--seed", sa.seed)->capture_default_str();
    s->add_option("--context", sa.context, "tail (end of training region) or zero")->capture_default_str();
    s->add_option("--out-dir", sa.out_dir)->capture_default_str();

    EstimateFlags es;
    auto* e = app.add_subcommand("estimate", "Fit structural parameters and summarise across series");
    e->add_option("--process", es.process, "ar1, arma11, arch1 or ou")->required();
    e->add_option("--true", es.truths, "True parameter key=value (repeatable)");
    e->add_option("--data", es.data, "Input CSV files or patterns (repeatable)");
    e->add_option("--dt", es.dt, "Sampling interval (default from the CSV)");
    e->add_option("--out", es.out)->capture_default_str();
    e->add_option("--svg", es.svg, "Strip plot (default <out>.svg)");

    BacktestFlags bt;
    auto* b = app.add_subcommand("backtest", "Teacher-forced and free-run predictions on held-out data");
    b->add_option("--model", bt.model)->required();
    b->add_option("--data", bt.data)->required();
    b->add_option("--split", bt.split, "First held-out index (default: training count)");
    b->add_option("--window", bt.window, "Training samples shown in the plot")->capture_default_str();
    b->add_option("--out-dir", bt.out_dir)->capture_default_str();

    GradcheckFlags gc;
    auto* c = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
    c->add_option("--seed", gc.seed)->capture_default_str();
    c->add_option("--configs", gc.configs)->capture_default_str();

    SearchFlags se;
    auto* h = app.add_subcommand("search", "Forward hyperparameter search");
    h->add_option("--data", se.data)->required();
    h->add_option("--out", se.out, "Result JSON");
    h->add_option("--max-blocks", se.search.max_blocks)->capture_default_str();
    h->add_option("--cap", se.search.max_dilation_cap, "Largest dilation tried")->capture_default_str();
    h->add_option("--threshold", se.search.improvement_threshold)->capture_default_str();
    h->add_option("--budget", se.search.budget_steps_per_trial, "Training steps per trial")->capture_default_str();
    se.net.add(h, false);
    se.train.add(h);

    PlotFlags pl;
    auto* p = app.add_subcommand("plot", "Render t,value CSV files as an SVG line plot");
    p->add_option("--in", pl.inputs)->required();
    p->add_option("--out", pl.out)->capture_default_str();
    p->add_option("--title", pl.title);

    ReproduceFlags rp;
    auto* r = app.add_subcommand("reproduce", "Run gen, train, sample and estimate for each experiment");
    r->add_option("--out-dir", rp.out_dir)->capture_default_str();
    r->add_option("--only", rp.only, "Comma-separated experiment ids or process names");
    r->add_option("--steps", rp.steps)->capture_default_str();
    r->add_option("--sims", rp.sims)->capture_default_str();
    r->add_option("--horizon", rp.horizon)->capture_default_str();
    r->add_option("--n", rp.n)->capture_default_str();
    r->add_option("--train-count", rp.train_count)->capture_default_str();
    r->add_option("--backtest-count", rp.backtest_count)->capture_default_str();
    r->add_option("--seed", rp.seed)->capture_default_str();
    r->add_option("--batch-size", rp.batch_size)->capture_default_str();
    r->add_option("--residual-channels", rp.residual_channels)->capture_default_str();
    r->add_option("--skip-channels", rp.skip_channels)->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& ex) {
        if (ex.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << ex.what() << "\n";
        return static_cast<int>(ExitCode::Usage);
    }

    try {
        if (*g) return cmd_gen(gen, ctx);
        if (*t) return cmd_train(tr, ctx);
        if (*s) return cmd_sample(sa, ctx);
        if (*e) return cmd_estimate(es, ctx);
        if (*b) return cmd_backtest(bt, ctx);
        if (*c) return cmd_gradcheck(gc, ctx);
        if (*h) return cmd_search(se, ctx);
        if (*p) return cmd_plot(pl, ctx);
        if (*r) return cmd_reproduce(rp, ctx);
    } catch (const Error& ex) {
        err << "error: " << ex.what() << "\n";
        return static_cast<int>(ex.code());
    } catch (const std::exception& ex) {
        err << "internal error: " << ex.what() << "\n";
        return static_cast<int>(ExitCode::Internal);
    }
    return static_cast<int>(ExitCode::Usage);
}

}  // namespace sgn::cli
