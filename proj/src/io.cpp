#include "sgn/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "sgn/error.hpp"

namespace sgn::io {

namespace fs = std::filesystem;

void write_atomic(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
        os << contents;
        if (!os) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string series_csv(const SeriesF& series) {
    std::string out = "t,value\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out += format_double(static_cast<double>(i) * series.dt);
        out += ',';
        out += format_double(series.values[i]);
        out += '\n';
    }
    return out;
}

std::string class_series_csv(std::span<const int> classes, std::span<const double> values, double dt, double t0) {
    if (classes.size() != values.size()) throw ValidationError("class and value columns differ in length");
    std::string out = "t,class,value\n";
    for (std::size_t i = 0; i < classes.size(); ++i) {
        out += format_double(t0 + static_cast<double>(i) * dt);
        out += ',';
        out += std::to_string(classes[i]);
        out += ',';
        out += format_double(values[i]);
        out += '\n';
    }
    return out;
}

std::string loss_csv(const std::vector<std::pair<int, double>>& history) {
    std::string out = "step,loss\n";
    for (const auto& [step, loss] : history) out += std::to_string(step) + ',' + format_double(loss) + '\n';
    return out;
}

std::string backtest_csv(const BacktestResult& result) {
    std::string out = "t,true_class,predicted_class,predicted_value,true_value\n";
    for (const auto& r : result.rows) {
        out += std::to_string(r.t) + ',' + std::to_string(r.true_class) + ',' + std::to_string(r.predicted_class) +
               ',' + format_double(r.predicted_value) + ',' + format_double(r.true_value) + '\n';
    }
    return out;
}

namespace {

double parse_double(const std::string& field, const fs::path& path, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(path.string() + ":" + std::to_string(line) + ": cannot parse '" + field + "'");
    }
}

}  // namespace

SeriesF read_series_csv(const fs::path& path) {
    std::istringstream is(read_file(path));
    std::string line;
    if (!std::getline(is, line)) throw ValidationError(path.string() + ": empty file");
    if (line.rfind("t,", 0) != 0) throw ValidationError(path.string() + ": expected a header starting with 't,'");
    std::vector<double> ts, vs;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto first = line.find(',');
        const auto last = line.rfind(',');
        if (first == std::string::npos) throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected at least two columns");
        ts.push_back(parse_double(line.substr(0, first), path, lineno));
        vs.push_back(parse_double(line.substr(last + 1), path, lineno));
    }
    SeriesF s;
    s.values = std::move(vs);
    s.dt = ts.size() >= 2 ? ts[1] - ts[0] : 1.0;
    validate(s);
    return s;
}

// ---- JSON -----------------------------------------------------------------

Json to_json(const NetConfig& c) {
    return Json{{"dilations", c.dilations},
                {"filter_width", c.filter_width},
                {"residual_channels", c.residual_channels},
                {"skip_channels", c.skip_channels},
                {"num_classes", c.num_classes}};
}

NetConfig net_config_from_json(const Json& j) {
    NetConfig c;
    c.dilations = j.at("dilations").get<std::vector<int>>();
    c.filter_width = j.at("filter_width").get<int>();
    c.residual_channels = j.at("residual_channels").get<int>();
    c.skip_channels = j.at("skip_channels").get<int>();
    c.num_classes = j.at("num_classes").get<int>();
    c.validate();
    return c;
}

Json to_json(const Quantizer& q) {
    return Json{{"num_classes", q.num_classes},
                {"lo", q.lo},
                {"hi", q.hi},
                {"scheme", q.scheme == Scheme::Linear ? "linear" : "mulaw"},
                {"mu", q.mu}};
}

Quantizer quantizer_from_json(const Json& j) {
    Quantizer q;
    q.num_classes = j.at("num_classes").get<int>();
    q.lo = j.at("lo").get<double>();
    q.hi = j.at("hi").get<double>();
    const auto scheme = j.at("scheme").get<std::string>();
    if (scheme == "linear") q.scheme = Scheme::Linear;
    else if (scheme == "mulaw") q.scheme = Scheme::MuLaw;
    else throw ValidationError("unknown quantizer scheme '" + scheme + "'");
    q.mu = j.at("mu").get<double>();
    q.validate();
    return q;
}

Json to_json(const TrainConfig& c) {
    return Json{{"steps", c.steps},
                {"batch_size", c.batch_size},
                {"crop_length", c.crop_length},
                {"learning_rate", c.learning_rate},
                {"beta1", c.beta1},
                {"beta2", c.beta2},
                {"epsilon", c.epsilon},
                {"seed", c.seed},
                {"train_count", c.train_count},
                {"backtest_count", c.backtest_count},
                {"scheme", c.scheme == Scheme::Linear ? "linear" : "mulaw"},
                {"margin_fraction", c.margin_fraction},
                {"mu", c.mu}};
}

std::string serialize_model(const ModelFile& model) {
    Json tensors = Json::object();
    model.params.for_each([&](const std::string& name, const Matrix& m) {
        std::vector<double> data;
        data.reserve(static_cast<std::size_t>(m.size()));
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
        tensors[name] = Json{{"shape", {m.rows(), m.cols()}}, {"data", std::move(data)}};
    });
    Json doc{{"format_version", kModelFormatVersion},
             {"net_config", to_json(model.config)},
             {"quantizer", to_json(model.quantizer)},
             {"tensors", std::move(tensors)},
             {"training_meta", model.training_meta}};
    return doc.dump(1) + "\n";
}

ModelFile parse_model(const std::string& text) {
    try {
        const Json doc = Json::parse(text);
        if (doc.at("format_version").get<int>() != kModelFormatVersion)
            throw ValidationError("unsupported model format version");
        ModelFile model;
        model.config = net_config_from_json(doc.at("net_config"));
        model.quantizer = quantizer_from_json(doc.at("quantizer"));
        if (model.quantizer.num_classes != model.config.num_classes)
            throw ValidationError("quantizer and network disagree on the number of classes");
        model.params = zero_params(model.config);
        const Json& tensors = doc.at("tensors");
        std::size_t expected = 0;
        model.params.for_each([&](const std::string& name, Matrix& m) {
            ++expected;
            if (!tensors.contains(name)) throw ValidationError("model is missing tensor " + name);
            const Json& t = tensors.at(name);
            const auto shape = t.at("shape").get<std::vector<Eigen::Index>>();
            if (shape.size() != 2 || shape[0] != m.rows() || shape[1] != m.cols())
                throw ValidationError("tensor " + name + " has the wrong shape for this configuration");
            const auto& data = t.at("data");
            if (data.size() != static_cast<std::size_t>(m.size()))
                throw ValidationError("tensor " + name + " has the wrong number of values");
            std::size_t k = 0;
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = data[k++].get<double>();
        });
        if (tensors.size() != expected) throw ValidationError("model contains unexpected tensors");
        check_params(model.params, model.config);
        model.training_meta = doc.value("training_meta", Json::object());
        return model;
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const fs::path& path, const ModelFile& model) { write_atomic(path, serialize_model(model)); }

ModelFile load_model(const fs::path& path) { return parse_model(read_file(path)); }

namespace {

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string quantile_key(double p) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "q%02d", static_cast<int>(std::lround(p * 100)));
    return buf;
}

}  // namespace

Json to_json(const FitResult& fit) {
    Json est = Json::object();
    for (const auto& [k, v] : fit.estimates) est[k] = finite_or_null(v);
    return Json{{"process", fit_kind_name(fit.kind)},
                {"converged", fit.converged},
                {"objective", finite_or_null(fit.objective)},
                {"estimates", est}};
}

Json to_json(const EstimateReport& report) {
    Json params = Json::object();
    for (const auto& [name, s] : report.params) {
        Json p{{"median", s.median}, {"estimates", s.all_estimates}};
        p["true_value"] = s.has_true_value ? Json(s.true_value) : Json(nullptr);
        for (const auto& [q, v] : s.quantiles) p[quantile_key(q)] = v;
        params[name] = std::move(p);
    }
    return Json{{"process", fit_kind_name(report.kind)},
                {"num_sims", report.num_sims},
                {"num_converged", report.num_converged},
                {"converged", report.converged},
                {"params", std::move(params)}};
}

// ---- SVG ------------------------------------------------------------------

namespace {

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

struct Frame {
    double x0, x1, y0, y1;
    double left, top, w, h;
    double px(double x) const { return left + (x1 > x0 ? (x - x0) / (x1 - x0) : 0.5) * w; }
    double py(double y) const { return top + h - (y1 > y0 ? (y - y0) / (y1 - y0) : 0.5) * h; }
};

void axes(std::ostringstream& os, const Frame& f) {
    os << "<rect x=\"" << fmt(f.left) << "\" y=\"" << fmt(f.top) << "\" width=\"" << fmt(f.w) << "\" height=\""
       << fmt(f.h) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
        const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
        os << "<text x=\"" << fmt(f.left - 6) << "\" y=\"" << fmt(f.py(yv) + 4)
           << "\" font-size=\"11\" text-anchor=\"end\">" << label_num(yv) << "</text>\n";
        os << "<text x=\"" << fmt(f.px(xv)) << "\" y=\"" << fmt(f.top + f.h + 16)
           << "\" font-size=\"11\" text-anchor=\"middle\">" << label_num(xv) << "</text>\n";
    }
}

}  // namespace

std::string render_svg(const Plot& plot) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& l : plot.lines) {
        for (double v : l.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
        for (double v : l.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
    }
    for (const auto& r : plot.rules) y0 = std::min(y0, r.y), y1 = std::max(y1, r.y);
    if (!std::isfinite(x0)) x0 = 0, x1 = 1;
    if (!std::isfinite(y0)) y0 = 0, y1 = 1;
    if (y1 == y0) y0 -= 1, y1 += 1;
    const double pad = 0.05 * (y1 - y0);
    const Frame f{x0, x1, y0 - pad, y1 + pad, 70.0, 30.0, plot.width - 90.0, plot.height - 60.0};

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << plot.width << "\" height=\"" << plot.height
       << "\" viewBox=\"0 0 " << plot.width << ' ' << plot.height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << plot.width / 2 << "\" y=\"18\" font-size=\"14\" text-anchor=\"middle\">"
       << escape(plot.title) << "</text>\n";
    axes(os, f);
    for (const auto& r : plot.rules) {
        os << "<line x1=\"" << fmt(f.left) << "\" x2=\"" << fmt(f.left + f.w) << "\" y1=\"" << fmt(f.py(r.y))
           << "\" y2=\"" << fmt(f.py(r.y)) << "\" stroke=\"" << r.color << "\" stroke-width=\"1.5\"/>\n";
    }
    for (const auto& l : plot.lines) {
        os << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"1\"";
        if (l.dashed) os << " stroke-dasharray=\"5,3\"";
        os << " points=\"";
        const std::size_t n = std::min(l.x.size(), l.y.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (i) os << ' ';
            os << fmt(f.px(l.x[i])) << ',' << fmt(f.py(l.y[i]));
        }
        os << "\"/>\n";
    }
    // Legend.
    double ly = f.top + 14;
    auto legend = [&](const std::string& label, const std::string& color, bool dashed) {
        if (label.empty()) return;
        os << "<line x1=\"" << fmt(f.left + f.w - 150) << "\" x2=\"" << fmt(f.left + f.w - 125) << "\" y1=\""
           << fmt(ly - 4) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color << "\"";
        if (dashed) os << " stroke-dasharray=\"5,3\"";
        os << "/>\n<text x=\"" << fmt(f.left + f.w - 120) << "\" y=\"" << fmt(ly) << "\" font-size=\"11\">"
           << escape(label) << "</text>\n";
        ly += 14;
    };
    for (const auto& l : plot.lines) legend(l.label, l.color, l.dashed);
    for (const auto& r : plot.rules) legend(r.label, r.color, false);
    os << "</svg>\n";
    return os.str();
}

std::string render_estimate_svg(const EstimateReport& report) {
    const int panel_w = 260, height = 320;
    const int width = std::max(1, static_cast<int>(report.params.size())) * panel_w;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    int panel = 0;
    for (const auto& [name, s] : report.params) {
        double y0 = *std::min_element(s.all_estimates.begin(), s.all_estimates.end());
        double y1 = *std::max_element(s.all_estimates.begin(), s.all_estimates.end());
        if (s.has_true_value) y0 = std::min(y0, s.true_value), y1 = std::max(y1, s.true_value);
        if (y1 == y0) y0 -= 1, y1 += 1;
        const double pad = 0.05 * (y1 - y0);
        const Frame f{0.0, 1.0, y0 - pad, y1 + pad, panel * panel_w + 60.0, 30.0, panel_w - 80.0, height - 60.0};
        os << "<text x=\"" << fmt(f.left + f.w / 2) << "\" y=\"18\" font-size=\"14\" text-anchor=\"middle\">"
           << escape(fit_kind_name(report.kind) + ": " + name) << "</text>\n";
        os << "<rect x=\"" << fmt(f.left) << "\" y=\"" << fmt(f.top) << "\" width=\"" << fmt(f.w) << "\" height=\""
           << fmt(f.h) << "\" fill=\"none\" stroke=\"#444\"/>\n";
        for (int i = 0; i <= 4; ++i) {
            const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
            os << "<text x=\"" << fmt(f.left - 6) << "\" y=\"" << fmt(f.py(yv) + 4)
               << "\" font-size=\"11\" text-anchor=\"end\">" << label_num(yv) << "</text>\n";
        }
        const std::size_t n = s.all_estimates.size();
        for (std::size_t i = 0; i < n; ++i) {
            // Deterministic horizontal spread.
            const double x = 0.1 + 0.8 * (n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.5);
            os << "<circle cx=\"" << fmt(f.px(x)) << "\" cy=\"" << fmt(f.py(s.all_estimates[i]))
               << "\" r=\"2.5\" fill=\"#555\" fill-opacity=\"0.7\"/>\n";
        }
        auto rule = [&](double y, const char* color) {
            os << "<line x1=\"" << fmt(f.left) << "\" x2=\"" << fmt(f.left + f.w) << "\" y1=\"" << fmt(f.py(y))
               << "\" y2=\"" << fmt(f.py(y)) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        };
        rule(s.median, "#d62728");
        if (s.has_true_value) rule(s.true_value, "#1f77b4");
        os << "<text x=\"" << fmt(f.left) << "\" y=\"" << fmt(f.top + f.h + 18) << "\" font-size=\"11\">median "
           << label_num(s.median);
        if (s.has_true_value) os << ", true " << label_num(s.true_value);
        os << "</text>\n";
        ++panel;
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace sgn::io
