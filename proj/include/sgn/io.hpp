#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgn/codec.hpp"
#include "sgn/inference.hpp"
#include "sgn/processes.hpp"
#include "sgn/sampler.hpp"
#include "sgn/training.hpp"
#include "sgn/wavenet.hpp"

namespace sgn::io {

using Json = nlohmann::json;

/// Writes to a sibling temporary file, then renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

/// %.17g: enough digits for an exact decimal round trip.
std::string format_double(double v);

// ---- CSV -----------------------------------------------------------------

/// Header `t,value`, t = i * dt.
std::string series_csv(const SeriesF& series);
/// Header `t,class,value`; t counts from t0 in steps of dt.
std::string class_series_csv(std::span<const int> classes, std::span<const double> values, double dt, double t0 = 0.0);
std::string loss_csv(const std::vector<std::pair<int, double>>& history);
std::string backtest_csv(const BacktestResult& result);

/// Reads any CSV whose first column is t and last column is the value
/// (`t,value` or `t,class,value`). dt is recovered from the first two rows
/// (1 for a single row).
SeriesF read_series_csv(const std::filesystem::path& path);

// ---- Model file -----------------------------------------------------------

constexpr int kModelFormatVersion = 1;

struct ModelFile {
    NetConfig config;
    Quantizer quantizer;
    NetParams params;
    Json training_meta = Json::object();
};

Json to_json(const NetConfig& config);
NetConfig net_config_from_json(const Json& j);
Json to_json(const Quantizer& q);
Quantizer quantizer_from_json(const Json& j);
Json to_json(const TrainConfig& cfg);

std::string serialize_model(const ModelFile& model);
/// Throws ValidationError for malformed documents or tensors whose shapes
/// disagree with the stored configuration.
ModelFile parse_model(const std::string& text);
void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

// ---- Reports --------------------------------------------------------------

Json to_json(const EstimateReport& report);
Json to_json(const FitResult& fit);

// ---- SVG ------------------------------------------------------------------

struct PlotLine {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#000000";
    bool dashed = false;
};

struct PlotRule {
    std::string label;
    double y = 0.0;
    std::string color = "#000000";
};

struct Plot {
    std::string title;
    std::vector<PlotLine> lines;
    std::vector<PlotRule> rules;  ///< horizontal reference lines
    int width = 800;
    int height = 400;
};

std::string render_svg(const Plot& plot);

/// One panel per parameter: estimates as points, median rule in red, true
/// value rule in blue.
std::string render_estimate_svg(const EstimateReport& report);

}  // namespace sgn::io
