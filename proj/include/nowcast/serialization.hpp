#pragma once

#include "nowcast/dfm.hpp"
#include "nowcast/evaluation.hpp"
#include "nowcast/lstm.hpp"
#include "nowcast/news.hpp"
#include "nowcast/vintage.hpp"

#include <json.hpp>

#include <filesystem>

namespace nowcast {

using Json = nlohmann::ordered_json;

// Model documents hold every parameter as decimal numbers that parse back to
// the identical doubles, so a loaded model predicts bit-identically.

Json to_json(const LstmEnsemble &ensemble);
LstmEnsemble lstm_ensemble_from_json(const Json &doc);

Json to_json(const StateSpaceModel &model);
StateSpaceModel state_space_model_from_json(const Json &doc);

Json to_json(const PredictionCurve &curve);
Json to_json(const BacktestResult &result);
Json to_json(const NewsDecomposition &news);
Json to_json(const IngestReport &report);

/// Pretty-printed with a trailing newline.
void save_json(const std::filesystem::path &path, const Json &doc);
Json load_json(const std::filesystem::path &path);

/// Tidy curve rows: model,target_period,asof_date,day_difference,prediction,actual
void write_curves_csv(const std::filesystem::path &path, const std::vector<PredictionCurve> &curves);

} // namespace nowcast
