#pragma once

#include "nowcast/config.hpp"
#include "nowcast/dfm.hpp"
#include "nowcast/serialization.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace nowcast {

inline constexpr const char *lstm_model_id = "lstm";
inline constexpr const char *dfm_model_id = "dfm";

/// Validation report for a vintage directory. Never throws on bad rows; they
/// are listed under `errors`.
Json cmd_ingest(const std::filesystem::path &dir, const std::string &target_id);

/// Writes `vintages/` (snapshots plus series.csv), `truth.csv` and
/// `simulation.json` under out_dir.
Json cmd_simulate(const KeyValueDocument &doc, const std::filesystem::path &out_dir);

struct TrainedModels {
	LstmEnsemble lstm;
	StateSpaceModel dfm;
	Date training_asof;
	std::size_t em_iterations = 0;
	bool em_converged = false;
};

/// Latest vintage dated at least window_days before the anchor of the quarter
/// after train_last; the earliest vintage when none is that old.
std::size_t training_vintage(const VintageStore &store, const RunConfig &config);

TrainedModels train_models(const VintageStore &store, const RunConfig &config);

/// Trains both models and writes lstm.json and dfm.json to the output directory.
Json cmd_train(const RunConfig &config);

/// Model files in the output directory written under the same configuration
/// hash are reused; otherwise both models are trained and written first.
/// `models` selects from {"dfm", "lstm"}; empty means both.
Json cmd_backtest(const RunConfig &config, const std::vector<Quarter> &targets,
                  const std::vector<std::string> &models = {});

Json cmd_news(const RunConfig &config, Date old_asof, Date new_asof, Quarter target);

/// Aligned text table: MAE and RMSE per model per period, stars on the challenger.
std::string summary_table(const std::vector<BacktestResult> &results, const std::vector<double> &benchmark_mae);

} // namespace nowcast
