#include "nowcast/commands.hpp"

#include "nowcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace fs = std::filesystem;

namespace nowcast {

namespace {

Json stamp(const std::string &hash, std::uint64_t seed) { return Json{{"config_hash", hash}, {"seed", seed}}; }

Json stamped(Json body, const std::string &hash, std::uint64_t seed) {
	Json out = stamp(hash, seed);
	for (auto &[k, v] : body.items())
		out[k] = std::move(v);
	return out;
}

void ensure_dir(const fs::path &dir) {
	std::error_code ec;
	fs::create_directories(dir, ec);
	if (ec)
		throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
}

double actual_value(const VintageStore &store, Quarter target) {
	const auto &latest = store.snapshot(store.size() - 1);
	const auto row = latest.row_of(target.end_month());
	const std::size_t col = latest.target_index();
	if (!row || !latest.observed(*row, col))
		throw Error(ErrorCode::not_found, "no published value of " + latest.target_id() + " for " +
		                                      format_quarter(target) + " in the latest vintage");
	return latest.value(*row, col);
}

struct ModelFiles {
	fs::path lstm;
	fs::path dfm;
};

ModelFiles model_files(const RunConfig &config) {
	return {config.output_dir / "lstm.json", config.output_dir / "dfm.json"};
}

Json write_models(const RunConfig &config, const TrainedModels &m) {
	ensure_dir(config.output_dir);
	const auto files = model_files(config);
	const std::string hash = config.hash();
	const std::string asof = format_date(m.training_asof);
	Json lstm = stamped(to_json(m.lstm), hash, config.seed);
	lstm["training_asof"] = asof;
	Json dfm = stamped(to_json(m.dfm), hash, config.seed);
	dfm["training_asof"] = asof;
	dfm["em"] = Json{{"iterations", m.em_iterations}, {"converged", m.em_converged}};
	save_json(files.lstm, lstm);
	save_json(files.dfm, dfm);
	return Json{{"lstm", files.lstm.string()}, {"dfm", files.dfm.string()}};
}

std::optional<TrainedModels> load_models(const RunConfig &config) {
	const auto files = model_files(config);
	if (!fs::exists(files.lstm) || !fs::exists(files.dfm))
		return std::nullopt;
	const Json lstm = load_json(files.lstm);
	const Json dfm = load_json(files.dfm);
	const std::string hash = config.hash();
	if (lstm.value("config_hash", "") != hash || dfm.value("config_hash", "") != hash)
		return std::nullopt;
	TrainedModels m{lstm_ensemble_from_json(lstm), state_space_model_from_json(dfm),
	                parse_date(lstm.at("training_asof").get<std::string>())};
	return m;
}

TrainedModels obtain_models(const VintageStore &store, const RunConfig &config) {
	if (auto loaded = load_models(config))
		return *std::move(loaded);
	TrainedModels m = train_models(store, config);
	write_models(config, m);
	return m;
}

std::string fixed(double v, int digits) {
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.*f", digits, v);
	return buf;
}

std::string pad(const std::string &s, std::size_t width, bool left = false) {
	if (s.size() >= width)
		return s;
	const std::string fill(width - s.size(), ' ');
	return left ? s + fill : fill + s;
}

} // namespace

Json cmd_ingest(const fs::path &dir, const std::string &target_id) {
	const IngestReport report = ingest_vintage_dir(dir, target_id);
	Json out = to_json(report);
	out["directory"] = dir.string();
	out["target"] = target_id;
	return out;
}

Json cmd_simulate(const KeyValueDocument &doc, const fs::path &out_dir) {
	const DgpConfig dgp = dgp_from(doc);
	const Simulation sim = simulate(dgp);
	const KeyValueDocument effective = to_document(dgp);
	const std::string hash = fnv1a_hex(effective.canonical());
	const fs::path vintages = out_dir / "vintages";
	ensure_dir(vintages);
	for (const auto &[date, path] : list_vintage_files(vintages))
		fs::remove(path);
	write_vintage_dir(vintages, sim.store);
	write_snapshot_csv(out_dir / "truth.csv", sim.truth);

	Json settings = Json::object();
	for (const auto &[k, v] : effective.entries())
		settings[k] = v;
	Json out = stamp(hash, dgp.seed);
	out["vintage_dir"] = vintages.string();
	out["truth"] = (out_dir / "truth.csv").string();
	out["target"] = dgp.target_id;
	out["vintages"] = sim.store.size();
	out["first_asof"] = format_date(sim.store.asof(0));
	out["last_asof"] = format_date(sim.store.asof(sim.store.size() - 1));
	out["settings"] = settings;
	save_json(out_dir / "simulation.json", out);
	return out;
}

std::size_t training_vintage(const VintageStore &store, const RunConfig &config) {
	if (store.empty())
		throw invalid("vintage store is empty");
	const Date cutoff = add_days(quarter_anchor(config.train_last.next()), -config.window_days);
	std::size_t chosen = 0;
	for (std::size_t i = 0; i < store.size(); ++i)
		if (store.asof(i) < cutoff)
			chosen = i;
	return chosen;
}

TrainedModels train_models(const VintageStore &store, const RunConfig &config) {
	config.validate();
	const std::size_t idx = training_vintage(store, config);
	const auto &snapshot = store.snapshot(idx);
	snapshot.column_index(config.target_id);
	const Period end = config.train_last.end_month();
	if (end < snapshot.first_period())
		throw invalid("training window ends before the vintage grid starts");
	const MixedFrequencyDataset slice = snapshot.last_period() > end ? snapshot.truncated_to(end) : snapshot;

	const MixedFrequencyDataset filled = fill(slice, config.lstm.fill_method);
	LstmEnsemble lstm = train(config.lstm, filled, QuarterRange{config.train_first, config.train_last});
	EmResult em = em_fit(slice, std::nullopt, EmOptions{config.dfm_max_iter, config.dfm_tol});
	return TrainedModels{std::move(lstm), std::move(em.model), store.asof(idx), static_cast<std::size_t>(em.iterations), em.converged};
}

Json cmd_train(const RunConfig &config) {
	const VintageStore store = load_vintage_dir(config.vintage_dir, config.target_id);
	const TrainedModels m = train_models(store, config);
	Json out = stamp(config.hash(), config.seed);
	out["training_asof"] = format_date(m.training_asof);
	out["train_start"] = format_quarter(config.train_first);
	out["train_end"] = format_quarter(config.train_last);
	out["target_training_mean"] = m.lstm.target_training_mean;
	out["em_iterations"] = m.em_iterations;
	out["em_converged"] = m.em_converged;
	out["files"] = write_models(config, m);
	return out;
}

Json cmd_backtest(const RunConfig &config, const std::vector<Quarter> &targets, const std::vector<std::string> &models) {
	if (targets.empty())
		throw invalid("no target periods given");
	std::vector<std::string> selected = models.empty() ? std::vector<std::string>{dfm_model_id, lstm_model_id} : models;
	for (const auto &id : selected)
		if (id != dfm_model_id && id != lstm_model_id)
			throw invalid("unknown model '" + id + "' (expected dfm or lstm)");
	std::sort(selected.begin(), selected.end());
	selected.erase(std::unique(selected.begin(), selected.end()), selected.end());

	const VintageStore store = load_vintage_dir(config.vintage_dir, config.target_id);
	const TrainedModels trained = obtain_models(store, config);
	std::vector<Nowcaster> nowcasters;
	for (const auto &id : selected) {
		if (id == dfm_model_id)
			nowcasters.push_back({id, [&](const MixedFrequencyDataset &ds, Quarter q) { return dfm_nowcast(trained.dfm, ds, q); }});
		else
			nowcasters.push_back({id, [&](const MixedFrequencyDataset &ds, Quarter q) { return predict(trained.lstm, ds, q); }});
	}

	ensure_dir(config.output_dir);
	const std::string hash = config.hash();
	const double benchmark = trained.lstm.target_training_mean;
	std::vector<BacktestResult> results;
	std::vector<double> benchmark_mae;
	Json per_period = Json::array();
	for (const Quarter q : targets) {
		const double actual = actual_value(store, q);
		auto curves = replay(store, nowcasters, q, config.window_days, actual);
		if (curves.front().points.empty())
			throw Error(ErrorCode::not_found, "no vintage within " + std::to_string(config.window_days) +
			                                      " days of " + format_quarter(q));
		BacktestResult result = summarize(q, std::move(curves));
		const std::string qid = format_quarter(q);
		const fs::path json_path = config.output_dir / ("backtest_" + qid + ".json");
		const fs::path csv_path = config.output_dir / ("curves_" + qid + ".csv");
		Json doc = stamped(to_json(result), hash, config.seed);
		doc["actual"] = actual;
		doc["window_days"] = config.window_days;
		doc["benchmark"] = Json{{"model", "training_mean"}, {"prediction", benchmark}, {"mae", std::fabs(benchmark - actual)}};
		doc["curves_csv"] = csv_path.filename().string();
		save_json(json_path, doc);
		write_curves_csv(csv_path, result.curves);
		per_period.push_back(Json{{"target_period", qid}, {"report", json_path.string()}, {"curves", csv_path.string()}});
		benchmark_mae.push_back(std::fabs(benchmark - actual));
		results.push_back(std::move(result));
	}
	const fs::path summary_path = config.output_dir / "backtest_summary.txt";
	{
		std::ofstream out(summary_path);
		if (!out)
			throw Error(ErrorCode::io, "cannot write " + summary_path.string());
		out << "# config_hash " << hash << " seed " << config.seed << '\n' << summary_table(results, benchmark_mae);
	}
	Json out = stamp(hash, config.seed);
	out["training_asof"] = format_date(trained.training_asof);
	out["models"] = selected;
	out["periods"] = per_period;
	out["summary"] = summary_path.string();
	return out;
}

Json cmd_news(const RunConfig &config, Date old_asof, Date new_asof, Quarter target) {
	if (new_asof < old_asof)
		throw invalid("new date " + format_date(new_asof) + " precedes old date " + format_date(old_asof));
	const VintageStore store = load_vintage_dir(config.vintage_dir, config.target_id);
	const TrainedModels trained = obtain_models(store, config);
	const auto &old_vintage = vintage_at(store, old_asof);
	const auto &new_vintage = vintage_at(store, new_asof);
	const NewsDecomposition news = decompose(trained.lstm, old_vintage, new_vintage, target, old_asof, new_asof);
	ensure_dir(config.output_dir);
	const fs::path path = config.output_dir /
	                      ("news_" + format_quarter(target) + "_" + format_date(old_asof) + "_" + format_date(new_asof) + ".json");
	Json doc = stamped(to_json(news), config.hash(), config.seed);
	doc["model"] = lstm_model_id;
	save_json(path, doc);
	doc["file"] = path.string();
	return doc;
}

std::string summary_table(const std::vector<BacktestResult> &results, const std::vector<double> &benchmark_mae) {
	std::vector<std::string> ids;
	for (const auto &r : results)
		for (const auto &m : r.metrics)
			if (std::find(ids.begin(), ids.end(), m.model_id) == ids.end())
				ids.push_back(m.model_id);
	constexpr std::size_t w = 12;
	std::string out = pad("period", 8, true);
	for (const auto &id : ids)
		out += pad(id + " MAE", w) + pad(id + " RMSE", w);
	out += pad("naive MAE", w) + '\n';
	for (std::size_t i = 0; i < results.size(); ++i) {
		const auto &r = results[i];
		std::string line = pad(format_quarter(r.target), 8, true);
		for (const auto &id : ids) {
			const auto it = std::find_if(r.metrics.begin(), r.metrics.end(), [&](const ModelMetrics &m) { return m.model_id == id; });
			if (it == r.metrics.end()) {
				line += pad("-", w) + pad("-", w);
				continue;
			}
			std::string mae_s = fixed(it->mae, 4), rmse_s = fixed(it->rmse, 4);
			if (id == r.model_b) {
				if (r.t_test)
					mae_s += significance_stars(r.t_test->p);
				if (r.t_test_squared)
					rmse_s += significance_stars(r.t_test_squared->p);
			}
			line += pad(mae_s, w) + pad(rmse_s, w);
		}
		line += pad(i < benchmark_mae.size() ? fixed(benchmark_mae[i], 4) : "-", w);
		out += line + '\n';
	}
	out += "stars: one-tailed paired t-test, challenger errors lower; * p<0.05 ** p<0.01 *** p<0.001\n";
	return out;
}

} // namespace nowcast
