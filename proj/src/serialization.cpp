#include "nowcast/serialization.hpp"

#include "nowcast/error.hpp"
#include "nowcast/number_format.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace nowcast {

namespace {

Json matrix_json(const Matrix &m) {
	Json rows = Json::array();
	for (std::size_t r = 0; r < m.rows; ++r) {
		const auto row = m.row(r);
		rows.push_back(Json(std::vector<double>(row.begin(), row.end())));
	}
	return rows;
}

Matrix matrix_from(const Json &doc) {
	Matrix m;
	m.rows = doc.size();
	m.cols = m.rows ? doc.at(0).size() : 0;
	m.data.reserve(m.rows * m.cols);
	for (const auto &row : doc) {
		if (row.size() != m.cols)
			throw Error(ErrorCode::parse, "ragged matrix in model document");
		for (const auto &v : row)
			m.data.push_back(v.get<double>());
	}
	return m;
}

Json gate_json(const GateWeights &g) {
	return Json{{"input", matrix_json(g.input)}, {"recurrent", matrix_json(g.recurrent)}, {"bias", g.bias}};
}

GateWeights gate_from(const Json &doc) {
	return GateWeights{matrix_from(doc.at("input")), matrix_from(doc.at("recurrent")),
	                   doc.at("bias").get<std::vector<double>>()};
}

std::string fill_kind(const FillMethod &m) { return m.kind == FillMethod::Kind::mean ? "mean" : "arma"; }

template <class Fn>
auto parsing(const char *what, Fn &&fn) {
	try {
		return fn();
	} catch (const nlohmann::json::exception &e) {
		throw Error(ErrorCode::parse, std::string("malformed ") + what + " document: " + e.what());
	}
}

} // namespace

Json to_json(const LstmEnsemble &ens) {
	const auto &c = ens.config;
	Json config{{"n_timesteps", c.n_timesteps},   {"hidden_size", c.hidden_size}, {"n_layers", c.n_layers},
	            {"n_networks", c.n_networks},     {"learning_rate", c.learning_rate}, {"n_epochs", c.n_epochs},
	            {"batch_size", c.batch_size},     {"seed", c.seed},
	            {"fill_method", {{"kind", fill_kind(c.fill_method)}, {"p", c.fill_method.order.p}, {"q", c.fill_method.order.q}}}};
	Json members = Json::array();
	for (const auto &m : ens.members) {
		Json layers = Json::array();
		for (const auto &l : m.layers)
			layers.push_back(Json{{"input_gate", gate_json(l.input_gate)},
			                      {"forget_gate", gate_json(l.forget_gate)},
			                      {"cell_gate", gate_json(l.cell_gate)},
			                      {"output_gate", gate_json(l.output_gate)}});
		members.push_back(Json{{"layers", layers},
		                       {"readout_weights", m.readout_weights},
		                       {"readout_bias", m.readout_bias},
		                       {"feature_mean", m.feature_mean},
		                       {"feature_scale", m.feature_scale}});
	}
	return Json{{"kind", "lstm_ensemble"},
	            {"config", config},
	            {"target_id", ens.target_id},
	            {"feature_ids", ens.feature_ids},
	            {"train_first", format_quarter(ens.train_first)},
	            {"train_last", format_quarter(ens.train_last)},
	            {"target_training_mean", ens.target_training_mean},
	            {"members", members}};
}

LstmEnsemble lstm_ensemble_from_json(const Json &doc) {
	return parsing("LSTM ensemble", [&] {
		if (doc.at("kind") != "lstm_ensemble")
			throw Error(ErrorCode::parse, "document is not an LSTM ensemble");
		LstmEnsemble ens;
		const auto &c = doc.at("config");
		ens.config.n_timesteps = c.at("n_timesteps").get<std::size_t>();
		ens.config.hidden_size = c.at("hidden_size").get<std::size_t>();
		ens.config.n_layers = c.at("n_layers").get<std::size_t>();
		ens.config.n_networks = c.at("n_networks").get<std::size_t>();
		ens.config.learning_rate = c.at("learning_rate").get<double>();
		ens.config.n_epochs = c.at("n_epochs").get<std::size_t>();
		ens.config.batch_size = c.at("batch_size").get<std::size_t>();
		ens.config.seed = c.at("seed").get<std::uint64_t>();
		const auto &fm = c.at("fill_method");
		const ArmaOrder order{fm.at("p").get<int>(), fm.at("q").get<int>()};
		ens.config.fill_method = parse_fill_method(fm.at("kind").get<std::string>(), order);
		ens.config.fill_method.order = order;
		validate(ens.config);
		ens.target_id = doc.at("target_id").get<std::string>();
		ens.feature_ids = doc.at("feature_ids").get<std::vector<std::string>>();
		ens.train_first = parse_quarter(doc.at("train_first").get<std::string>());
		ens.train_last = parse_quarter(doc.at("train_last").get<std::string>());
		ens.target_training_mean = doc.at("target_training_mean").get<double>();
		for (const auto &m : doc.at("members")) {
			LstmParameters p;
			for (const auto &l : m.at("layers"))
				p.layers.push_back(LstmLayer{gate_from(l.at("input_gate")), gate_from(l.at("forget_gate")),
				                             gate_from(l.at("cell_gate")), gate_from(l.at("output_gate"))});
			p.readout_weights = m.at("readout_weights").get<std::vector<double>>();
			p.readout_bias = m.at("readout_bias").get<double>();
			p.feature_mean = m.at("feature_mean").get<std::vector<double>>();
			p.feature_scale = m.at("feature_scale").get<std::vector<double>>();
			p.check();
			if (p.n_features() != ens.feature_ids.size() || p.hidden_size() != ens.config.hidden_size ||
			    p.layers.size() != ens.config.n_layers)
				throw Error(ErrorCode::parse, "ensemble member does not match the ensemble configuration");
			ens.members.push_back(std::move(p));
		}
		if (ens.members.size() != ens.config.n_networks)
			throw Error(ErrorCode::parse, "ensemble holds " + std::to_string(ens.members.size()) +
			                                  " members, configuration says " + std::to_string(ens.config.n_networks));
		return ens;
	});
}

Json to_json(const StateSpaceModel &m) {
	return Json{{"kind", "dynamic_factor_model"},
	            {"column_ids", m.column_ids},
	            {"target_id", m.target_id},
	            {"loadings", m.loadings},
	            {"factor_ar", m.factor_ar},
	            {"factor_variance", m.factor_variance},
	            {"idiosyncratic_variances", m.idiosyncratic_variances},
	            {"initial_variance", m.initial_variance},
	            {"column_mean", m.column_mean},
	            {"column_scale", m.column_scale}};
}

StateSpaceModel state_space_model_from_json(const Json &doc) {
	return parsing("dynamic factor model", [&] {
		if (doc.at("kind") != "dynamic_factor_model")
			throw Error(ErrorCode::parse, "document is not a dynamic factor model");
		StateSpaceModel m;
		m.column_ids = doc.at("column_ids").get<std::vector<std::string>>();
		m.target_id = doc.at("target_id").get<std::string>();
		m.loadings = doc.at("loadings").get<std::vector<double>>();
		m.factor_ar = doc.at("factor_ar").get<double>();
		m.factor_variance = doc.at("factor_variance").get<double>();
		m.idiosyncratic_variances = doc.at("idiosyncratic_variances").get<std::vector<double>>();
		m.initial_variance = doc.at("initial_variance").get<double>();
		m.column_mean = doc.at("column_mean").get<std::vector<double>>();
		m.column_scale = doc.at("column_scale").get<std::vector<double>>();
		m.check();
		m.target_index();
		return m;
	});
}

Json to_json(const PredictionCurve &curve) {
	Json points = Json::array();
	for (const auto &p : curve.points)
		points.push_back(Json{{"asof_date", format_date(p.asof)}, {"day_difference", p.day_difference},
		                      {"prediction", p.prediction}});
	return Json{{"model", curve.model_id},
	            {"target_period", format_quarter(curve.target)},
	            {"actual", curve.actual ? Json(*curve.actual) : Json(nullptr)},
	            {"points", points}};
}

namespace {

Json t_test_json(const std::optional<TTest> &t) {
	if (!t)
		return nullptr;
	return Json{{"t", t->t}, {"df", t->df}, {"p", t->p}, {"stars", significance_stars(t->p)}};
}

} // namespace

Json to_json(const BacktestResult &r) {
	Json metrics = Json::object();
	for (const auto &m : r.metrics)
		metrics[m.model_id] = Json{{"mae", m.mae}, {"rmse", m.rmse}};
	Json curves = Json::array();
	for (const auto &c : r.curves)
		curves.push_back(to_json(c));
	Json out{{"target_period", format_quarter(r.target)}, {"metrics", metrics}};
	if (!r.model_a.empty()) {
		out["t_test"] = t_test_json(r.t_test);
		out["t_test_squared"] = t_test_json(r.t_test_squared);
		out["t_test_design"] = Json{{"paired", true},
		                            {"errors", "absolute"},
		                            {"baseline", r.model_a},
		                            {"challenger", r.model_b},
		                            {"alternative", "challenger absolute errors are lower"}};
		if (r.revisions) {
			out["revisions"] = Json{{"share_bigger", {{r.model_a, r.revisions->share_a_bigger}, {r.model_b, r.revisions->share_b_bigger}}},
			                        {"average_absolute", {{r.model_a, r.revisions->avg_abs_revision_a}, {r.model_b, r.revisions->avg_abs_revision_b}}}};
		}
	}
	if (!r.note.empty())
		out["note"] = r.note;
	out["curves"] = curves;
	return out;
}

Json to_json(const NewsDecomposition &n) {
	Json raw = Json::object(), scaled = Json::object();
	for (const auto &[id, v] : n.raw_contributions)
		raw[id] = v;
	for (const auto &[id, v] : n.rescaled_contributions)
		scaled[id] = v;
	return Json{{"old_asof", format_date(n.old_asof)},
	            {"new_asof", format_date(n.new_asof)},
	            {"target_period", format_quarter(n.target)},
	            {"prediction_old", n.prediction_old},
	            {"prediction_new", n.prediction_new},
	            {"delta", n.delta()},
	            {"raw_contributions", raw},
	            {"revision_contribution", n.revision_contribution},
	            {"rescale_factor", n.rescale_factor},
	            {"rescaled_contributions", scaled},
	            {"rescaled_revision", n.rescaled_revision}};
}

Json to_json(const IngestReport &report) {
	auto issues = [](const std::vector<IngestIssue> &list) {
		Json out = Json::array();
		for (const auto &i : list)
			out.push_back(Json{{"file", i.file}, {"line", i.line}, {"message", i.message}});
		return out;
	};
	Json columns = Json::array();
	for (const auto &c : report.columns)
		columns.push_back(Json{{"id", c.id}, {"frequency", std::string(to_string(c.frequency))}});
	Json snapshots = Json::array();
	for (std::size_t s = 0; s < report.census.size(); ++s) {
		const auto &[date, counts] = report.census[s];
		const auto &profile = report.profiles[s].second;
		Json cols = Json::object();
		for (std::size_t j = 0; j < counts.size(); ++j) {
			const auto &edge = profile.edges[j];
			std::vector<std::string> gaps;
			for (const Period p : edge.interior_missing)
				gaps.push_back(format_period(p));
			cols[profile.column_ids[j]] = Json{{"observed", counts[j]},
			                                   {"latest", edge.latest ? Json(format_period(*edge.latest)) : Json(nullptr)},
			                                   {"trailing_missing", edge.trailing_missing},
			                                   {"interior_missing", gaps}};
		}
		snapshots.push_back(Json{{"asof_date", format_date(date)}, {"last_period", format_period(profile.last_row)},
		                         {"columns", cols}});
	}
	return Json{{"files", report.files},
	            {"valid", report.errors.empty()},
	            {"errors", issues(report.errors)},
	            {"warnings", issues(report.warnings)},
	            {"columns", columns},
	            {"snapshots", snapshots}};
}

void save_json(const std::filesystem::path &path, const Json &doc) {
	std::ofstream out(path);
	if (!out)
		throw Error(ErrorCode::io, "cannot write " + path.string());
	out << doc.dump(2) << '\n';
	if (!out)
		throw Error(ErrorCode::io, "failed writing " + path.string());
}

Json load_json(const std::filesystem::path &path) {
	std::ifstream in(path);
	if (!in)
		throw Error(ErrorCode::io, "cannot open " + path.string());
	try {
		return Json::parse(in);
	} catch (const nlohmann::json::exception &e) {
		throw Error(ErrorCode::parse, path.filename().string() + ": " + e.what());
	}
}

void write_curves_csv(const std::filesystem::path &path, const std::vector<PredictionCurve> &curves) {
	std::ofstream out(path);
	if (!out)
		throw Error(ErrorCode::io, "cannot write " + path.string());
	out << "model,target_period,asof_date,day_difference,prediction,actual\n";
	for (const auto &c : curves)
		for (const auto &p : c.points) {
			out << c.model_id << ',' << format_quarter(c.target) << ',' << format_date(p.asof) << ','
			    << p.day_difference << ',';
			out << format_number(p.prediction) << ',';
			if (c.actual) {
				out << format_number(*c.actual);
			} else {
				out << "NA";
			}
			out << '\n';
		}
}

} // namespace nowcast
