#include "nowcast/nowcast.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace {

struct Failure {
	nc_status status;
	std::string message;
};

void check(nc_status status) {
	if (status != NC_OK)
		throw Failure{status, nc_last_error()};
}

struct ConfigHandle {
	nc_config *ptr = nullptr;
	~ConfigHandle() { nc_config_free(ptr); }
};

struct Common {
	std::string config_path;
	std::vector<std::string> sets;
	std::string vintage_dir;
	std::string output_dir;
	std::string target;
	std::string seed;
};

void add_common(CLI::App *cmd, Common &c) {
	cmd->add_option("-c,--config", c.config_path, "key = value run configuration file");
	cmd->add_option("--set", c.sets, "override a configuration key (key=value), repeatable");
	cmd->add_option("--vintage-dir", c.vintage_dir, "directory of snapshot CSV files");
	cmd->add_option("--output-dir", c.output_dir, "directory for models and reports");
	cmd->add_option("--target", c.target, "target series id");
	cmd->add_option("--seed", c.seed, "random seed");
}

void build_config(const Common &c, ConfigHandle &h) {
	if (c.config_path.empty())
		check(nc_config_create(&h.ptr));
	else
		check(nc_config_load(c.config_path.c_str(), &h.ptr));
	for (const auto &kv : c.sets) {
		const auto eq = kv.find('=');
		if (eq == std::string::npos || eq == 0)
			throw Failure{NC_ERR_INVALID_ARGUMENT, "--set expects key=value, got '" + kv + "'"};
		auto trim = [](std::string s) {
			const auto b = s.find_first_not_of(" \t");
			const auto e = s.find_last_not_of(" \t");
			return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
		};
		check(nc_config_set(h.ptr, trim(kv.substr(0, eq)).c_str(), trim(kv.substr(eq + 1)).c_str()));
	}
	const std::pair<const char *, const std::string *> named[] = {
	    {"vintage_dir", &c.vintage_dir}, {"output_dir", &c.output_dir}, {"target", &c.target}, {"seed", &c.seed}};
	for (const auto &[key, value] : named)
		if (!value->empty())
			check(nc_config_set(h.ptr, key, value->c_str()));
}

void emit(char *report) {
	std::unique_ptr<char, decltype(&nc_string_free)> owned(report, nc_string_free);
	std::cout << report << '\n';
}

} // namespace

int main(int argc, char **argv) {
	CLI::App app{"Mixed-frequency nowcasting: ingest, simulate, train, backtest, news"};
	app.require_subcommand(1);

	std::string ingest_dir, ingest_target = "target";
	auto *ingest = app.add_subcommand("ingest", "validate a vintage directory");
	ingest->add_option("dir", ingest_dir, "vintage directory")->required();
	ingest->add_option("--target", ingest_target, "target series id");

	Common sim_opts, train_opts, bt_opts, news_opts;
	std::string sim_out;
	auto *simulate = app.add_subcommand("simulate", "write a synthetic vintage store");
	add_common(simulate, sim_opts);
	simulate->add_option("-o,--out", sim_out, "output directory (default: output_dir)");

	auto *train = app.add_subcommand("train", "train the LSTM ensemble and the DFM");
	add_common(train, train_opts);

	std::string targets, models;
	auto *backtest = app.add_subcommand("backtest", "replay vintages and evaluate");
	add_common(backtest, bt_opts);
	backtest->add_option("--targets", targets, "comma-separated target quarters, e.g. 2013Q3,2013Q4");
	backtest->add_option("--models", models, "comma-separated subset of dfm,lstm");

	std::string old_date, new_date, period;
	auto *news = app.add_subcommand("news", "decompose a prediction revision");
	add_common(news, news_opts);
	news->add_option("--old", old_date, "old as-of date YYYY-MM-DD")->required();
	news->add_option("--new", new_date, "new as-of date YYYY-MM-DD")->required();
	news->add_option("--period", period, "target quarter, e.g. 2013Q4")->required();

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		if (e.get_exit_code() == 0)
			return app.exit(e);
		nlohmann::ordered_json err{{"error", {{"code", "usage"}, {"status", 64}, {"message", e.what()}}}};
		std::cerr << err.dump() << '\n';
		return 64;
	}

	try {
		char *report = nullptr;
		ConfigHandle cfg;
		if (*ingest) {
			check(nc_cmd_ingest(ingest_dir.c_str(), ingest_target.c_str(), &report));
			std::unique_ptr<char, decltype(&nc_string_free)> owned(report, nc_string_free);
			std::cout << report << '\n';
			const auto doc = nlohmann::json::parse(report);
			return doc.value("valid", false) ? 0 : 3;
		}
		if (*simulate) {
			build_config(sim_opts, cfg);
			check(nc_cmd_simulate(cfg.ptr, sim_out.empty() ? nullptr : sim_out.c_str(), &report));
		} else if (*train) {
			build_config(train_opts, cfg);
			check(nc_cmd_train(cfg.ptr, &report));
		} else if (*backtest) {
			build_config(bt_opts, cfg);
			check(nc_cmd_backtest(cfg.ptr, targets.c_str(), models.c_str(), &report));
		} else {
			build_config(news_opts, cfg);
			check(nc_cmd_news(cfg.ptr, old_date.c_str(), new_date.c_str(), period.c_str(), &report));
		}
		emit(report);
		return 0;
	} catch (const Failure &f) {
		nlohmann::ordered_json err{
		    {"error", {{"code", nc_status_name(f.status)}, {"status", static_cast<int>(f.status)}, {"message", f.message}}}};
		std::cerr << err.dump() << '\n';
		return static_cast<int>(f.status);
	}
}
