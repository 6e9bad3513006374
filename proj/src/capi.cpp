#include "nowcast/nowcast.h"

#include "nowcast/commands.hpp"
#include "nowcast/error.hpp"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

using namespace nowcast;

struct nc_config {
	KeyValueDocument doc;
};

struct nc_vintage_store {
	VintageStore store;
};

struct nc_lstm {
	LstmEnsemble model;
};

struct nc_dfm {
	StateSpaceModel model;
};

namespace {

thread_local std::string last_error;

nc_status fail(nc_status status, const std::string &message) {
	last_error = message;
	return status;
}

template <class Fn>
nc_status guarded(Fn &&fn) {
	try {
		fn();
		last_error.clear();
		return NC_OK;
	} catch (const Error &e) {
		return fail(static_cast<nc_status>(e.code()), e.what());
	} catch (const std::bad_alloc &) {
		return fail(NC_ERR_INTERNAL, "out of memory");
	} catch (const std::exception &e) {
		return fail(NC_ERR_INTERNAL, e.what());
	} catch (...) {
		return fail(NC_ERR_INTERNAL, "unknown failure");
	}
}

char *dup(const std::string &s) {
	char *out = static_cast<char *>(std::malloc(s.size() + 1));
	if (!out)
		throw std::bad_alloc();
	std::memcpy(out, s.c_str(), s.size() + 1);
	return out;
}

void need(const void *p, const char *name) {
	if (!p)
		throw invalid(std::string(name) + " is NULL");
}

RunConfig run_config(const nc_config *config) {
	need(config, "config");
	return RunConfig::from(config->doc);
}

const MixedFrequencyDataset &snapshot(const nc_vintage_store *store, const char *asof) {
	need(store, "store");
	need(asof, "asof");
	return vintage_at(store->store, parse_date(asof));
}

} // namespace

extern "C" {

const char *nc_last_error(void) { return last_error.c_str(); }

const char *nc_status_name(nc_status status) {
	switch (status) {
	case NC_OK: return "ok";
	case NC_ERR_INVALID_ARGUMENT: return "invalid_argument";
	case NC_ERR_IO: return "io";
	case NC_ERR_PARSE: return "parse";
	case NC_ERR_NUMERIC: return "numeric";
	case NC_ERR_NOT_FOUND: return "not_found";
	case NC_ERR_DEGENERATE: return "degenerate";
	default: return "internal";
	}
}

const char *nc_version(void) { return "0.1.0"; }

void nc_string_free(char *s) { std::free(s); }

nc_status nc_config_create(nc_config **out) {
	return guarded([&] {
		need(out, "out");
		*out = new nc_config{};
	});
}

nc_status nc_config_load(const char *path, nc_config **out) {
	return guarded([&] {
		need(path, "path");
		need(out, "out");
		*out = new nc_config{KeyValueDocument::load(path)};
	});
}

void nc_config_free(nc_config *config) { delete config; }

nc_status nc_config_set(nc_config *config, const char *key, const char *value) {
	return guarded([&] {
		need(config, "config");
		need(key, "key");
		need(value, "value");
		config->doc.set(key, value);
	});
}

nc_status nc_config_get(const nc_config *config, const char *key, char **value) {
	return guarded([&] {
		need(config, "config");
		need(key, "key");
		need(value, "value");
		const auto v = config->doc.get(key);
		if (!v)
			throw Error(ErrorCode::not_found, std::string("key '") + key + "' is not set");
		*value = dup(*v);
	});
}

nc_status nc_config_effective(const nc_config *config, char **text) {
	return guarded([&] {
		need(text, "text");
		*text = dup(run_config(config).to_document().canonical());
	});
}

nc_status nc_config_hash(const nc_config *config, char **hash) {
	return guarded([&] {
		need(hash, "hash");
		*hash = dup(run_config(config).hash());
	});
}

nc_status nc_store_open(const char *dir, const char *target_id, nc_vintage_store **out) {
	return guarded([&] {
		need(dir, "dir");
		need(target_id, "target_id");
		need(out, "out");
		*out = new nc_vintage_store{load_vintage_dir(dir, target_id)};
	});
}

void nc_store_free(nc_vintage_store *store) { delete store; }

size_t nc_store_size(const nc_vintage_store *store) { return store ? store->store.size() : 0; }

nc_status nc_store_asof(const nc_vintage_store *store, size_t i, char **date) {
	return guarded([&] {
		need(store, "store");
		need(date, "date");
		if (i >= store->store.size())
			throw Error(ErrorCode::not_found, "snapshot index " + std::to_string(i) + " out of range");
		*date = dup(format_date(store->store.asof(i)));
	});
}

nc_status nc_lstm_load(const char *path, nc_lstm **out) {
	return guarded([&] {
		need(path, "path");
		need(out, "out");
		*out = new nc_lstm{lstm_ensemble_from_json(load_json(path))};
	});
}

void nc_lstm_free(nc_lstm *model) { delete model; }

nc_status nc_lstm_predict(const nc_lstm *model, const nc_vintage_store *store, const char *asof,
                          const char *target_period, double *out) {
	return guarded([&] {
		need(model, "model");
		need(target_period, "target_period");
		need(out, "out");
		*out = predict(model->model, snapshot(store, asof), parse_quarter(target_period));
	});
}

nc_status nc_lstm_predict_members(const nc_lstm *model, const nc_vintage_store *store, const char *asof,
                                  const char *target_period, double *out, size_t capacity, size_t *count) {
	return guarded([&] {
		need(model, "model");
		need(target_period, "target_period");
		need(count, "count");
		const auto members = predict_members(model->model, snapshot(store, asof), parse_quarter(target_period));
		*count = members.size();
		if (capacity < members.size())
			throw invalid("buffer holds " + std::to_string(capacity) + " values, ensemble has " +
			              std::to_string(members.size()) + " members");
		need(out, "out");
		std::copy(members.begin(), members.end(), out);
	});
}

nc_status nc_dfm_load(const char *path, nc_dfm **out) {
	return guarded([&] {
		need(path, "path");
		need(out, "out");
		*out = new nc_dfm{state_space_model_from_json(load_json(path))};
	});
}

void nc_dfm_free(nc_dfm *model) { delete model; }

nc_status nc_dfm_nowcast(const nc_dfm *model, const nc_vintage_store *store, const char *asof,
                         const char *target_period, double *out) {
	return guarded([&] {
		need(model, "model");
		need(target_period, "target_period");
		need(out, "out");
		*out = dfm_nowcast(model->model, snapshot(store, asof), parse_quarter(target_period));
	});
}

nc_status nc_cmd_ingest(const char *dir, const char *target_id, char **report) {
	return guarded([&] {
		need(dir, "dir");
		need(report, "report");
		*report = dup(cmd_ingest(dir, target_id ? target_id : "target").dump(2));
	});
}

nc_status nc_cmd_simulate(const nc_config *config, const char *out_dir, char **report) {
	return guarded([&] {
		need(config, "config");
		need(report, "report");
		const std::string dir = out_dir && *out_dir ? out_dir : config->doc.get("output_dir").value_or("out");
		*report = dup(cmd_simulate(config->doc, dir).dump(2));
	});
}

nc_status nc_cmd_train(const nc_config *config, char **report) {
	return guarded([&] {
		need(report, "report");
		*report = dup(cmd_train(run_config(config)).dump(2));
	});
}

nc_status nc_cmd_backtest(const nc_config *config, const char *targets, const char *models, char **report) {
	return guarded([&] {
		need(report, "report");
		const RunConfig rc = run_config(config);
		const auto quarters = targets && *targets ? parse_quarter_list(targets) : rc.targets;
		const auto ids = models && *models ? split_list(models) : std::vector<std::string>{};
		*report = dup(cmd_backtest(rc, quarters, ids).dump(2));
	});
}

nc_status nc_cmd_news(const nc_config *config, const char *old_date, const char *new_date, const char *target_period,
                      char **report) {
	return guarded([&] {
		need(old_date, "old_date");
		need(new_date, "new_date");
		need(target_period, "target_period");
		need(report, "report");
		*report = dup(cmd_news(run_config(config), parse_date(old_date), parse_date(new_date),
		                       parse_quarter(target_period))
		                  .dump(2));
	});
}

} // extern "C"
