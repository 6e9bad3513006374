/* C interface to the nowcasting engine. */
#ifndef NOWCAST_H
#define NOWCAST_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define NC_API __declspec(dllexport)
#else
#define NC_API __attribute__((visibility("default")))
#endif

typedef enum nc_status {
	NC_OK = 0,
	NC_ERR_INVALID_ARGUMENT = 1,
	NC_ERR_IO = 2,
	NC_ERR_PARSE = 3,
	NC_ERR_NUMERIC = 4,
	NC_ERR_NOT_FOUND = 5,
	NC_ERR_DEGENERATE = 6,
	NC_ERR_INTERNAL = 99
} nc_status;

typedef struct nc_config nc_config;
typedef struct nc_vintage_store nc_vintage_store;
typedef struct nc_lstm nc_lstm;
typedef struct nc_dfm nc_dfm;

/* Message of the last failure on the calling thread; never NULL. */
NC_API const char *nc_last_error(void);
NC_API const char *nc_status_name(nc_status status);
NC_API const char *nc_version(void);

/* Strings returned through char** out-parameters are owned by the caller. */
NC_API void nc_string_free(char *s);

NC_API nc_status nc_config_create(nc_config **out);
NC_API nc_status nc_config_load(const char *path, nc_config **out);
NC_API void nc_config_free(nc_config *config);
NC_API nc_status nc_config_set(nc_config *config, const char *key, const char *value);
/* NC_ERR_NOT_FOUND when the key is unset. */
NC_API nc_status nc_config_get(const nc_config *config, const char *key, char **value);
/* Effective run configuration (defaults included) as key = value lines. */
NC_API nc_status nc_config_effective(const nc_config *config, char **text);
NC_API nc_status nc_config_hash(const nc_config *config, char **hash);

NC_API nc_status nc_store_open(const char *dir, const char *target_id, nc_vintage_store **out);
NC_API void nc_store_free(nc_vintage_store *store);
NC_API size_t nc_store_size(const nc_vintage_store *store);
/* As-of date of snapshot i as YYYY-MM-DD. */
NC_API nc_status nc_store_asof(const nc_vintage_store *store, size_t i, char **date);

NC_API nc_status nc_lstm_load(const char *path, nc_lstm **out);
NC_API void nc_lstm_free(nc_lstm *model);
NC_API nc_status nc_lstm_predict(const nc_lstm *model, const nc_vintage_store *store, const char *asof,
                                 const char *target_period, double *out);
NC_API nc_status nc_lstm_predict_members(const nc_lstm *model, const nc_vintage_store *store, const char *asof,
                                         const char *target_period, double *out, size_t capacity, size_t *count);

NC_API nc_status nc_dfm_load(const char *path, nc_dfm **out);
NC_API void nc_dfm_free(nc_dfm *model);
NC_API nc_status nc_dfm_nowcast(const nc_dfm *model, const nc_vintage_store *store, const char *asof,
                                const char *target_period, double *out);

/* Commands. Each writes its files and returns the JSON report through `report`. */
NC_API nc_status nc_cmd_ingest(const char *dir, const char *target_id, char **report);
NC_API nc_status nc_cmd_simulate(const nc_config *config, const char *out_dir, char **report);
NC_API nc_status nc_cmd_train(const nc_config *config, char **report);
/* targets: comma-separated quarters (NULL or "" uses the config's `targets`);
   models: comma-separated subset of dfm,lstm (NULL or "" means both). */
NC_API nc_status nc_cmd_backtest(const nc_config *config, const char *targets, const char *models, char **report);
NC_API nc_status nc_cmd_news(const nc_config *config, const char *old_date, const char *new_date,
                             const char *target_period, char **report);

#ifdef __cplusplus
}
#endif

#endif
