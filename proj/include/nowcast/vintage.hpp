#pragma once

#include "nowcast/dataset.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace nowcast {

/// Dated, immutable dataset snapshots in strictly increasing as-of order.
/// All snapshots share one column set and target column.
class VintageStore {
public:
	void add(Date asof, MixedFrequencyDataset snapshot);

	bool empty() const { return entries_.empty(); }
	std::size_t size() const { return entries_.size(); }
	Date asof(std::size_t i) const { return entries_.at(i).first; }
	const MixedFrequencyDataset &snapshot(std::size_t i) const { return *entries_.at(i).second; }
	std::vector<Date> dates() const;

	/// Snapshot index with the greatest as-of date <= date, if any.
	std::optional<std::size_t> index_at(Date date) const;

private:
	std::vector<std::pair<Date, std::shared_ptr<const MixedFrequencyDataset>>> entries_;
};

/// Snapshot that was current on `date`. Throws not_found before the first snapshot.
const MixedFrequencyDataset &vintage_at(const VintageStore &store, Date date);

// Snapshot files: CSV with header `date,series_id,value`, one row per observed
// cell, `date` a YYYY-MM period, one file per vintage named YYYY-MM-DD.csv.
// An optional `series.csv` (`series_id,frequency`) in the same directory fixes
// column order and frequencies; without it, a series is quarterly exactly when
// all its observations fall in quarter-end months, and columns sort by id.

struct SnapshotRow {
	Period period;
	std::string series_id;
	double value = 0.0;
	std::size_t line = 0;
};

/// Strict reader; throws parse errors of the form `file:line: message`.
std::vector<SnapshotRow> read_snapshot_csv(const std::filesystem::path &path);
void write_snapshot_csv(const std::filesystem::path &path, const MixedFrequencyDataset &ds);

inline constexpr const char *series_metadata_file = "series.csv";

/// Vintage files in a directory, sorted by as-of date. Other files are ignored.
std::vector<std::pair<Date, std::filesystem::path>> list_vintage_files(const std::filesystem::path &dir);

VintageStore load_vintage_dir(const std::filesystem::path &dir, const std::string &target_id);
void write_vintage_dir(const std::filesystem::path &dir, const VintageStore &store);

struct IngestIssue {
	std::string file;
	std::size_t line = 0;
	std::string message;
};

struct IngestReport {
	std::size_t files = 0;
	std::vector<IngestIssue> errors;
	/// Non-fatal findings, e.g. a cell observed in one snapshot and absent in a later one.
	std::vector<IngestIssue> warnings;
	std::vector<Column> columns;
	/// Observed cells per column in each snapshot, aligned with `columns`.
	std::vector<std::pair<Date, std::vector<std::size_t>>> census;
	std::vector<std::pair<Date, RaggedEdgeProfile>> profiles;
};

/// Validate every snapshot file, collecting errors instead of stopping at the first.
IngestReport ingest_vintage_dir(const std::filesystem::path &dir, const std::string &target_id);

} // namespace nowcast
