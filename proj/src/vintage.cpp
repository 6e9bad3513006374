#include "nowcast/vintage.hpp"

#include "nowcast/error.hpp"
#include "nowcast/number_format.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace nowcast {

namespace fs = std::filesystem;

void VintageStore::add(Date asof, MixedFrequencyDataset snapshot) {
	if (!entries_.empty()) {
		if (asof <= entries_.back().first)
			throw invalid("vintage dated " + format_date(asof) + " does not follow " +
			              format_date(entries_.back().first));
		const auto &reference = *entries_.front().second;
		if (snapshot.columns() != reference.columns() || snapshot.target_id() != reference.target_id())
			throw invalid("vintage dated " + format_date(asof) + " has a different column set");
	}
	entries_.emplace_back(asof, std::make_shared<const MixedFrequencyDataset>(std::move(snapshot)));
}

std::vector<Date> VintageStore::dates() const {
	std::vector<Date> out;
	out.reserve(entries_.size());
	for (const auto &e : entries_)
		out.push_back(e.first);
	return out;
}

std::optional<std::size_t> VintageStore::index_at(Date date) const {
	const auto it = std::upper_bound(entries_.begin(), entries_.end(), date,
	                                 [](Date d, const auto &entry) { return d < entry.first; });
	if (it == entries_.begin())
		return std::nullopt;
	return static_cast<std::size_t>(std::distance(entries_.begin(), it) - 1);
}

const MixedFrequencyDataset &vintage_at(const VintageStore &store, Date date) {
	if (store.empty())
		throw invalid("vintage store is empty");
	const auto idx = store.index_at(date);
	if (!idx)
		throw Error(ErrorCode::not_found, "no vintage on or before " + format_date(date) + "; first is " +
		                                      format_date(store.asof(0)));
	return store.snapshot(*idx);
}

namespace {

std::string trim(std::string_view s) {
	const auto b = s.find_first_not_of(" \t\r");
	if (b == std::string_view::npos)
		return {};
	const auto e = s.find_last_not_of(" \t\r");
	return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string &line) {
	std::vector<std::string> fields;
	std::string field;
	std::istringstream in(line);
	while (std::getline(in, field, ','))
		fields.push_back(trim(field));
	if (!line.empty() && line.back() == ',')
		fields.emplace_back();
	return fields;
}

std::string location(const fs::path &path, std::size_t line) { return path.filename().string() + ":" + std::to_string(line); }

std::string format_value(double v) { return format_number(v); }

bool parse_double(const std::string &text, double &out) {
	if (text.empty())
		return false;
	const char *first = text.data();
	const char *last = text.data() + text.size();
	if (*first == '+')
		++first;
	auto [ptr, ec] = std::from_chars(first, last, out);
	return ec == std::errc{} && ptr == last && std::isfinite(out);
}

/// Parses a snapshot, sending every problem to `report`; returns rows that parsed.
template <class Report>
std::vector<SnapshotRow> parse_snapshot(const fs::path &path, Report &&report) {
	std::ifstream in(path);
	if (!in)
		throw Error(ErrorCode::io, "cannot open " + path.string());
	std::vector<SnapshotRow> rows;
	std::set<std::pair<int, std::string>> seen;
	std::string line;
	std::size_t line_no = 0;
	bool header = true;
	while (std::getline(in, line)) {
		++line_no;
		if (trim(line).empty())
			continue;
		const auto fields = split_csv_line(line);
		if (header) {
			header = false;
			if (fields.size() != 3 || fields[0] != "date" || fields[1] != "series_id" || fields[2] != "value")
				report(line_no, "expected header 'date,series_id,value'");
			continue;
		}
		if (fields.size() != 3) {
			report(line_no, "expected 3 fields, found " + std::to_string(fields.size()));
			continue;
		}
		SnapshotRow row;
		row.line = line_no;
		try {
			row.period = parse_period(fields[0]);
		} catch (const Error &e) {
			report(line_no, e.what());
			continue;
		}
		if (fields[1].empty()) {
			report(line_no, "empty series_id");
			continue;
		}
		row.series_id = fields[1];
		if (!parse_double(fields[2], row.value)) {
			report(line_no, "non-numeric value '" + fields[2] + "'");
			continue;
		}
		if (!seen.emplace(row.period.index(), row.series_id).second) {
			report(line_no, "duplicate observation of '" + row.series_id + "' at " + fields[0]);
			continue;
		}
		rows.push_back(std::move(row));
	}
	if (header)
		report(1, "missing header");
	return rows;
}

struct ParsedDir {
	std::vector<Column> columns;
	std::vector<std::pair<Date, fs::path>> files;
	std::vector<std::vector<SnapshotRow>> rows;
};

std::vector<Column> read_metadata(const fs::path &path, std::vector<IngestIssue> &errors) {
	std::vector<Column> columns;
	std::ifstream in(path);
	if (!in)
		throw Error(ErrorCode::io, "cannot open " + path.string());
	std::string line;
	std::size_t line_no = 0;
	std::set<std::string> ids;
	while (std::getline(in, line)) {
		++line_no;
		if (trim(line).empty())
			continue;
		const auto fields = split_csv_line(line);
		if (line_no == 1) {
			if (fields.size() != 2 || fields[0] != "series_id" || fields[1] != "frequency")
				errors.push_back({path.filename().string(), line_no, "expected header 'series_id,frequency'"});
			continue;
		}
		if (fields.size() != 2 || fields[0].empty()) {
			errors.push_back({path.filename().string(), line_no, "expected 'series_id,frequency'"});
			continue;
		}
		try {
			const auto freq = parse_frequency(fields[1]);
			if (!ids.insert(fields[0]).second)
				errors.push_back({path.filename().string(), line_no, "duplicate series '" + fields[0] + "'"});
			else
				columns.push_back(Column{fields[0], freq});
		} catch (const Error &e) {
			errors.push_back({path.filename().string(), line_no, e.what()});
		}
	}
	return columns;
}

ParsedDir parse_dir(const fs::path &dir, const std::string &target_id, std::vector<IngestIssue> &errors) {
	ParsedDir parsed;
	parsed.files = list_vintage_files(dir);
	if (parsed.files.empty())
		throw Error(ErrorCode::not_found, "no vintage files (YYYY-MM-DD.csv) in " + dir.string());
	for (const auto &[date, path] : parsed.files) {
		const auto name = path.filename().string();
		parsed.rows.push_back(parse_snapshot(path, [&](std::size_t line, const std::string &msg) {
			errors.push_back({name, line, msg});
		}));
	}

	const auto meta_path = dir / series_metadata_file;
	if (fs::exists(meta_path)) {
		parsed.columns = read_metadata(meta_path, errors);
		std::map<std::string, Frequency> freq;
		for (const auto &c : parsed.columns)
			freq.emplace(c.id, c.frequency);
		for (std::size_t f = 0; f < parsed.files.size(); ++f) {
			const auto name = parsed.files[f].second.filename().string();
			for (const auto &row : parsed.rows[f]) {
				const auto it = freq.find(row.series_id);
				if (it == freq.end())
					errors.push_back({name, row.line, "series '" + row.series_id + "' is not listed in series.csv"});
				else if (!eligible_row(it->second, row.period))
					errors.push_back({name, row.line, "quarterly series '" + row.series_id +
					                                      "' observed outside a quarter-end month"});
			}
		}
	} else {
		std::map<std::string, bool> all_quarter_end;
		for (const auto &rows : parsed.rows)
			for (const auto &row : rows) {
				auto [it, inserted] = all_quarter_end.emplace(row.series_id, true);
				it->second = it->second && row.period.is_quarter_end();
			}
		for (const auto &[id, quarterly] : all_quarter_end) {
			const bool q = quarterly || id == target_id;
			parsed.columns.push_back(Column{id, q ? Frequency::quarterly : Frequency::monthly});
		}
		if (const auto it = all_quarter_end.find(target_id); it != all_quarter_end.end() && !it->second) {
			for (std::size_t f = 0; f < parsed.files.size(); ++f)
				for (const auto &row : parsed.rows[f])
					if (row.series_id == target_id && !row.period.is_quarter_end())
						errors.push_back({parsed.files[f].second.filename().string(), row.line,
						                  "target '" + target_id + "' observed outside a quarter-end month"});
		}
	}
	const bool has_target = std::any_of(parsed.columns.begin(), parsed.columns.end(),
	                                    [&](const Column &c) { return c.id == target_id; });
	if (!has_target)
		errors.push_back({dir.filename().string(), 0, "target series '" + target_id + "' not found"});
	return parsed;
}

VintageStore build_store(const ParsedDir &parsed, const std::string &target_id) {
	std::optional<Period> first;
	for (const auto &rows : parsed.rows)
		for (const auto &row : rows)
			if (!first || row.period < *first)
				first = row.period;
	if (!first)
		throw invalid("vintage directory holds no observations");
	std::map<std::string, std::size_t> index;
	for (std::size_t j = 0; j < parsed.columns.size(); ++j)
		index.emplace(parsed.columns[j].id, j);

	VintageStore store;
	for (std::size_t f = 0; f < parsed.files.size(); ++f) {
		Period last = *first;
		for (const auto &row : parsed.rows[f])
			last = std::max(last, row.period);
		MixedFrequencyDataset ds(parsed.columns, *first, static_cast<std::size_t>(last.index() - first->index() + 1),
		                         target_id);
		for (const auto &row : parsed.rows[f])
			ds.set(*ds.row_of(row.period), index.at(row.series_id), row.value);
		store.add(parsed.files[f].first, std::move(ds));
	}
	return store;
}

} // namespace

std::vector<SnapshotRow> read_snapshot_csv(const fs::path &path) {
	return parse_snapshot(path, [&](std::size_t line, const std::string &msg) -> void {
		throw Error(ErrorCode::parse, location(path, line) + ": " + msg);
	});
}

void write_snapshot_csv(const fs::path &path, const MixedFrequencyDataset &ds) {
	std::ofstream out(path);
	if (!out)
		throw Error(ErrorCode::io, "cannot write " + path.string());
	out << "date,series_id,value\n";
	for (std::size_t r = 0; r < ds.rows(); ++r)
		for (std::size_t j = 0; j < ds.cols(); ++j)
			if (ds.observed(r, j))
				out << format_period(ds.period_at(r)) << ',' << ds.column(j).id << ',' << format_value(ds.value(r, j))
				    << '\n';
	if (!out)
		throw Error(ErrorCode::io, "failed writing " + path.string());
}

std::vector<std::pair<Date, fs::path>> list_vintage_files(const fs::path &dir) {
	if (!fs::is_directory(dir))
		throw Error(ErrorCode::io, "not a directory: " + dir.string());
	std::vector<std::pair<Date, fs::path>> files;
	for (const auto &entry : fs::directory_iterator(dir)) {
		if (!entry.is_regular_file() || entry.path().extension() != ".csv")
			continue;
		const auto stem = entry.path().stem().string();
		if (stem.size() != 10)
			continue;
		try {
			files.emplace_back(parse_date(stem), entry.path());
		} catch (const Error &) {
			continue;
		}
	}
	std::sort(files.begin(), files.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
	return files;
}

VintageStore load_vintage_dir(const fs::path &dir, const std::string &target_id) {
	std::vector<IngestIssue> errors;
	const auto parsed = parse_dir(dir, target_id, errors);
	if (!errors.empty()) {
		const auto &e = errors.front();
		if (e.line == 0 && std::none_of(parsed.columns.begin(), parsed.columns.end(),
		                                [&](const Column &c) { return c.id == target_id; }))
			throw Error(ErrorCode::not_found, "target series '" + target_id + "' not found in " + dir.string());
		throw Error(ErrorCode::parse, e.file + ":" + std::to_string(e.line) + ": " + e.message);
	}
	return build_store(parsed, target_id);
}

void write_vintage_dir(const fs::path &dir, const VintageStore &store) {
	if (store.empty())
		throw invalid("cannot write an empty vintage store");
	fs::create_directories(dir);
	{
		std::ofstream meta(dir / series_metadata_file);
		if (!meta)
			throw Error(ErrorCode::io, "cannot write " + (dir / series_metadata_file).string());
		meta << "series_id,frequency\n";
		for (const auto &c : store.snapshot(0).columns())
			meta << c.id << ',' << to_string(c.frequency) << '\n';
	}
	for (std::size_t i = 0; i < store.size(); ++i)
		write_snapshot_csv(dir / (format_date(store.asof(i)) + ".csv"), store.snapshot(i));
}

IngestReport ingest_vintage_dir(const fs::path &dir, const std::string &target_id) {
	IngestReport report;
	const auto parsed = parse_dir(dir, target_id, report.errors);
	report.files = parsed.files.size();
	report.columns = parsed.columns;
	if (!report.errors.empty())
		return report;
	const auto store = build_store(parsed, target_id);
	for (std::size_t i = 0; i < store.size(); ++i) {
		const auto &ds = store.snapshot(i);
		std::vector<std::size_t> counts;
		for (std::size_t j = 0; j < ds.cols(); ++j)
			counts.push_back(ds.observed_count(j));
		report.census.emplace_back(store.asof(i), std::move(counts));
		report.profiles.emplace_back(store.asof(i), ragged_edge_profile(ds));
		if (i == 0)
			continue;
		const auto &prev = store.snapshot(i - 1);
		const auto name = format_date(store.asof(i)) + ".csv";
		for (std::size_t r = 0; r < prev.rows(); ++r)
			for (std::size_t j = 0; j < prev.cols(); ++j) {
				if (!prev.observed(r, j))
					continue;
				const auto row = ds.row_of(prev.period_at(r));
				if (!row || !ds.observed(*row, j))
					report.warnings.push_back({name, 0, "cell " + ds.column(j).id + "@" +
					                                        format_period(prev.period_at(r)) +
					                                        " observed in the previous snapshot is missing"});
			}
	}
	return report;
}

} // namespace nowcast
