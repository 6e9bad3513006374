#pragma once

#include "nowcast/calendar.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nowcast {

enum class Frequency { monthly, quarterly };

std::string_view to_string(Frequency f);
Frequency parse_frequency(std::string_view text);

/// Months between consecutive observations at a frequency.
constexpr int step_months(Frequency f) { return f == Frequency::monthly ? 1 : 3; }

/// One observed series. Absence of an observation is a missing key; stored
/// values are always finite, and quarterly series only carry quarter-end months.
class Series {
public:
	Series(std::string id, Frequency frequency, std::map<Period, double> observations = {});

	const std::string &id() const { return id_; }
	Frequency frequency() const { return frequency_; }
	const std::map<Period, double> &observations() const { return observations_; }
	std::size_t size() const { return observations_.size(); }

private:
	std::string id_;
	Frequency frequency_;
	std::map<Period, double> observations_;
};

/// g_t = x_t / x_{t-1} - 1 against the previous period at the series' own
/// frequency. No growth rate is produced across a gap.
Series period_over_period_growth(const Series &levels);

struct Column {
	std::string id;
	Frequency frequency = Frequency::monthly;

	friend bool operator==(const Column &, const Column &) = default;
};

/// Aligned monthly grid of series with explicit missingness.
///
/// Rows are contiguous months starting at first_period(). A raw dataset keeps
/// quarterly columns in quarter-end rows only; a filled dataset (the output of
/// an imputation routine) may hold values in every row of non-target columns.
class MixedFrequencyDataset {
public:
	MixedFrequencyDataset(std::vector<Column> columns, Period first, std::size_t rows, std::string target_id);

	std::size_t rows() const { return rows_; }
	std::size_t cols() const { return columns_.size(); }
	Period first_period() const { return first_; }
	Period last_period() const { return first_.plus_months(static_cast<int>(rows_) - 1); }
	Period period_at(std::size_t row) const { return first_.plus_months(static_cast<int>(row)); }
	std::optional<std::size_t> row_of(Period p) const;

	const std::vector<Column> &columns() const { return columns_; }
	const Column &column(std::size_t col) const { return columns_.at(col); }
	std::optional<std::size_t> find_column(std::string_view id) const;
	/// Throws not_found.
	std::size_t column_index(std::string_view id) const;
	const std::string &target_id() const { return target_id_; }
	std::size_t target_index() const { return target_index_; }

	bool observed(std::size_t row, std::size_t col) const { return present_[offset(row, col)] != 0; }
	std::optional<double> at(std::size_t row, std::size_t col) const;
	/// Value of an observed cell; undefined on a missing one.
	double value(std::size_t row, std::size_t col) const { return values_[offset(row, col)]; }

	void set(std::size_t row, std::size_t col, double value);
	void clear(std::size_t row, std::size_t col);

	/// Observed values of one column in row order.
	std::vector<double> observed_values(std::size_t col) const;
	std::size_t observed_count(std::size_t col) const;

	bool filled() const { return filled_; }
	void mark_filled() { filled_ = true; }

	/// Copy with missing rows appended so the grid reaches `last`; never truncates.
	MixedFrequencyDataset extended_to(Period last) const;
	/// Copy restricted to rows up to and including `last`.
	MixedFrequencyDataset truncated_to(Period last) const;

	friend bool operator==(const MixedFrequencyDataset &a, const MixedFrequencyDataset &b);

private:
	std::size_t offset(std::size_t row, std::size_t col) const { return row * columns_.size() + col; }

	std::vector<Column> columns_;
	Period first_;
	std::size_t rows_;
	std::string target_id_;
	std::size_t target_index_ = 0;
	std::vector<double> values_;
	std::vector<unsigned char> present_;
	bool filled_ = false;
};

struct AlignOptions {
	/// Drop observations outside the range instead of failing.
	bool truncate = false;
};

MixedFrequencyDataset align(const std::vector<Series> &series, Period first, Period last, const std::string &target_id,
                            AlignOptions options = {});

/// Extract one column back into a Series.
Series column_series(const MixedFrequencyDataset &ds, std::size_t col);

/// Ragged-edge description of one column. Only rows where the column can be
/// observed count: every row for monthly columns, quarter-end rows for quarterly.
struct ColumnEdge {
	std::optional<Period> latest;
	/// Missing eligible rows before `latest`.
	std::vector<Period> interior_missing;
	/// Missing eligible rows after `latest` (all eligible rows when nothing is observed).
	std::size_t trailing_missing = 0;

	friend bool operator==(const ColumnEdge &, const ColumnEdge &) = default;
};

struct RaggedEdgeProfile {
	std::vector<std::string> column_ids;
	std::vector<ColumnEdge> edges;
	Period last_row;

	friend bool operator==(const RaggedEdgeProfile &, const RaggedEdgeProfile &) = default;
};

bool eligible_row(Frequency f, Period p);

RaggedEdgeProfile ragged_edge_profile(const MixedFrequencyDataset &ds);

/// Mask a dataset so that its missing pattern matches `profile`: clears the
/// interior gaps and every eligible row after `latest`.
MixedFrequencyDataset apply_profile(const MixedFrequencyDataset &ds, const RaggedEdgeProfile &profile);

} // namespace nowcast
