#include "nowcast/dataset.hpp"

#include "nowcast/error.hpp"

#include <cmath>
#include <set>

namespace nowcast {

std::string_view to_string(Frequency f) { return f == Frequency::monthly ? "monthly" : "quarterly"; }

Frequency parse_frequency(std::string_view text) {
	if (text == "monthly" || text == "m" || text == "M")
		return Frequency::monthly;
	if (text == "quarterly" || text == "q" || text == "Q")
		return Frequency::quarterly;
	throw Error(ErrorCode::parse, "unknown frequency '" + std::string(text) + "'");
}

bool eligible_row(Frequency f, Period p) { return f == Frequency::monthly || p.is_quarter_end(); }

Series::Series(std::string id, Frequency frequency, std::map<Period, double> observations)
    : id_(std::move(id)), frequency_(frequency), observations_(std::move(observations)) {
	if (id_.empty())
		throw invalid("series id must not be empty");
	for (const auto &[period, value] : observations_) {
		if (!std::isfinite(value))
			throw invalid("series '" + id_ + "' has a non-finite value at " + format_period(period));
		if (!eligible_row(frequency_, period))
			throw invalid("quarterly series '" + id_ + "' has an observation outside a quarter-end month at " +
			              format_period(period));
	}
}

Series period_over_period_growth(const Series &levels) {
	if (levels.size() < 2)
		throw invalid("growth rates of '" + levels.id() + "' need at least 2 observations");
	const int step = step_months(levels.frequency());
	std::map<Period, double> growth;
	const auto &obs = levels.observations();
	for (const auto &[period, value] : obs) {
		const auto prev = obs.find(period.plus_months(-step));
		if (prev == obs.end())
			continue;
		if (prev->second == 0.0)
			throw Error(ErrorCode::numeric, "growth rate of '" + levels.id() + "' at " + format_period(period) +
			                                    ": predecessor " + format_period(prev->first) + " is zero");
		growth.emplace(period, value / prev->second - 1.0);
	}
	if (growth.empty())
		throw invalid("series '" + levels.id() + "' has no consecutive pair of observations");
	return Series(levels.id(), levels.frequency(), std::move(growth));
}

MixedFrequencyDataset::MixedFrequencyDataset(std::vector<Column> columns, Period first, std::size_t rows,
                                             std::string target_id)
    : columns_(std::move(columns)), first_(first), rows_(rows), target_id_(std::move(target_id)),
      values_(rows_ * columns_.size(), 0.0), present_(rows_ * columns_.size(), 0) {
	std::set<std::string> seen;
	for (const auto &c : columns_)
		if (!seen.insert(c.id).second)
			throw invalid("duplicate column id '" + c.id + "'");
	const auto target = find_column(target_id_);
	if (!target)
		throw invalid("target column '" + target_id_ + "' is not among the dataset columns");
	if (columns_[*target].frequency != Frequency::quarterly)
		throw invalid("target column '" + target_id_ + "' must be quarterly");
	target_index_ = *target;
}

std::optional<std::size_t> MixedFrequencyDataset::row_of(Period p) const {
	const int delta = p.index() - first_.index();
	if (delta < 0 || static_cast<std::size_t>(delta) >= rows_)
		return std::nullopt;
	return static_cast<std::size_t>(delta);
}

std::optional<std::size_t> MixedFrequencyDataset::find_column(std::string_view id) const {
	for (std::size_t j = 0; j < columns_.size(); ++j)
		if (columns_[j].id == id)
			return j;
	return std::nullopt;
}

std::size_t MixedFrequencyDataset::column_index(std::string_view id) const {
	const auto j = find_column(id);
	if (!j)
		throw Error(ErrorCode::not_found, "no column '" + std::string(id) + "' in dataset");
	return *j;
}

std::optional<double> MixedFrequencyDataset::at(std::size_t row, std::size_t col) const {
	if (!observed(row, col))
		return std::nullopt;
	return value(row, col);
}

void MixedFrequencyDataset::set(std::size_t row, std::size_t col, double value) {
	if (row >= rows_ || col >= columns_.size())
		throw invalid("cell index out of range");
	if (!std::isfinite(value))
		throw invalid("non-finite value for column '" + columns_[col].id + "' at " + format_period(period_at(row)));
	const bool strict = !filled_ || col == target_index_;
	if (strict && !eligible_row(columns_[col].frequency, period_at(row)))
		throw invalid("quarterly column '" + columns_[col].id + "' cannot hold a value at " +
		              format_period(period_at(row)));
	values_[offset(row, col)] = value;
	present_[offset(row, col)] = 1;
}

void MixedFrequencyDataset::clear(std::size_t row, std::size_t col) {
	if (row >= rows_ || col >= columns_.size())
		throw invalid("cell index out of range");
	values_[offset(row, col)] = 0.0;
	present_[offset(row, col)] = 0;
}

std::vector<double> MixedFrequencyDataset::observed_values(std::size_t col) const {
	std::vector<double> out;
	for (std::size_t r = 0; r < rows_; ++r)
		if (observed(r, col))
			out.push_back(value(r, col));
	return out;
}

std::size_t MixedFrequencyDataset::observed_count(std::size_t col) const {
	std::size_t n = 0;
	for (std::size_t r = 0; r < rows_; ++r)
		n += observed(r, col) ? 1 : 0;
	return n;
}

MixedFrequencyDataset MixedFrequencyDataset::extended_to(Period last) const {
	if (last <= last_period())
		return *this;
	MixedFrequencyDataset out(columns_, first_, static_cast<std::size_t>(last.index() - first_.index() + 1), target_id_);
	out.filled_ = filled_;
	std::copy(values_.begin(), values_.end(), out.values_.begin());
	std::copy(present_.begin(), present_.end(), out.present_.begin());
	return out;
}

MixedFrequencyDataset MixedFrequencyDataset::truncated_to(Period last) const {
	if (last >= last_period())
		return *this;
	if (last < first_)
		throw invalid("cannot truncate a dataset before its first period " + format_period(first_));
	const auto rows = static_cast<std::size_t>(last.index() - first_.index() + 1);
	MixedFrequencyDataset out(columns_, first_, rows, target_id_);
	out.filled_ = filled_;
	const auto n = rows * columns_.size();
	std::copy(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(n), out.values_.begin());
	std::copy(present_.begin(), present_.begin() + static_cast<std::ptrdiff_t>(n), out.present_.begin());
	return out;
}

bool operator==(const MixedFrequencyDataset &a, const MixedFrequencyDataset &b) {
	if (a.columns_ != b.columns_ || a.first_ != b.first_ || a.rows_ != b.rows_ || a.target_id_ != b.target_id_ ||
	    a.present_ != b.present_)
		return false;
	for (std::size_t k = 0; k < a.values_.size(); ++k)
		if (a.present_[k] && a.values_[k] != b.values_[k])
			return false;
	return true;
}

MixedFrequencyDataset align(const std::vector<Series> &series, Period first, Period last, const std::string &target_id,
                            AlignOptions options) {
	if (last < first)
		throw invalid("alignment range is empty: " + format_period(first) + " to " + format_period(last));
	std::vector<Column> columns;
	columns.reserve(series.size());
	for (const auto &s : series)
		columns.push_back(Column{s.id(), s.frequency()});
	MixedFrequencyDataset ds(std::move(columns), first, static_cast<std::size_t>(last.index() - first.index() + 1),
	                         target_id);
	for (std::size_t j = 0; j < series.size(); ++j) {
		for (const auto &[period, value] : series[j].observations()) {
			const auto row = ds.row_of(period);
			if (!row) {
				if (options.truncate)
					continue;
				throw invalid("observation of '" + series[j].id() + "' at " + format_period(period) +
				              " lies outside the alignment range");
			}
			ds.set(*row, j, value);
		}
	}
	return ds;
}

Series column_series(const MixedFrequencyDataset &ds, std::size_t col) {
	std::map<Period, double> obs;
	for (std::size_t r = 0; r < ds.rows(); ++r)
		if (ds.observed(r, col))
			obs.emplace(ds.period_at(r), ds.value(r, col));
	return Series(ds.column(col).id, ds.column(col).frequency, std::move(obs));
}

RaggedEdgeProfile ragged_edge_profile(const MixedFrequencyDataset &ds) {
	RaggedEdgeProfile profile;
	profile.last_row = ds.last_period();
	for (std::size_t j = 0; j < ds.cols(); ++j) {
		const auto freq = ds.column(j).frequency;
		ColumnEdge edge;
		std::optional<std::size_t> latest_row;
		for (std::size_t r = ds.rows(); r-- > 0;) {
			if (ds.observed(r, j)) {
				latest_row = r;
				break;
			}
		}
		for (std::size_t r = 0; r < ds.rows(); ++r) {
			const Period p = ds.period_at(r);
			if (!eligible_row(freq, p) || ds.observed(r, j))
				continue;
			if (latest_row && r < *latest_row)
				edge.interior_missing.push_back(p);
			else
				++edge.trailing_missing;
		}
		if (latest_row)
			edge.latest = ds.period_at(*latest_row);
		profile.column_ids.push_back(ds.column(j).id);
		profile.edges.push_back(std::move(edge));
	}
	return profile;
}

MixedFrequencyDataset apply_profile(const MixedFrequencyDataset &ds, const RaggedEdgeProfile &profile) {
	if (profile.column_ids.size() != ds.cols())
		throw invalid("profile does not describe this dataset's columns");
	MixedFrequencyDataset out = ds;
	for (std::size_t j = 0; j < ds.cols(); ++j) {
		if (profile.column_ids[j] != ds.column(j).id)
			throw invalid("profile column '" + profile.column_ids[j] + "' does not match '" + ds.column(j).id + "'");
		const auto &edge = profile.edges[j];
		for (const Period p : edge.interior_missing)
			if (const auto row = out.row_of(p))
				out.clear(*row, j);
		for (std::size_t r = 0; r < out.rows(); ++r)
			if (!edge.latest || out.period_at(r) > *edge.latest)
				out.clear(r, j);
	}
	return out;
}

} // namespace nowcast
