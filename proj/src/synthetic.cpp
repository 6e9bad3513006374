#include "nowcast/synthetic.hpp"

#include "nowcast/error.hpp"
#include "nowcast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace nowcast {

std::size_t DgpConfig::n_monthly() const {
	return static_cast<std::size_t>(std::count_if(series.begin(), series.end(),
	                                              [](const DgpSeries &s) { return s.frequency == Frequency::monthly; }));
}

std::size_t DgpConfig::n_quarterly() const { return series.size() - n_monthly(); }

void DgpConfig::validate() const {
	if (t_months < 12)
		throw invalid("simulation needs at least 12 months");
	if (!(std::abs(factor_ar) < 1.0) || !(factor_variance > 0.0))
		throw invalid("factor needs |ar| < 1 and a positive innovation variance");
	std::set<std::string> ids;
	bool has_target = false;
	for (const auto &s : series) {
		if (!ids.insert(s.id).second)
			throw invalid("duplicate simulated series '" + s.id + "'");
		if (s.publication_lag < 0)
			throw invalid("publication lag of '" + s.id + "' must be non-negative");
		if (s.release_day < 1 || s.release_day > 28)
			throw invalid("release day of '" + s.id + "' must lie in 1..28");
		if (!(s.noise_sd >= 0.0) || !std::isfinite(s.loading))
			throw invalid("series '" + s.id + "' has an invalid loading or noise level");
		if (s.id == target_id) {
			has_target = true;
			if (s.frequency != Frequency::quarterly)
				throw invalid("simulated target must be quarterly");
		}
	}
	if (!has_target)
		throw invalid("target '" + target_id + "' is not among the simulated series");
	if (series.size() < 2)
		throw invalid("simulation needs the target and at least one indicator");
	if (crisis) {
		if (crisis->length < 1 || crisis->start < start || crisis->start.plus_months(crisis->length - 1) > end())
			throw invalid("crisis window must lie inside the simulated sample");
	}
	if (!vintage_start.ok() || !cadence_switch.ok() || !vintage_end.ok())
		throw invalid("vintage calendar dates are not set");
	if (!(vintage_start <= cadence_switch && cadence_switch <= vintage_end))
		throw invalid("vintage calendar must satisfy start <= cadence switch <= end");
	if (vintage_start < first_day(start) || period_of(cadence_switch) > end())
		throw invalid("cadence switch must fall inside the simulated sample");
}

DgpConfig standard_dgp(std::size_t n_monthly, std::size_t n_quarterly, std::size_t t_months, std::uint64_t seed,
                       Period start) {
	if (n_monthly < 1 || n_quarterly < 1)
		throw invalid("standard simulation needs at least one monthly and one quarterly series");
	DgpConfig c;
	c.start = start;
	c.t_months = t_months;
	c.seed = seed;
	c.series.push_back(DgpSeries{c.target_id, Frequency::quarterly, 0.02, 0.004, 2, 1});
	for (std::size_t i = 0; i < n_monthly; ++i) {
		const double loading = (i % 3 == 2 ? -1.0 : 1.0) * (0.008 + 0.002 * static_cast<double>(i % 4));
		c.series.push_back(DgpSeries{"m" + std::to_string(i + 1), Frequency::monthly, loading, 0.004,
		                             1 + static_cast<int>(i % 2), 1 + static_cast<int>((7 * i) % 28)});
	}
	for (std::size_t i = 1; i < n_quarterly; ++i)
		c.series.push_back(DgpSeries{"q" + std::to_string(i), Frequency::quarterly, 0.015, 0.004, 2, 15});
	const Period end = c.end();
	c.crisis = CrisisWindow{Period{end.year - 1, 4}, 2, -3.0};
	c.vintage_start = first_day(Period{end.year - 2, 10});
	c.cadence_switch = first_day(Period{end.year - 1, 8});
	c.vintage_end = first_day(end.plus_months(1));
	return c;
}

Date release_date(const DgpSeries &series, Period period) {
	const Period month = period.plus_months(series.publication_lag);
	return Date{std::chrono::year{month.year}, std::chrono::month{static_cast<unsigned>(month.month)},
	            std::chrono::day{static_cast<unsigned>(series.release_day)}};
}

std::vector<Date> vintage_dates(const DgpConfig &config) {
	std::vector<Date> dates;
	using namespace std::chrono;
	for (Date d = config.vintage_start; d < config.cadence_switch;) {
		dates.push_back(d);
		year_month_day next = d + months{1};
		if (!next.ok())
			next = year_month_day{next.year() / next.month() / last};
		d = next;
	}
	for (Date d = config.cadence_switch; d <= config.vintage_end; d = add_days(d, 7))
		dates.push_back(d);
	return dates;
}

Simulation simulate(const DgpConfig &config) {
	config.validate();
	Rng rng(config.seed);
	const std::size_t months = config.t_months;
	std::vector<double> factor(months);
	const double innovation_sd = std::sqrt(config.factor_variance);
	double previous = rng.normal() * innovation_sd / std::sqrt(1.0 - config.factor_ar * config.factor_ar);
	for (std::size_t t = 0; t < months; ++t) {
		const Period p = config.start.plus_months(static_cast<int>(t));
		double shock = rng.normal() * innovation_sd;
		if (config.crisis && p >= config.crisis->start && p < config.crisis->start.plus_months(config.crisis->length))
			shock += config.crisis->shock;
		factor[t] = config.factor_ar * previous + shock;
		previous = factor[t];
	}

	std::vector<Column> columns;
	for (const auto &s : config.series)
		columns.push_back(Column{s.id, s.frequency});
	MixedFrequencyDataset truth(columns, config.start, months, config.target_id);
	for (std::size_t t = 0; t < months; ++t) {
		const Period p = config.start.plus_months(static_cast<int>(t));
		for (std::size_t j = 0; j < config.series.size(); ++j) {
			const auto &s = config.series[j];
			const double noise = rng.normal() * s.noise_sd;
			if (eligible_row(s.frequency, p))
				truth.set(t, j, s.loading * factor[t] + noise);
		}
	}

	Simulation sim{truth, {}, factor};
	Rng revision_rng(config.seed ^ 0x5851f42d4c957f2dULL);
	const auto dates = vintage_dates(config);
	std::vector<int> published_through(config.series.size(), -1); // row index of last published cell
	for (const Date asof : dates) {
		std::vector<int> latest(config.series.size(), -1);
		int last_row = 0;
		for (std::size_t j = 0; j < config.series.size(); ++j)
			for (std::size_t t = 0; t < months; ++t) {
				if (!truth.observed(t, j))
					continue;
				if (release_date(config.series[j], truth.period_at(t)) <= asof) {
					latest[j] = static_cast<int>(t);
					last_row = std::max(last_row, static_cast<int>(t));
				}
			}
		MixedFrequencyDataset snap(columns, config.start, static_cast<std::size_t>(last_row + 1), config.target_id);
		for (std::size_t j = 0; j < config.series.size(); ++j) {
			for (int t = 0; t <= latest[j]; ++t)
				if (truth.observed(static_cast<std::size_t>(t), j))
					snap.set(static_cast<std::size_t>(t), j, truth.value(static_cast<std::size_t>(t), j));
			// A value is preliminary only in the snapshot that first publishes it.
			if (config.revisions && latest[j] > published_through[j])
				snap.set(static_cast<std::size_t>(latest[j]), j,
				         truth.value(static_cast<std::size_t>(latest[j]), j) + revision_rng.normal() * config.revision_sd);
			published_through[j] = std::max(published_through[j], latest[j]);
		}
		sim.store.add(asof, std::move(snap));
	}
	return sim;
}

} // namespace nowcast
