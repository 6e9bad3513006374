#pragma once

#include "nowcast/vintage.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nowcast {

struct DgpSeries {
	std::string id;
	Frequency frequency = Frequency::monthly;
	double loading = 1.0;
	double noise_sd = 0.0;
	/// Months after the end of the reference period before publication.
	int publication_lag = 1;
	/// Day of the release month on which the value appears.
	int release_day = 1;
};

struct CrisisWindow {
	Period start;
	int length = 3;
	/// Added to every factor innovation inside the window.
	double shock = -3.0;
};

/// Factor-driven mixed-frequency process with publication lags, an optional
/// crisis shock and a monthly-then-weekly vintage calendar.
struct DgpConfig {
	Period start{2005, 1};
	std::size_t t_months = 120;
	double factor_ar = 0.7;
	double factor_variance = 1.0;
	std::vector<DgpSeries> series;
	std::string target_id = "target";
	std::optional<CrisisWindow> crisis;
	Date vintage_start{};
	/// First weekly vintage; vintages before it are monthly.
	Date cadence_switch{};
	Date vintage_end{};
	/// Publish the newest value of each series with noise, corrected in the next snapshot.
	bool revisions = false;
	double revision_sd = 0.002;
	std::uint64_t seed = 1;

	/// Last simulated month.
	Period end() const { return start.plus_months(static_cast<int>(t_months) - 1); }
	std::size_t n_monthly() const;
	std::size_t n_quarterly() const;

	void validate() const;
};

/// A ready-made configuration: `n_monthly` monthly indicators m1.. with lags 1-2,
/// `n_quarterly` quarterly series (the target first, then q1..) with lag 2, loadings
/// on the scale of growth fractions, a crisis in the second-to-last year and
/// vintages from October two years before the sample end onwards.
DgpConfig standard_dgp(std::size_t n_monthly, std::size_t n_quarterly, std::size_t t_months, std::uint64_t seed,
                       Period start = Period{2005, 1});

struct Simulation {
	MixedFrequencyDataset truth;
	VintageStore store;
	std::vector<double> factor;
};

/// Date on which the observation of `period` is first published.
Date release_date(const DgpSeries &series, Period period);
std::vector<Date> vintage_dates(const DgpConfig &config);

Simulation simulate(const DgpConfig &config);

} // namespace nowcast
