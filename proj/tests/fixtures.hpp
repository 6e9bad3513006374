#pragma once

#include "nowcast/dataset.hpp"
#include "nowcast/error.hpp"
#include "nowcast/rng.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace fixtures {

inline constexpr double NA = std::numeric_limits<double>::quiet_NaN();

/// Dataset from a row-major value table; NaN marks a missing cell.
inline nowcast::MixedFrequencyDataset make_dataset(const std::vector<nowcast::Column> &columns, nowcast::Period first,
                                                   const std::vector<std::vector<double>> &rows,
                                                   const std::string &target) {
	nowcast::MixedFrequencyDataset ds(columns, first, rows.size(), target);
	for (std::size_t r = 0; r < rows.size(); ++r)
		for (std::size_t j = 0; j < columns.size(); ++j)
			if (!std::isnan(rows[r][j]))
				ds.set(r, j, rows[r][j]);
	return ds;
}

/// Days since 1970-01-01 by Julian Day Number arithmetic.
inline long julian_days(int y, int m, int d) {
	const int a = (14 - m) / 12;
	const long yy = y + 4800 - a;
	const long mm = m + 12 * a - 3;
	const long jdn = d + (153 * mm + 2) / 5 + 365 * yy + yy / 4 - yy / 100 + yy / 400 - 32045;
	return jdn - 2440588;
}

inline std::filesystem::path scratch_dir(const std::string &name) {
	auto dir = std::filesystem::temp_directory_path() / ("nowcast_test_" + name);
	std::filesystem::remove_all(dir);
	std::filesystem::create_directories(dir);
	return dir;
}

struct Simulated {
	nowcast::MixedFrequencyDataset ds;
	std::vector<double> factor;
};

// Column 0 is the quarterly target, the rest monthly.
inline Simulated simulate_factor(const std::vector<double> &loadings, const std::vector<double> &noise_var, double phi,
                          std::size_t T, std::uint64_t seed) {
	std::vector<nowcast::Column> cols{{"target", nowcast::Frequency::quarterly}};
	for (std::size_t i = 1; i < loadings.size(); ++i)
		cols.push_back({"x" + std::to_string(i), nowcast::Frequency::monthly});
	nowcast::MixedFrequencyDataset ds(cols, {2000, 1}, T, "target");
	nowcast::Rng rng(seed);
	std::vector<double> f(T);
	double prev = rng.normal() / std::sqrt(1 - phi * phi);
	for (std::size_t t = 0; t < T; ++t) {
		f[t] = phi * prev + rng.normal();
		prev = f[t];
		for (std::size_t i = 0; i < loadings.size(); ++i) {
			const double y = 0.3 * static_cast<double>(i) + loadings[i] * f[t] + std::sqrt(noise_var[i]) * rng.normal();
			if (i > 0 || ds.period_at(t).is_quarter_end())
				ds.set(t, i, y);
		}
	}
	return {ds, f};
}

struct CurveRow {
	std::string model;
	std::string target_period;
	std::string asof;
	int day_difference = 0;
	double prediction = 0.0;
	double actual = NA;
};

/// Rows of a curves CSV; throws on a header mismatch.
inline std::vector<CurveRow> read_curves_csv(const std::filesystem::path &path) {
	std::ifstream in(path);
	std::string line;
	if (!std::getline(in, line) || line != "model,target_period,asof_date,day_difference,prediction,actual")
		throw std::runtime_error("unexpected curves header in " + path.string());
	std::vector<CurveRow> rows;
	while (std::getline(in, line)) {
		std::vector<std::string> f;
		std::stringstream ss(line);
		for (std::string cell; std::getline(ss, cell, ',');)
			f.push_back(cell);
		if (f.size() != 6)
			throw std::runtime_error("bad curves row: " + line);
		rows.push_back({f[0], f[1], f[2], std::stoi(f[3]), std::stod(f[4]), f[5] == "NA" ? NA : std::stod(f[5])});
	}
	return rows;
}

} // namespace fixtures
