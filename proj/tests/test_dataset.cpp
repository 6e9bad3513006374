#include "fixtures.hpp"
#include "nowcast/error.hpp"

#include <doctest.h>

using namespace nowcast;
using fixtures::NA;

namespace {

Series monthly(const std::string &id, Period first, const std::vector<double> &values) {
	std::map<Period, double> obs;
	for (std::size_t i = 0; i < values.size(); ++i)
		if (!std::isnan(values[i]))
			obs[first.plus_months(static_cast<int>(i))] = values[i];
	return Series(id, Frequency::monthly, obs);
}

std::vector<double> values_of(const Series &s) {
	std::vector<double> out;
	for (const auto &[p, v] : s.observations())
		out.push_back(v);
	return out;
}

} // namespace

TEST_CASE("series invariants") {
	CHECK_THROWS_AS(Series("", Frequency::monthly), Error);
	CHECK_THROWS_AS(Series("q", Frequency::quarterly, {{Period{2020, 2}, 1.0}}), Error);
	CHECK_THROWS_AS(Series("m", Frequency::monthly, {{Period{2020, 2}, NA}}), Error);
	CHECK(parse_frequency("quarterly") == Frequency::quarterly);
	CHECK(parse_frequency("m") == Frequency::monthly);
	CHECK_THROWS_AS(parse_frequency("weekly"), Error);
}

TEST_CASE("growth rates") {
	const Period p{2020, 1};
	CHECK(values_of(period_over_period_growth(monthly("a", p, {5, 5, 5}))) == std::vector<double>{0, 0});

	const auto g = values_of(period_over_period_growth(monthly("a", p, {100, 110, 99})));
	REQUIRE(g.size() == 2);
	CHECK(g[0] == doctest::Approx(110.0 / 100.0 - 1.0).epsilon(1e-15));
	CHECK(g[1] == doctest::Approx(99.0 / 110.0 - 1.0).epsilon(1e-15));
	CHECK(g[0] == doctest::Approx(0.10));
	CHECK(g[1] == doctest::Approx(-0.10));

	try {
		period_over_period_growth(monthly("a", p, {100, 0, 50}));
		FAIL("expected an error");
	} catch (const Error &e) {
		CHECK(std::string(e.what()).find("2020-02") != std::string::npos);
	}
	CHECK_THROWS_AS(period_over_period_growth(monthly("a", p, {1})), Error);
}

TEST_CASE("growth skips gaps and uses the series frequency") {
	const auto g = period_over_period_growth(monthly("a", {2020, 1}, {1, 2, NA, 4, 8}));
	CHECK(g.observations().size() == 2);
	CHECK(g.observations().at(Period{2020, 2}) == 1.0);
	CHECK(g.observations().at(Period{2020, 5}) == 1.0);

	const Series q("q", Frequency::quarterly, {{Period{2020, 3}, 10.0}, {Period{2020, 6}, 12.0}, {Period{2020, 12}, 6.0}});
	const auto gq = period_over_period_growth(q);
	REQUIRE(gq.size() == 1);
	CHECK(gq.observations().at(Period{2020, 6}) == doctest::Approx(0.2));
}

TEST_CASE("growth then cumulative reconstruction recovers levels") {
	std::mt19937_64 gen(11);
	std::uniform_real_distribution<double> u(50.0, 150.0);
	std::vector<double> levels(40);
	for (auto &v : levels)
		v = u(gen);
	const auto g = values_of(period_over_period_growth(monthly("a", {2001, 1}, levels)));
	double x = levels[0];
	for (std::size_t i = 0; i < g.size(); ++i) {
		x *= 1.0 + g[i];
		CHECK(std::fabs(x - levels[i + 1]) / levels[i + 1] < 1e-12);
	}
}

TEST_CASE("align places observations on the monthly grid") {
	const Period first{2020, 1};
	const auto dense = align({Series("t", Frequency::quarterly), monthly("m", first, {1, 2, 3, 4, 5, 6})}, first,
	                         Period{2020, 6}, "t");
	CHECK(dense.rows() == 6);
	CHECK(dense.observed_count(1) == 6);

	const Series q("t", Frequency::quarterly, {{Period{2020, 3}, 0.1}, {Period{2020, 6}, 0.2}});
	const auto ds = align({q}, first, Period{2020, 6}, "t");
	CHECK(ds.observed_count(0) == 2);
	CHECK(ds.observed(2, 0));
	CHECK(ds.observed(5, 0));
	CHECK(ds.value(5, 0) == 0.2);

	CHECK_THROWS_AS(align({q, q}, first, Period{2020, 6}, "t"), Error);
	CHECK_THROWS_AS(align({q}, first, Period{2020, 3}, "t"), Error);
	CHECK(align({q}, first, Period{2020, 3}, "t", AlignOptions{true}).observed_count(0) == 1);
	CHECK_THROWS_AS(align({monthly("m", first, {1})}, first, Period{2020, 3}, "t"), Error);
}

TEST_CASE("align is lossless for in-range observations") {
	const Period first{2019, 11};
	const auto m = monthly("m", first, {0.5, NA, -1.25, 3e-17, 7});
	const Series t("t", Frequency::quarterly, {{Period{2019, 12}, 1.0 / 3.0}, {Period{2020, 3}, -2.0}});
	const auto ds = align({t, m}, first, Period{2020, 3}, "t");
	CHECK(column_series(ds, 1).observations() == m.observations());
	CHECK(column_series(ds, 0).observations() == t.observations());
}

TEST_CASE("quarterly columns reject intra-quarter cells") {
	MixedFrequencyDataset ds({{"t", Frequency::quarterly}}, {2020, 1}, 3, "t");
	CHECK_THROWS_AS(ds.set(0, 0, 1.0), Error);
	CHECK_NOTHROW(ds.set(2, 0, 1.0));
	CHECK_THROWS_AS(MixedFrequencyDataset({{"t", Frequency::monthly}}, {2020, 1}, 3, "t"), Error);
	CHECK_THROWS_AS(MixedFrequencyDataset({{"t", Frequency::quarterly}}, {2020, 1}, 3, "x"), Error);
}

TEST_CASE("ragged edge profiles") {
	const std::vector<Column> cols{{"t", Frequency::quarterly}, {"a", Frequency::monthly}, {"b", Frequency::monthly}};
	SUBCASE("dense") {
		const auto ds = fixtures::make_dataset(cols, {2020, 1}, {{NA, 1, 1}, {NA, 2, 2}, {3, 3, 3}}, "t");
		const auto prof = ragged_edge_profile(ds);
		for (std::size_t j = 0; j < 3; ++j) {
			CHECK(prof.edges[j].interior_missing.empty());
			CHECK(prof.edges[j].trailing_missing == 0);
			CHECK(*prof.edges[j].latest == Period{2020, 3});
		}
	}
	SUBCASE("trailing gap of 3") {
		const auto ds = fixtures::make_dataset(
		    cols, {2020, 1}, {{NA, 1, 1}, {NA, 2, 2}, {3, 3, NA}, {NA, 4, NA}, {NA, 5, NA}, {6, 6, 6}}, "t");
		auto prof = ragged_edge_profile(ds);
		CHECK(prof.edges[2].interior_missing == std::vector<Period>{{2020, 3}, {2020, 4}, {2020, 5}});
		CHECK(prof.edges[2].trailing_missing == 0);

		const auto ds2 = fixtures::make_dataset(
		    cols, {2020, 1}, {{NA, 1, 1}, {NA, 2, 2}, {3, 3, 3}, {NA, 4, NA}, {NA, 5, NA}, {6, 6, NA}}, "t");
		prof = ragged_edge_profile(ds2);
		CHECK(prof.edges[2].trailing_missing == 3);
		CHECK(prof.edges[2].interior_missing.empty());
		CHECK(*prof.edges[2].latest == Period{2020, 3});
	}
	SUBCASE("one interior gap") {
		const auto ds = fixtures::make_dataset(cols, {2020, 1}, {{NA, 1, 1}, {NA, NA, 2}, {3, 3, 3}}, "t");
		const auto prof = ragged_edge_profile(ds);
		CHECK(prof.edges[1].interior_missing == std::vector<Period>{{2020, 2}});
		CHECK(*prof.edges[1].latest == Period{2020, 3});
		CHECK(prof.edges[0].interior_missing.empty());
	}
	SUBCASE("all missing column") {
		const auto ds = fixtures::make_dataset(cols, {2020, 1}, {{NA, 1, NA}, {NA, 1, NA}, {NA, 3, NA}}, "t");
		const auto prof = ragged_edge_profile(ds);
		CHECK_FALSE(prof.edges[2].latest.has_value());
		CHECK(prof.edges[2].trailing_missing == 3);
		CHECK_FALSE(prof.edges[0].latest.has_value());
		CHECK(prof.edges[0].trailing_missing == 1);
	}
}

TEST_CASE("monthly plus quarterly with the monthly series ending two months early") {
	const Period first{2020, 1};
	const Series t("t", Frequency::quarterly, {{Period{2020, 3}, 1.0}, {Period{2020, 6}, 2.0}});
	const auto ds = align({t, monthly("m", first, {1, 2, 3, 4})}, first, Period{2020, 6}, "t");
	const auto prof = ragged_edge_profile(ds);
	CHECK(prof.edges[1].trailing_missing == 2);
	CHECK(*prof.edges[1].latest == Period{2020, 4});
	CHECK(prof.edges[1].interior_missing.empty());
	CHECK(prof.edges[0].trailing_missing == 0);
}

TEST_CASE("masking by a profile round-trips") {
	std::mt19937_64 gen(3);
	std::bernoulli_distribution drop(0.3);
	const std::vector<Column> cols{{"t", Frequency::quarterly}, {"a", Frequency::monthly}, {"b", Frequency::monthly},
	                               {"q", Frequency::quarterly}};
	for (int trial = 0; trial < 50; ++trial) {
		MixedFrequencyDataset dense(cols, {2018, 1}, 12, "t");
		MixedFrequencyDataset sparse = dense;
		for (std::size_t r = 0; r < 12; ++r)
			for (std::size_t j = 0; j < cols.size(); ++j)
				if (eligible_row(cols[j].frequency, dense.period_at(r))) {
					dense.set(r, j, static_cast<double>(r + j));
					if (!drop(gen))
						sparse.set(r, j, static_cast<double>(r + j));
				}
		const auto prof = ragged_edge_profile(sparse);
		const auto masked = apply_profile(dense, prof);
		CHECK(ragged_edge_profile(masked) == prof);
		CHECK(masked == sparse);
	}
}
