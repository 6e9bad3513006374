#include "fixtures.hpp"
#include "nowcast/error.hpp"
#include "nowcast/vintage.hpp"

#include <doctest.h>

#include <fstream>

using namespace nowcast;
using fixtures::NA;

namespace {

const std::vector<Column> cols{{"a", Frequency::monthly}, {"t", Frequency::quarterly}};

MixedFrequencyDataset snap(std::size_t rows, double a0) {
	MixedFrequencyDataset ds(cols, {2020, 1}, rows, "t");
	for (std::size_t r = 0; r < rows; ++r)
		ds.set(r, 0, a0 + static_cast<double>(r));
	return ds;
}

void write(const std::filesystem::path &p, const std::string &text) {
	std::ofstream(p) << text;
}

} // namespace

TEST_CASE("vintage_at selects the latest snapshot not after the date") {
	VintageStore store;
	store.add(parse_date("2020-03-01"), snap(2, 0));
	store.add(parse_date("2020-04-01"), snap(3, 10));
	store.add(parse_date("2020-04-08"), snap(3, 20));
	CHECK(vintage_at(store, parse_date("2020-04-01")).value(0, 0) == 10);
	CHECK(vintage_at(store, parse_date("2020-04-05")).value(0, 0) == 10);
	CHECK(vintage_at(store, parse_date("2021-01-01")).value(0, 0) == 20);
	CHECK_THROWS_AS(vintage_at(store, parse_date("2020-02-29")), Error);
	CHECK_THROWS_AS(vintage_at(VintageStore{}, parse_date("2020-02-29")), Error);
}

TEST_CASE("vintage_at is monotone") {
	VintageStore store;
	Date d = parse_date("2020-01-06");
	for (int i = 0; i < 10; ++i) {
		store.add(d, snap(3, i));
		d = add_days(d, 3 + i);
	}
	std::mt19937_64 gen(5);
	std::uniform_int_distribution<int> offset(0, 120);
	for (int trial = 0; trial < 200; ++trial) {
		const Date d1 = add_days(parse_date("2020-01-06"), offset(gen));
		const Date d2 = add_days(d1, offset(gen));
		CHECK(*store.index_at(d1) <= *store.index_at(d2));
	}
}

TEST_CASE("store invariants") {
	VintageStore store;
	store.add(parse_date("2020-03-01"), snap(2, 0));
	CHECK_THROWS_AS(store.add(parse_date("2020-03-01"), snap(2, 0)), Error);
	CHECK_THROWS_AS(store.add(parse_date("2020-02-01"), snap(2, 0)), Error);
	MixedFrequencyDataset other({{"b", Frequency::monthly}, {"t", Frequency::quarterly}}, {2020, 1}, 2, "t");
	CHECK_THROWS_AS(store.add(parse_date("2020-05-01"), other), Error);
}

TEST_CASE("snapshot directories round-trip values exactly") {
	const auto dir = fixtures::scratch_dir("vintage_roundtrip");
	VintageStore store;
	auto s1 = snap(3, 0.1);
	s1.set(2, 1, -0.123456789012345678);
	store.add(parse_date("2020-04-01"), s1);
	auto s2 = snap(5, 0.1);
	s2.set(2, 1, 1.0 / 3.0);
	store.add(parse_date("2020-06-01"), s2);
	write_vintage_dir(dir, store);
	const auto back = load_vintage_dir(dir, "t");
	REQUIRE(back.size() == 2);
	CHECK(back.snapshot(0) == s1);
	CHECK(back.snapshot(1) == s2);
	CHECK(back.asof(1) == parse_date("2020-06-01"));
}

TEST_CASE("frequencies are inferred without series metadata") {
	const auto dir = fixtures::scratch_dir("vintage_infer");
	write(dir / "2020-07-01.csv", "date,series_id,value\n2020-03,gdp,0.1\n2020-06,gdp,-0.2\n2020-05,ip,0.03\n2020-06,ip,0.01\n"
	                             "2020-03,qq,1\n");
	const auto store = load_vintage_dir(dir, "gdp");
	const auto &ds = store.snapshot(0);
	REQUIRE(ds.cols() == 3);
	CHECK(ds.column(ds.column_index("gdp")).frequency == Frequency::quarterly);
	CHECK(ds.column(ds.column_index("ip")).frequency == Frequency::monthly);
	CHECK(ds.column(ds.column_index("qq")).frequency == Frequency::quarterly);
	CHECK(ds.first_period() == Period{2020, 3});
}

TEST_CASE("strict snapshot parsing reports file and line") {
	const auto dir = fixtures::scratch_dir("vintage_bad");
	write(dir / "2020-07-01.csv", "date,series_id,value\n2020-03,gdp,0.1\n2020-04,ip,abc\n");
	try {
		read_snapshot_csv(dir / "2020-07-01.csv");
		FAIL("expected a parse error");
	} catch (const Error &e) {
		CHECK(e.code() == ErrorCode::parse);
		CHECK(std::string(e.what()).find("2020-07-01.csv:3") != std::string::npos);
	}
	write(dir / "h.csv", "when,series_id,value\n");
	CHECK_THROWS_AS(read_snapshot_csv(dir / "h.csv"), Error);
	write(dir / "e.csv", "date,series_id,value\n2020-03,gdp,\n");
	CHECK_THROWS_AS(read_snapshot_csv(dir / "e.csv"), Error);
	write(dir / "d.csv", "date,series_id,value\n2020-03,gdp,1\n2020-03,gdp,2\n");
	CHECK_THROWS_AS(read_snapshot_csv(dir / "d.csv"), Error);
}

TEST_CASE("ingest reports errors and shrinking snapshots") {
	SUBCASE("valid") {
		const auto dir = fixtures::scratch_dir("ingest_ok");
		write(dir / "2020-04-01.csv", "date,series_id,value\n2020-01,a,1\n2020-02,a,2\n");
		write(dir / "2020-05-01.csv", "date,series_id,value\n2020-01,a,1\n2020-02,a,2\n2020-03,a,3\n2020-03,t,0.5\n");
		const auto report = ingest_vintage_dir(dir, "t");
		CHECK(report.files == 2);
		CHECK(report.errors.empty());
		CHECK(report.warnings.empty());
		REQUIRE(report.census.size() == 2);
		CHECK(report.census[1].second == std::vector<std::size_t>{3, 1});
	}
	SUBCASE("non-numeric value") {
		const auto dir = fixtures::scratch_dir("ingest_bad");
		write(dir / "2020-04-01.csv", "date,series_id,value\n2020-01,a,1\n2020-02,a,x\n2020-03,t,1\n");
		const auto report = ingest_vintage_dir(dir, "t");
		REQUIRE(report.errors.size() == 1);
		CHECK(report.errors[0].line == 3);
		CHECK(report.errors[0].file == "2020-04-01.csv");
	}
	SUBCASE("shrunk snapshot") {
		const auto dir = fixtures::scratch_dir("ingest_shrunk");
		write(dir / "2020-04-01.csv", "date,series_id,value\n2020-01,a,1\n2020-02,a,2\n2020-03,t,1\n");
		write(dir / "2020-05-01.csv", "date,series_id,value\n2020-01,a,1\n2020-03,t,1\n");
		const auto report = ingest_vintage_dir(dir, "t");
		CHECK(report.errors.empty());
		REQUIRE(report.warnings.size() == 1);
		CHECK(report.warnings[0].file == "2020-05-01.csv");
		CHECK(report.warnings[0].message.find("a") != std::string::npos);
		CHECK(report.warnings[0].message.find("2020-02") != std::string::npos);
	}
}
