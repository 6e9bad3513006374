#include "nowcast/calendar.hpp"

#include "nowcast/error.hpp"

#include <charconv>
#include <cstdio>

namespace nowcast {

namespace {

int parse_int(std::string_view text, std::string_view what, std::string_view whole) {
	int value = 0;
	const auto *first = text.data();
	const auto *last = text.data() + text.size();
	auto [ptr, ec] = std::from_chars(first, last, value);
	if (text.empty() || ec != std::errc{} || ptr != last)
		throw Error(ErrorCode::parse, "invalid " + std::string(what) + " '" + std::string(whole) + "'");
	return value;
}

} // namespace

Period parse_period(std::string_view text) {
	if (text.size() != 7 || text[4] != '-')
		throw Error(ErrorCode::parse, "invalid period '" + std::string(text) + "', expected YYYY-MM");
	const int y = parse_int(text.substr(0, 4), "period", text);
	const int m = parse_int(text.substr(5, 2), "period", text);
	if (m < 1 || m > 12)
		throw Error(ErrorCode::parse, "invalid month in period '" + std::string(text) + "'");
	return Period{y, m};
}

std::string format_period(Period p) {
	char buf[16];
	std::snprintf(buf, sizeof buf, "%04d-%02d", p.year, p.month);
	return buf;
}

Quarter parse_quarter(std::string_view text) {
	if (text.size() != 6 || (text[4] != 'Q' && text[4] != 'q'))
		throw Error(ErrorCode::parse, "invalid quarter '" + std::string(text) + "', expected YYYYQn");
	const int y = parse_int(text.substr(0, 4), "quarter", text);
	const int q = parse_int(text.substr(5, 1), "quarter", text);
	if (q < 1 || q > 4)
		throw Error(ErrorCode::parse, "invalid quarter number in '" + std::string(text) + "'");
	return Quarter{y, q};
}

std::string format_quarter(Quarter q) {
	char buf[16];
	std::snprintf(buf, sizeof buf, "%04dQ%d", q.year, q.quarter);
	return buf;
}

Date parse_date(std::string_view text) {
	if (text.size() != 10 || text[4] != '-' || text[7] != '-')
		throw Error(ErrorCode::parse, "invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
	const int y = parse_int(text.substr(0, 4), "date", text);
	const int m = parse_int(text.substr(5, 2), "date", text);
	const int d = parse_int(text.substr(8, 2), "date", text);
	const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
	                std::chrono::day{static_cast<unsigned>(d)}};
	if (m < 1 || m > 12 || d < 1 || !date.ok())
		throw Error(ErrorCode::parse, "invalid calendar date '" + std::string(text) + "'");
	return date;
}

std::string format_date(Date d) {
	char buf[16];
	std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
	              static_cast<unsigned>(d.day()));
	return buf;
}

Date first_day(Period p) {
	return Date{std::chrono::year{p.year}, std::chrono::month{static_cast<unsigned>(p.month)}, std::chrono::day{1}};
}

Period period_of(Date d) { return Period{static_cast<int>(d.year()), static_cast<int>(static_cast<unsigned>(d.month()))}; }

Date quarter_anchor(Quarter q) { return first_day(q.end_month()); }

int days_between(Date a, Date b) {
	return static_cast<int>((std::chrono::sys_days{a} - std::chrono::sys_days{b}).count());
}

Date add_days(Date d, int n) { return Date{std::chrono::sys_days{d} + std::chrono::days{n}}; }

} // namespace nowcast
