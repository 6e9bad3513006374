#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace nowcast {

using Date = std::chrono::year_month_day;

/// Monthly period on the base grid. Never carries a day component.
struct Period {
	int year = 0;
	int month = 1;

	/// Months since year 0; strictly monotone in calendar order.
	constexpr int index() const { return year * 12 + (month - 1); }
	static constexpr Period from_index(int idx) {
		const int y = idx >= 0 ? idx / 12 : -((-idx + 11) / 12);
		return Period{y, idx - y * 12 + 1};
	}
	constexpr Period plus_months(int n) const { return from_index(index() + n); }
	constexpr bool is_quarter_end() const { return month % 3 == 0; }

	friend constexpr auto operator<=>(const Period &a, const Period &b) { return a.index() <=> b.index(); }
	friend constexpr bool operator==(const Period &a, const Period &b) = default;
};

struct Quarter {
	int year = 0;
	int quarter = 1;

	constexpr Period end_month() const { return Period{year, quarter * 3}; }
	constexpr Period first_month() const { return Period{year, quarter * 3 - 2}; }
	constexpr int index() const { return year * 4 + (quarter - 1); }
	static constexpr Quarter from_index(int idx) {
		const int y = idx >= 0 ? idx / 4 : -((-idx + 3) / 4);
		return Quarter{y, idx - y * 4 + 1};
	}
	static constexpr Quarter containing(Period p) { return Quarter{p.year, (p.month - 1) / 3 + 1}; }
	constexpr Quarter next() const { return from_index(index() + 1); }

	friend constexpr auto operator<=>(const Quarter &a, const Quarter &b) { return a.index() <=> b.index(); }
	friend constexpr bool operator==(const Quarter &a, const Quarter &b) = default;
};

/// "YYYY-MM"
Period parse_period(std::string_view text);
std::string format_period(Period p);

/// "YYYYQn"
Quarter parse_quarter(std::string_view text);
std::string format_quarter(Quarter q);

/// "YYYY-MM-DD", validated against the calendar.
Date parse_date(std::string_view text);
std::string format_date(Date d);

/// First calendar day of a monthly period.
Date first_day(Period p);
Period period_of(Date d);

/// Day zero of a quarter's prediction curve: the first day of its final month.
Date quarter_anchor(Quarter q);

/// Signed calendar-day difference a - b.
int days_between(Date a, Date b);
Date add_days(Date d, int n);

} // namespace nowcast
