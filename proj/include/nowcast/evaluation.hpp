#pragma once

#include "nowcast/vintage.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nowcast {

/// Calendar days from the target's anchor (first day of its final month).
int day_difference(Date asof, Quarter target);

struct CurvePoint {
	Date asof;
	int day_difference = 0;
	double prediction = 0.0;

	friend bool operator==(const CurvePoint &, const CurvePoint &) = default;
};

struct PredictionCurve {
	std::string model_id;
	Quarter target;
	std::vector<CurvePoint> points;
	std::optional<double> actual;

	std::vector<Date> dates() const;
	friend bool operator==(const PredictionCurve &, const PredictionCurve &) = default;
};

/// A model under evaluation: predicts a target quarter from one snapshot.
struct Nowcaster {
	std::string id;
	std::function<double(const MixedFrequencyDataset &, Quarter)> predict;
};

/// One curve per model over every vintage dated within window_days of the
/// target's anchor (inclusive on both sides).
std::vector<PredictionCurve> replay(const VintageStore &store, const std::vector<Nowcaster> &models, Quarter target,
                                    int window_days, std::optional<double> actual = std::nullopt);

std::vector<double> errors(const PredictionCurve &curve);
double mae(const PredictionCurve &curve);
double rmse(const PredictionCurve &curve);

/// Throws unless both curves carry the same as-of dates.
void require_same_grid(const PredictionCurve &a, const PredictionCurve &b);

struct TTest {
	double t = 0.0;
	double df = 0.0;
	/// Lower-tail probability of t: small when model b's errors are smaller.
	double p = 1.0;
};

/// Paired one-tailed test on d = |errors_b| - |errors_a|; the alternative is
/// that b's absolute errors are lower. Throws degenerate when d has no spread.
TTest one_tailed_t_test(std::span<const double> errors_a, std::span<const double> errors_b);

/// Student-t distribution function.
double student_t_cdf(double t, double df);

/// "***" below 0.001, "**" below 0.01, "*" below 0.05, else empty.
std::string significance_stars(double p);

struct RevisionStats {
	double share_a_bigger = 0.0;
	double share_b_bigger = 0.0;
	double avg_abs_revision_a = 0.0;
	double avg_abs_revision_b = 0.0;
};

/// Revisions are prediction changes between consecutive dates; a tie counts to neither model.
RevisionStats revision_stats(const PredictionCurve &a, const PredictionCurve &b);

struct ModelMetrics {
	std::string model_id;
	double mae = 0.0;
	double rmse = 0.0;
};

/// Evaluation of one target quarter. Model a is the baseline (the DFM), model
/// b the challenger (the LSTM) for the paired statistics.
struct BacktestResult {
	Quarter target;
	std::vector<PredictionCurve> curves;
	std::vector<ModelMetrics> metrics;
	std::optional<TTest> t_test;
	/// Same test on squared errors, backing the RMSE column.
	std::optional<TTest> t_test_squared;
	std::optional<RevisionStats> revisions;
	std::string model_a;
	std::string model_b;
	/// Why a paired statistic is absent, if it is.
	std::string note;
};

/// Metrics per curve, plus paired statistics when exactly two models ran.
/// Requires every curve to carry the actual value.
BacktestResult summarize(Quarter target, std::vector<PredictionCurve> curves);

} // namespace nowcast
