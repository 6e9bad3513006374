#include "nowcast/evaluation.hpp"

#include "nowcast/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>
#include <numeric>

namespace nowcast {

int day_difference(Date asof, Quarter target) { return days_between(asof, quarter_anchor(target)); }

std::vector<Date> PredictionCurve::dates() const {
	std::vector<Date> out;
	out.reserve(points.size());
	for (const auto &p : points)
		out.push_back(p.asof);
	return out;
}

std::vector<PredictionCurve> replay(const VintageStore &store, const std::vector<Nowcaster> &models, Quarter target,
                                    int window_days, std::optional<double> actual) {
	if (store.empty())
		throw invalid("vintage store is empty");
	if (window_days <= 0)
		throw invalid("window_days must be positive");
	std::vector<PredictionCurve> curves;
	for (const auto &m : models)
		curves.push_back(PredictionCurve{m.id, target, {}, actual});
	for (std::size_t v = 0; v < store.size(); ++v) {
		const int diff = day_difference(store.asof(v), target);
		if (diff < -window_days || diff > window_days)
			continue;
		for (std::size_t k = 0; k < models.size(); ++k) {
			try {
				curves[k].points.push_back({store.asof(v), diff, models[k].predict(store.snapshot(v), target)});
			} catch (const Error &e) {
				throw Error(e.code(), "model '" + models[k].id + "' failed on vintage " + format_date(store.asof(v)) +
				                          ": " + e.what());
			}
		}
	}
	if (!models.empty() && curves.front().points.empty())
		throw Error(ErrorCode::not_found, "no vintages within " + std::to_string(window_days) + " days of " +
		                                      format_date(quarter_anchor(target)));
	return curves;
}

std::vector<double> errors(const PredictionCurve &curve) {
	if (!curve.actual)
		throw invalid("actual value of " + format_quarter(curve.target) + " is unknown");
	if (curve.points.empty())
		throw invalid("prediction curve is empty");
	std::vector<double> out;
	out.reserve(curve.points.size());
	for (const auto &p : curve.points)
		out.push_back(p.prediction - *curve.actual);
	return out;
}

double mae(const PredictionCurve &curve) {
	const auto e = errors(curve);
	double s = 0.0;
	for (const double v : e)
		s += std::abs(v);
	return s / static_cast<double>(e.size());
}

double rmse(const PredictionCurve &curve) {
	const auto e = errors(curve);
	double s = 0.0;
	for (const double v : e)
		s += v * v;
	return std::sqrt(s / static_cast<double>(e.size()));
}

void require_same_grid(const PredictionCurve &a, const PredictionCurve &b) {
	if (a.dates() != b.dates())
		throw invalid("curves of '" + a.model_id + "' and '" + b.model_id + "' are on different date grids");
}

double student_t_cdf(double t, double df) {
	if (!(df > 0.0))
		throw invalid("degrees of freedom must be positive");
	if (std::isinf(t))
		return t > 0 ? 1.0 : 0.0;
	return boost::math::cdf(boost::math::students_t(df), t);
}

TTest one_tailed_t_test(std::span<const double> errors_a, std::span<const double> errors_b) {
	if (errors_a.size() != errors_b.size())
		throw invalid("paired t-test needs error vectors of equal length");
	const std::size_t n = errors_a.size();
	if (n < 3)
		throw invalid("paired t-test needs at least 3 pairs");
	std::vector<double> d(n);
	for (std::size_t i = 0; i < n; ++i)
		d[i] = std::abs(errors_b[i]) - std::abs(errors_a[i]);
	const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
	double ss = 0.0;
	for (const double v : d)
		ss += (v - mean) * (v - mean);
	const double sd = std::sqrt(ss / static_cast<double>(n - 1));
	if (!(sd > 0.0))
		throw Error(ErrorCode::degenerate, "paired error differences have zero variance");
	TTest out;
	out.t = mean / (sd / std::sqrt(static_cast<double>(n)));
	out.df = static_cast<double>(n - 1);
	out.p = student_t_cdf(out.t, out.df);
	return out;
}

std::string significance_stars(double p) {
	if (p < 0.001)
		return "***";
	if (p < 0.01)
		return "**";
	if (p < 0.05)
		return "*";
	return "";
}

RevisionStats revision_stats(const PredictionCurve &a, const PredictionCurve &b) {
	require_same_grid(a, b);
	const std::size_t n = a.points.size();
	if (n < 2)
		throw invalid("revision statistics need at least 2 points");
	RevisionStats s;
	for (std::size_t i = 1; i < n; ++i) {
		const double ra = std::abs(a.points[i].prediction - a.points[i - 1].prediction);
		const double rb = std::abs(b.points[i].prediction - b.points[i - 1].prediction);
		s.share_a_bigger += ra > rb ? 1.0 : 0.0;
		s.share_b_bigger += rb > ra ? 1.0 : 0.0;
		s.avg_abs_revision_a += ra;
		s.avg_abs_revision_b += rb;
	}
	const double count = static_cast<double>(n - 1);
	s.share_a_bigger /= count;
	s.share_b_bigger /= count;
	s.avg_abs_revision_a /= count;
	s.avg_abs_revision_b /= count;
	return s;
}

BacktestResult summarize(Quarter target, std::vector<PredictionCurve> curves) {
	BacktestResult result;
	result.target = target;
	for (const auto &c : curves) {
		if (c.target != target)
			throw invalid("curve of '" + c.model_id + "' is for a different target quarter");
		result.metrics.push_back(ModelMetrics{c.model_id, mae(c), rmse(c)});
	}
	for (std::size_t k = 1; k < curves.size(); ++k)
		require_same_grid(curves.front(), curves[k]);
	if (curves.size() == 2) {
		const auto &a = curves[0];
		const auto &b = curves[1];
		result.model_a = a.model_id;
		result.model_b = b.model_id;
		const auto ea = errors(a);
		const auto eb = errors(b);
		std::vector<double> sa(ea.size()), sb(eb.size());
		for (std::size_t i = 0; i < ea.size(); ++i) {
			sa[i] = ea[i] * ea[i];
			sb[i] = eb[i] * eb[i];
		}
		try {
			result.t_test = one_tailed_t_test(ea, eb);
			result.t_test_squared = one_tailed_t_test(sa, sb);
		} catch (const Error &e) {
			result.note = std::string("t-test unavailable: ") + e.what();
		}
		if (a.points.size() >= 2)
			result.revisions = revision_stats(a, b);
	} else if (curves.size() == 1) {
		result.note = "single model: no paired statistics";
	}
	result.curves = std::move(curves);
	return result;
}

} // namespace nowcast
