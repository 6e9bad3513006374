#include "nowcast/imputation.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numeric>

namespace nowcast {

void validate(ArmaOrder order) {
	if (order.p < 0 || order.q < 0 || order.p > max_arma_lag || order.q > max_arma_lag)
		throw invalid("ARMA lags must lie in [0, " + std::to_string(max_arma_lag) + "], got (" +
		              std::to_string(order.p) + "," + std::to_string(order.q) + ")");
	if (order.p + order.q < 1)
		throw invalid("ARMA order needs at least one AR or MA lag");
}

FillMethod FillMethod::arma(ArmaOrder order) {
	validate(order);
	return FillMethod{Kind::arma, order};
}

std::string to_string(const FillMethod &method) {
	if (method.kind == FillMethod::Kind::mean)
		return "mean";
	return "arma(" + std::to_string(method.order.p) + "," + std::to_string(method.order.q) + ")";
}

FillMethod parse_fill_method(std::string_view kind, ArmaOrder order) {
	if (kind == "mean")
		return FillMethod::mean();
	if (kind == "arma")
		return FillMethod::arma(order);
	throw Error(ErrorCode::parse, "unknown fill method '" + std::string(kind) + "' (expected mean or arma)");
}

namespace {

struct Transformed {
	std::vector<double> coefficients;
	/// d coefficient_i / d u_m
	Eigen::MatrixXd jacobian;
};

/// Durbin-Levinson map from unconstrained values (through tanh to partial
/// autocorrelations) to the coefficients of a stationary AR polynomial.
Transformed partial_to_ar(std::span<const double> u) {
	const auto k = static_cast<Eigen::Index>(u.size());
	std::vector<double> r(u.size());
	for (std::size_t i = 0; i < u.size(); ++i)
		r[i] = std::tanh(u[i]);
	Eigen::VectorXd a = Eigen::VectorXd::Zero(k);
	Eigen::MatrixXd da = Eigen::MatrixXd::Zero(k, k);
	for (Eigen::Index step = 0; step < k; ++step) {
		Eigen::VectorXd next = a;
		Eigen::MatrixXd dnext = da;
		const double rk = r[static_cast<std::size_t>(step)];
		for (Eigen::Index j = 0; j < step; ++j) {
			const Eigen::Index mirror = step - 1 - j;
			next(j) = a(j) - rk * a(mirror);
			dnext.row(j) = da.row(j) - rk * da.row(mirror);
			dnext(j, step) -= a(mirror);
		}
		next(step) = rk;
		dnext.row(step).setZero();
		dnext(step, step) = 1.0;
		a = next;
		da = dnext;
	}
	Transformed out;
	out.coefficients.assign(a.data(), a.data() + k);
	out.jacobian = da;
	for (Eigen::Index m = 0; m < k; ++m)
		out.jacobian.col(m) *= 1.0 - r[static_cast<std::size_t>(m)] * r[static_cast<std::size_t>(m)];
	return out;
}

struct Evaluation {
	ArmaFit fit;
	Eigen::VectorXd residuals;
	Eigen::MatrixXd jacobian; // d e_t / d u
	double sse = 0.0;
};

Evaluation evaluate(std::span<const double> x, ArmaOrder order, const Eigen::VectorXd &u) {
	const int p = order.p;
	const int q = order.q;
	const auto n = static_cast<Eigen::Index>(x.size());
	const Eigen::Index k = 1 + p + q;

	std::vector<double> u_ar(static_cast<std::size_t>(p)), u_ma(static_cast<std::size_t>(q));
	for (int i = 0; i < p; ++i)
		u_ar[static_cast<std::size_t>(i)] = u(1 + i);
	for (int j = 0; j < q; ++j)
		u_ma[static_cast<std::size_t>(j)] = u(1 + p + j);
	const auto ar = partial_to_ar(u_ar);
	auto ma = partial_to_ar(u_ma);
	for (auto &c : ma.coefficients)
		c = -c;
	ma.jacobian = -ma.jacobian;

	Evaluation ev;
	ev.fit.ar = ar.coefficients;
	ev.fit.ma = ma.coefficients;
	ev.fit.intercept = u(0);

	// Derivatives of e_t with respect to the natural parameters (c, ar, ma).
	Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
	Eigen::MatrixXd de = Eigen::MatrixXd::Zero(n, k);
	for (Eigen::Index t = p; t < n; ++t) {
		double value = x[static_cast<std::size_t>(t)] - ev.fit.intercept;
		Eigen::RowVectorXd grad = Eigen::RowVectorXd::Zero(k);
		grad(0) = -1.0;
		for (int i = 0; i < p; ++i) {
			const double lagged = x[static_cast<std::size_t>(t - 1 - i)];
			value -= ev.fit.ar[static_cast<std::size_t>(i)] * lagged;
			grad(1 + i) = -lagged;
		}
		for (int j = 0; j < q; ++j) {
			const Eigen::Index s = t - 1 - j;
			if (s < p)
				continue;
			const double theta = ev.fit.ma[static_cast<std::size_t>(j)];
			value -= theta * e(s);
			grad(1 + p + j) -= e(s);
			grad -= theta * de.row(s);
		}
		e(t) = value;
		de.row(t) = grad;
	}

	// Chain to the unconstrained coordinates.
	Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(k, k);
	chain(0, 0) = 1.0;
	if (p > 0)
		chain.block(1, 1, p, p) = ar.jacobian;
	if (q > 0)
		chain.block(1 + p, 1 + p, q, q) = ma.jacobian;

	ev.residuals = e.tail(n - p);
	ev.jacobian = de.bottomRows(n - p) * chain;
	ev.sse = ev.residuals.squaredNorm();
	ev.fit.innovation_variance = ev.sse / static_cast<double>(n - p);
	return ev;
}

} // namespace

ArmaFit fit_arma(std::span<const double> values, ArmaOrder order, const ArmaFitOptions &options) {
	validate(order);
	if (values.size() < min_arma_observations)
		throw invalid("ARMA fit needs at least " + std::to_string(min_arma_observations) + " observations, got " +
		              std::to_string(values.size()));
	for (const double v : values)
		if (!std::isfinite(v))
			throw invalid("ARMA fit requires finite values");
	const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
	double spread = 0.0;
	for (const double v : values)
		spread += (v - mean) * (v - mean);
	if (spread <= 0.0) {
		ArmaFit flat;
		flat.ar.assign(static_cast<std::size_t>(order.p), 0.0);
		flat.ma.assign(static_cast<std::size_t>(order.q), 0.0);
		flat.intercept = mean;
		throw ArmaFitError(ErrorCode::degenerate, "constant series has no innovation variance", flat);
	}

	const Eigen::Index k = 1 + order.p + order.q;
	Eigen::VectorXd u = Eigen::VectorXd::Zero(k);
	u(0) = mean;
	Evaluation current = evaluate(values, order, u);
	double damping = 1e-3;
	bool converged = false;
	int iteration = 0;
	for (; iteration < options.max_iterations && !converged; ++iteration) {
		const Eigen::MatrixXd jtj = current.jacobian.transpose() * current.jacobian;
		const Eigen::VectorXd gradient = current.jacobian.transpose() * current.residuals;
		if (gradient.norm() <= 1e-14 * (1.0 + current.sse)) {
			converged = true;
			break;
		}
		bool accepted = false;
		while (!accepted) {
			Eigen::MatrixXd system = jtj;
			for (Eigen::Index i = 0; i < k; ++i)
				system(i, i) += damping * std::max(jtj(i, i), 1e-12);
			const Eigen::VectorXd step = system.ldlt().solve(-gradient);
			const Eigen::VectorXd trial_u = u + step;
			Evaluation trial = evaluate(values, order, trial_u);
			if (std::isfinite(trial.sse) && trial.sse <= current.sse) {
				const double reduction = (current.sse - trial.sse) / std::max(current.sse, 1e-300);
				u = trial_u;
				current = std::move(trial);
				damping = std::max(damping / 10.0, 1e-12);
				accepted = true;
				if (reduction < options.tolerance)
					converged = true;
			} else {
				damping *= 10.0;
				if (damping > 1e12) {
					// No descent direction left: a stationary point of the objective.
					converged = true;
					break;
				}
			}
		}
	}
	current.fit.iterations = iteration;
	if (!converged)
		throw ArmaFitError(ErrorCode::numeric,
		                   "ARMA fit did not converge within " + std::to_string(options.max_iterations) + " iterations",
		                   current.fit);
	if (current.fit.innovation_variance <= 0.0)
		throw ArmaFitError(ErrorCode::degenerate, "ARMA fit has zero innovation variance", current.fit);
	return current.fit;
}

std::vector<double> arma_residuals(const ArmaFit &fit, std::span<const double> values) {
	const auto p = fit.ar.size();
	const auto q = fit.ma.size();
	std::vector<double> e(values.size(), 0.0);
	for (std::size_t t = p; t < values.size(); ++t) {
		double v = values[t] - fit.intercept;
		for (std::size_t i = 0; i < p; ++i)
			v -= fit.ar[i] * values[t - 1 - i];
		for (std::size_t j = 0; j < q; ++j)
			if (t >= j + 1 + p)
				v -= fit.ma[j] * e[t - 1 - j];
		e[t] = v;
	}
	return e;
}

std::vector<double> forecast_arma(const ArmaFit &fit, std::span<const double> values, std::size_t horizon) {
	const auto p = fit.ar.size();
	const auto q = fit.ma.size();
	if (values.size() < std::max(p, q))
		throw invalid("ARMA forecast needs at least max(p, q) past values");
	const auto residuals = arma_residuals(fit, values);
	std::vector<double> path(values.begin(), values.end());
	std::vector<double> shocks = residuals;
	const std::size_t n = values.size();
	std::vector<double> out;
	out.reserve(horizon);
	for (std::size_t h = 0; h < horizon; ++h) {
		const std::size_t t = n + h;
		double v = fit.intercept;
		for (std::size_t i = 0; i < p; ++i)
			v += fit.ar[i] * path[t - 1 - i];
		for (std::size_t j = 0; j < q; ++j)
			v += fit.ma[j] * shocks[t - 1 - j];
		path.push_back(v);
		shocks.push_back(0.0);
		out.push_back(v);
	}
	return out;
}

double arma_unconditional_mean(const ArmaFit &fit) {
	const double ar_sum = std::accumulate(fit.ar.begin(), fit.ar.end(), 0.0);
	return fit.intercept / (1.0 - ar_sum);
}

namespace {

double column_mean(const MixedFrequencyDataset &ds, std::size_t col) {
	const auto values = ds.observed_values(col);
	if (values.empty())
		throw invalid("column '" + ds.column(col).id + "' has no observations to fill from");
	return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

} // namespace

MixedFrequencyDataset fill_mean(const MixedFrequencyDataset &ds) {
	MixedFrequencyDataset out = ds;
	out.mark_filled();
	for (std::size_t j = 0; j < ds.cols(); ++j) {
		if (j == ds.target_index())
			continue;
		const double mean = column_mean(ds, j);
		for (std::size_t r = 0; r < ds.rows(); ++r)
			if (!ds.observed(r, j))
				out.set(r, j, mean);
	}
	return out;
}

MixedFrequencyDataset fill_arma(const MixedFrequencyDataset &ds, ArmaOrder order, const ArmaFitter &fitter) {
	validate(order);
	MixedFrequencyDataset out = ds;
	out.mark_filled();
	for (std::size_t j = 0; j < ds.cols(); ++j) {
		if (j == ds.target_index())
			continue;
		const auto &column = ds.column(j);
		const double mean = column_mean(ds, j);

		std::vector<std::size_t> eligible;
		for (std::size_t r = 0; r < ds.rows(); ++r)
			if (eligible_row(column.frequency, ds.period_at(r)))
				eligible.push_back(r);
		std::size_t observed_through = 0; // count of eligible rows up to and including the latest observation
		for (std::size_t k = 0; k < eligible.size(); ++k)
			if (ds.observed(eligible[k], j))
				observed_through = k + 1;

		std::vector<double> history;
		history.reserve(observed_through);
		for (std::size_t k = 0; k < observed_through; ++k)
			history.push_back(ds.observed(eligible[k], j) ? ds.value(eligible[k], j) : mean);

		const std::size_t trailing = eligible.size() - observed_through;
		if (trailing > 0) {
			std::vector<double> forecasts;
			try {
				ArmaFit fit = fitter ? fitter(history, order) : fit_arma(history, order);
				fit.series_id = column.id;
				forecasts = forecast_arma(fit, history, trailing);
			} catch (const Error &e) {
				throw Error(e.code(), "ARMA fill of column '" + column.id + "' failed: " + e.what());
			}
			for (std::size_t h = 0; h < trailing; ++h)
				out.set(eligible[observed_through + h], j, forecasts[h]);
		}
		for (std::size_t r = 0; r < ds.rows(); ++r)
			if (!out.observed(r, j))
				out.set(r, j, mean);
	}
	return out;
}

MixedFrequencyDataset fill(const MixedFrequencyDataset &ds, const FillMethod &method) {
	return method.kind == FillMethod::Kind::mean ? fill_mean(ds) : fill_arma(ds, method.order);
}

} // namespace nowcast
