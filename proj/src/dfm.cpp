#include "nowcast/dfm.hpp"

#include "nowcast/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <numeric>

namespace nowcast {

StateSpaceModel StateSpaceModel::make(std::vector<std::string> column_ids, std::string target_id,
                                      std::vector<double> loadings, double factor_ar, double factor_variance,
                                      std::vector<double> idiosyncratic_variances) {
	StateSpaceModel m;
	m.column_mean.assign(column_ids.size(), 0.0);
	m.column_scale.assign(column_ids.size(), 1.0);
	m.column_ids = std::move(column_ids);
	m.target_id = std::move(target_id);
	m.loadings = std::move(loadings);
	m.factor_ar = factor_ar;
	m.factor_variance = factor_variance;
	m.idiosyncratic_variances = std::move(idiosyncratic_variances);
	m.initial_variance = factor_variance / (1.0 - factor_ar * factor_ar);
	m.check();
	return m;
}

std::size_t StateSpaceModel::target_index() const {
	for (std::size_t i = 0; i < column_ids.size(); ++i)
		if (column_ids[i] == target_id)
			return i;
	throw Error(ErrorCode::not_found, "target '" + target_id + "' is not a model column");
}

std::vector<double> StateSpaceModel::raw_loadings() const {
	std::vector<double> out(loadings.size());
	for (std::size_t i = 0; i < loadings.size(); ++i)
		out[i] = column_scale[i] * loadings[i];
	return out;
}

void StateSpaceModel::check() const {
	const auto n = column_ids.size();
	if (n == 0 || loadings.size() != n || idiosyncratic_variances.size() != n || column_mean.size() != n ||
	    column_scale.size() != n)
		throw invalid("state-space model has inconsistent dimensions");
	if (!(std::abs(factor_ar) < 1.0))
		throw invalid("factor AR coefficient must satisfy |phi| < 1");
	if (!(factor_variance > 0.0) || !(initial_variance > 0.0))
		throw invalid("factor variances must be positive");
	for (std::size_t i = 0; i < n; ++i) {
		if (!(idiosyncratic_variances[i] >= 0.0) || !std::isfinite(idiosyncratic_variances[i]))
			throw invalid("idiosyncratic variance of '" + column_ids[i] + "' must be non-negative");
		if (!(column_scale[i] > 0.0))
			throw invalid("column scale of '" + column_ids[i] + "' must be positive");
		if (!std::isfinite(loadings[i]) || !std::isfinite(column_mean[i]))
			throw invalid("model parameters must be finite");
	}
	if (std::all_of(loadings.begin(), loadings.end(), [](double l) { return l == 0.0; }))
		throw invalid("loadings are identically zero");
}

void apply_sign_convention(StateSpaceModel &model) {
	for (const double l : model.loadings) {
		if (l == 0.0)
			continue;
		if (l < 0.0)
			for (double &v : model.loadings)
				v = -v;
		return;
	}
}

namespace {

void check_columns(const StateSpaceModel &model, const MixedFrequencyDataset &ds) {
	model.check();
	if (ds.cols() != model.size())
		throw invalid("dataset has " + std::to_string(ds.cols()) + " columns, model " + std::to_string(model.size()));
	for (std::size_t i = 0; i < ds.cols(); ++i)
		if (ds.column(i).id != model.column_ids[i])
			throw invalid("dataset column '" + ds.column(i).id + "' does not match model column '" +
			              model.column_ids[i] + "'");
}

const double log_two_pi = std::log(2.0 * std::numbers::pi);

} // namespace

FilterOutput kalman_filter(const StateSpaceModel &model, const MixedFrequencyDataset &ds) {
	check_columns(model, ds);
	const std::size_t rows = ds.rows();
	FilterOutput out;
	out.predicted_mean.resize(rows);
	out.predicted_variance.resize(rows);
	out.filtered_mean.resize(rows);
	out.filtered_variance.resize(rows);
	double a = 0.0;
	double p = model.initial_variance;
	for (std::size_t t = 0; t < rows; ++t) {
		if (t > 0) {
			a = model.factor_ar * out.filtered_mean[t - 1];
			p = model.factor_ar * model.factor_ar * out.filtered_variance[t - 1] + model.factor_variance;
		}
		out.predicted_mean[t] = a;
		out.predicted_variance[t] = p;
		// Diagonal measurement noise: sequential scalar updates are exact.
		for (std::size_t i = 0; i < ds.cols(); ++i) {
			if (!ds.observed(t, i))
				continue;
			const double lambda = model.loadings[i];
			const double z = (ds.value(t, i) - model.column_mean[i]) / model.column_scale[i];
			const double v = z - lambda * a;
			const double f = lambda * lambda * p + model.idiosyncratic_variances[i];
			if (!(f > 0.0) || !std::isfinite(f))
				throw Error(ErrorCode::numeric, "singular innovation variance for '" + ds.column(i).id + "' at " +
				                                    format_period(ds.period_at(t)));
			out.log_likelihood -= 0.5 * (log_two_pi + std::log(f) + v * v / f);
			const double gain = p * lambda / f;
			a += gain * v;
			p = std::max(0.0, p - gain * lambda * p);
		}
		if (!std::isfinite(a) || !std::isfinite(p) || !std::isfinite(out.log_likelihood))
			throw Error(ErrorCode::numeric, "non-finite filter state at " + format_period(ds.period_at(t)));
		out.filtered_mean[t] = a;
		out.filtered_variance[t] = p;
	}
	return out;
}

SmootherOutput kalman_smoother(const StateSpaceModel &model, const MixedFrequencyDataset &ds) {
	SmootherOutput out;
	out.filter = kalman_filter(model, ds);
	const auto &flt = out.filter;
	const std::size_t rows = ds.rows();
	out.mean.resize(rows);
	out.variance.resize(rows);
	out.lag_covariance.assign(rows, 0.0);
	if (rows == 0)
		return out;
	out.mean[rows - 1] = flt.filtered_mean[rows - 1];
	out.variance[rows - 1] = flt.filtered_variance[rows - 1];
	for (std::size_t t = rows - 1; t-- > 0;) {
		const double gain = flt.filtered_variance[t] * model.factor_ar / flt.predicted_variance[t + 1];
		out.mean[t] = flt.filtered_mean[t] + gain * (out.mean[t + 1] - flt.predicted_mean[t + 1]);
		out.variance[t] = flt.filtered_variance[t] + gain * gain * (out.variance[t + 1] - flt.predicted_variance[t + 1]);
		out.variance[t] = std::max(0.0, out.variance[t]);
		out.lag_covariance[t + 1] = gain * out.variance[t + 1];
	}
	return out;
}

namespace {

struct Standardization {
	std::vector<double> mean;
	std::vector<double> scale;
};

Standardization column_standardization(const MixedFrequencyDataset &ds) {
	Standardization s;
	for (std::size_t i = 0; i < ds.cols(); ++i) {
		const auto values = ds.observed_values(i);
		const double n = static_cast<double>(values.size());
		const double m = std::accumulate(values.begin(), values.end(), 0.0) / n;
		double ss = 0.0;
		for (const double v : values)
			ss += (v - m) * (v - m);
		const double sd = std::sqrt(ss / (n - 1.0));
		if (!(sd > 1e-12))
			throw Error(ErrorCode::degenerate, "column '" + ds.column(i).id + "' has no variation");
		s.mean.push_back(m);
		s.scale.push_back(sd);
	}
	return s;
}

void check_fit_inputs(const MixedFrequencyDataset &ds) {
	if (ds.cols() < 2)
		throw invalid("DFM estimation needs at least 2 columns");
	for (std::size_t i = 0; i < ds.cols(); ++i)
		if (ds.observed_count(i) < 8)
			throw invalid("DFM column '" + ds.column(i).id + "' needs at least 8 observations, has " +
			              std::to_string(ds.observed_count(i)));
}

inline constexpr double default_factor_ar = 0.5;

} // namespace

StateSpaceModel default_initialization(const MixedFrequencyDataset &ds) {
	check_fit_inputs(ds);
	const auto stdz = column_standardization(ds);
	const auto rows = static_cast<Eigen::Index>(ds.rows());
	const auto cols = static_cast<Eigen::Index>(ds.cols());
	Eigen::MatrixXd z = Eigen::MatrixXd::Zero(rows, cols);
	for (Eigen::Index t = 0; t < rows; ++t)
		for (Eigen::Index i = 0; i < cols; ++i) {
			const auto r = static_cast<std::size_t>(t);
			const auto c = static_cast<std::size_t>(i);
			if (ds.observed(r, c))
				z(t, i) = (ds.value(r, c) - stdz.mean[c]) / stdz.scale[c];
		}
	const Eigen::MatrixXd cov = z.transpose() * z / static_cast<double>(rows);
	Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
	const Eigen::VectorXd direction = eig.eigenvectors().col(cols - 1);
	Eigen::VectorXd factor = z * direction;
	const double target_var = 1.0 / (1.0 - default_factor_ar * default_factor_ar);
	const double var = factor.squaredNorm() / static_cast<double>(rows);
	if (var > 0.0)
		factor *= std::sqrt(target_var / var);

	StateSpaceModel m;
	m.column_ids.reserve(ds.cols());
	for (const auto &c : ds.columns())
		m.column_ids.push_back(c.id);
	m.target_id = ds.target_id();
	m.factor_ar = default_factor_ar;
	m.factor_variance = 1.0;
	m.initial_variance = target_var;
	m.column_mean = stdz.mean;
	m.column_scale = stdz.scale;
	for (std::size_t i = 0; i < ds.cols(); ++i) {
		double sfz = 0.0, sff = 0.0;
		std::size_t n = 0;
		for (std::size_t t = 0; t < ds.rows(); ++t) {
			if (!ds.observed(t, i))
				continue;
			const double f = factor(static_cast<Eigen::Index>(t));
			sfz += f * z(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i));
			sff += f * f;
			++n;
		}
		const double loading = sff > 0.0 ? sfz / sff : 0.0;
		double ssr = 0.0;
		for (std::size_t t = 0; t < ds.rows(); ++t) {
			if (!ds.observed(t, i))
				continue;
			const double r = z(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) -
			                 loading * factor(static_cast<Eigen::Index>(t));
			ssr += r * r;
		}
		m.loadings.push_back(loading);
		m.idiosyncratic_variances.push_back(std::max(ssr / static_cast<double>(n), 1e-4));
	}
	if (std::all_of(m.loadings.begin(), m.loadings.end(), [](double l) { return l == 0.0; }))
		m.loadings.assign(m.loadings.size(), 0.1);
	apply_sign_convention(m);
	m.check();
	return m;
}

EmResult em_fit(const MixedFrequencyDataset &ds, const std::optional<StateSpaceModel> &init, const EmOptions &options) {
	check_fit_inputs(ds);
	StateSpaceModel model;
	if (init) {
		check_columns(*init, ds);
		const auto stdz = column_standardization(ds);
		model = *init;
		for (std::size_t i = 0; i < model.size(); ++i) {
			const double ratio = init->column_scale[i] / stdz.scale[i];
			model.loadings[i] *= ratio;
			model.idiosyncratic_variances[i] *= ratio * ratio;
		}
		model.column_mean = stdz.mean;
		model.column_scale = stdz.scale;
	} else {
		model = default_initialization(ds);
	}

	const std::size_t rows = ds.rows();
	const std::size_t cols = ds.cols();
	std::vector<double> z(rows * cols, 0.0);
	for (std::size_t t = 0; t < rows; ++t)
		for (std::size_t i = 0; i < cols; ++i)
			if (ds.observed(t, i))
				z[t * cols + i] = (ds.value(t, i) - model.column_mean[i]) / model.column_scale[i];

	EmResult result;
	SmootherOutput smooth = kalman_smoother(model, ds);
	result.log_likelihoods.push_back(smooth.filter.log_likelihood);
	for (int iter = 0; iter < options.max_iterations; ++iter) {
		std::vector<double> e1(rows), e2(rows);
		for (std::size_t t = 0; t < rows; ++t) {
			e1[t] = smooth.mean[t];
			e2[t] = smooth.mean[t] * smooth.mean[t] + smooth.variance[t];
		}
		StateSpaceModel next = model;
		for (std::size_t i = 0; i < cols; ++i) {
			double szf = 0.0, sff = 0.0, szz = 0.0;
			std::size_t n = 0;
			for (std::size_t t = 0; t < rows; ++t) {
				if (!ds.observed(t, i))
					continue;
				const double zt = z[t * cols + i];
				szf += zt * e1[t];
				sff += e2[t];
				szz += zt * zt;
				++n;
			}
			const double loading = szf / sff;
			const double variance = (szz - 2.0 * loading * szf + loading * loading * sff) / static_cast<double>(n);
			if (!(variance > 1e-12))
				throw Error(ErrorCode::degenerate, "idiosyncratic variance of '" + ds.column(i).id +
				                                       "' collapsed in EM iteration " + std::to_string(iter + 1));
			next.loadings[i] = loading;
			next.idiosyncratic_variances[i] = variance;
		}
		double cross = 0.0, lagged = 0.0;
		for (std::size_t t = 1; t < rows; ++t) {
			cross += smooth.mean[t] * smooth.mean[t - 1] + smooth.lag_covariance[t];
			lagged += e2[t - 1];
		}
		next.factor_ar = std::clamp(cross / lagged, -0.9999, 0.9999);

		SmootherOutput next_smooth = kalman_smoother(next, ds);
		const double previous = result.log_likelihoods.back();
		const double current = next_smooth.filter.log_likelihood;
		if (current < previous - 1e-8)
			throw Error(ErrorCode::numeric, "EM log-likelihood decreased from " + std::to_string(previous) + " to " +
			                                    std::to_string(current) + " in iteration " +
			                                    std::to_string(iter + 1));
		model = std::move(next);
		smooth = std::move(next_smooth);
		result.log_likelihoods.push_back(current);
		result.iterations = iter + 1;
		const double scale = 0.5 * (std::abs(current) + std::abs(previous));
		if (std::abs(current - previous) <= options.tolerance * std::max(scale, 1e-300)) {
			result.converged = true;
			break;
		}
	}
	apply_sign_convention(model);
	model.check();
	result.model = std::move(model);
	return result;
}

double dfm_nowcast(const StateSpaceModel &model, const MixedFrequencyDataset &vintage, Quarter target) {
	const Period end = target.end_month();
	if (end < vintage.first_period())
		throw invalid("target " + format_quarter(target) + " ends before the vintage grid starts");
	const MixedFrequencyDataset ds = vintage.extended_to(end);
	const auto smooth = kalman_smoother(model, ds);
	const std::size_t row = *ds.row_of(end);
	const std::size_t target_col = ds.column_index(model.target_id);
	return model.column_mean[target_col] +
	       model.column_scale[target_col] * model.loadings[target_col] * smooth.mean[row];
}

} // namespace nowcast
