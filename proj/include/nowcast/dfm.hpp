#pragma once

#include "nowcast/dataset.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nowcast {

/// Single-factor dynamic factor model on standardized columns:
///   z_{t,i} = (y_{t,i} - column_mean_i) / column_scale_i = loading_i f_t + e_{t,i},  e ~ N(0, idiosyncratic_i)
///   f_t = factor_ar f_{t-1} + u_t,  u ~ N(0, factor_variance),  f_0 ~ N(0, initial_variance)
/// Quarterly columns load on the factor of their quarter-end month only.
struct StateSpaceModel {
	std::vector<std::string> column_ids;
	std::string target_id;
	std::vector<double> loadings;
	double factor_ar = 0.5;
	double factor_variance = 1.0;
	std::vector<double> idiosyncratic_variances;
	double initial_variance = 1.0;
	std::vector<double> column_mean;
	std::vector<double> column_scale;

	/// Identity standardization and a stationary initial variance.
	static StateSpaceModel make(std::vector<std::string> column_ids, std::string target_id,
	                            std::vector<double> loadings, double factor_ar, double factor_variance,
	                            std::vector<double> idiosyncratic_variances);

	std::size_t size() const { return column_ids.size(); }
	std::size_t target_index() const;
	/// Loadings in the columns' own units: column_scale * loading.
	std::vector<double> raw_loadings() const;
	/// Throws when dimensions disagree or a variance or |factor_ar| is out of range.
	void check() const;

	friend bool operator==(const StateSpaceModel &, const StateSpaceModel &) = default;
};

/// Negate loadings (and implicitly the factor) so the first nonzero loading is positive.
void apply_sign_convention(StateSpaceModel &model);

struct FilterOutput {
	std::vector<double> predicted_mean;
	std::vector<double> predicted_variance;
	std::vector<double> filtered_mean;
	std::vector<double> filtered_variance;
	/// Gaussian log-likelihood of the observed standardized cells.
	double log_likelihood = 0.0;
};

/// Scalar-state Kalman filter. Missing cells are dropped from their period's
/// update; a period with nothing observed is a pure prediction step.
FilterOutput kalman_filter(const StateSpaceModel &model, const MixedFrequencyDataset &ds);

struct SmootherOutput {
	FilterOutput filter;
	std::vector<double> mean;
	std::vector<double> variance;
	/// lag_covariance[t] = Cov(f_t, f_{t-1} | all data); entry 0 is unused.
	std::vector<double> lag_covariance;
};

/// Fixed-interval (Rauch-Tung-Striebel) smoother over the filter output.
SmootherOutput kalman_smoother(const StateSpaceModel &model, const MixedFrequencyDataset &ds);

struct EmOptions {
	int max_iterations = 500;
	/// Stop when the relative log-likelihood change falls below this.
	double tolerance = 1e-6;
};

struct EmResult {
	StateSpaceModel model;
	int iterations = 0;
	bool converged = false;
	/// Log-likelihood of the initial model followed by one entry per iteration.
	std::vector<double> log_likelihoods;
	double final_log_likelihood() const { return log_likelihoods.back(); }
};

/// Loadings from regressing each standardized, mean-filled column on the first
/// principal component (scaled to the stationary variance of factor_ar = 0.5);
/// idiosyncratic variances from the residuals.
StateSpaceModel default_initialization(const MixedFrequencyDataset &ds);

/// EM maximum likelihood. Column standardization is estimated from `ds`; an
/// explicit `init` is carried over to that standardization. The factor
/// innovation variance and the initial state variance stay fixed, which pins
/// the factor's scale and keeps every M-step exact.
EmResult em_fit(const MixedFrequencyDataset &ds, const std::optional<StateSpaceModel> &init = std::nullopt,
                const EmOptions &options = {});

/// Target loading times the smoothed factor mean at the target's quarter-end
/// month, in the target's own units. The vintage grid is extended as needed.
double dfm_nowcast(const StateSpaceModel &model, const MixedFrequencyDataset &vintage, Quarter target);

} // namespace nowcast
