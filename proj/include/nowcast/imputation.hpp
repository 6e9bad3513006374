#pragma once

#include "nowcast/dataset.hpp"
#include "nowcast/error.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace nowcast {

struct ArmaOrder {
	int p = 1;
	int q = 1;

	friend bool operator==(const ArmaOrder &, const ArmaOrder &) = default;
};

inline constexpr int max_arma_lag = 2;

struct FillMethod {
	enum class Kind { mean, arma };

	Kind kind = Kind::mean;
	ArmaOrder order{};

	static FillMethod mean() { return {}; }
	static FillMethod arma(ArmaOrder order);

	friend bool operator==(const FillMethod &, const FillMethod &) = default;
};

/// Throws unless 0 <= p, q <= 2 and p + q >= 1.
void validate(ArmaOrder order);
std::string to_string(const FillMethod &method);
FillMethod parse_fill_method(std::string_view kind, ArmaOrder order = {});

/// x_t = intercept + sum ar_i x_{t-i} + e_t + sum ma_j e_{t-j}
struct ArmaFit {
	std::string series_id;
	std::vector<double> ar;
	std::vector<double> ma;
	double intercept = 0.0;
	double innovation_variance = 0.0;
	int iterations = 0;
};

/// Fitting failure that still carries the best parameters reached.
class ArmaFitError : public Error {
public:
	ArmaFitError(ErrorCode code, const std::string &message, ArmaFit best)
	    : Error(code, message), best_(std::move(best)) {}

	const ArmaFit &best() const { return best_; }

private:
	ArmaFit best_;
};

struct ArmaFitOptions {
	int max_iterations = 200;
	/// Relative reduction of the sum of squares below which the fit has converged.
	double tolerance = 1e-12;
};

inline constexpr std::size_t min_arma_observations = 8;

/// Conditional-sum-of-squares fit with pre-sample innovations fixed at zero.
/// The AR part is parameterized through partial autocorrelations in (-1, 1), so
/// every iterate is stationary; the MA part is kept invertible the same way.
ArmaFit fit_arma(std::span<const double> values, ArmaOrder order, const ArmaFitOptions &options = {});

/// Conditional innovations e_t of `values` under `fit` (zero for t < p).
std::vector<double> arma_residuals(const ArmaFit &fit, std::span<const double> values);

/// Iterated forecasts for steps 1..horizon past the end of `values`.
std::vector<double> forecast_arma(const ArmaFit &fit, std::span<const double> values, std::size_t horizon);

/// intercept / (1 - sum ar)
double arma_unconditional_mean(const ArmaFit &fit);

/// Replace every missing cell of every non-target column by the column's
/// observed mean. The target column is left as is.
MixedFrequencyDataset fill_mean(const MixedFrequencyDataset &ds);

using ArmaFitter = std::function<ArmaFit(std::span<const double>, ArmaOrder)>;

/// Interior gaps and intra-quarter rows are mean-filled; trailing missing
/// eligible rows get iterated forecasts from a per-column ARMA fit. Columns
/// without a trailing gap are not fitted. Any failed fit aborts the whole call
/// with an error naming the column. `fitter` replaces fit_arma when given.
MixedFrequencyDataset fill_arma(const MixedFrequencyDataset &ds, ArmaOrder order, const ArmaFitter &fitter = {});

MixedFrequencyDataset fill(const MixedFrequencyDataset &ds, const FillMethod &method);

} // namespace nowcast
