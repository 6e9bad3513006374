#pragma once

#include "nowcast/dataset.hpp"
#include "nowcast/imputation.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace nowcast {

/// Dense row-major matrix.
struct Matrix {
	std::size_t rows = 0;
	std::size_t cols = 0;
	std::vector<double> data;

	Matrix() = default;
	Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

	double &operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
	double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
	std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

	friend bool operator==(const Matrix &, const Matrix &) = default;
};

struct LstmConfig {
	std::size_t n_timesteps = 12;
	std::size_t hidden_size = 20;
	std::size_t n_layers = 2;
	std::size_t n_networks = 10;
	double learning_rate = 1e-2;
	std::size_t n_epochs = 200;
	/// Samples per Adam step; 0 uses the full sample.
	std::size_t batch_size = 0;
	std::uint64_t seed = 0;
	FillMethod fill_method = FillMethod::mean();

	friend bool operator==(const LstmConfig &, const LstmConfig &) = default;
};

void validate(const LstmConfig &config);

/// Weights of one gate: pre-activation = input * x + recurrent * h + bias.
struct GateWeights {
	Matrix input;     // hidden x layer-input
	Matrix recurrent; // hidden x hidden
	std::vector<double> bias;

	friend bool operator==(const GateWeights &, const GateWeights &) = default;
};

struct LstmLayer {
	GateWeights input_gate;
	GateWeights forget_gate;
	GateWeights cell_gate;
	GateWeights output_gate;

	friend bool operator==(const LstmLayer &, const LstmLayer &) = default;
};

/// One stacked LSTM with a scalar affine readout of the last hidden state.
/// Inputs are standardized with the stored per-feature mean and scale.
struct LstmParameters {
	std::vector<LstmLayer> layers;
	std::vector<double> readout_weights;
	double readout_bias = 0.0;
	std::vector<double> feature_mean;
	std::vector<double> feature_scale;

	/// Zero weights with identity standardization.
	static LstmParameters zeros(std::size_t n_features, std::size_t hidden_size, std::size_t n_layers);
	/// Uniform(-k, k) weights, k = 1/sqrt(hidden_size).
	static LstmParameters random(std::size_t n_features, std::size_t hidden_size, std::size_t n_layers,
	                             std::uint64_t seed);

	std::size_t hidden_size() const { return readout_weights.size(); }
	std::size_t n_features() const { return feature_mean.size(); }

	/// Every trained tensor in a fixed order (readout bias last); standardization is excluded.
	std::vector<std::span<double>> trainable();
	std::vector<std::span<const double>> trainable() const;
	std::size_t parameter_count() const;

	/// Throws when dimensions are inconsistent or a scale is not positive.
	void check() const;

	friend bool operator==(const LstmParameters &, const LstmParameters &) = default;
};

/// Supervised windows: sample i is the n_timesteps x n_features block of rows
/// ending at the quarter-end month of target i. Features are every column
/// except the target, in dataset order.
struct SampleSet {
	std::size_t n_timesteps = 0;
	std::size_t n_features = 0;
	std::vector<double> inputs; // samples x timesteps x features
	std::vector<double> targets;
	std::vector<Quarter> quarters;

	std::size_t size() const { return targets.size(); }
	Matrix window(std::size_t i) const;
};

struct QuarterRange {
	std::optional<Quarter> first;
	std::optional<Quarter> last;

	bool contains(Quarter q) const { return (!first || q >= *first) && (!last || q <= *last); }
};

SampleSet build_samples(const MixedFrequencyDataset &ds, std::size_t n_timesteps, QuarterRange range = {});

/// Feature matrix of the window ending at `end` (rows end-n+1 .. end).
Matrix extract_window(const MixedFrequencyDataset &ds, std::size_t end_row, std::size_t n_timesteps);

/// (x - mean) / scale per feature, as the network sees its inputs.
Matrix standardize(const LstmParameters &params, const Matrix &window);

double lstm_forward(const LstmParameters &params, const Matrix &window);

/// Mean squared error over the given samples (all when `batch` is empty).
double mse_loss(const LstmParameters &params, const SampleSet &samples, std::span<const std::size_t> batch = {});

/// Loss and its gradient by backpropagation through time. The gradient has
/// the same shape as `params`; its standardization fields are left empty.
double mse_gradient(const LstmParameters &params, const SampleSet &samples, std::span<const std::size_t> batch,
                    LstmParameters &gradient);

struct LstmEnsemble {
	LstmConfig config;
	std::vector<LstmParameters> members;
	std::vector<std::string> feature_ids;
	std::string target_id;
	Quarter train_first;
	Quarter train_last;
	/// Mean of the training targets, the naive benchmark.
	double target_training_mean = 0.0;

	friend bool operator==(const LstmEnsemble &, const LstmEnsemble &) = default;
};

/// Per-feature mean and sample standard deviation over every row of a filled
/// dataset; a zero deviation is replaced by 1.
std::pair<std::vector<double>, std::vector<double>> feature_statistics(const MixedFrequencyDataset &filled);

/// Train config.n_networks members with Adam on full-sample (or mini-batch)
/// MSE. Member m is initialized from seed + m. `ds` must already be filled.
LstmEnsemble train(const LstmConfig &config, const MixedFrequencyDataset &ds, QuarterRange range = {});

/// Train a single member; exposed for tests.
LstmParameters train_member(const LstmConfig &config, const SampleSet &samples, std::vector<double> feature_mean,
                            std::vector<double> feature_scale, std::size_t member_index);

/// The filled window a nowcast for `target` reads from snapshot `ds`.
Matrix prediction_window(const LstmEnsemble &ens, const MixedFrequencyDataset &ds, Quarter target);

std::vector<double> predict_members(const LstmEnsemble &ens, const MixedFrequencyDataset &ds, Quarter target);

/// Fill the snapshot per the ensemble's fill method, then average the
/// members' forward passes over the window ending at the target's last month.
double predict(const LstmEnsemble &ens, const MixedFrequencyDataset &ds, Quarter target);

} // namespace nowcast
