#include "nowcast/lstm.hpp"

#include "nowcast/error.hpp"
#include "nowcast/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <numeric>
#include <thread>

namespace nowcast {

void validate(const LstmConfig &config) {
	if (config.n_timesteps < 3)
		throw invalid("n_timesteps must be at least 3 to span a quarter");
	if (config.hidden_size == 0 || config.n_layers == 0 || config.n_networks == 0 || config.n_epochs == 0)
		throw invalid("hidden_size, n_layers, n_networks and n_epochs must be positive");
	if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate))
		throw invalid("learning_rate must be positive");
	if (config.fill_method.kind == FillMethod::Kind::arma)
		validate(config.fill_method.order);
}

namespace {

GateWeights gate(std::size_t hidden, std::size_t in) {
	return GateWeights{Matrix(hidden, in), Matrix(hidden, hidden), std::vector<double>(hidden, 0.0)};
}

template <class Params, class Span>
std::vector<Span> collect(Params &params) {
	std::vector<Span> out;
	for (auto &layer : params.layers)
		for (auto *g : {&layer.input_gate, &layer.forget_gate, &layer.cell_gate, &layer.output_gate}) {
			out.emplace_back(g->input.data);
			out.emplace_back(g->recurrent.data);
			out.emplace_back(g->bias);
		}
	out.emplace_back(params.readout_weights);
	out.emplace_back(&params.readout_bias, 1);
	return out;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

LstmParameters LstmParameters::zeros(std::size_t n_features, std::size_t hidden_size, std::size_t n_layers) {
	if (n_features == 0 || hidden_size == 0 || n_layers == 0)
		throw invalid("LSTM dimensions must be positive");
	LstmParameters p;
	for (std::size_t l = 0; l < n_layers; ++l) {
		const std::size_t in = l == 0 ? n_features : hidden_size;
		p.layers.push_back(LstmLayer{gate(hidden_size, in), gate(hidden_size, in), gate(hidden_size, in),
		                             gate(hidden_size, in)});
	}
	p.readout_weights.assign(hidden_size, 0.0);
	p.feature_mean.assign(n_features, 0.0);
	p.feature_scale.assign(n_features, 1.0);
	return p;
}

LstmParameters LstmParameters::random(std::size_t n_features, std::size_t hidden_size, std::size_t n_layers,
                                      std::uint64_t seed) {
	LstmParameters p = zeros(n_features, hidden_size, n_layers);
	Rng rng(seed);
	const double k = 1.0 / std::sqrt(static_cast<double>(hidden_size));
	for (auto tensor : p.trainable())
		for (double &w : tensor)
			w = rng.uniform(-k, k);
	return p;
}

std::vector<std::span<double>> LstmParameters::trainable() { return collect<LstmParameters, std::span<double>>(*this); }

std::vector<std::span<const double>> LstmParameters::trainable() const {
	return collect<const LstmParameters, std::span<const double>>(*this);
}

std::size_t LstmParameters::parameter_count() const {
	std::size_t n = 0;
	for (const auto t : trainable())
		n += t.size();
	return n;
}

void LstmParameters::check() const {
	const std::size_t hidden = hidden_size();
	if (layers.empty() || hidden == 0 || feature_mean.empty() || feature_scale.size() != feature_mean.size())
		throw invalid("LSTM parameters have inconsistent dimensions");
	for (std::size_t l = 0; l < layers.size(); ++l) {
		const std::size_t in = l == 0 ? n_features() : hidden;
		const auto &layer = layers[l];
		for (const auto *g : {&layer.input_gate, &layer.forget_gate, &layer.cell_gate, &layer.output_gate}) {
			if (g->input.rows != hidden || g->input.cols != in || g->input.data.size() != hidden * in ||
			    g->recurrent.rows != hidden || g->recurrent.cols != hidden ||
			    g->recurrent.data.size() != hidden * hidden || g->bias.size() != hidden)
				throw invalid("LSTM layer " + std::to_string(l) + " has inconsistent gate dimensions");
		}
	}
	for (const double s : feature_scale)
		if (!(s > 0.0))
			throw invalid("LSTM standardization scales must be positive");
}

Matrix SampleSet::window(std::size_t i) const {
	Matrix m(n_timesteps, n_features);
	const auto stride = n_timesteps * n_features;
	std::copy_n(inputs.begin() + static_cast<std::ptrdiff_t>(i * stride), stride, m.data.begin());
	return m;
}

Matrix extract_window(const MixedFrequencyDataset &ds, std::size_t end_row, std::size_t n_timesteps) {
	if (end_row >= ds.rows() || end_row + 1 < n_timesteps)
		throw invalid("window of " + std::to_string(n_timesteps) + " months ending at " +
		              format_period(ds.period_at(end_row)) + " extends before the grid start " +
		              format_period(ds.first_period()));
	const std::size_t features = ds.cols() - 1;
	Matrix m(n_timesteps, features);
	const std::size_t start = end_row + 1 - n_timesteps;
	for (std::size_t t = 0; t < n_timesteps; ++t) {
		std::size_t f = 0;
		for (std::size_t j = 0; j < ds.cols(); ++j) {
			if (j == ds.target_index())
				continue;
			if (!ds.observed(start + t, j))
				throw invalid("column '" + ds.column(j).id + "' is missing at " +
				              format_period(ds.period_at(start + t)) + "; fill the dataset first");
			m(t, f++) = ds.value(start + t, j);
		}
	}
	return m;
}

SampleSet build_samples(const MixedFrequencyDataset &ds, std::size_t n_timesteps, QuarterRange range) {
	if (n_timesteps == 0)
		throw invalid("n_timesteps must be positive");
	if (ds.cols() < 2)
		throw invalid("LSTM samples need at least one feature column besides the target");
	SampleSet samples;
	samples.n_timesteps = n_timesteps;
	samples.n_features = ds.cols() - 1;
	const std::size_t target = ds.target_index();
	for (std::size_t r = 0; r < ds.rows(); ++r) {
		if (!ds.observed(r, target) || r + 1 < n_timesteps)
			continue;
		const Quarter q = Quarter::containing(ds.period_at(r));
		if (!range.contains(q))
			continue;
		const Matrix w = extract_window(ds, r, n_timesteps);
		samples.inputs.insert(samples.inputs.end(), w.data.begin(), w.data.end());
		samples.targets.push_back(ds.value(r, target));
		samples.quarters.push_back(q);
	}
	if (samples.targets.empty())
		throw invalid("no target observation of '" + ds.target_id() + "' has " + std::to_string(n_timesteps) +
		              " months of history");
	return samples;
}

Matrix standardize(const LstmParameters &params, const Matrix &window) {
	if (window.cols != params.n_features())
		throw invalid("window has " + std::to_string(window.cols) + " features, network expects " +
		              std::to_string(params.n_features()));
	Matrix out = window;
	for (std::size_t t = 0; t < window.rows; ++t)
		for (std::size_t f = 0; f < window.cols; ++f)
			out(t, f) = (window(t, f) - params.feature_mean[f]) / params.feature_scale[f];
	return out;
}

namespace {

struct StepCache {
	std::vector<double> i, f, g, o, c, tanh_c, h;
};

struct LayerTrace {
	std::vector<StepCache> steps;
};

/// Runs one layer over a sequence. `xs` is T x in; returns T x H hidden states.
Matrix run_layer(const LstmLayer &layer, const Matrix &xs, LayerTrace *trace) {
	const std::size_t hidden = layer.input_gate.bias.size();
	const std::size_t in = xs.cols;
	Matrix hs(xs.rows, hidden);
	std::vector<double> h(hidden, 0.0), c(hidden, 0.0);
	std::vector<double> pre(4 * hidden);
	const GateWeights *gates[4] = {&layer.input_gate, &layer.forget_gate, &layer.cell_gate, &layer.output_gate};
	if (trace)
		trace->steps.resize(xs.rows);
	for (std::size_t t = 0; t < xs.rows; ++t) {
		const auto x = xs.row(t);
		for (std::size_t k = 0; k < 4; ++k) {
			const auto &g = *gates[k];
			for (std::size_t u = 0; u < hidden; ++u) {
				double acc = g.bias[u];
				const double *wx = g.input.data.data() + u * in;
				for (std::size_t m = 0; m < in; ++m)
					acc += wx[m] * x[m];
				const double *wh = g.recurrent.data.data() + u * hidden;
				for (std::size_t m = 0; m < hidden; ++m)
					acc += wh[m] * h[m];
				pre[k * hidden + u] = acc;
			}
		}
		StepCache step;
		step.i.resize(hidden);
		step.f.resize(hidden);
		step.g.resize(hidden);
		step.o.resize(hidden);
		step.c.resize(hidden);
		step.tanh_c.resize(hidden);
		step.h.resize(hidden);
		for (std::size_t u = 0; u < hidden; ++u) {
			step.i[u] = sigmoid(pre[u]);
			step.f[u] = sigmoid(pre[hidden + u]);
			step.g[u] = std::tanh(pre[2 * hidden + u]);
			step.o[u] = sigmoid(pre[3 * hidden + u]);
			c[u] = step.f[u] * c[u] + step.i[u] * step.g[u];
			step.c[u] = c[u];
			step.tanh_c[u] = std::tanh(c[u]);
			h[u] = step.o[u] * step.tanh_c[u];
			step.h[u] = h[u];
			hs(t, u) = h[u];
		}
		if (trace)
			trace->steps[t] = std::move(step);
	}
	return hs;
}

double forward_standardized(const LstmParameters &params, const Matrix &z, std::vector<LayerTrace> *traces,
                            std::vector<Matrix> *layer_inputs) {
	Matrix current = z;
	if (traces)
		traces->assign(params.layers.size(), {});
	if (layer_inputs)
		layer_inputs->clear();
	for (std::size_t l = 0; l < params.layers.size(); ++l) {
		if (layer_inputs)
			layer_inputs->push_back(current);
		current = run_layer(params.layers[l], current, traces ? &(*traces)[l] : nullptr);
	}
	double y = params.readout_bias;
	const auto last = current.row(current.rows - 1);
	for (std::size_t u = 0; u < last.size(); ++u)
		y += params.readout_weights[u] * last[u];
	return y;
}

void accumulate_layer_gradient(const LstmLayer &layer, const Matrix &xs, const LayerTrace &trace,
                               const Matrix &dh_in, LstmLayer &grad, Matrix *dx_out) {
	const std::size_t hidden = layer.input_gate.bias.size();
	const std::size_t in = xs.cols;
	const std::size_t steps = xs.rows;
	const GateWeights *gates[4] = {&layer.input_gate, &layer.forget_gate, &layer.cell_gate, &layer.output_gate};
	GateWeights *dgates[4] = {&grad.input_gate, &grad.forget_gate, &grad.cell_gate, &grad.output_gate};
	std::vector<double> dh_next(hidden, 0.0), dc_next(hidden, 0.0), dpre(4 * hidden);
	if (dx_out)
		*dx_out = Matrix(steps, in);
	for (std::size_t t = steps; t-- > 0;) {
		const auto &s = trace.steps[t];
		for (std::size_t u = 0; u < hidden; ++u) {
			const double dh = dh_in(t, u) + dh_next[u];
			const double c_prev = t > 0 ? trace.steps[t - 1].c[u] : 0.0;
			const double dc = dh * s.o[u] * (1.0 - s.tanh_c[u] * s.tanh_c[u]) + dc_next[u];
			dpre[u] = dc * s.g[u] * s.i[u] * (1.0 - s.i[u]);
			dpre[hidden + u] = dc * c_prev * s.f[u] * (1.0 - s.f[u]);
			dpre[2 * hidden + u] = dc * s.i[u] * (1.0 - s.g[u] * s.g[u]);
			dpre[3 * hidden + u] = dh * s.tanh_c[u] * s.o[u] * (1.0 - s.o[u]);
			dc_next[u] = dc * s.f[u];
		}
		std::fill(dh_next.begin(), dh_next.end(), 0.0);
		const auto x = xs.row(t);
		for (std::size_t k = 0; k < 4; ++k) {
			const auto &g = *gates[k];
			auto &dg = *dgates[k];
			for (std::size_t u = 0; u < hidden; ++u) {
				const double d = dpre[k * hidden + u];
				if (d == 0.0)
					continue;
				dg.bias[u] += d;
				double *dwx = dg.input.data.data() + u * in;
				const double *wx = g.input.data.data() + u * in;
				for (std::size_t m = 0; m < in; ++m) {
					dwx[m] += d * x[m];
					if (dx_out)
						(*dx_out)(t, m) += d * wx[m];
				}
				if (t > 0) {
					const auto &h_prev = trace.steps[t - 1].h;
					double *dwh = dg.recurrent.data.data() + u * hidden;
					const double *wh = g.recurrent.data.data() + u * hidden;
					for (std::size_t m = 0; m < hidden; ++m) {
						dwh[m] += d * h_prev[m];
						dh_next[m] += d * wh[m];
					}
				}
			}
		}
	}
}

std::vector<std::size_t> all_indices(std::size_t n) {
	std::vector<std::size_t> idx(n);
	std::iota(idx.begin(), idx.end(), std::size_t{0});
	return idx;
}

} // namespace

double lstm_forward(const LstmParameters &params, const Matrix &window) {
	params.check();
	if (window.rows == 0)
		throw invalid("window has no timesteps");
	return forward_standardized(params, standardize(params, window), nullptr, nullptr);
}

double mse_loss(const LstmParameters &params, const SampleSet &samples, std::span<const std::size_t> batch) {
	const auto idx = batch.empty() ? all_indices(samples.size()) : std::vector<std::size_t>(batch.begin(), batch.end());
	double loss = 0.0;
	for (const std::size_t i : idx) {
		const double err = lstm_forward(params, samples.window(i)) - samples.targets[i];
		loss += err * err;
	}
	return loss / static_cast<double>(idx.size());
}

double mse_gradient(const LstmParameters &params, const SampleSet &samples, std::span<const std::size_t> batch,
                    LstmParameters &gradient) {
	params.check();
	const auto idx = batch.empty() ? all_indices(samples.size()) : std::vector<std::size_t>(batch.begin(), batch.end());
	gradient = LstmParameters::zeros(params.n_features(), params.hidden_size(), params.layers.size());
	gradient.feature_mean.clear();
	gradient.feature_scale.clear();
	const double n = static_cast<double>(idx.size());
	const std::size_t hidden = params.hidden_size();
	double loss = 0.0;
	std::vector<LayerTrace> traces;
	std::vector<Matrix> inputs;
	for (const std::size_t i : idx) {
		const Matrix z = standardize(params, samples.window(i));
		const double y = forward_standardized(params, z, &traces, &inputs);
		const double err = y - samples.targets[i];
		loss += err * err;
		const double dy = 2.0 * err / n;

		const auto &top = traces.back().steps.back().h;
		for (std::size_t u = 0; u < hidden; ++u)
			gradient.readout_weights[u] += dy * top[u];
		gradient.readout_bias += dy;

		Matrix dh(z.rows, hidden);
		for (std::size_t u = 0; u < hidden; ++u)
			dh(z.rows - 1, u) = dy * params.readout_weights[u];
		for (std::size_t l = params.layers.size(); l-- > 0;) {
			Matrix dx;
			accumulate_layer_gradient(params.layers[l], inputs[l], traces[l], dh, gradient.layers[l],
			                          l > 0 ? &dx : nullptr);
			if (l > 0)
				dh = std::move(dx);
		}
	}
	return loss / n;
}

std::pair<std::vector<double>, std::vector<double>> feature_statistics(const MixedFrequencyDataset &filled) {
	std::vector<double> mean, scale;
	for (std::size_t j = 0; j < filled.cols(); ++j) {
		if (j == filled.target_index())
			continue;
		const auto values = filled.observed_values(j);
		if (values.size() != filled.rows())
			throw invalid("column '" + filled.column(j).id + "' has missing cells; fill the dataset first");
		const double m = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
		double ss = 0.0;
		for (const double v : values)
			ss += (v - m) * (v - m);
		const double sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
		mean.push_back(m);
		scale.push_back(sd > 1e-12 ? sd : 1.0);
	}
	return {mean, scale};
}

namespace {

inline constexpr double clip_norm = 100.0;
inline constexpr double adam_beta1 = 0.9;
inline constexpr double adam_beta2 = 0.999;
inline constexpr double adam_epsilon = 1e-8;

} // namespace

LstmParameters train_member(const LstmConfig &config, const SampleSet &samples, std::vector<double> feature_mean,
                            std::vector<double> feature_scale, std::size_t member_index) {
	LstmParameters params = LstmParameters::random(samples.n_features, config.hidden_size, config.n_layers,
	                                               config.seed + member_index);
	params.feature_mean = std::move(feature_mean);
	params.feature_scale = std::move(feature_scale);
	params.check();

	const std::size_t count = params.parameter_count();
	std::vector<double> m1(count, 0.0), m2(count, 0.0);
	const std::size_t batch = config.batch_size == 0 ? samples.size() : std::min(config.batch_size, samples.size());
	Rng shuffle_rng(config.seed + member_index + 0x9e3779b97f4a7c15ULL);
	std::vector<std::size_t> order = all_indices(samples.size());
	LstmParameters gradient;
	std::size_t step = 0;
	for (std::size_t epoch = 0; epoch < config.n_epochs; ++epoch) {
		if (batch < samples.size())
			for (std::size_t i = order.size(); i > 1; --i)
				std::swap(order[i - 1], order[shuffle_rng.below(i)]);
		for (std::size_t start = 0; start < order.size(); start += batch) {
			const std::size_t stop = std::min(start + batch, order.size());
			const std::span<const std::size_t> chunk(order.data() + start, stop - start);
			const double loss = mse_gradient(params, samples, chunk, gradient);
			if (!std::isfinite(loss))
				throw Error(ErrorCode::numeric, "non-finite training loss in epoch " + std::to_string(epoch) +
				                                    " of member " + std::to_string(member_index));
			auto grads = gradient.trainable();
			double norm2 = 0.0;
			for (const auto g : grads)
				for (const double v : g)
					norm2 += v * v;
			const double norm = std::sqrt(norm2);
			const double factor = norm > clip_norm ? clip_norm / norm : 1.0;

			++step;
			const double correction1 = 1.0 - std::pow(adam_beta1, static_cast<double>(step));
			const double correction2 = 1.0 - std::pow(adam_beta2, static_cast<double>(step));
			auto weights = params.trainable();
			std::size_t k = 0;
			for (std::size_t t = 0; t < weights.size(); ++t)
				for (std::size_t e = 0; e < weights[t].size(); ++e, ++k) {
					const double g = grads[t][e] * factor;
					m1[k] = adam_beta1 * m1[k] + (1.0 - adam_beta1) * g;
					m2[k] = adam_beta2 * m2[k] + (1.0 - adam_beta2) * g * g;
					const double m_hat = m1[k] / correction1;
					const double v_hat = m2[k] / correction2;
					weights[t][e] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + adam_epsilon);
				}
		}
	}
	return params;
}

LstmEnsemble train(const LstmConfig &config, const MixedFrequencyDataset &ds, QuarterRange range) {
	validate(config);
	const SampleSet samples = build_samples(ds, config.n_timesteps, range);
	auto [mean, scale] = feature_statistics(ds);

	LstmEnsemble ens;
	ens.config = config;
	ens.target_id = ds.target_id();
	for (std::size_t j = 0; j < ds.cols(); ++j)
		if (j != ds.target_index())
			ens.feature_ids.push_back(ds.column(j).id);
	ens.train_first = samples.quarters.front();
	ens.train_last = samples.quarters.back();
	ens.target_training_mean = std::accumulate(samples.targets.begin(), samples.targets.end(), 0.0) /
	                           static_cast<double>(samples.size());

	// Members are independent; results are stored by index so scheduling cannot change them.
	ens.members.resize(config.n_networks);
	const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(config.n_networks,
	                                                                          std::thread::hardware_concurrency()));
	std::vector<std::future<void>> jobs;
	std::atomic<std::size_t> next{0};
	for (std::size_t w = 0; w < workers; ++w)
		jobs.push_back(std::async(std::launch::async, [&] {
			for (std::size_t m = next++; m < config.n_networks; m = next++)
				ens.members[m] = train_member(config, samples, mean, scale, m);
		}));
	for (auto &job : jobs)
		job.get();
	return ens;
}

Matrix prediction_window(const LstmEnsemble &ens, const MixedFrequencyDataset &ds, Quarter target) {
	std::vector<std::string> features;
	for (std::size_t j = 0; j < ds.cols(); ++j)
		if (j != ds.target_index())
			features.push_back(ds.column(j).id);
	if (features != ens.feature_ids || ds.target_id() != ens.target_id)
		throw invalid("snapshot columns do not match the features the ensemble was trained on");
	const Period end = target.end_month();
	if (end < ds.first_period())
		throw invalid("target " + format_quarter(target) + " ends before the snapshot grid starts");
	const MixedFrequencyDataset filled = fill(ds.extended_to(end), ens.config.fill_method);
	return extract_window(filled, *filled.row_of(end), ens.config.n_timesteps);
}

std::vector<double> predict_members(const LstmEnsemble &ens, const MixedFrequencyDataset &ds, Quarter target) {
	if (ens.members.empty())
		throw invalid("ensemble has no members");
	const Matrix window = prediction_window(ens, ds, target);
	std::vector<double> out;
	out.reserve(ens.members.size());
	for (const auto &member : ens.members)
		out.push_back(lstm_forward(member, window));
	return out;
}

double predict(const LstmEnsemble &ens, const MixedFrequencyDataset &ds, Quarter target) {
	const auto values = predict_members(ens, ds, target);
	return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

} // namespace nowcast
