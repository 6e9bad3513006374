#include "nowcast/news.hpp"

#include "nowcast/error.hpp"

#include <cmath>
#include <numeric>

namespace nowcast {

bool VintageDiff::empty() const {
	for (std::size_t j = 0; j < column_ids.size(); ++j)
		if (!new_cells[j].empty() || !revised_cells[j].empty())
			return false;
	return true;
}

VintageDiff new_data_cells(const MixedFrequencyDataset &old_vintage, const MixedFrequencyDataset &new_vintage) {
	if (old_vintage.columns() != new_vintage.columns() || old_vintage.target_id() != new_vintage.target_id())
		throw invalid("vintages have different columns");
	if (old_vintage.first_period() != new_vintage.first_period())
		throw invalid("vintage grids start at different periods");
	VintageDiff diff;
	const std::size_t cols = new_vintage.cols();
	diff.new_cells.resize(cols);
	diff.revised_cells.resize(cols);
	for (const auto &c : new_vintage.columns())
		diff.column_ids.push_back(c.id);
	for (std::size_t r = 0; r < new_vintage.rows(); ++r) {
		const bool in_old = r < old_vintage.rows();
		for (std::size_t j = 0; j < cols; ++j) {
			if (!new_vintage.observed(r, j))
				continue;
			if (!in_old || !old_vintage.observed(r, j))
				diff.new_cells[j].push_back(new_vintage.period_at(r));
			else if (old_vintage.value(r, j) != new_vintage.value(r, j))
				diff.revised_cells[j].push_back(new_vintage.period_at(r));
		}
	}
	return diff;
}

MixedFrequencyDataset withhold(const MixedFrequencyDataset &new_vintage, const VintageDiff &diff,
                               const std::vector<std::size_t> &columns) {
	MixedFrequencyDataset out = new_vintage;
	for (const std::size_t j : columns)
		for (const Period p : diff.new_cells.at(j))
			out.clear(*out.row_of(p), j);
	return out;
}

NewsDecomposition decompose(const Predictor &predictor, const MixedFrequencyDataset &old_vintage,
                            const MixedFrequencyDataset &new_vintage, Quarter target, Date old_asof, Date new_asof) {
	const VintageDiff diff = new_data_cells(old_vintage, new_vintage);
	NewsDecomposition out;
	out.old_asof = old_asof;
	out.new_asof = new_asof;
	out.target = target;
	out.prediction_old = predictor(old_vintage);
	out.prediction_new = predictor(new_vintage);

	double raw_sum = 0.0;
	for (std::size_t j = 0; j < new_vintage.cols(); ++j) {
		if (j == new_vintage.target_index())
			continue;
		const auto &id = new_vintage.column(j).id;
		double contribution = 0.0;
		if (!diff.new_cells[j].empty()) {
			try {
				contribution = out.prediction_new - predictor(withhold(new_vintage, diff, {j}));
			} catch (const Error &e) {
				throw Error(e.code(), "prediction with '" + id + "' withheld failed: " + e.what());
			}
		}
		out.raw_contributions.emplace(id, contribution);
		raw_sum += contribution;
	}

	std::vector<std::size_t> every(new_vintage.cols());
	std::iota(every.begin(), every.end(), std::size_t{0});
	try {
		out.revision_contribution = predictor(withhold(new_vintage, diff, every)) - out.prediction_old;
	} catch (const Error &e) {
		throw Error(e.code(), std::string("prediction on the old missing pattern failed: ") + e.what());
	}

	const double denominator = raw_sum + out.revision_contribution;
	if (std::abs(denominator) > 1e-12) {
		out.rescale_factor = out.delta() / denominator;
		for (const auto &[id, raw] : out.raw_contributions)
			out.rescaled_contributions.emplace(id, raw * out.rescale_factor);
		out.rescaled_revision = out.revision_contribution * out.rescale_factor;
	} else {
		out.rescale_factor = 1.0;
		for (const auto &[id, raw] : out.raw_contributions)
			out.rescaled_contributions.emplace(id, 0.0);
		out.rescaled_revision = 0.0;
	}
	return out;
}

NewsDecomposition decompose(const LstmEnsemble &model, const MixedFrequencyDataset &old_vintage,
                            const MixedFrequencyDataset &new_vintage, Quarter target, Date old_asof, Date new_asof) {
	const Predictor predictor = [&](const MixedFrequencyDataset &ds) { return predict(model, ds, target); };
	return decompose(predictor, old_vintage, new_vintage, target, old_asof, new_asof);
}

} // namespace nowcast
