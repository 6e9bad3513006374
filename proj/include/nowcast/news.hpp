#pragma once

#include "nowcast/dataset.hpp"
#include "nowcast/lstm.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace nowcast {

/// Per-column cell differences between two vintages.
struct VintageDiff {
	std::vector<std::string> column_ids;
	/// Observed in the new vintage, missing (or beyond the grid) in the old one.
	std::vector<std::vector<Period>> new_cells;
	/// Observed in both with different values. Exact comparison.
	std::vector<std::vector<Period>> revised_cells;

	bool empty() const;
};

VintageDiff new_data_cells(const MixedFrequencyDataset &old_vintage, const MixedFrequencyDataset &new_vintage);

struct NewsDecomposition {
	Date old_asof;
	Date new_asof;
	Quarter target;
	double prediction_old = 0.0;
	double prediction_new = 0.0;
	/// Keyed (and so ordered) by column id; every non-target column appears.
	std::map<std::string, double> raw_contributions;
	double revision_contribution = 0.0;
	double rescale_factor = 1.0;
	std::map<std::string, double> rescaled_contributions;
	double rescaled_revision = 0.0;

	double delta() const { return prediction_new - prediction_old; }
};

using Predictor = std::function<double(const MixedFrequencyDataset &)>;

/// Attribute prediction_new - prediction_old to new releases and revisions.
///
/// Each column with new cells is withheld on its own (its new cells made
/// missing again, as they were in the old vintage) and its contribution is the
/// prediction change that withholding undoes. The revision term compares the
/// new vintage restricted to the old missing pattern against the old
/// prediction. All terms are then scaled by one factor so they sum to the
/// prediction change; when the unscaled terms sum to (almost) zero the factor
/// is 1 and every scaled term is 0.
NewsDecomposition decompose(const Predictor &predictor, const MixedFrequencyDataset &old_vintage,
                            const MixedFrequencyDataset &new_vintage, Quarter target, Date old_asof, Date new_asof);

NewsDecomposition decompose(const LstmEnsemble &model, const MixedFrequencyDataset &old_vintage,
                            const MixedFrequencyDataset &new_vintage, Quarter target, Date old_asof, Date new_asof);

/// New vintage with the listed columns' new cells removed.
MixedFrequencyDataset withhold(const MixedFrequencyDataset &new_vintage, const VintageDiff &diff,
                               const std::vector<std::size_t> &columns);

} // namespace nowcast
