#pragma once

#include "catdist/dataset.hpp"
#include "catdist/delta.hpp"

namespace catdist {

/// Builds Delta for `spec` from training data. Supervised specs need the
/// training labels; all others ignore them. A response variable already marked
/// in `train` is used as the labels and excluded from the blocks.
BlockDiagonalDelta build_delta(const MeasureSpec& spec, const CategoricalDataset& train,
                               const Labeling* labels = nullptr);

}  // namespace catdist
