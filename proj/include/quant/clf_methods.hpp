#pragma once

#include "quant/classifier.hpp"
#include "quant/simplex.hpp"

namespace quant {

/// Probabilistic classify and count: the mean of the test score rows.
PrevalenceEstimate pcc(const Matrix& test_scores);

/// Nearest-neighbor quantification with inverse class-frequency vote weights
/// (N_min / N_c)^(1/alpha); classify-and-count over the weighted k-NN
/// predictions. Distance ties at the k-th neighbor keep the lower index,
/// vote ties go to the lower class.
PrevalenceEstimate pwk(const Dataset& train, const Matrix& test_features, int k = 10,
                       double alpha = 1.0);

} // namespace quant
