#pragma once

#include <functional>
#include <span>
#include <vector>

namespace quant::oracle {

/// Exhaustive minimization over the simplex lattice {m / resolution}.
/// Deliberately naive; the reference the optimization-based quantifiers are
/// checked against. Ties keep the first point in enumeration order
/// (lexicographic in the leading components).
std::vector<double> simplex_grid_minimize(
    const std::function<double(std::span<const double>)>& objective, int num_classes,
    int resolution);

/// Expected classify-and-count output: p * tpr + (1 - p) * fpr.
double cc_expectation(double p, double tpr, double fpr);

} // namespace quant::oracle
