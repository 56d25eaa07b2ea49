#include "quant/oracles.hpp"

#include <limits>
#include <stdexcept>

namespace quant::oracle {

namespace {

void scan(const std::function<double(std::span<const double>)>& objective,
          std::vector<double>& point, std::size_t index, int remaining, int resolution,
          double& best_value, std::vector<double>& best_point) {
    if (index + 1 == point.size()) {
        point[index] = static_cast<double>(remaining) / resolution;
        const double value = objective(point);
        if (value < best_value) {
            best_value = value;
            best_point = point;
        }
        return;
    }
    for (int m = 0; m <= remaining; ++m) {
        point[index] = static_cast<double>(m) / resolution;
        scan(objective, point, index + 1, remaining - m, resolution, best_value, best_point);
    }
}

} // namespace

std::vector<double> simplex_grid_minimize(
    const std::function<double(std::span<const double>)>& objective, int num_classes,
    int resolution) {
    if (num_classes < 1 || num_classes > 4)
        throw std::invalid_argument("simplex_grid_minimize: supports 1 <= L <= 4");
    if (resolution < 1 || resolution > 200)
        throw std::invalid_argument("simplex_grid_minimize: resolution must be in [1, 200]");
    std::vector<double> point(static_cast<std::size_t>(num_classes), 0.0);
    std::vector<double> best_point;
    double best_value = std::numeric_limits<double>::infinity();
    scan(objective, point, 0, resolution, resolution, best_value, best_point);
    return best_point;
}

double cc_expectation(double p, double tpr, double fpr) {
    return p * tpr + (1.0 - p) * fpr;
}

} // namespace quant::oracle
