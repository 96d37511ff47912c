#pragma once

#include <span>
#include <vector>

namespace npam {

// Predictive seating probabilities of a Chinese restaurant process: entry i
// is counts[i] / (N + alpha), the last entry is alpha / (N + alpha) for an
// unoccupied table. Throws ParameterError unless alpha > 0.
std::vector<double> crp_weights(std::span<const double> counts, double alpha);

}  // namespace npam
