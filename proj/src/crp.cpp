#include "npam/crp.hpp"

#include "npam/error.hpp"

namespace npam {

std::vector<double> crp_weights(std::span<const double> counts, double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("crp_weights: concentration must be positive");
  double total = alpha;
  for (double c : counts) {
    if (c < 0.0) throw ParameterError("crp_weights: negative count");
    total += c;
  }
  std::vector<double> out;
  out.reserve(counts.size() + 1);
  for (double c : counts) out.push_back(c / total);
  out.push_back(alpha / total);
  return out;
}

}  // namespace npam
