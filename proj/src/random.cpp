#include "npam/random.hpp"

#include <numeric>

#include "npam/error.hpp"

namespace npam {

double uniform01(Rng& rng) {
  // 53 random bits -> [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t sample_index(std::span<const double> weights, double total, Rng& rng) {
  if (weights.empty()) throw ParameterError("sample_index: no candidates");
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  // Rounding can leave u marginally above the running sum; take the last
  // candidate with positive weight.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  throw ParameterError("sample_index: all weights are zero");
}

std::size_t sample_index(std::span<const double> weights, Rng& rng) {
  return sample_index(weights, std::accumulate(weights.begin(), weights.end(), 0.0), rng);
}

double sample_gamma(double shape, double scale, Rng& rng) {
  if (!(shape > 0.0) || !(scale > 0.0)) throw ParameterError("sample_gamma: shape and scale must be positive");
  std::gamma_distribution<double> dist(shape, scale);
  return dist(rng);
}

double sample_beta(double a, double b, Rng& rng) {
  const double x = sample_gamma(a, 1.0, rng);
  const double y = sample_gamma(b, 1.0, rng);
  if (x + y == 0.0) return a / (a + b);
  return x / (x + y);
}

bool sample_bernoulli(double p, Rng& rng) { return uniform01(rng) < p; }

std::vector<double> sample_dirichlet(std::span<const double> alpha, Rng& rng) {
  std::vector<double> out(alpha.size(), 0.0);
  double total = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] < 0.0) throw ParameterError("sample_dirichlet: negative concentration");
    if (alpha[i] > 0.0) {
      any = true;
      out[i] = sample_gamma(alpha[i], 1.0, rng);
      total += out[i];
    }
  }
  if (!any) throw ParameterError("sample_dirichlet: all concentrations are zero");
  if (total <= 0.0) {
    // Every gamma draw underflowed (tiny concentrations); the limit is a
    // point mass on one positive component chosen proportionally to alpha.
    const std::size_t k = sample_index(alpha, rng);
    out.assign(alpha.size(), 0.0);
    out[k] = 1.0;
    return out;
  }
  for (double& v : out) v /= total;
  return out;
}

}  // namespace npam
