#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace npam {

using Rng = std::mt19937_64;

double uniform01(Rng& rng);

// Inverse-CDF draw over unnormalized nonnegative weights, scanning in order.
// `total` must equal the sum of `weights`.
std::size_t sample_index(std::span<const double> weights, double total, Rng& rng);
std::size_t sample_index(std::span<const double> weights, Rng& rng);

// Gamma parameterized by shape and scale (mean = shape * scale).
double sample_gamma(double shape, double scale, Rng& rng);
double sample_beta(double a, double b, Rng& rng);
bool sample_bernoulli(double p, Rng& rng);

// Zero entries of `alpha` are allowed and yield exact zeros in the draw;
// at least one entry must be positive.
std::vector<double> sample_dirichlet(std::span<const double> alpha, Rng& rng);

}  // namespace npam
