#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace snakecpg {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

// Ordinary least squares y = slope * x + intercept. Throws DomainError with
// fewer than two points or constant x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Average ranks, ties share the mean rank.
std::vector<double> ranks(std::span<const double> x);
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace snakecpg
