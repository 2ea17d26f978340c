#pragma once

#include <functional>
#include <span>
#include <vector>

namespace cable::quad {

/// Composite Simpson nodes and weights on [a, b]; panels is rounded up to even.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Rule simpson_rule(double a, double b, int panels);

double simpson(const std::function<double(double)>& f, double a, double b, int panels);

/// Trapezoid sum of uniformly spaced samples with spacing h.
double trapezoid(std::span<const double> samples, double h);

/// Pairwise (cascade) summation; deterministic regardless of thread count.
double pairwise_sum(std::span<const double> values);

}  // namespace cable::quad
