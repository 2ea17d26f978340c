#include "cable/quadrature.hpp"

#include "cable/errors.hpp"

namespace cable::quad {

Rule simpson_rule(double a, double b, int panels) {
  if (panels < 2) panels = 2;
  if (panels % 2 != 0) ++panels;
  Rule rule;
  rule.nodes.resize(panels + 1);
  rule.weights.resize(panels + 1);
  const double h = (b - a) / panels;
  for (int i = 0; i <= panels; ++i) {
    rule.nodes[i] = i == panels ? b : a + h * i;
    const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    rule.weights[i] = w * h / 3.0;
  }
  return rule;
}

double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  const Rule rule = simpson_rule(a, b, panels);
  std::vector<double> terms(rule.nodes.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = rule.weights[i] * f(rule.nodes[i]);
  return pairwise_sum(terms);
}

double trapezoid(std::span<const double> samples, double h) {
  if (samples.size() < 2) return 0.0;
  std::vector<double> terms(samples.begin(), samples.end());
  terms.front() *= 0.5;
  terms.back() *= 0.5;
  return h * pairwise_sum(terms);
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 32;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace cable::quad
