#include "kcm/estimator.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace kcm {

double EstimatorReport::z_score(double reference) const {
  const double diff = estimate - reference;
  if (std_error > 0.0) return diff / std_error;
  if (diff == 0.0) return 0.0;
  return diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double total = 0.0;
    for (double v : values) total += v;
    return total;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

EstimatorReport summarize(std::span<const double> samples) {
  EstimatorReport report;
  report.n_samples = static_cast<long>(samples.size());
  if (samples.empty()) return report;
  const double mean = pairwise_sum(samples) / static_cast<double>(samples.size());
  report.estimate = mean;
  if (samples.size() < 2) return report;
  std::vector<double> squares(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) squares[i] = (samples[i] - mean) * (samples[i] - mean);
  const double variance = pairwise_sum(squares) / static_cast<double>(samples.size() - 1);
  report.std_error = std::sqrt(variance / static_cast<double>(samples.size()));
  return report;
}

}  // namespace kcm
