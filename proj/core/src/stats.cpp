#include "mgap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mgap/errors.hpp"

namespace mgap {

double mean(const std::vector<double>& xs) {
  require(!xs.empty(), Errc::too_few_vectors, "mean of an empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
  require(xs.size() >= 2, Errc::too_few_vectors, "sample variance needs n >= 2");
  double m = mean(xs);
  double s = 0.0;
  for (double x : xs) {
    double d = x - m;
    s += d * d;
  }
  return s / static_cast<double>(xs.size() - 1);
}

double sample_sd(const std::vector<double>& xs) { return std::sqrt(sample_variance(xs)); }

double mean_ci_halfwidth(const std::vector<double>& xs, double z) {
  return z * sample_sd(xs) / std::sqrt(static_cast<double>(xs.size()));
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  require(trials > 0, Errc::too_few_vectors, "wilson interval needs trials >= 1");
  require(successes <= trials, Errc::invalid_config, "successes exceed trials");
  double n = static_cast<double>(trials);
  double p = static_cast<double>(successes) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2.0 * n)) / denom;
  double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {center - half, center + half};
}

namespace {

std::vector<double> ranks_with_ties(const std::vector<double>& xs) {
  std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> rank(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  require(xs.size() == ys.size(), Errc::dimension_mismatch, "spearman length mismatch");
  require(xs.size() >= 2, Errc::too_few_vectors, "spearman needs n >= 2");
  std::vector<double> rx = ranks_with_ties(xs);
  std::vector<double> ry = ranks_with_ties(ys);
  double mx = mean(rx), my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    double dx = rx[i] - mx;
    double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  require(sxx > 0.0 && syy > 0.0, Errc::invalid_config,
          "spearman undefined for a constant sequence");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace mgap
