#pragma once

#include <cstdint>
#include <vector>

namespace mgap {

inline constexpr double kZ95 = 1.9599639845400545;  // two-sided 95% normal quantile
inline constexpr double kZ99 = 2.5758293035489004;  // two-sided 99% normal quantile

double mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);  // ddof = 1
double sample_sd(const std::vector<double>& xs);

// Half-width of a normal-approximation CI for the mean of xs.
double mean_ci_halfwidth(const std::vector<double>& xs, double z);

// Wilson score interval for a binomial rate; returns {lo, hi}.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z);

// Spearman rank correlation (average ranks on ties).
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace mgap
