#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mgap/linalg.hpp"
#include "mgap/mlp.hpp"
#include "mgap/stats.hpp"

namespace mgap {

// Cosine monotonicity through one random ReLU layer holds when
// cos(u, v) < 1 / ((r + 1/r) / 2) for the norm ratio r = |u| / |v|.
double cosine_monotonicity_bound(double r);

struct Theorem1Config {
  std::size_t d_in = 512;
  std::size_t d_out = 512;
  double target_cos = 0.5;
  double norm_ratio = 1.0;  // |u| = r |v|
  std::size_t n_trials = 1000;
  std::uint64_t seed = 42;

  void validate() const;  // PreconditionViolated when the bound fails
};

// |v| = 1, |u| = r, cos(u, v) = target_cos, random orientation.
std::pair<Vec, Vec> make_pair_with_cos(std::size_t d_in, double target_cos, double r, Rng& rng);

struct Theorem1Trial {
  double cos_before = 0.0;
  double cos_after = 0.0;
  bool increased = false;
};

// One affine + ReLU layer with W, b ~ N(0, 1/d_out). A rectified output
// that is exactly zero gets cosine 0 by convention.
Theorem1Trial theorem1_trial(const Vec& u, const Vec& v, std::size_t d_out, Rng& rng);

struct TrialReport {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double rate = 0.0;
  double wilson_halfwidth_95 = 0.0;
  double mean_delta = 0.0;  // mean of cos_after - cos_before
  double sd_delta = 0.0;
};

TrialReport theorem1_experiment(const Theorem1Config& cfg);

struct Lemma1Report {
  double lhs = 0.0;        // 1 + u^T v, exact
  double mid_est = 0.0;    // E[(Wu+b)^T (Wv+b)], analytically u^T v + 1
  double upper_est = 0.0;  // 2 E[relu(Wu+b)^T relu(Wv+b)]
  double mid_ci = 0.0;     // CI half-width for mid_est
  double diff_ci = 0.0;    // CI half-width for upper_est - mid_est (paired)
  bool holds = false;      // lhs <= mid + ci  and  mid <= upper + ci
};

Lemma1Report lemma1_check(const Vec& u, const Vec& v, std::size_t d_out, std::size_t n_samples,
                          Rng& rng, double z = kZ99);

// Mean and variance of max(X, 0) for X ~ N(mu, sigma^2).
std::pair<double, double> rectified_gaussian_moments(double mu, double sigma);

struct VarianceReport {
  double within = 0.0;   // E[Var[h_k | weights]] estimate
  double between = 0.0;  // Var[E[h_k | weights]] estimate (unbiased, may be < 0)
  double ratio = 0.0;    // between / (within + between)
  double beta_est = 0.0; // 1 - mean per-seed covariance trace of the penultimate layer
  bool low_budget_warning = false;  // raw negative estimate encountered
};

// Decomposes the variance of output coordinate k over shared
// sphere-uniform inputs and independently seeded networks.
VarianceReport variance_decomposition(const MlpSpec& spec, std::size_t k, std::size_t n_seeds,
                                      std::size_t n_data, std::uint64_t seed);

// Same, with the network seeds given explicitly; the estimator treats
// seed labels symmetrically, so reordering them only moves last-ulp bits.
VarianceReport variance_decomposition(const MlpSpec& spec, std::size_t k,
                                      const std::vector<std::uint64_t>& net_seeds,
                                      std::size_t n_data, std::uint64_t data_seed);

}  // namespace mgap
