#pragma once

#include <cstdint>
#include <string>

#include "mgap/linalg.hpp"

namespace mgap {

// A modality-labeled collection of equal-dimension vectors, the common
// currency of every analysis here.
struct EmbeddingSet {
  Mat m;
  std::string modality = "unlabeled";
  bool unit_norm = false;

  std::size_t n() const { return m.rows; }
  std::size_t dim() const { return m.cols; }
  double* row(std::size_t i) { return m.row(i); }
  const double* row(std::size_t i) const { return m.row(i); }

  static EmbeddingSet from_mat(Mat mat, std::string modality = "unlabeled",
                               bool unit_norm = false);

  // Row-normalized copy with unit_norm set.
  EmbeddingSet normalized_rows() const;

  // Mean of the rows.
  Vec centroid() const;

  // Throws NotUnitNorm unless every row has |.| = 1 within tol.
  void check_unit_norm(double tol = 1e-9) const;
};

struct ConeStats {
  double mean_cos = 0.0;
  double min_cos = 0.0;
  double max_cos = 0.0;
  std::uint64_t pair_count = 0;     // n(n-1)/2 for n vectors
  std::uint64_t sampled_pairs = 0;  // pairs actually evaluated
  bool subsampled = false;
};

inline constexpr std::uint64_t kDefaultPairBudget = 50'000'000;

// Cosine statistics over all unordered distinct pairs, enumerated
// exactly in (i, j) row order with one accumulator so a naive double
// loop reproduces the result bit-for-bit. Sets larger than the pair
// budget are uniformly subsampled (with replacement) and flagged.
ConeStats pairwise_cosine_stats(const EmbeddingSet& set,
                                std::uint64_t pair_budget = kDefaultPairBudget,
                                std::uint64_t subsample_seed = 42);

}  // namespace mgap
