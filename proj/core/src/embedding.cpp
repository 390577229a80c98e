#include "mgap/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mgap {

EmbeddingSet EmbeddingSet::from_mat(Mat mat, std::string modality, bool unit_norm) {
  EmbeddingSet set;
  set.m = std::move(mat);
  set.modality = std::move(modality);
  set.unit_norm = unit_norm;
  return set;
}

EmbeddingSet EmbeddingSet::normalized_rows() const {
  EmbeddingSet out = *this;
  for (std::size_t i = 0; i < out.n(); ++i) normalize_in_place(out.row(i), out.dim());
  out.unit_norm = true;
  return out;
}

Vec EmbeddingSet::centroid() const {
  require(n() >= 1, Errc::empty_batch, "centroid of an empty set");
  Vec c(dim(), 0.0);
  for (std::size_t i = 0; i < n(); ++i) {
    const double* r = row(i);
    for (std::size_t j = 0; j < dim(); ++j) c[j] += r[j];
  }
  double inv = 1.0 / static_cast<double>(n());
  for (double& x : c) x *= inv;
  return c;
}

void EmbeddingSet::check_unit_norm(double tol) const {
  for (std::size_t i = 0; i < n(); ++i) {
    double nr = norm(row(i), dim());
    require(std::abs(nr - 1.0) <= tol, Errc::not_unit_norm,
            "row " + std::to_string(i) + " has norm " + std::to_string(nr));
  }
}

ConeStats pairwise_cosine_stats(const EmbeddingSet& set, std::uint64_t pair_budget,
                                std::uint64_t subsample_seed) {
  const std::size_t n = set.n();
  const std::size_t d = set.dim();
  require(n >= 2, Errc::too_few_vectors, "pairwise statistics need at least 2 vectors");

  Vec inv_norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double nr = norm(set.row(i), d);
    require(nr > 1e-300, Errc::zero_vector, "vector " + std::to_string(i) + " is zero");
    inv_norms[i] = 1.0 / nr;
  }

  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  ConeStats stats;
  stats.pair_count = total;

  // Single accumulator in a fixed (i, j) order: a naive double loop
  // over the same pairs reproduces mean/min/max exactly.
  double sum = 0.0;
  double mn = 2.0, mx = -2.0;
  if (total <= pair_budget) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double* ri = set.row(i);
      for (std::size_t j = i + 1; j < n; ++j) {
        double c = dot(ri, set.row(j), d) * inv_norms[i] * inv_norms[j];
        c = std::clamp(c, -1.0, 1.0);
        sum += c;
        mn = std::min(mn, c);
        mx = std::max(mx, c);
      }
    }
    stats.sampled_pairs = total;
    stats.subsampled = false;
  } else {
    Rng rng = Rng::seeded(subsample_seed);
    for (std::uint64_t s = 0; s < pair_budget; ++s) {
      std::size_t i = static_cast<std::size_t>(rng.next_u64() % n);
      std::size_t j = static_cast<std::size_t>(rng.next_u64() % n);
      while (j == i) j = static_cast<std::size_t>(rng.next_u64() % n);
      double c = dot(set.row(i), set.row(j), d) * inv_norms[i] * inv_norms[j];
      c = std::clamp(c, -1.0, 1.0);
      sum += c;
      mn = std::min(mn, c);
      mx = std::max(mx, c);
    }
    stats.sampled_pairs = pair_budget;
    stats.subsampled = true;
  }
  stats.mean_cos = sum / static_cast<double>(stats.sampled_pairs);
  stats.min_cos = mn;
  stats.max_cos = mx;
  return stats;
}

}  // namespace mgap
