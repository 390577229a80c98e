#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "mgap/embedding.hpp"
#include "mgap/linalg.hpp"

namespace mgap {

// N aligned (image, text) rows, both sides unit-norm.
struct PairedBatch {
  EmbeddingSet images;
  EmbeddingSet texts;

  std::size_t n() const { return images.n(); }
  std::size_t dim() const { return images.dim(); }

  static PairedBatch make(EmbeddingSet images, EmbeddingSet texts);
  void validate() const;
};

struct GapReport {
  Vec delta;              // mean(images) - mean(texts)
  double distance = 0.0;  // |delta|
};

GapReport gap_vector(const PairedBatch& batch);

// Symmetric InfoNCE over logits x_i . y_j / tau, natural log, mean over
// the batch, stabilized by per-row/column max subtraction. The *_at
// variants take raw matrices so gradients can be probed off the sphere.
double clip_loss(const PairedBatch& batch, double tau);
double clip_loss_at(const Mat& x, const Mat& y, double tau);

std::pair<Mat, Mat> clip_loss_grad(const PairedBatch& batch, double tau);
std::pair<Mat, Mat> clip_loss_grad_at(const Mat& x, const Mat& y, double tau);

// x_i - lambda * delta and y_i + lambda * delta, renormalized.
PairedBatch shift_embeddings(const PairedBatch& batch, double lambda, const Vec& delta);

struct LandscapePoint {
  double control = 0.0;  // lambda for gap sweeps, theta for sphere sweeps
  double remaining_gap = 0.0;
  double loss = 0.0;
};

struct LandscapeCurve {
  std::vector<LandscapePoint> points;
  std::size_t global_min_index = 0;
  std::vector<std::size_t> local_min_indices;
};

// Global minimum: smallest loss; exact ties resolve to the smallest
// |control|, then the smallest index (a flat curve picks control 0 when
// present). Local minima: strictly below both neighbors, plateaus
// collapse to their first index.
void annotate_minima(LandscapeCurve& curve);

std::vector<double> uniform_grid(double lo, double hi, std::size_t points);

inline constexpr double kDefaultLambdaLo = -1.0;
inline constexpr double kDefaultLambdaHi = 1.5;
inline constexpr std::size_t kDefaultLambdaPoints = 101;

// Shift along the batch's own gap vector for every lambda in the grid,
// recording the remaining gap and the loss.
LandscapeCurve landscape_sweep(const PairedBatch& batch, double tau,
                               const std::vector<double>& lambda_grid);

struct TempProfilePoint {
  double tau = 0.0;
  double argmin_lambda = 0.0;
  double gap_at_argmin = 0.0;
};

// Loss-minimizing lambda and the gap there, per temperature (ascending).
std::vector<TempProfilePoint> temperature_gap_profile(const PairedBatch& batch,
                                                      const std::vector<double>& taus,
                                                      const std::vector<double>& lambda_grid);

}  // namespace mgap
