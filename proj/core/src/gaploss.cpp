#include "mgap/gaploss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "mgap/errors.hpp"
#include "mgap/parallel.hpp"

namespace mgap {

PairedBatch PairedBatch::make(EmbeddingSet images, EmbeddingSet texts) {
  if (!images.unit_norm) {
    images.check_unit_norm();
    images.unit_norm = true;
  }
  if (!texts.unit_norm) {
    texts.check_unit_norm();
    texts.unit_norm = true;
  }
  PairedBatch batch{std::move(images), std::move(texts)};
  batch.validate();
  return batch;
}

void PairedBatch::validate() const {
  require(images.n() >= 1, Errc::empty_batch, "paired batch is empty");
  require(images.n() == texts.n(), Errc::dimension_mismatch, "image/text pair counts differ");
  require(images.dim() == texts.dim(), Errc::dimension_mismatch, "image/text dimensions differ");
  require(images.unit_norm && texts.unit_norm, Errc::not_unit_norm,
          "paired batch requires unit-norm embeddings");
}

GapReport gap_vector(const PairedBatch& batch) {
  batch.validate();
  GapReport rep;
  Vec ci = batch.images.centroid();
  Vec ct = batch.texts.centroid();
  rep.delta.resize(batch.dim());
  for (std::size_t j = 0; j < batch.dim(); ++j) rep.delta[j] = ci[j] - ct[j];
  rep.distance = norm(rep.delta);
  return rep;
}

namespace {

void check_tau(double tau) {
  require(std::isfinite(tau) && tau > 0.0, Errc::invalid_temperature,
          "temperature must be positive");
}

// Logit matrix S_ij = x_i . y_j / tau.
Mat logits(const Mat& x, const Mat& y, double tau) {
  Mat s(x.rows, y.rows);
  double inv_tau = 1.0 / tau;
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < y.rows; ++j)
      s.at(i, j) = dot(x.row(i), y.row(j), x.cols) * inv_tau;
  return s;
}

double lse_minus_diag_rows(const Mat& s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.rows; ++i) {
    double m = s.at(i, 0);
    for (std::size_t j = 1; j < s.cols; ++j) m = std::max(m, s.at(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < s.cols; ++j) sum += std::exp(s.at(i, j) - m);
    acc += m + std::log(sum) - s.at(i, i);
  }
  return acc;
}

double lse_minus_diag_cols(const Mat& s) {
  double acc = 0.0;
  for (std::size_t j = 0; j < s.cols; ++j) {
    double m = s.at(0, j);
    for (std::size_t i = 1; i < s.rows; ++i) m = std::max(m, s.at(i, j));
    double sum = 0.0;
    for (std::size_t i = 0; i < s.rows; ++i) sum += std::exp(s.at(i, j) - m);
    acc += m + std::log(sum) - s.at(j, j);
  }
  return acc;
}

}  // namespace

double clip_loss_at(const Mat& x, const Mat& y, double tau) {
  check_tau(tau);
  require(x.rows == y.rows && x.cols == y.cols, Errc::dimension_mismatch,
          "clip loss needs equally shaped matrices");
  require(x.rows >= 1, Errc::empty_batch, "clip loss needs at least one pair");
  Mat s = logits(x, y, tau);
  double n = static_cast<double>(x.rows);
  return (lse_minus_diag_rows(s) + lse_minus_diag_cols(s)) / (2.0 * n);
}

double clip_loss(const PairedBatch& batch, double tau) {
  batch.validate();
  return clip_loss_at(batch.images.m, batch.texts.m, tau);
}

std::pair<Mat, Mat> clip_loss_grad_at(const Mat& x, const Mat& y, double tau) {
  check_tau(tau);
  require(x.rows == y.rows && x.cols == y.cols, Errc::dimension_mismatch,
          "clip loss needs equally shaped matrices");
  require(x.rows >= 1, Errc::empty_batch, "clip loss needs at least one pair");
  const std::size_t n = x.rows;
  Mat s = logits(x, y, tau);

  // dL/dS = (softmax_rows(S) + softmax_cols(S) - 2I) / (2N).
  Mat g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double m = s.at(i, 0);
    for (std::size_t j = 1; j < n; ++j) m = std::max(m, s.at(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += std::exp(s.at(i, j) - m);
    for (std::size_t j = 0; j < n; ++j) g.at(i, j) = std::exp(s.at(i, j) - m) / sum;
  }
  for (std::size_t j = 0; j < n; ++j) {
    double m = s.at(0, j);
    for (std::size_t i = 1; i < n; ++i) m = std::max(m, s.at(i, j));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += std::exp(s.at(i, j) - m);
    for (std::size_t i = 0; i < n; ++i) g.at(i, j) += std::exp(s.at(i, j) - m) / sum;
  }
  double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    g.at(i, i) -= 2.0;
    for (std::size_t j = 0; j < n; ++j) g.at(i, j) *= scale;
  }

  // S = X Y^T / tau, so dX = G Y / tau and dY = G^T X / tau.
  double inv_tau = 1.0 / tau;
  Mat dx(n, x.cols), dy(n, x.cols);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < x.cols; ++c) {
      double sx = 0.0, sy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        sx += g.at(i, j) * y.at(j, c);
        sy += g.at(j, i) * x.at(j, c);
      }
      dx.at(i, c) = sx * inv_tau;
      dy.at(i, c) = sy * inv_tau;
    }
  return {std::move(dx), std::move(dy)};
}

std::pair<Mat, Mat> clip_loss_grad(const PairedBatch& batch, double tau) {
  batch.validate();
  return clip_loss_grad_at(batch.images.m, batch.texts.m, tau);
}

PairedBatch shift_embeddings(const PairedBatch& batch, double lambda, const Vec& delta) {
  batch.validate();
  require(delta.size() == batch.dim(), Errc::dimension_mismatch,
          "shift direction has wrong dimension");
  // Exact identity when nothing moves; renormalizing would stir
  // last-ulp bits and a flat sweep would stop being flat.
  bool zero_delta = true;
  for (double d : delta)
    if (d != 0.0) {
      zero_delta = false;
      break;
    }
  if (lambda == 0.0 || zero_delta) return batch;
  PairedBatch out = batch;
  for (std::size_t i = 0; i < out.n(); ++i) {
    double* x = out.images.row(i);
    double* y = out.texts.row(i);
    for (std::size_t j = 0; j < out.dim(); ++j) {
      x[j] -= lambda * delta[j];
      y[j] += lambda * delta[j];
    }
    normalize_in_place(x, out.dim());
    normalize_in_place(y, out.dim());
  }
  return out;
}

void annotate_minima(LandscapeCurve& curve) {
  const auto& pts = curve.points;
  require(!pts.empty(), Errc::invalid_config, "empty landscape curve");

  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].loss < pts[best].loss ||
        (pts[i].loss == pts[best].loss &&
         std::fabs(pts[i].control) < std::fabs(pts[best].control)))
      best = i;
  }
  curve.global_min_index = best;

  curve.local_min_indices.clear();
  std::size_t i = 0;
  while (i < pts.size()) {
    std::size_t j = i;
    while (j + 1 < pts.size() && pts[j + 1].loss == pts[i].loss) ++j;
    bool left_up = i > 0 && pts[i - 1].loss > pts[i].loss;
    bool right_up = j + 1 < pts.size() && pts[j + 1].loss > pts[j].loss;
    if (left_up && right_up) curve.local_min_indices.push_back(i);
    i = j + 1;
  }
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
  require(points >= 1, Errc::invalid_config, "grid needs at least one point");
  require(std::isfinite(lo) && std::isfinite(hi) && (points == 1 || hi > lo),
          Errc::invalid_config, "grid bounds must be finite and increasing");
  std::vector<double> grid(points);
  if (points == 1) {
    grid[0] = lo;
    return grid;
  }
  double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = lo + step * static_cast<double>(i);
  grid.back() = hi;
  return grid;
}

namespace {

void check_grid(const std::vector<double>& grid) {
  require(!grid.empty(), Errc::invalid_config, "empty sweep grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    require(grid[i] > grid[i - 1], Errc::invalid_config, "sweep grid must be strictly increasing");
}

}  // namespace

LandscapeCurve landscape_sweep(const PairedBatch& batch, double tau,
                               const std::vector<double>& lambda_grid) {
  batch.validate();
  check_tau(tau);
  check_grid(lambda_grid);

  Vec delta = gap_vector(batch).delta;
  LandscapeCurve curve;
  curve.points.resize(lambda_grid.size());
  parallel_for(lambda_grid.size(), [&](std::size_t g) {
    PairedBatch shifted = shift_embeddings(batch, lambda_grid[g], delta);
    curve.points[g] = {lambda_grid[g], gap_vector(shifted).distance, clip_loss(shifted, tau)};
  });
  annotate_minima(curve);
  return curve;
}

std::vector<TempProfilePoint> temperature_gap_profile(const PairedBatch& batch,
                                                      const std::vector<double>& taus,
                                                      const std::vector<double>& lambda_grid) {
  batch.validate();
  require(!taus.empty(), Errc::invalid_config, "no temperatures given");
  for (std::size_t i = 0; i < taus.size(); ++i) {
    check_tau(taus[i]);
    require(i == 0 || taus[i] > taus[i - 1], Errc::invalid_config,
            "temperatures must be ascending");
  }
  check_grid(lambda_grid);

  // Shifted batches do not depend on tau; build them once.
  Vec delta = gap_vector(batch).delta;
  std::vector<PairedBatch> shifted(lambda_grid.size());
  std::vector<double> gaps(lambda_grid.size());
  parallel_for(lambda_grid.size(), [&](std::size_t g) {
    shifted[g] = shift_embeddings(batch, lambda_grid[g], delta);
    gaps[g] = gap_vector(shifted[g]).distance;
  });

  std::vector<TempProfilePoint> profile(taus.size());
  for (std::size_t t = 0; t < taus.size(); ++t) {
    LandscapeCurve curve;
    curve.points.resize(lambda_grid.size());
    parallel_for(lambda_grid.size(), [&](std::size_t g) {
      curve.points[g] = {lambda_grid[g], gaps[g], clip_loss(shifted[g], taus[t])};
    });
    annotate_minima(curve);
    const LandscapePoint& p = curve.points[curve.global_min_index];
    profile[t] = {taus[t], p.control, p.remaining_gap};
  }
  return profile;
}

}  // namespace mgap
