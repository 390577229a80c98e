#include "mgap/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mgap {

namespace {

// One-sided Jacobi on the rows of bt (the columns of the original
// matrix, stored contiguously). Rotations accumulate into the rows of
// vt. Converged when every pair satisfies |b_i . b_j| <= tol |b_i||b_j|.
void hestenes_rows(Mat& bt, Mat& vt, std::size_t sweep_cap) {
  const std::size_t n = bt.rows;
  const std::size_t m = bt.cols;
  const double tol = 2.22e-16 * std::sqrt(static_cast<double>(m) + 1.0);

  // Columns whose squared norm falls ~140 decimal orders below the
  // dominant one are numerically zero. Left in, their denormal noise
  // triggers rotations that round to no-ops and the sweep cycles
  // forever; flushing them to exact zero deflates the pair loop.
  double max_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    max_sq = std::max(max_sq, dot(bt.row(i), bt.row(i), m));
  const double dead_sq = max_sq * 1e-280;

  for (std::size_t sweep = 0; sweep < sweep_cap; ++sweep) {
    for (std::size_t i = 0; i < n; ++i) {
      double* bi = bt.row(i);
      double a = dot(bi, bi, m);
      if (a > 0.0 && a <= dead_sq) std::fill(bi, bi + m, 0.0);
    }
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double* bi = bt.row(i);
        double* bj = bt.row(j);
        double alpha = dot(bi, bi, m);
        double beta = dot(bj, bj, m);
        double gamma = dot(bi, bj, m);
        if (gamma == 0.0 || std::fabs(gamma) <= tol * std::sqrt(alpha) * std::sqrt(beta)) continue;

        double zeta = (beta - alpha) / (2.0 * gamma);
        double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;

        for (std::size_t k = 0; k < m; ++k) {
          double x = bi[k], y = bj[k];
          bi[k] = c * x - s * y;
          bj[k] = s * x + c * y;
        }
        double* vi = vt.row(i);
        double* vj = vt.row(j);
        for (std::size_t k = 0; k < vt.cols; ++k) {
          double x = vi[k], y = vj[k];
          vi[k] = c * x - s * y;
          vj[k] = s * x + c * y;
        }
        rotated = true;
      }
    }
    if (!rotated) return;
  }
  fail(Errc::convergence_failure,
       "one-sided Jacobi exceeded the sweep cap of 100 * max(rows, cols)");
}

// Fills U columns whose singular value is (numerically) zero with unit
// vectors orthogonal to all columns already placed; the candidate basis
// vector with the largest residual wins, which is deterministic.
void fill_orthonormal_column(Mat& u, std::size_t col, const std::vector<bool>& placed) {
  const std::size_t m = u.rows;
  Vec best(m, 0.0);
  double best_norm = -1.0;
  for (std::size_t cand = 0; cand < m; ++cand) {
    Vec w(m, 0.0);
    w[cand] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t q = 0; q < u.cols; ++q) {
        if (!placed[q]) continue;
        double proj = 0.0;
        for (std::size_t r = 0; r < m; ++r) proj += u.at(r, q) * w[r];
        for (std::size_t r = 0; r < m; ++r) w[r] -= proj * u.at(r, q);
      }
    }
    double nw = norm(w);
    if (nw > best_norm) {
      best_norm = nw;
      best = w;
    }
    if (best_norm > 0.9) break;  // early out, already a clean direction
  }
  for (std::size_t r = 0; r < m; ++r) u.at(r, col) = best[r] / best_norm;
}

// Direct path for m >= n: Jacobi on the columns of a.
SvdResult svd_tall(const Mat& a) {
  const std::size_t m = a.rows, n = a.cols;
  Mat bt = transpose(a);            // n x m, rows are columns of a
  Mat vt = Mat::identity(n);        // rows are columns of v
  hestenes_rows(bt, vt, 100 * std::max(m, n));

  std::vector<double> sig(n);
  for (std::size_t i = 0; i < n; ++i) sig[i] = norm(bt.row(i), m);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sig[x] > sig[y]; });

  SvdResult res;
  res.sigma.resize(n);
  res.u = Mat(m, n);
  res.v = Mat(n, n);
  double smax = sig[order[0]];
  double cutoff = smax * 1e-13;
  std::vector<bool> placed(n, false);
  std::vector<std::size_t> pending;
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t idx = order[p];
    res.sigma[p] = sig[idx];
    for (std::size_t r = 0; r < n; ++r) res.v.at(r, p) = vt.at(idx, r);
    if (sig[idx] > cutoff) {
      const double* br = bt.row(idx);
      double inv = 1.0 / sig[idx];
      for (std::size_t r = 0; r < m; ++r) res.u.at(r, p) = br[r] * inv;
      placed[p] = true;
    } else {
      pending.push_back(p);
    }
  }
  for (std::size_t p : pending) {
    fill_orthonormal_column(res.u, p, placed);
    placed[p] = true;
  }
  return res;
}

// Gram path for tall-and-skinny matrices: eigendecompose a^T a, then
// recover U = a V / sigma with modified Gram-Schmidt cleanup.
SvdResult svd_gram(const Mat& a) {
  const std::size_t m = a.rows, n = a.cols;
  Mat c = matmul_tn(a, a);  // n x n symmetric PSD
  Mat bt = transpose(c);
  Mat vt = Mat::identity(n);
  hestenes_rows(bt, vt, 100 * std::max(m, n));

  std::vector<double> lam(n);
  for (std::size_t i = 0; i < n; ++i) lam[i] = norm(bt.row(i), n);  // |C v_i| = lambda_i
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return lam[x] > lam[y]; });

  SvdResult res;
  res.sigma.resize(n);
  res.u = Mat(m, n);
  res.v = Mat(n, n);
  double lmax = lam[order[0]];
  double cut = lmax * 1e-13;
  std::vector<bool> placed(n, false);
  std::vector<std::size_t> pending;
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t idx = order[p];
    double sv = lam[idx] > 0.0 ? std::sqrt(lam[idx]) : 0.0;
    res.sigma[p] = sv;
    for (std::size_t r = 0; r < n; ++r) res.v.at(r, p) = vt.at(idx, r);
    if (lam[idx] > cut) {
      // u_p = a v_p / sigma, re-orthogonalized against earlier columns
      Vec col(m, 0.0);
      for (std::size_t r = 0; r < m; ++r) {
        const double* ar = a.row(r);
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += ar[k] * res.v.at(k, p);
        col[r] = s;
      }
      for (std::size_t q = 0; q < p; ++q) {
        if (!placed[q]) continue;
        double proj = 0.0;
        for (std::size_t r = 0; r < m; ++r) proj += res.u.at(r, q) * col[r];
        for (std::size_t r = 0; r < m; ++r) col[r] -= proj * res.u.at(r, q);
      }
      double nc = norm(col);
      if (nc > 0.0) {
        for (std::size_t r = 0; r < m; ++r) res.u.at(r, p) = col[r] / nc;
        placed[p] = true;
        continue;
      }
    }
    pending.push_back(p);
  }
  for (std::size_t p : pending) {
    fill_orthonormal_column(res.u, p, placed);
    placed[p] = true;
  }
  return res;
}

}  // namespace

SvdResult svd(const Mat& a) {
  require(a.rows > 0 && a.cols > 0, Errc::invalid_config, "svd of an empty matrix");
  if (a.rows < a.cols) {
    SvdResult t = svd(transpose(a));
    return SvdResult{std::move(t.v), std::move(t.sigma), std::move(t.u)};
  }
  if (a.rows >= 4 * a.cols && a.rows * a.cols >= 65536) return svd_gram(a);
  return svd_tall(a);
}

}  // namespace mgap
