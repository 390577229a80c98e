#include "mgap/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace mgap {

namespace {

const char* errc_names[] = {
    "ZeroVector",      "DimensionMismatch", "TooFewVectors",  "InvalidVariance",
    "NotUnitNorm",     "ConvergenceFailure", "AngleOutOfRange", "DimTooSmall",
    "InvalidSpec",     "InvalidCos",        "PreconditionViolated", "InvalidSigma",
    "InvalidTemperature", "EmptyBatch",     "InvalidConfig",  "DivergenceDetected",
    "NotFound",        "ParseError",        "IoError",
};

}  // namespace

const char* errc_name(Errc code) { return errc_names[static_cast<int>(code)]; }

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

double dot(const double* u, const double* v, std::size_t n) {
  // Fixed evaluation order (4 lanes then a fixed merge) keeps results
  // bit-identical across call sites and thread counts.
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += u[i] * v[i];
    s1 += u[i + 1] * v[i + 1];
    s2 += u[i + 2] * v[i + 2];
    s3 += u[i + 3] * v[i + 3];
  }
  for (; i < n; ++i) s0 += u[i] * v[i];
  return (s0 + s1) + (s2 + s3);
}

double dot(const Vec& u, const Vec& v) {
  require(u.size() == v.size(), Errc::dimension_mismatch,
          "dot of length " + std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  return dot(u.data(), v.data(), u.size());
}

double norm(const double* v, std::size_t n) { return std::sqrt(dot(v, v, n)); }

double norm(const Vec& v) { return norm(v.data(), v.size()); }

void normalize_in_place(double* v, std::size_t n) {
  double nv = norm(v, n);
  require(nv > 1e-300, Errc::zero_vector, "cannot normalize a (near-)zero vector");
  double inv = 1.0 / nv;
  for (std::size_t i = 0; i < n; ++i) v[i] *= inv;
}

Vec normalize(const Vec& v) {
  Vec out = v;
  normalize_in_place(out.data(), out.size());
  return out;
}

double cosine(const double* u, const double* v, std::size_t n) {
  double nu = norm(u, n);
  double nv = norm(v, n);
  require(nu > 1e-300 && nv > 1e-300, Errc::zero_vector, "cosine of a zero vector");
  double c = dot(u, v, n) / (nu * nv);
  return std::clamp(c, -1.0, 1.0);
}

double cosine(const Vec& u, const Vec& v) {
  require(u.size() == v.size(), Errc::dimension_mismatch, "cosine dimension mismatch");
  return cosine(u.data(), v.data(), u.size());
}

double euclid_sq_unit(const Vec& u, const Vec& v) {
  require(u.size() == v.size(), Errc::dimension_mismatch, "euclid_sq_unit dimension mismatch");
  require(std::abs(norm(u) - 1.0) <= 1e-9 && std::abs(norm(v) - 1.0) <= 1e-9,
          Errc::not_unit_norm, "euclid_sq_unit expects unit vectors");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double d = u[i] - v[i];
    s += d * d;
  }
  return s;
}

Mat matmul(const Mat& a, const Mat& b) {
  require(a.cols == b.rows, Errc::dimension_mismatch, "matmul shape mismatch");
  Mat c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ar = a.row(i);
    double* cr = c.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      double aik = ar[k];
      const double* br = b.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) cr[j] += aik * br[j];
    }
  }
  return c;
}

Mat matmul_tn(const Mat& a, const Mat& b) {
  require(a.rows == b.rows, Errc::dimension_mismatch, "matmul_tn shape mismatch");
  Mat c(a.cols, b.cols);
  for (std::size_t k = 0; k < a.rows; ++k) {
    const double* ar = a.row(k);
    const double* br = b.row(k);
    for (std::size_t i = 0; i < a.cols; ++i) {
      double aki = ar[i];
      double* cr = c.row(i);
      for (std::size_t j = 0; j < b.cols; ++j) cr[j] += aki * br[j];
    }
  }
  return c;
}

Mat transpose(const Mat& m) {
  Mat t(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) t.at(j, i) = m.at(i, j);
  return t;
}

Vec mat_vec(const Mat& m, const Vec& x) {
  require(m.cols == x.size(), Errc::dimension_mismatch, "mat_vec shape mismatch");
  Vec y(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) y[i] = dot(m.row(i), x.data(), m.cols);
  return y;
}

Mat gaussian_matrix(std::size_t rows, std::size_t cols, double variance, Rng& rng) {
  require(std::isfinite(variance) && variance > 0.0, Errc::invalid_variance,
          "variance must be positive and finite");
  Mat m(rows, cols);
  double sd = std::sqrt(variance);
  for (double& v : m.a) v = sd * rng.normal();
  return m;
}

Vec gaussian_vector(std::size_t n, double variance, Rng& rng) {
  require(std::isfinite(variance) && variance > 0.0, Errc::invalid_variance,
          "variance must be positive and finite");
  Vec v(n);
  double sd = std::sqrt(variance);
  for (double& x : v) x = sd * rng.normal();
  return v;
}

}  // namespace mgap
