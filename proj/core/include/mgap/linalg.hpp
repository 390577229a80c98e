#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mgap/errors.hpp"
#include "mgap/rng.hpp"

namespace mgap {

using Vec = std::vector<double>;

// Dense row-major matrix.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
  double* row(std::size_t r) { return a.data() + r * cols; }
  const double* row(std::size_t r) const { return a.data() + r * cols; }

  static Mat identity(std::size_t n);
};

double dot(const double* u, const double* v, std::size_t n);
double dot(const Vec& u, const Vec& v);
double norm(const double* v, std::size_t n);
double norm(const Vec& v);

// Unit vector with the direction of v. Throws ZeroVector when the norm
// underflows (<= 1e-300).
Vec normalize(const Vec& v);
void normalize_in_place(double* v, std::size_t n);

// u^T v / (|u||v|), clamped to [-1, 1] so downstream acos never sees 1+eps.
double cosine(const Vec& u, const Vec& v);
double cosine(const double* u, const double* v, std::size_t n);

// |u - v|^2 for unit vectors; equals 2(1 - cos(u, v)).
double euclid_sq_unit(const Vec& u, const Vec& v);

Mat matmul(const Mat& a, const Mat& b);            // a * b
Mat matmul_tn(const Mat& a, const Mat& b);         // a^T * b
Mat transpose(const Mat& m);
Vec mat_vec(const Mat& m, const Vec& x);           // m * x

// i.i.d. N(0, variance) entries, row-major fill order.
Mat gaussian_matrix(std::size_t rows, std::size_t cols, double variance, Rng& rng);
Vec gaussian_vector(std::size_t n, double variance, Rng& rng);

}  // namespace mgap
