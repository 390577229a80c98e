#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mgap/embedding.hpp"
#include "mgap/linalg.hpp"
#include "mgap/parallel.hpp"
#include "mgap/rng.hpp"
#include "mgap/special.hpp"
#include "mgap/stats.hpp"
#include "mgap/svd.hpp"
#include "mgap/theory.hpp"

#include "test_util.hpp"

using namespace mgap;
using testutil::random_unit_set;
using testutil::thrown_code;

namespace {

constexpr double kPi = 3.14159265358979323846;

Mat givens_orthogonal(std::size_t n, std::uint64_t seed, std::size_t rotations) {
  Mat q = Mat::identity(n);
  Rng rng = Rng::seeded(seed);
  for (std::size_t r = 0; r < rotations; ++r) {
    std::size_t i = static_cast<std::size_t>(rng.next_u64() % n);
    std::size_t j = static_cast<std::size_t>(rng.next_u64() % n);
    if (i == j) continue;
    double angle = rng.uniform() * 2.0 * kPi;
    double c = std::cos(angle), s = std::sin(angle);
    for (std::size_t k = 0; k < n; ++k) {
      double x = q.at(i, k), y = q.at(j, k);
      q.at(i, k) = c * x - s * y;
      q.at(j, k) = s * x + c * y;
    }
  }
  return q;
}

double frob(const Mat& m) {
  double s = 0.0;
  for (double v : m.a) s += v * v;
  return std::sqrt(s);
}

Mat reconstruct(const SvdResult& r) {
  Mat us = r.u;
  for (std::size_t i = 0; i < us.rows; ++i)
    for (std::size_t j = 0; j < us.cols; ++j) us.at(i, j) *= r.sigma[j];
  Mat vt = transpose(r.v);
  return matmul(us, vt);
}

double orthonormality_error(const Mat& m) {
  Mat g = matmul_tn(m, m);
  for (std::size_t i = 0; i < g.rows; ++i) g.at(i, i) -= 1.0;
  return frob(g);
}

void check_svd_contract(const Mat& a) {
  SvdResult r = svd(a);
  double scale = std::max(frob(a), 1e-30);
  Mat rec = reconstruct(r);
  double err = 0.0;
  for (std::size_t k = 0; k < rec.a.size(); ++k) err += (rec.a[k] - a.a[k]) * (rec.a[k] - a.a[k]);
  CHECK(std::sqrt(err) <= 1e-8 * scale);
  CHECK(orthonormality_error(r.u) <= 1e-8);
  CHECK(orthonormality_error(r.v) <= 1e-8);
  for (std::size_t k = 0; k < r.sigma.size(); ++k) {
    CHECK(r.sigma[k] >= 0.0);
    if (k > 0) CHECK(r.sigma[k] <= r.sigma[k - 1]);
  }
}

}  // namespace

TEST_CASE("normalize rescales to the unit sphere") {
  Vec v = normalize({3.0, 4.0});
  CHECK(v[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(v[1] == doctest::Approx(0.8).epsilon(1e-12));

  Vec axis = normalize({0.0, 0.0, 7.0});
  CHECK(axis[0] == 0.0);
  CHECK(axis[1] == 0.0);
  CHECK(axis[2] == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(thrown_code([] { normalize({0.0, 0.0}); }) == Errc::zero_vector);
}

TEST_CASE("normalize is idempotent") {
  Rng rng = Rng::seeded(7);
  for (int t = 0; t < 20; ++t) {
    Vec v = gaussian_vector(16, 4.0, rng);
    Vec once = normalize(v);
    Vec twice = normalize(once);
    for (std::size_t i = 0; i < v.size(); ++i)
      CHECK(twice[i] == doctest::Approx(once[i]).epsilon(1e-12));
    CHECK(std::abs(norm(once) - 1.0) <= 1e-12);
  }
}

TEST_CASE("cosine on hand cases") {
  CHECK(cosine({1.0, 2.0, 2.0}, {1.0, 2.0, 2.0}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cosine({1.0, 0.0}, {-1.0, 0.0}) == doctest::Approx(-1.0).epsilon(1e-12));

  CHECK(thrown_code([] { cosine({0.0, 0.0}, {1.0, 0.0}); }) == Errc::zero_vector);
  CHECK(thrown_code([] { cosine({1.0, 0.0}, {1.0, 0.0, 0.0}); }) == Errc::dimension_mismatch);
}

TEST_CASE("cosine is symmetric, scale-invariant, and clamped") {
  Rng rng = Rng::seeded(11);
  for (int t = 0; t < 30; ++t) {
    Vec u = gaussian_vector(8, 1.0, rng);
    Vec v = gaussian_vector(8, 1.0, rng);
    double c = cosine(u, v);
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
    CHECK(cosine(v, u) == doctest::Approx(c).epsilon(1e-12));

    double alpha = 0.5 + rng.uniform() * 3.0;
    double beta = 0.5 + rng.uniform() * 3.0;
    Vec su = u, sv = v;
    for (double& x : su) x *= alpha;
    for (double& x : sv) x *= beta;
    CHECK(cosine(su, sv) == doctest::Approx(c).epsilon(1e-12));
  }
}

TEST_CASE("euclid_sq_unit matches 2(1 - cos)") {
  CHECK(euclid_sq_unit({1.0, 0.0}, {1.0, 0.0}) == doctest::Approx(0.0));
  CHECK(euclid_sq_unit({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(euclid_sq_unit({1.0, 0.0}, {-1.0, 0.0}) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(thrown_code([] { euclid_sq_unit({2.0, 0.0}, {1.0, 0.0}); }) == Errc::not_unit_norm);

  Rng rng = Rng::seeded(3);
  for (int t = 0; t < 50; ++t) {
    Vec u = normalize(gaussian_vector(24, 1.0, rng));
    Vec v = normalize(gaussian_vector(24, 1.0, rng));
    CHECK(std::abs(euclid_sq_unit(u, v) - 2.0 * (1.0 - cosine(u, v))) <= 1e-10);
  }
}

TEST_CASE("pairwise stats on hand-enumerable sets") {
  Mat two(2, 2);
  two.at(0, 0) = 1.0;
  two.at(1, 0) = 1.0;
  ConeStats s = pairwise_cosine_stats(EmbeddingSet::from_mat(two));
  CHECK(s.mean_cos == doctest::Approx(1.0));
  CHECK(s.min_cos == doctest::Approx(1.0));
  CHECK(s.max_cos == doctest::Approx(1.0));
  CHECK(s.pair_count == 1);
  CHECK_FALSE(s.subsampled);

  Mat tri(3, 2);
  tri.at(0, 0) = 1.0;
  tri.at(1, 1) = 1.0;
  tri.at(2, 0) = -1.0;
  ConeStats t = pairwise_cosine_stats(EmbeddingSet::from_mat(tri));
  CHECK(t.mean_cos == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK(t.min_cos == doctest::Approx(-1.0));
  CHECK(t.max_cos == doctest::Approx(0.0));
  CHECK(t.pair_count == 3);
}

TEST_CASE("pairwise stats error cases") {
  Mat one(1, 4, 1.0);
  CHECK(thrown_code([&] { pairwise_cosine_stats(EmbeddingSet::from_mat(one)); }) ==
        Errc::too_few_vectors);

  Mat haszero(3, 4);
  haszero.at(0, 0) = 1.0;
  haszero.at(2, 1) = 1.0;  // row 1 stays zero
  CHECK(thrown_code([&] { pairwise_cosine_stats(EmbeddingSet::from_mat(haszero)); }) ==
        Errc::zero_vector);
}

TEST_CASE("pairwise stats equal a naive double loop bit-for-bit") {
  EmbeddingSet set = random_unit_set(60, 24, 123);
  // Scale some rows so the norm handling is exercised too.
  Rng rng = Rng::seeded(5);
  for (std::size_t i = 0; i < set.n(); ++i) {
    double a = 0.5 + rng.uniform() * 2.0;
    for (std::size_t j = 0; j < set.dim(); ++j) set.row(i)[j] *= a;
  }
  set.unit_norm = false;

  const std::size_t n = set.n(), d = set.dim();
  std::vector<double> inv(n);
  for (std::size_t i = 0; i < n; ++i) inv[i] = 1.0 / norm(set.row(i), d);
  double sum = 0.0, mn = 2.0, mx = -2.0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double c = std::clamp(dot(set.row(i), set.row(j), d) * inv[i] * inv[j], -1.0, 1.0);
      sum += c;
      mn = std::min(mn, c);
      mx = std::max(mx, c);
      ++pairs;
    }

  ConeStats s = pairwise_cosine_stats(set);
  CHECK(s.mean_cos == sum / static_cast<double>(pairs));
  CHECK(s.min_cos == mn);
  CHECK(s.max_cos == mx);
  CHECK(s.pair_count == pairs);
  CHECK(s.sampled_pairs == pairs);
}

TEST_CASE("random isotropic vectors have near-zero mean cosine") {
  ConeStats s = pairwise_cosine_stats(random_unit_set(100, 512, 42));
  CHECK(std::abs(s.mean_cos) <= 0.02);
  CHECK(s.pair_count == 100 * 99 / 2);
}

TEST_CASE("pairwise stats beyond the budget subsample deterministically") {
  EmbeddingSet set = random_unit_set(64, 8, 9);
  ConeStats a = pairwise_cosine_stats(set, 100, 7);
  CHECK(a.subsampled);
  CHECK(a.sampled_pairs == 100);
  CHECK(a.pair_count == 64 * 63 / 2);
  CHECK(a.min_cos >= -1.0);
  CHECK(a.max_cos <= 1.0);
  ConeStats b = pairwise_cosine_stats(set, 100, 7);
  CHECK(a.mean_cos == b.mean_cos);
  CHECK(a.min_cos == b.min_cos);
  CHECK(a.max_cos == b.max_cos);
}

TEST_CASE("gaussian_matrix moments and determinism") {
  Rng rng = Rng::seeded(42);
  Mat m = gaussian_matrix(512, 512, 1.0 / 512.0, rng);
  double mean_val = 0.0;
  for (double v : m.a) mean_val += v;
  mean_val /= static_cast<double>(m.a.size());
  CHECK(std::abs(mean_val) <= 0.001);

  double var = 0.0;
  for (double v : m.a) var += (v - mean_val) * (v - mean_val);
  var /= static_cast<double>(m.a.size() - 1);
  CHECK(var == doctest::Approx(1.0 / 512.0).epsilon(0.05));

  Rng again = Rng::seeded(42);
  Mat m2 = gaussian_matrix(512, 512, 1.0 / 512.0, again);
  CHECK(testutil::bitwise_equal(m, m2));

  Rng bad = Rng::seeded(1);
  CHECK(thrown_code([&] { gaussian_matrix(2, 2, 0.0, bad); }) == Errc::invalid_variance);
  CHECK(thrown_code([&] { gaussian_matrix(2, 2, -1.0, bad); }) == Errc::invalid_variance);
}

TEST_CASE("rng streams are reproducible and children are distinct") {
  Rng a = Rng::seeded(1234);
  Rng b = Rng::seeded(1234);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng base = Rng::seeded(99);
  Rng c0 = base.child(0);
  Rng c1 = base.child(1);
  int same = 0;
  for (int i = 0; i < 64; ++i) same += c0.next_u64() == c1.next_u64() ? 1 : 0;
  CHECK(same == 0);

  Rng u = Rng::seeded(5);
  for (int i = 0; i < 1000; ++i) {
    double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    double y = u.uniform_pos();
    CHECK(y > 0.0);
    CHECK(y <= 1.0);
  }

  Rng g = Rng::seeded(6);
  double s = 0.0, ss = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double x = g.normal();
    s += x;
    ss += x * x;
  }
  double m = s / n;
  CHECK(std::abs(m) <= 0.02);
  CHECK(ss / n - m * m == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("svd of identity and diagonal matrices") {
  SvdResult id = svd(Mat::identity(3));
  CHECK(id.sigma.size() == 3);
  for (double s : id.sigma) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));

  Mat d(2, 2);
  d.at(0, 0) = 3.0;
  d.at(1, 1) = 1.0;
  SvdResult r = svd(d);
  CHECK(r.sigma[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(r.sigma[1] == doctest::Approx(1.0).epsilon(1e-12));
  check_svd_contract(d);
}

TEST_CASE("svd reconstructs random matrices") {
  Rng rng = Rng::seeded(21);
  Mat tall = gaussian_matrix(50, 10, 1.0, rng);
  check_svd_contract(tall);

  Mat wide = gaussian_matrix(10, 50, 1.0, rng);
  check_svd_contract(wide);

  Mat square = gaussian_matrix(24, 24, 1.0, rng);
  check_svd_contract(square);
}

TEST_CASE("svd handles rank deficiency and the gram path") {
  Rng rng = Rng::seeded(31);
  Mat a = gaussian_matrix(20, 6, 1.0, rng);
  for (std::size_t i = 0; i < a.rows; ++i) {
    a.at(i, 3) = 0.0;                // dead column
    a.at(i, 5) = 2.0 * a.at(i, 1);   // duplicated direction
  }
  check_svd_contract(a);
  SvdResult r = svd(a);
  CHECK(r.sigma.back() <= 1e-10 * r.sigma.front());

  Mat skinny = gaussian_matrix(4100, 16, 1.0, rng);  // triggers the gram route
  check_svd_contract(skinny);
}

TEST_CASE("svd of an orthogonal matrix has unit singular values") {
  Mat q = givens_orthogonal(12, 17, 60);
  CHECK(orthonormality_error(q) <= 1e-12);
  SvdResult r = svd(q);
  for (double s : r.sigma) CHECK(s == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("svd converges on nearly rank-one gram matrices") {
  // Two tight bundles of unit rows: y^T x has singular values spanning
  // fifty decades down to exact zeros, which once cycled the Jacobi sweep.
  Rng rng = Rng::seeded(77);
  Mat x(48, 48), y(48, 48);
  Vec cx = normalize(gaussian_vector(48, 1.0, rng));
  Vec cy = normalize(gaussian_vector(48, 1.0, rng));
  for (std::size_t i = 0; i < 48; ++i) {
    for (std::size_t j = 0; j < 48; ++j) {
      x.at(i, j) = cx[j] + 1e-9 * rng.normal();
      y.at(i, j) = cy[j] + 1e-9 * rng.normal();
    }
    normalize_in_place(x.row(i), 48);
    normalize_in_place(y.row(i), 48);
  }
  Mat g = matmul_tn(y, x);
  check_svd_contract(g);
}

TEST_CASE("cap fraction closed forms") {
  CHECK(cap_fraction(3, kPi / 2.0) == doctest::Approx(0.5).epsilon(1e-10));

  double psi = std::acos(0.56) / 2.0;
  CHECK(std::abs(cap_fraction(2, psi) - 0.1553) <= 0.0005);
  CHECK(std::abs(cap_fraction_for_cos(2, 0.56) - 0.1553) <= 0.0005);

  // d=2: the cap is an arc, fraction = psi / pi.
  for (double h : {0.1, 0.5, 1.0, 1.4}) CHECK(cap_fraction(2, h) == doctest::Approx(h / kPi).epsilon(1e-10));
  // d=3: classic cap area (1 - cos psi) / 2.
  for (double h : {0.2, 0.7, 1.2})
    CHECK(cap_fraction(3, h) == doctest::Approx((1.0 - std::cos(h)) / 2.0).epsilon(1e-10));

  CHECK(cap_fraction_for_cos(7, 1.0) == doctest::Approx(0.0));
  CHECK(log2_cap_fraction_for_cos(512, 0.56) < -512.0);
}

TEST_CASE("cap fraction matches Monte Carlo in d=5 and d=3") {
  auto mc = [](std::size_t dim, double half_angle, std::uint64_t seed) {
    Rng rng = Rng::seeded(seed);
    const int n = 1000000;
    const double c = std::cos(half_angle);
    int hits = 0;
    Vec v(dim);
    for (int s = 0; s < n; ++s) {
      for (std::size_t k = 0; k < dim; ++k) v[k] = rng.normal();
      if (v[0] >= c * norm(v)) ++hits;
    }
    return static_cast<double>(hits) / n;
  };

  CHECK(std::abs(cap_fraction(5, 0.4) - mc(5, 0.4, 2024)) <= 0.002);
  double psi = std::acos(0.56) / 2.0;
  CHECK(std::abs(cap_fraction_for_cos(3, 0.56) - mc(3, psi, 2025)) <= 0.002);
}

TEST_CASE("cap fraction is monotone in angle and dimension") {
  for (std::size_t dim : {2, 3, 5, 16, 64}) {
    double prev = -1.0;
    for (int k = 1; k <= 10; ++k) {
      double f = cap_fraction(dim, 0.15 * k);
      CHECK(f > prev);
      prev = f;
    }
  }
  for (double h : {0.3, 0.8, 1.2}) {
    double prev = 2.0;
    for (std::size_t dim : {2, 3, 5, 16, 64}) {
      double f = cap_fraction(dim, h);
      CHECK(f < prev);
      prev = f;
    }
  }
}

TEST_CASE("log2_cap_fraction agrees with the direct log where representable") {
  for (std::size_t dim : {2, 3, 8, 32}) {
    for (double h : {0.3, 0.8, 1.3}) {
      double f = cap_fraction(dim, h);
      if (f > 1e-300) CHECK(log2_cap_fraction(dim, h) == doctest::Approx(std::log2(f)).epsilon(1e-9));
    }
  }
}

TEST_CASE("cap fraction domain errors") {
  CHECK(thrown_code([] { cap_fraction(1, 0.5); }) == Errc::dim_too_small);
  CHECK(thrown_code([] { cap_fraction(3, -0.1); }) == Errc::angle_out_of_range);
  CHECK(thrown_code([] { cap_fraction(3, 2.0); }) == Errc::angle_out_of_range);
  CHECK(thrown_code([] { cap_fraction_for_cos(3, 1.5); }) == Errc::angle_out_of_range);
  CHECK(thrown_code([] { cap_fraction_for_cos(3, -1.0); }) == Errc::angle_out_of_range);
}

TEST_CASE("wilson interval endpoints solve the score equation") {
  auto endpoint_residual = [](std::uint64_t s, std::uint64_t n, double z, double x) {
    double p = static_cast<double>(s) / static_cast<double>(n);
    return (p - x) * (p - x) * static_cast<double>(n) - z * z * x * (1.0 - x);
  };
  for (auto [s, n] : std::vector<std::pair<std::uint64_t, std::uint64_t>>{
           {50, 100}, {999, 1000}, {1, 30}, {0, 25}, {25, 25}}) {
    Interval iv = wilson_interval(s, n, kZ95);
    double p = static_cast<double>(s) / static_cast<double>(n);
    CHECK(iv.lo >= 0.0);
    CHECK(iv.hi <= 1.0);
    CHECK(iv.lo <= p);
    CHECK(iv.hi >= p);
    CHECK(std::abs(endpoint_residual(s, n, kZ95, iv.lo)) <= 1e-9 * n);
    CHECK(std::abs(endpoint_residual(s, n, kZ95, iv.hi)) <= 1e-9 * n);
  }
}

TEST_CASE("spearman handles monotone data and ties") {
  CHECK(spearman({1, 2, 3, 4, 5}, {10, 20, 30, 40, 50}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4, 5}, {5, 4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman({1, 2, 2, 3}, {1, 2, 3, 4}) == doctest::Approx(0.948683298050514).epsilon(1e-12));
  CHECK(spearman({1, 3, 2}, {10, 30, 20}) == doctest::Approx(1.0));
}

TEST_CASE("mean, variance, and ci helpers") {
  CHECK(mean({1.0, 2.0, 3.0}) == doctest::Approx(2.0));
  CHECK(sample_variance({1.0, 1.0, 1.0}) == doctest::Approx(0.0));
  CHECK(sample_variance({0.0, 2.0}) == doctest::Approx(2.0));
  CHECK(mean_ci_halfwidth({0.0, 1.0}, kZ95) == doctest::Approx(kZ95 * 0.5).epsilon(1e-12));
  CHECK(mean_ci_halfwidth({4.0, 4.0, 4.0, 4.0}, kZ95) == doctest::Approx(0.0));
}

TEST_CASE("parallel_for touches each slot exactly once") {
  set_max_threads(4);
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  parallel_for(0, [&](std::size_t) { CHECK(false); });
  set_max_threads(0);
}

TEST_CASE("thread cap never changes numeric results") {
  Theorem1Config cfg;
  cfg.d_in = 64;
  cfg.d_out = 64;
  cfg.n_trials = 200;

  set_max_threads(1);
  TrialReport one = theorem1_experiment(cfg);
  set_max_threads(3);
  TrialReport three = theorem1_experiment(cfg);
  set_max_threads(0);

  CHECK(one.successes == three.successes);
  CHECK(one.rate == three.rate);
  CHECK(one.mean_delta == three.mean_delta);
  CHECK(one.sd_delta == three.sd_delta);
}
