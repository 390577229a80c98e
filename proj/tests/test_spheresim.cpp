#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "mgap/spheresim.hpp"

#include "test_util.hpp"

using namespace mgap;
using testutil::random_unit_set;
using testutil::thrown_code;

namespace {

Mat givens_rotation(std::size_t d, std::uint64_t seed, std::size_t sweeps = 24) {
  Mat r = Mat::identity(d);
  Rng rng = Rng::seeded(seed);
  for (std::size_t s = 0; s < sweeps; ++s) {
    std::size_t i = rng.next_u64() % d;
    std::size_t j = rng.next_u64() % d;
    if (i == j) continue;
    double ang = rng.uniform() * 2.0 * kPi;
    double c = std::cos(ang), sn = std::sin(ang);
    for (std::size_t k = 0; k < d; ++k) {
      double a = r.at(k, i), b = r.at(k, j);
      r.at(k, i) = c * a - sn * b;
      r.at(k, j) = sn * a + c * b;
    }
  }
  return r;
}

double frob(const Mat& m) {
  double s = 0.0;
  for (double v : m.a) s += v * v;
  return std::sqrt(s);
}

double residual(const Mat& x, const Mat& y, const Mat& w) {
  Mat yw = matmul(y, w);
  double s = 0.0;
  for (std::size_t k = 0; k < x.a.size(); ++k) {
    double dvi = x.a[k] - yw.a[k];
    s += dvi * dvi;
  }
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("sphere sim geometry matches the construction by hand") {
  SimConfig matched;  // theta = 90 degrees
  PairedBatch m = build_sphere_sim(matched);
  REQUIRE(m.n() == 6);
  REQUIRE(m.dim() == 3);
  CHECK(testutil::bitwise_equal(m.images.m, m.texts.m));
  CHECK(gap_vector(m).distance == 0.0);

  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(std::abs(norm(m.images.row(i), 3) - 1.0) <= 1e-12);
    CHECK(std::abs(m.images.m.at(i, 2)) <= 1e-15);  // equator
  }
  double step = cosine(m.images.row(0), m.images.row(1), 3);
  CHECK(step == doctest::Approx(std::cos(deg_to_rad(15.0))).epsilon(1e-12));
  CHECK(cosine(m.images.row(0), m.images.row(2), 3) ==
        doctest::Approx(std::cos(deg_to_rad(30.0))).epsilon(1e-12));

  SimConfig lifted;
  lifted.theta = deg_to_rad(40.0);
  PairedBatch l = build_sphere_sim(lifted);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(l.texts.m.at(i, 2) == doctest::Approx(std::cos(deg_to_rad(40.0))).epsilon(1e-12));
    CHECK(cosine(l.images.row(i), l.texts.row(i), 3) ==
          doctest::Approx(std::sin(deg_to_rad(40.0))).epsilon(1e-12));
  }
}

TEST_CASE("the mismatch flag swaps only the first two text azimuths") {
  SimConfig cfg;
  cfg.theta = deg_to_rad(55.0);
  PairedBatch good = build_sphere_sim(cfg);
  cfg.mismatched = true;
  PairedBatch bad = build_sphere_sim(cfg);

  CHECK(testutil::bitwise_equal(good.images.m, bad.images.m));
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(bad.texts.m.at(0, j) == good.texts.m.at(1, j));
    CHECK(bad.texts.m.at(1, j) == good.texts.m.at(0, j));
  }
  for (std::size_t i = 2; i < 6; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(bad.texts.m.at(i, j) == good.texts.m.at(i, j));

  cfg.theta = kPi / 2.0;
  PairedBatch eq = build_sphere_sim(cfg);
  CHECK(cosine(eq.texts.row(0), eq.images.row(1), 3) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(thrown_code([] {
          SimConfig c;
          c.theta = 0.0;
          build_sphere_sim(c);
        }) == Errc::angle_out_of_range);
  CHECK(thrown_code([] {
          SimConfig c;
          c.theta = deg_to_rad(91.0);
          build_sphere_sim(c);
        }) == Errc::angle_out_of_range);
  CHECK(thrown_code([] {
          SimConfig c;
          c.n_pairs = 1;
          build_sphere_sim(c);
        }) == Errc::invalid_config);
}

TEST_CASE("sim landscape is the clip loss of the rebuilt geometry") {
  SimConfig cfg;
  cfg.mismatched = true;
  std::vector<double> grid;
  for (int deg = 10; deg <= 90; deg += 20) grid.push_back(deg_to_rad(deg));

  LandscapeCurve curve = sim_landscape(cfg, 0.1, grid);
  REQUIRE(curve.points.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    SimConfig at = cfg;
    at.theta = grid[i];
    PairedBatch batch = build_sphere_sim(at);
    CHECK(curve.points[i].control == grid[i]);
    CHECK(curve.points[i].loss == clip_loss(batch, 0.1));
    CHECK(curve.points[i].remaining_gap == gap_vector(batch).distance);
  }
}

TEST_CASE("matched geometry prefers theta = 90 degrees at every temperature") {
  std::vector<double> grid;
  for (int deg = 1; deg <= 90; ++deg) grid.push_back(deg_to_rad(deg));

  SimConfig matched;
  for (double tau : {1.0, 0.1, 0.01}) {
    LandscapeCurve curve = sim_landscape(matched, tau, grid);
    CHECK(curve.points[curve.global_min_index].control >= deg_to_rad(89.0) - 1e-12);
  }
}

TEST_CASE("mismatched geometry pulls the optimum below 90 degrees when tau is small") {
  std::vector<double> grid;
  for (int deg = 1; deg <= 90; ++deg) grid.push_back(deg_to_rad(deg));

  SimConfig cfg;
  cfg.mismatched = true;

  LandscapeCurve cold = sim_landscape(cfg, 0.01, grid);
  double best = cold.points[cold.global_min_index].control;
  CHECK(best < deg_to_rad(89.0));
  CHECK(cold.points.back().loss - cold.points[cold.global_min_index].loss > 0.0);
  CHECK(cold.points[cold.global_min_index].remaining_gap > 0.0);

  LandscapeCurve warm = sim_landscape(cfg, 1.0, grid);
  CHECK(warm.points[warm.global_min_index].control >= deg_to_rad(89.0) - 1e-12);
}

TEST_CASE("procrustes recovers identity and planted rotations") {
  Mat x = random_unit_set(40, 6, 11).m;
  OrthogonalMap self = procrustes_align(x, x);
  Mat eye = Mat::identity(6);
  Mat diff = self.w;
  for (std::size_t k = 0; k < diff.a.size(); ++k) diff.a[k] -= eye.a[k];
  CHECK(frob(diff) <= 1e-8);
  CHECK_FALSE(self.underdetermined);

  Mat r = givens_rotation(8, 5);
  Mat y = random_unit_set(100, 8, 12).m;
  Mat xr = matmul(y, transpose(r));  // x = y R^T, so W should be R^T
  OrthogonalMap rec = procrustes_align(xr, y);
  CHECK(residual(xr, y, rec.w) <= 1e-6);
  Mat err = rec.w;
  Mat rt = transpose(r);
  for (std::size_t k = 0; k < err.a.size(); ++k) err.a[k] -= rt.a[k];
  CHECK(frob(err) <= 1e-6);
}

TEST_CASE("procrustes maps are orthogonal and never worse than identity") {
  for (std::uint64_t seed = 60; seed < 66; ++seed) {
    Mat x = random_unit_set(30, 10, seed).m;
    Mat y = random_unit_set(30, 10, seed + 100).m;
    OrthogonalMap map = procrustes_align(x, y);

    Mat gram = matmul_tn(map.w, map.w);
    Mat eye = Mat::identity(10);
    for (std::size_t k = 0; k < gram.a.size(); ++k) gram.a[k] -= eye.a[k];
    CHECK(frob(gram) <= 1e-8);

    CHECK(residual(x, y, map.w) <= residual(x, y, eye) + 1e-12);
    CHECK_FALSE(map.underdetermined);
  }

  Mat x = random_unit_set(4, 10, 70).m;
  Mat y = random_unit_set(4, 10, 71).m;
  CHECK(procrustes_align(x, y).underdetermined);

  CHECK(thrown_code([] {
          Mat a(3, 4), b(3, 5);
          procrustes_align(a, b);
        }) == Errc::dimension_mismatch);
}

TEST_CASE("training configs are validated") {
  TrainConfig bad;
  bad.n_pairs = 1;
  CHECK(thrown_code([&] { train_embeddings(bad); }) == Errc::invalid_config);
  bad = TrainConfig{};
  bad.dim = 0;
  CHECK(thrown_code([&] { initial_batch(bad); }) == Errc::invalid_config);
  bad = TrainConfig{};
  bad.tau = 0.0;
  CHECK(thrown_code([&] { train_embeddings(bad); }) == Errc::invalid_temperature);
  bad = TrainConfig{};
  bad.learning_rate = -1.0;
  CHECK(thrown_code([&] { train_embeddings(bad); }) == Errc::invalid_config);
}

TEST_CASE("zero learning rate freezes the trace") {
  TrainConfig cfg;
  cfg.n_pairs = 8;
  cfg.dim = 16;
  cfg.steps = 5;
  cfg.learning_rate = 0.0;
  TrainTrace trace = train_embeddings(cfg);
  REQUIRE(trace.steps.size() == 6);
  for (const TrainStep& s : trace.steps) {
    CHECK(s.gap_distance == doctest::Approx(trace.initial_gap()).epsilon(1e-12));
    CHECK(s.loss == doctest::Approx(trace.steps[0].loss).epsilon(1e-12));
  }
}

TEST_CASE("training is deterministic and stays on the sphere") {
  TrainConfig cfg;
  cfg.n_pairs = 16;
  cfg.dim = 24;
  cfg.steps = 5;
  cfg.seed = 77;

  TrainTrace a = train_embeddings(cfg);
  TrainTrace b = train_embeddings(cfg);
  CHECK(testutil::bitwise_equal(a.final_batch.images.m, b.final_batch.images.m));
  CHECK(testutil::bitwise_equal(a.final_batch.texts.m, b.final_batch.texts.m));
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].loss == b.steps[i].loss);
    CHECK(a.steps[i].gap_distance == b.steps[i].gap_distance);
  }

  for (std::size_t i = 0; i < cfg.n_pairs; ++i) {
    CHECK(std::abs(norm(a.final_batch.images.row(i), cfg.dim) - 1.0) <= 1e-9);
    CHECK(std::abs(norm(a.final_batch.texts.row(i), cfg.dim) - 1.0) <= 1e-9);
  }

  PairedBatch start = initial_batch(cfg);
  CHECK(a.steps[0].gap_distance == gap_vector(start).distance);
  CHECK(a.steps[0].loss == clip_loss(start, cfg.tau));

  cfg.seed = 78;
  TrainTrace c = train_embeddings(cfg);
  CHECK_FALSE(testutil::bitwise_equal(a.final_batch.images.m, c.final_batch.images.m));
}

TEST_CASE("high temperature closes the trained gap, low temperature preserves it") {
  TrainConfig cfg;
  cfg.n_pairs = 64;
  cfg.dim = 128;
  cfg.steps = 300;
  cfg.seed = 3;

  cfg.tau = 1.0;
  TrainTrace hot = train_embeddings(cfg);
  CHECK(hot.final_gap() < hot.initial_gap());

  cfg.tau = 0.01;
  TrainTrace cold = train_embeddings(cfg);
  CHECK(hot.final_gap() + 0.1 < cold.final_gap());
}

TEST_CASE("init kinds: cones far apart, alignment shrinks, direct is independent") {
  TrainConfig cfg;
  cfg.n_pairs = 48;
  cfg.dim = 32;

  cfg.init = InitKind::random_cones;
  PairedBatch cones = initial_batch(cfg);
  CHECK(gap_vector(cones).distance > 0.5);

  cfg.init = InitKind::amended;
  PairedBatch amended = initial_batch(cfg);
  CHECK(testutil::bitwise_equal(amended.images.m, cones.images.m));
  CHECK(gap_vector(amended).distance < 0.5 * gap_vector(cones).distance);

  cfg.init = InitKind::direct;
  PairedBatch d1 = initial_batch(cfg);
  PairedBatch d2 = initial_batch(cfg);
  CHECK(testutil::bitwise_equal(d1.images.m, d2.images.m));
  CHECK(testutil::bitwise_equal(d1.texts.m, d2.texts.m));
  CHECK_FALSE(testutil::bitwise_equal(d1.images.m, d1.texts.m));
  for (std::size_t i = 0; i < cfg.n_pairs; ++i)
    CHECK(std::abs(norm(d1.images.row(i), cfg.dim) - 1.0) <= 1e-12);
  CHECK(gap_vector(d1).distance < gap_vector(cones).distance);

  CHECK(init_kind_from_name("amended") == InitKind::amended);
  CHECK(init_kind_from_name(init_kind_name(InitKind::direct)) == InitKind::direct);
  CHECK(thrown_code([] { init_kind_from_name("sideways"); }) == Errc::parse_error);
}

TEST_CASE("alignment at init beats alignment learned by optimization alone") {
  TrainConfig cfg;
  cfg.steps = 300;
  InitVsOptReport rep = init_vs_opt_experiment(cfg, 2);

  REQUIRE(rep.random_init.before.size() == 2);
  REQUIRE(rep.amended_init.after.size() == 2);
  CHECK(rep.amended_init.before_mean < 0.1);
  CHECK(rep.random_init.before_mean > 0.5);
  CHECK(rep.amended_init.after_mean > rep.amended_init.before_mean);
  CHECK(rep.amended_init.after_mean < rep.random_init.after_mean);
  CHECK(rep.random_init.before_ci >= 0.0);

  CHECK(thrown_code([&] { init_vs_opt_experiment(cfg, 1); }) == Errc::invalid_config);
}
