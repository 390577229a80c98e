#include "mgap/spheresim.hpp"

#include <cmath>
#include <utility>

#include "mgap/parallel.hpp"
#include "mgap/rng.hpp"
#include "mgap/stats.hpp"

namespace mgap {

void SimConfig::validate() const {
  require(n_pairs >= 2, Errc::invalid_config, "simulation needs at least two pairs");
  require(std::isfinite(delta_phi) && delta_phi > 0.0, Errc::invalid_config,
          "azimuth spacing must be positive");
  require(std::isfinite(theta) && theta > 0.0 && theta <= kPi / 2.0 + 1e-12,
          Errc::angle_out_of_range, "theta must lie in (0, pi/2]");
}

namespace {

// Unit vector at azimuth phi, polar angle theta (theta = pi/2 is the equator).
void sphere_point(double phi, double theta, double* out) {
  out[0] = std::sin(theta) * std::cos(phi);
  out[1] = std::sin(theta) * std::sin(phi);
  out[2] = std::cos(theta);
}

}  // namespace

PairedBatch build_sphere_sim(const SimConfig& cfg) {
  cfg.validate();
  Mat xi(cfg.n_pairs, 3), yt(cfg.n_pairs, 3);
  for (std::size_t i = 0; i < cfg.n_pairs; ++i) {
    double phi = static_cast<double>(i) * cfg.delta_phi;
    sphere_point(phi, kPi / 2.0, xi.row(i));
    double text_phi = phi;
    if (cfg.mismatched && i < 2) text_phi = static_cast<double>(1 - i) * cfg.delta_phi;
    sphere_point(text_phi, cfg.theta, yt.row(i));
  }
  return PairedBatch::make(EmbeddingSet::from_mat(std::move(xi), "image", true),
                           EmbeddingSet::from_mat(std::move(yt), "text", true));
}

LandscapeCurve sim_landscape(SimConfig cfg, double tau, const std::vector<double>& theta_grid) {
  require(!theta_grid.empty(), Errc::invalid_config, "empty theta grid");
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    require(theta_grid[i] > 0.0 && theta_grid[i] <= kPi / 2.0 + 1e-12,
            Errc::angle_out_of_range, "theta grid must lie in (0, pi/2]");
    require(i == 0 || theta_grid[i] > theta_grid[i - 1], Errc::invalid_config,
            "theta grid must be strictly increasing");
  }

  LandscapeCurve curve;
  curve.points.resize(theta_grid.size());
  parallel_for(theta_grid.size(), [&, cfg](std::size_t g) mutable {
    cfg.theta = theta_grid[g];
    PairedBatch batch = build_sphere_sim(cfg);
    curve.points[g] = {theta_grid[g], gap_vector(batch).distance, clip_loss(batch, tau)};
  });
  annotate_minima(curve);
  return curve;
}

OrthogonalMap procrustes_align(const Mat& x, const Mat& y) {
  require(x.rows == y.rows && x.cols == y.cols, Errc::dimension_mismatch,
          "procrustes needs equally shaped matrices");
  require(x.rows >= 1 && x.cols >= 1, Errc::invalid_config, "procrustes needs data");

  SvdResult s = svd(matmul_tn(y, x));
  OrthogonalMap map;
  map.underdetermined = x.rows < x.cols;
  map.w = matmul(s.u, transpose(s.v));
  return map;
}

const char* init_kind_name(InitKind k) {
  switch (k) {
    case InitKind::random_cones: return "random-cones";
    case InitKind::amended: return "amended";
    case InitKind::direct: return "direct";
  }
  fail(Errc::invalid_config, "unknown init kind");
}

InitKind init_kind_from_name(const std::string& name) {
  if (name == "random-cones" || name == "random_cones") return InitKind::random_cones;
  if (name == "amended") return InitKind::amended;
  if (name == "direct") return InitKind::direct;
  fail(Errc::parse_error, "unknown init kind: " + name);
}

void TrainConfig::validate() const {
  require(n_pairs >= 2, Errc::invalid_config, "training needs at least two pairs");
  require(dim >= 2, Errc::invalid_config, "training needs dim >= 2");
  require(std::isfinite(tau) && tau > 0.0, Errc::invalid_temperature,
          "temperature must be positive");
  require(std::isfinite(learning_rate) && learning_rate >= 0.0, Errc::invalid_config,
          "learning rate must be non-negative");
  require(mlp_depth >= 1, Errc::invalid_config, "cone init needs depth >= 1");
}

namespace {

EmbeddingSet cone_init(const TrainConfig& cfg, const EmbeddingSet& data, std::uint64_t net_seed,
                       const std::string& modality) {
  MlpSpec spec = MlpSpec::dense(cfg.dim, cfg.mlp_depth, cfg.activation);
  Mlp mlp = build_mlp(spec, net_seed);
  EmbeddingSet out = forward(mlp, data).normalized_rows();
  out.modality = modality;
  return out;
}

EmbeddingSet random_unit_rows(std::size_t n, std::size_t dim, Rng rng,
                              const std::string& modality) {
  Mat m = gaussian_matrix(n, dim, 1.0, rng);
  for (std::size_t i = 0; i < n; ++i) normalize_in_place(m.row(i), dim);
  return EmbeddingSet::from_mat(std::move(m), modality, true);
}

}  // namespace

PairedBatch initial_batch(const TrainConfig& cfg) {
  cfg.validate();
  Rng base = Rng::seeded(cfg.seed);

  if (cfg.init == InitKind::direct) {
    return PairedBatch::make(random_unit_rows(cfg.n_pairs, cfg.dim, base.child(4), "image"),
                             random_unit_rows(cfg.n_pairs, cfg.dim, base.child(5), "text"));
  }

  // Shared input data through two independently seeded networks: the
  // two-cone initialization.
  Rng data_rng = base.child(1);
  Mat data = gaussian_matrix(cfg.n_pairs, cfg.dim, 1.0, data_rng);
  EmbeddingSet inputs = EmbeddingSet::from_mat(std::move(data), "input", false);
  EmbeddingSet images = cone_init(cfg, inputs, base.child(2).next_u64(), "image");
  EmbeddingSet texts = cone_init(cfg, inputs, base.child(3).next_u64(), "text");

  if (cfg.init == InitKind::amended) {
    OrthogonalMap map = procrustes_align(images.m, texts.m);
    Mat aligned = matmul(texts.m, map.w);
    for (std::size_t i = 0; i < aligned.rows; ++i) normalize_in_place(aligned.row(i), aligned.cols);
    texts = EmbeddingSet::from_mat(std::move(aligned), "text", true);
  }
  return PairedBatch::make(std::move(images), std::move(texts));
}

TrainTrace train_embeddings(const TrainConfig& cfg) {
  cfg.validate();
  PairedBatch batch = initial_batch(cfg);

  TrainTrace trace;
  trace.steps.reserve(cfg.steps + 1);
  auto record = [&](std::size_t step) {
    double loss = clip_loss(batch, cfg.tau);
    require(std::isfinite(loss), Errc::divergence_detected,
            "loss diverged at step " + std::to_string(step));
    trace.steps.push_back({step, loss, gap_vector(batch).distance});
  };
  record(0);

  for (std::size_t t = 1; t <= cfg.steps; ++t) {
    auto [dx, dy] = clip_loss_grad(batch, cfg.tau);
    for (std::size_t i = 0; i < batch.n(); ++i) {
      double* x = batch.images.row(i);
      double* y = batch.texts.row(i);
      for (std::size_t c = 0; c < batch.dim(); ++c) {
        x[c] -= cfg.learning_rate * dx.at(i, c);
        y[c] -= cfg.learning_rate * dy.at(i, c);
      }
      normalize_in_place(x, batch.dim());
      normalize_in_place(y, batch.dim());
    }
    record(t);
  }

  trace.final_batch = std::move(batch);
  return trace;
}

namespace {

GapBeforeAfter summarize(std::vector<double> before, std::vector<double> after) {
  GapBeforeAfter g;
  g.before_mean = mean(before);
  g.after_mean = mean(after);
  if (before.size() >= 2) {
    g.before_ci = mean_ci_halfwidth(before, kZ95);
    g.after_ci = mean_ci_halfwidth(after, kZ95);
  }
  g.before = std::move(before);
  g.after = std::move(after);
  return g;
}

}  // namespace

InitVsOptReport init_vs_opt_experiment(const TrainConfig& cfg, std::size_t n_repeats) {
  cfg.validate();
  require(n_repeats >= 2, Errc::invalid_config, "need at least two repeats");

  Rng base = Rng::seeded(cfg.seed);
  std::vector<std::uint64_t> seeds(n_repeats);
  for (std::size_t r = 0; r < n_repeats; ++r) seeds[r] = base.child(0x100 + r).next_u64();

  std::vector<double> rb(n_repeats), ra(n_repeats), ab(n_repeats), aa(n_repeats);
  parallel_for(n_repeats, [&](std::size_t r) {
    TrainConfig run = cfg;
    run.seed = seeds[r];
    run.init = InitKind::random_cones;
    TrainTrace random_trace = train_embeddings(run);
    rb[r] = random_trace.initial_gap();
    ra[r] = random_trace.final_gap();

    run.init = InitKind::amended;
    TrainTrace amended_trace = train_embeddings(run);
    ab[r] = amended_trace.initial_gap();
    aa[r] = amended_trace.final_gap();
  });

  InitVsOptReport rep;
  rep.random_init = summarize(std::move(rb), std::move(ra));
  rep.amended_init = summarize(std::move(ab), std::move(aa));
  return rep;
}

}  // namespace mgap
