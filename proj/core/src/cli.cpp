#include "mgap/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgap/mgap.hpp"

namespace mgap {

namespace {

using nlohmann::ordered_json;

std::string f6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double parse_double_strict(const std::string& s) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    require(pos == s.size(), Errc::parse_error, "trailing characters in '" + s + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(Errc::parse_error, "not a number: '" + s + "'");
  }
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(parse_double_strict(tok));
  }
  require(!out.empty(), Errc::parse_error, "empty numeric list: '" + csv + "'");
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& csv) {
  std::vector<std::size_t> out;
  for (double v : parse_double_list(csv)) {
    require(v >= 1.0 && v == std::floor(v), Errc::parse_error, "expected positive integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

struct Ctx {
  std::vector<std::string> args;
  std::string subcommand;
  std::uint64_t seed = 42;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

RunManifest make_manifest(const Ctx& ctx) {
  RunManifest m;
  m.artifact_version = kArtifactVersion;
  m.subcommand = ctx.subcommand;
  m.argv = ctx.args;
  m.seed = ctx.seed;
  m.outputs = ctx.outputs;
  m.threads = max_threads();
  return m;
}

void write_report(Ctx& ctx, const std::string& path, const ordered_json& results) {
  ctx.outputs.push_back(path);
  ordered_json doc;
  doc["manifest"] = ordered_json::parse(make_manifest(ctx).to_json(true));
  doc["results"] = results;
  std::ofstream out(path);
  require(out.good(), Errc::io_error, "cannot write " + path);
  out << doc.dump(2) << "\n";
  require(out.good(), Errc::io_error, "write failed: " + path);
}

Activation act_from_cli(const std::string& name) { return activation_from_name(name); }

// ---- shared paired-batch input flags ----------------------------------

struct BatchOpts {
  std::string images, texts;
  bool synthetic = false;
  bool matched = false;
  bool no_normalize = false;
  std::size_t n_pairs = 6;
  double theta_deg = 45.0;
  double delta_phi_deg = 15.0;
};

void add_batch_flags(CLI::App* cmd, BatchOpts& b) {
  cmd->add_option("--images", b.images, "image embedding file (csv/jsonl/bin)");
  cmd->add_option("--texts", b.texts, "text embedding file (csv/jsonl/bin)");
  cmd->add_flag("--synthetic", b.synthetic,
                "use the built-in sphere batch instead of files");
  cmd->add_flag("--matched", b.matched, "synthetic batch: keep pairs aligned");
  cmd->add_flag("--no-normalize", b.no_normalize,
                "reject rows that are not already unit-norm");
  cmd->add_option("--n-pairs", b.n_pairs, "synthetic batch size")->capture_default_str();
  cmd->add_option("--theta-deg", b.theta_deg, "synthetic text polar angle, degrees")
      ->capture_default_str();
  cmd->add_option("--delta-phi-deg", b.delta_phi_deg, "synthetic azimuth spacing, degrees")
      ->capture_default_str();
}

PairedBatch load_batch(const BatchOpts& b) {
  if (b.synthetic || (b.images.empty() && b.texts.empty())) {
    SimConfig cfg;
    cfg.n_pairs = b.n_pairs;
    cfg.delta_phi = deg_to_rad(b.delta_phi_deg);
    cfg.mismatched = !b.matched;
    cfg.theta = deg_to_rad(b.theta_deg);
    return build_sphere_sim(cfg);
  }
  if (b.images.empty() || b.texts.empty())
    throw CLI::ValidationError("need both --images and --texts (or --synthetic)");
  EmbeddingSet xi = read_embeddings(b.images);
  EmbeddingSet yt = read_embeddings(b.texts);
  xi.modality = "image";
  yt.modality = "text";
  if (!b.no_normalize) {
    xi = xi.normalized_rows();
    yt = yt.normalized_rows();
  }
  return PairedBatch::make(std::move(xi), std::move(yt));
}

// ---- subcommand handlers ----------------------------------------------

struct ConeStatsOpts {
  std::string in, json;
  std::uint64_t pair_budget = kDefaultPairBudget;
  std::uint64_t subsample_seed = 42;
};

void run_cone_stats(const ConeStatsOpts& o, Ctx& ctx) {
  ctx.seed = o.subsample_seed;
  ConeStats s = pairwise_cosine_stats(read_embeddings(o.in), o.pair_budget, o.subsample_seed);
  std::cout << "mean_cos " << f6(s.mean_cos) << "  min_cos " << f6(s.min_cos) << "  max_cos "
            << f6(s.max_cos) << "\npairs " << s.pair_count << "  sampled " << s.sampled_pairs
            << (s.subsampled ? "  (subsampled)" : "") << "\n";
  if (!o.json.empty()) {
    ordered_json r{{"mean_cos", s.mean_cos},       {"min_cos", s.min_cos},
                   {"max_cos", s.max_cos},         {"pair_count", s.pair_count},
                   {"sampled_pairs", s.sampled_pairs}, {"subsampled", s.subsampled}};
    write_report(ctx, o.json, r);
  }
}

struct MlpCurveOpts {
  std::string activation = "relu", input = "gaussian", in, out, json, plot;
  std::size_t depth = 6, dim = 512, n = 1000, vocab = 1000, seq_len = 16;
  std::uint64_t seed = 42;
};

void run_mlp_curve(const MlpCurveOpts& o, Ctx& ctx) {
  ctx.seed = o.seed;
  MlpSpec spec = MlpSpec::dense(o.dim, o.depth, act_from_cli(o.activation));
  InputSource src;
  if (o.input == "gaussian") {
    src = InputSource::gaussian(o.n, o.dim, o.seed);
  } else if (o.input == "int-seq") {
    src = InputSource::integer_sequences(o.n, o.vocab, o.seq_len, o.dim, o.seed);
  } else {
    if (o.in.empty()) throw CLI::ValidationError("--input file needs --in <path>");
    src = InputSource::from_file(o.in);
  }
  LayerCurve curve = layer_curve(spec, o.seed, src);
  for (std::size_t l = 0; l < curve.per_layer.size(); ++l)
    std::cout << "layer " << l << "  mean_cos " << f6(curve.per_layer[l].mean_cos) << "\n";
  if (!o.out.empty()) {
    write_layer_curve_csv(curve, o.out);
    ctx.outputs.push_back(o.out);
  }
  if (!o.plot.empty()) {
    PlotSeries s;
    for (std::size_t l = 0; l < curve.per_layer.size(); ++l) {
      s.x.push_back(static_cast<double>(l));
      s.y.push_back(curve.per_layer[l].mean_cos);
    }
    s.label = o.activation;
    write_svg_plot(o.plot, "mean pairwise cosine by layer", "layer", "mean cosine", {s});
    ctx.outputs.push_back(o.plot);
  }
  if (!o.json.empty()) {
    ordered_json layers = ordered_json::array();
    for (const ConeStats& s : curve.per_layer)
      layers.push_back({{"mean_cos", s.mean_cos}, {"min_cos", s.min_cos}, {"max_cos", s.max_cos}});
    write_report(ctx, o.json, {{"activation", o.activation}, {"layers", layers}});
  }
}

struct MultiConesOpts {
  std::string activation = "relu", json, plot;
  std::size_t seeds = 25, depth = 4, dim = 512, n = 64;
  std::uint64_t seed = 42;
};

void run_multi_cones(const MultiConesOpts& o, Ctx& ctx) {
  ctx.seed = o.seed;
  MlpSpec spec = MlpSpec::dense(o.dim, o.depth, act_from_cli(o.activation));
  Rng base = Rng::seeded(o.seed);
  std::vector<std::uint64_t> seeds(o.seeds);
  for (std::size_t i = 0; i < o.seeds; ++i) seeds[i] = base.child(i).next_u64();
  MultiConeResult res = multi_seed_cones(spec, seeds, InputSource::gaussian(o.n, o.dim, o.seed));

  const SeparationReport& r = res.report;
  std::cout << "seeds " << o.seeds << "  min_between " << f6(r.min_between) << "  max_within "
            << f6(r.max_within) << "  separated " << (r.separated ? "yes" : "no") << "\n";

  if (!o.plot.empty()) {
    std::vector<Mat> coords = project_2d(res.cones);
    std::vector<PlotSeries> series;
    for (std::size_t c = 0; c < coords.size(); ++c) {
      PlotSeries s;
      for (std::size_t i = 0; i < coords[c].rows; ++i) {
        s.x.push_back(coords[c].at(i, 0));
        s.y.push_back(coords[c].at(i, 1));
      }
      s.label = res.cones[c].modality;
      series.push_back(std::move(s));
    }
    write_svg_plot(o.plot, "per-seed embedding cones (2D projection)", "pc1", "pc2", series,
                   true);
    ctx.outputs.push_back(o.plot);
  }
  if (!o.json.empty()) {
    ordered_json pairs = ordered_json::array();
    for (const auto& p : r.between)
      pairs.push_back({{"a", p.a}, {"b", p.b}, {"distance", p.centroid_distance}});
    write_report(ctx, o.json,
                 {{"min_between", r.min_between},
                  {"max_within", r.max_within},
                  {"separated", r.separated},
                  {"within_spread", r.within_spread},
                  {"between", pairs}});
  }
}

struct CapFractionOpts {
  std::size_t dim = 0;
  double cos_floor = std::numeric_limits<double>::quiet_NaN();
  double angle_deg = std::numeric_limits<double>::quiet_NaN();
  std::string json;
};

void run_cap_fraction(const CapFractionOpts& o, Ctx& ctx) {
  bool has_cos = !std::isnan(o.cos_floor), has_angle = !std::isnan(o.angle_deg);
  if (has_cos == has_angle)
    throw CLI::ValidationError("give exactly one of --cos or --angle-deg");
  double fraction, log2f;
  if (has_cos) {
    fraction = cap_fraction_for_cos(o.dim, o.cos_floor);
    log2f = log2_cap_fraction_for_cos(o.dim, o.cos_floor);
  } else {
    double half = deg_to_rad(o.angle_deg);
    fraction = cap_fraction(o.dim, half);
    log2f = log2_cap_fraction(o.dim, half);
  }
  std::printf("%.4f\n", fraction);
  std::cout << "log2_fraction " << f6(log2f) << "\n";
  if (!o.json.empty()) {
    ordered_json r{{"dim", o.dim}, {"fraction", fraction}, {"log2_fraction", log2f}};
    if (has_cos) r["cos"] = o.cos_floor;
    if (has_angle) r["angle_deg"] = o.angle_deg;
    write_report(ctx, o.json, r);
  }
}

struct Theorem1Opts {
  std::size_t d_in = 512, d_out = 512, trials = 1000;
  double cos = 0.5, r = 1.0;
  std::uint64_t seed = 42;
  std::string d_out_sweep, json;
};

ordered_json trial_report_json(std::size_t d_out, const TrialReport& rep) {
  return {{"d_out", d_out},
          {"successes", rep.successes},
          {"trials", rep.trials},
          {"rate", rep.rate},
          {"wilson_halfwidth_95", rep.wilson_halfwidth_95},
          {"mean_delta", rep.mean_delta},
          {"sd_delta", rep.sd_delta}};
}

void run_theorem1(const Theorem1Opts& o, Ctx& ctx) {
  ctx.seed = o.seed;
  Theorem1Config cfg;
  cfg.d_in = o.d_in;
  cfg.target_cos = o.cos;
  cfg.norm_ratio = o.r;
  cfg.n_trials = o.trials;
  cfg.seed = o.seed;

  std::vector<std::size_t> douts =
      o.d_out_sweep.empty() ? std::vector<std::size_t>{o.d_out} : parse_size_list(o.d_out_sweep);
  ordered_json sweep = ordered_json::array();
  for (std::size_t d : douts) {
    cfg.d_out = d;
    TrialReport rep = theorem1_experiment(cfg);
    std::cout << "d_out " << d << "  rate " << f6(rep.rate) << " +-" << f6(rep.wilson_halfwidth_95)
              << "  mean_delta " << f6(rep.mean_delta) << "\n";
    sweep.push_back(trial_report_json(d, rep));
  }
  if (!o.json.empty())
    write_report(ctx, o.json,
                 {{"d_in", o.d_in}, {"cos", o.cos}, {"r", o.r}, {"runs", sweep}});
}

struct Lemma1Opts {
  std::size_t d_in = 32, d_out = 256, samples = 10000, pairs = 20;
  std::uint64_t seed = 42;
  std::string json;
};

void run_lemma1(const Lemma1Opts& o, Ctx& ctx) {
  ctx.seed = o.seed;
  Rng base = Rng::seeded(o.seed);
  ordered_json rows = ordered_json::array();
  std::size_t held = 0, mid_matched = 0;
  for (std::size_t p = 0; p < o.pairs; ++p) {
    Rng rng = base.child(p);
    Vec u = normalize(gaussian_vector(o.d_in, 1.0, rng));
    Vec v = normalize(gaussian_vector(o.d_in, 1.0, rng));
    Lemma1Report rep = lemma1_check(u, v, o.d_out, o.samples, rng);
    bool mid_ok = std::fabs(rep.mid_est - rep.lhs) <= rep.mid_ci;
    held += rep.holds ? 1 : 0;
    mid_matched += mid_ok ? 1 : 0;
    rows.push_back({{"lhs", rep.lhs},
                    {"mid_est", rep.mid_est},
                    {"upper_est", rep.upper_est},
                    {"mid_ci", rep.mid_ci},
                    {"diff_ci", rep.diff_ci},
                    {"holds", rep.holds},
                    {"mid_matches_closed_form", mid_ok}});
  }
  std::cout << "pairs " << o.pairs << "  inequalities_held " << held << "  mid_matched "
            << mid_matched << "\n";
  if (!o.json.empty())
    write_report(ctx, o.json,
                 {{"pairs", o.pairs},
                  {"held", held},
                  {"mid_matched", mid_matched},
                  {"reports", rows}});
}

struct VarianceOpts {
  std::string activation = "relu", json;
  std::size_t dim = 512, depth = 4, k = 0, seeds = 50, n = 200;
  std::uint64_t seed = 42;
};

void run_variance(const VarianceOpts& o, Ctx& ctx) {
  ctx.seed = o.seed;
  MlpSpec spec = MlpSpec::dense(o.dim, o.depth, act_from_cli(o.activation));
  VarianceReport rep = variance_decomposition(spec, o.k, o.seeds, o.n, o.seed);
  std::cout << "within " << f6(rep.within) << "  between " << f6(rep.between) << "  ratio "
            << f6(rep.ratio) << "  beta_est " << f6(rep.beta_est)
            << (rep.low_budget_warning ? "  (low-budget warning)" : "") << "\n";
  if (!o.json.empty())
    write_report(ctx, o.json,
                 {{"within", rep.within},
                  {"between", rep.between},
                  {"ratio", rep.ratio},
                  {"beta_est", rep.beta_est},
                  {"low_budget_warning", rep.low_budget_warning}});
}

struct RectifiedOpts {
  double mu = 0.0, sigma = 1.0;
  std::string json;
};

void run_rectified(const RectifiedOpts& o, Ctx& ctx) {
  auto [m, v] = rectified_gaussian_moments(o.mu, o.sigma);
  std::cout << "mean " << f6(m) << "  variance " << f6(v) << "\n";
  if (!o.json.empty())
    write_report(ctx, o.json, {{"mu", o.mu}, {"sigma", o.sigma}, {"mean", m}, {"variance", v}});
}

struct GapOpts {
  BatchOpts batch;
  std::string json;
};

void run_gap(const GapOpts& o, Ctx& ctx) {
  GapReport rep = gap_vector(load_batch(o.batch));
  std::cout << "gap_distance " << f6(rep.distance) << "\n";
  if (!o.json.empty())
    write_report(ctx, o.json, {{"distance", rep.distance}, {"delta", rep.delta}});
}

struct ClipLossOpts {
  BatchOpts batch;
  double tau = 1.0;
  std::string json;
};

void run_clip_loss(const ClipLossOpts& o, Ctx& ctx) {
  PairedBatch batch = load_batch(o.batch);
  double loss = clip_loss(batch, o.tau);
  std::cout << "loss " << f6(loss) << "  (tau " << f6(o.tau) << ", n " << batch.n() << ")\n";
  if (!o.json.empty())
    write_report(ctx, o.json, {{"tau", o.tau}, {"n", batch.n()}, {"loss", loss}});
}

ordered_json curve_json(const LandscapeCurve& curve) {
  const LandscapePoint& g = curve.points[curve.global_min_index];
  return {{"global_min_index", curve.global_min_index},
          {"global_min_control", g.control},
          {"global_min_gap", g.remaining_gap},
          {"global_min_loss", g.loss},
          {"local_min_indices", curve.local_min_indices}};
}

struct ShiftSweepOpts {
  BatchOpts batch;
  double tau = 1.0, lo = kDefaultLambdaLo, hi = kDefaultLambdaHi;
  std::size_t points = kDefaultLambdaPoints;
  std::string out, json, plot;
};

void run_shift_sweep(const ShiftSweepOpts& o, Ctx& ctx) {
  PairedBatch batch = load_batch(o.batch);
  LandscapeCurve curve = landscape_sweep(batch, o.tau, uniform_grid(o.lo, o.hi, o.points));
  const LandscapePoint& g = curve.points[curve.global_min_index];
  std::cout << "global min: lambda " << f6(g.control) << "  remaining_gap "
            << f6(g.remaining_gap) << "  loss " << f6(g.loss) << "\nlocal minima "
            << curve.local_min_indices.size() << "\n";
  if (!o.out.empty()) {
    write_landscape_csv(curve, o.out, "lambda");
    ctx.outputs.push_back(o.out);
  }
  if (!o.plot.empty()) {
    PlotSeries s;
    for (const LandscapePoint& p : curve.points) {
      s.x.push_back(p.control);
      s.y.push_back(p.loss);
    }
    s.label = "tau " + f6(o.tau);
    write_svg_plot(o.plot, "loss along the gap direction", "lambda", "loss", {s});
    ctx.outputs.push_back(o.plot);
  }
  if (!o.json.empty()) {
    ordered_json r = curve_json(curve);
    r["tau"] = o.tau;
    write_report(ctx, o.json, r);
  }
}

struct TempProfileOpts {
  BatchOpts batch;
  std::string taus = "0.01,0.1,1";
  double lo = kDefaultLambdaLo, hi = kDefaultLambdaHi;
  std::size_t points = kDefaultLambdaPoints;
  std::string out, json, plot;
};

void run_temp_profile(const TempProfileOpts& o, Ctx& ctx) {
  PairedBatch batch = load_batch(o.batch);
  std::vector<TempProfilePoint> profile =
      temperature_gap_profile(batch, parse_double_list(o.taus), uniform_grid(o.lo, o.hi, o.points));
  for (const TempProfilePoint& p : profile)
    std::cout << "tau " << f6(p.tau) << "  argmin_lambda " << f6(p.argmin_lambda)
              << "  gap_at_argmin " << f6(p.gap_at_argmin) << "\n";
  if (!o.out.empty()) {
    std::ofstream out(o.out);
    require(out.good(), Errc::io_error, "cannot write " + o.out);
    out << "tau,argmin_lambda,gap_at_argmin\n";
    for (const TempProfilePoint& p : profile)
      out << format_full(p.tau) << ',' << format_full(p.argmin_lambda) << ','
          << format_full(p.gap_at_argmin) << "\n";
    require(out.good(), Errc::io_error, "write failed: " + o.out);
    ctx.outputs.push_back(o.out);
  }
  if (!o.plot.empty()) {
    PlotSeries s;
    for (const TempProfilePoint& p : profile) {
      s.x.push_back(p.tau);
      s.y.push_back(p.gap_at_argmin);
    }
    s.label = "gap at argmin";
    write_svg_plot(o.plot, "loss-optimal gap by temperature", "tau", "gap", {s});
    ctx.outputs.push_back(o.plot);
  }
  if (!o.json.empty()) {
    ordered_json rows = ordered_json::array();
    for (const TempProfilePoint& p : profile)
      rows.push_back({{"tau", p.tau},
                      {"argmin_lambda", p.argmin_lambda},
                      {"gap_at_argmin", p.gap_at_argmin}});
    write_report(ctx, o.json, {{"profile", rows}});
  }
}

struct SphereSimOpts {
  double tau = 0.01, delta_phi_deg = 15.0;
  std::size_t n_pairs = 6, points = 90;
  bool mismatched = false;
  std::string out, json, plot;
};

void run_sphere_sim(const SphereSimOpts& o, Ctx& ctx) {
  SimConfig cfg;
  cfg.n_pairs = o.n_pairs;
  cfg.delta_phi = deg_to_rad(o.delta_phi_deg);
  cfg.mismatched = o.mismatched;
  std::vector<double> grid_deg = uniform_grid(90.0 / static_cast<double>(o.points), 90.0, o.points);
  std::vector<double> grid(grid_deg.size());
  for (std::size_t i = 0; i < grid_deg.size(); ++i) grid[i] = deg_to_rad(grid_deg[i]);

  LandscapeCurve curve = sim_landscape(cfg, o.tau, grid);
  const LandscapePoint& g = curve.points[curve.global_min_index];
  double loss_at_90 = curve.points.back().loss;
  std::cout << "argmin theta " << f6(rad_to_deg(g.control)) << " deg  loss " << f6(g.loss)
            << "  gap " << f6(g.remaining_gap) << "\nloss(90deg) - min = "
            << f6(loss_at_90 - g.loss) << "\n";
  if (!o.out.empty()) {
    write_landscape_csv(curve, o.out, "theta");
    ctx.outputs.push_back(o.out);
  }
  if (!o.plot.empty()) {
    PlotSeries s;
    for (const LandscapePoint& p : curve.points) {
      s.x.push_back(rad_to_deg(p.control));
      s.y.push_back(p.loss);
    }
    s.label = "tau " + f6(o.tau);
    write_svg_plot(o.plot, "loss by text polar angle", "theta (deg)", "loss", {s});
    ctx.outputs.push_back(o.plot);
  }
  if (!o.json.empty()) {
    ordered_json r = curve_json(curve);
    r["tau"] = o.tau;
    r["mismatched"] = o.mismatched;
    r["argmin_theta_deg"] = rad_to_deg(g.control);
    r["repulsion"] = loss_at_90 - g.loss;
    write_report(ctx, o.json, r);
  }
}

void fill_train_config(TrainConfig& cfg, const std::string& activation, const std::string& init) {
  cfg.activation = act_from_cli(activation);
  cfg.init = init_kind_from_name(init);
}

void add_train_flags(CLI::App* cmd, TrainConfig& cfg, std::string& activation) {
  cmd->add_option("--n-pairs", cfg.n_pairs, "pairs to train")->capture_default_str();
  cmd->add_option("--dim", cfg.dim, "embedding dimension")->capture_default_str();
  cmd->add_option("--tau", cfg.tau, "temperature")->capture_default_str();
  cmd->add_option("--steps", cfg.steps, "gradient steps")->capture_default_str();
  cmd->add_option("--lr", cfg.learning_rate, "learning rate")->capture_default_str();
  cmd->add_option("--depth", cfg.mlp_depth, "cone-init network depth")->capture_default_str();
  cmd->add_option("--activation", activation, "none|relu|sigmoid|tanh")
      ->capture_default_str()
      ->check(CLI::IsMember({"none", "linear", "relu", "sigmoid", "tanh"}));
  cmd->add_option("--seed", cfg.seed, "rng seed")->capture_default_str();
}

struct TrainOpts {
  TrainConfig cfg;
  std::string activation = "relu", init = "random-cones";
  std::string out, json, plot;
};

void run_train(const TrainOpts& o, Ctx& ctx) {
  TrainConfig cfg = o.cfg;
  fill_train_config(cfg, o.activation, o.init);
  ctx.seed = cfg.seed;
  TrainTrace trace = train_embeddings(cfg);
  std::cout << "initial gap " << f6(trace.initial_gap()) << "  final gap "
            << f6(trace.final_gap()) << "  final loss " << f6(trace.steps.back().loss) << "\n";
  if (!o.out.empty()) {
    write_train_trace_csv(trace, o.out);
    ctx.outputs.push_back(o.out);
  }
  if (!o.plot.empty()) {
    PlotSeries gap, loss;
    for (const TrainStep& s : trace.steps) {
      gap.x.push_back(static_cast<double>(s.step));
      gap.y.push_back(s.gap_distance);
      loss.x.push_back(static_cast<double>(s.step));
      loss.y.push_back(s.loss);
    }
    gap.label = "gap";
    loss.label = "loss";
    write_svg_plot(o.plot, "training trajectory", "step", "value", {gap, loss});
    ctx.outputs.push_back(o.plot);
  }
  if (!o.json.empty())
    write_report(ctx, o.json,
                 {{"init", o.init},
                  {"tau", cfg.tau},
                  {"steps", cfg.steps},
                  {"initial_gap", trace.initial_gap()},
                  {"final_gap", trace.final_gap()},
                  {"final_loss", trace.steps.back().loss}});
}

struct InitVsOptOpts {
  TrainConfig cfg;
  std::string activation = "relu";
  std::size_t repeats = 3;
  std::string json;
};

ordered_json before_after_json(const GapBeforeAfter& g) {
  return {{"before_mean", g.before_mean}, {"before_ci", g.before_ci},
          {"after_mean", g.after_mean},   {"after_ci", g.after_ci},
          {"before", g.before},           {"after", g.after}};
}

void run_init_vs_opt(const InitVsOptOpts& o, Ctx& ctx) {
  TrainConfig cfg = o.cfg;
  fill_train_config(cfg, o.activation, "random-cones");
  ctx.seed = cfg.seed;
  InitVsOptReport rep = init_vs_opt_experiment(cfg, o.repeats);
  std::cout << "random-cones: gap " << f6(rep.random_init.before_mean) << " +-"
            << f6(rep.random_init.before_ci) << " -> " << f6(rep.random_init.after_mean) << " +-"
            << f6(rep.random_init.after_ci) << "\n"
            << "amended:      gap " << f6(rep.amended_init.before_mean) << " +-"
            << f6(rep.amended_init.before_ci) << " -> " << f6(rep.amended_init.after_mean)
            << " +-" << f6(rep.amended_init.after_ci) << "\n";
  if (!o.json.empty())
    write_report(ctx, o.json,
                 {{"repeats", o.repeats},
                  {"tau", cfg.tau},
                  {"random_init", before_after_json(rep.random_init)},
                  {"amended_init", before_after_json(rep.amended_init)}});
}

struct ProcrustesOpts {
  std::string x, y, out, json;
};

double frob_diff(const Mat& a, const Mat& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.a.size(); ++i) {
    double d = a.a[i] - b.a[i];
    s += d * d;
  }
  return std::sqrt(s);
}

void run_procrustes(const ProcrustesOpts& o, Ctx& ctx) {
  Mat x = read_embeddings(o.x).m;
  Mat y = read_embeddings(o.y).m;
  OrthogonalMap map = procrustes_align(x, y);
  Mat aligned = matmul(y, map.w);

  Mat wtw = matmul_tn(map.w, map.w);
  double orth_err = frob_diff(wtw, Mat::identity(map.w.cols));
  double res_before = frob_diff(x, y);
  double res_after = frob_diff(x, aligned);
  std::cout << "residual: identity " << f6(res_before) << "  aligned " << f6(res_after)
            << "\northogonality error " << f6(orth_err)
            << (map.underdetermined ? "  (underdetermined: fewer rows than columns)" : "") << "\n";
  if (!o.out.empty()) {
    write_matrix_csv(map.w, o.out);
    ctx.outputs.push_back(o.out);
  }
  if (!o.json.empty())
    write_report(ctx, o.json,
                 {{"residual_identity", res_before},
                  {"residual_aligned", res_after},
                  {"orthogonality_error", orth_err},
                  {"underdetermined", map.underdetermined}});
}

struct Project2dOpts {
  std::vector<std::string> in;
  std::string out, json, plot;
};

void run_project_2d(const Project2dOpts& o, Ctx& ctx) {
  std::vector<EmbeddingSet> sets;
  for (const std::string& p : o.in) sets.push_back(read_embeddings(p));
  std::vector<Mat> coords = project_2d(sets);

  std::size_t total = 0;
  for (const Mat& c : coords) total += c.rows;
  std::cout << "projected " << total << " vectors from " << sets.size() << " set(s)\n";

  if (!o.out.empty()) {
    std::ofstream out(o.out);
    require(out.good(), Errc::io_error, "cannot write " + o.out);
    out << "set,modality,id,x,y\n";
    for (std::size_t c = 0; c < coords.size(); ++c)
      for (std::size_t i = 0; i < coords[c].rows; ++i)
        out << c << ',' << sets[c].modality << ',' << i << ',' << format_full(coords[c].at(i, 0))
            << ',' << format_full(coords[c].at(i, 1)) << "\n";
    require(out.good(), Errc::io_error, "write failed: " + o.out);
    ctx.outputs.push_back(o.out);
  }
  if (!o.plot.empty()) {
    std::vector<PlotSeries> series;
    for (std::size_t c = 0; c < coords.size(); ++c) {
      PlotSeries s;
      for (std::size_t i = 0; i < coords[c].rows; ++i) {
        s.x.push_back(coords[c].at(i, 0));
        s.y.push_back(coords[c].at(i, 1));
      }
      s.label = sets[c].modality + " #" + std::to_string(c);
      series.push_back(std::move(s));
    }
    write_svg_plot(o.plot, "2D projection", "pc1", "pc2", series, true);
    ctx.outputs.push_back(o.plot);
  }
  if (!o.json.empty()) {
    ordered_json r{{"sets", sets.size()}, {"total", total}};
    write_report(ctx, o.json, r);
  }
}

// ---- app assembly ------------------------------------------------------

int run_impl(const std::vector<std::string>& args, bool allow_replay);

int replay_manifest(const std::string& path, bool allow_replay) {
  require(allow_replay, Errc::invalid_config, "manifest replay cannot nest");
  RunManifest m = RunManifest::load(path);
  std::cout << "replaying '" << m.subcommand << "' from " << path << "\n";
  return run_impl(m.argv, false);
}

int run_impl(const std::vector<std::string>& args, bool allow_replay) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--manifest") {
      if (i + 1 >= args.size()) {
        std::cerr << "error: --manifest needs a path\n";
        return 1;
      }
      return replay_manifest(args[i + 1], allow_replay);
    }
    if (args[i].rfind("--manifest=", 0) == 0)
      return replay_manifest(args[i].substr(std::string("--manifest=").size()), allow_replay);
  }

  CLI::App app{"modality-gap analysis toolkit"};
  app.require_subcommand(1);
  Ctx ctx;
  ctx.args = args;

  int threads = 0;
  auto wire = [&ctx, &threads](CLI::App* cmd, std::function<void()> handler) {
    cmd->add_option("--threads", threads, "worker thread cap (0 = hardware)")
        ->capture_default_str();
    cmd->final_callback([cmd, &ctx, &threads, handler = std::move(handler)] {
      ctx.subcommand = cmd->get_name();
      set_max_threads(threads);
      handler();
    });
  };

  {
    auto o = std::make_shared<ConeStatsOpts>();
    auto* c = app.add_subcommand("cone-stats", "pairwise cosine statistics of an embedding file");
    c->add_option("--in", o->in, "embedding file")->required();
    c->add_option("--pair-budget", o->pair_budget, "max pairs before subsampling")
        ->capture_default_str();
    c->add_option("--subsample-seed", o->subsample_seed, "seed for pair subsampling")
        ->capture_default_str();
    c->add_option("--json", o->json, "JSON report path");
    wire(c, [o, &ctx] { run_cone_stats(*o, ctx); });
  }
  {
    auto o = std::make_shared<MlpCurveOpts>();
    auto* c = app.add_subcommand("mlp-curve", "mean pairwise cosine per layer of a random MLP");
    c->add_option("--activation", o->activation, "none|relu|sigmoid|tanh")
        ->capture_default_str()
        ->check(CLI::IsMember({"none", "linear", "relu", "sigmoid", "tanh"}));
    c->add_option("--depth", o->depth, "number of layers")->capture_default_str();
    c->add_option("--dim", o->dim, "width and input dimension")->capture_default_str();
    c->add_option("--n", o->n, "number of inputs")->capture_default_str();
    c->add_option("--seed", o->seed, "rng seed")->capture_default_str();
    c->add_option("--input", o->input, "gaussian|int-seq|file")
        ->capture_default_str()
        ->check(CLI::IsMember({"gaussian", "int-seq", "file"}));
    c->add_option("--in", o->in, "input embedding file (with --input file)");
    c->add_option("--vocab", o->vocab, "int-seq vocabulary size")->capture_default_str();
    c->add_option("--seq-len", o->seq_len, "int-seq sequence length")->capture_default_str();
    c->add_option("--out", o->out, "layer curve CSV path");
    c->add_option("--plot", o->plot, "SVG plot path");
    c->add_option("--json", o->json, "JSON report path");
    wire(c, [o, &ctx] { run_mlp_curve(*o, ctx); });
  }
  {
    auto o = std::make_shared<MultiConesOpts>();
    auto* c = app.add_subcommand("multi-cones",
                                 "per-seed cone separation for one architecture");
    c->add_option("--seeds", o->seeds, "number of network seeds")->capture_default_str();
    c->add_option("--dim", o->dim, "width and input dimension")->capture_default_str();
    c->add_option("--depth", o->depth, "number of layers")->capture_default_str();
    c->add_option("--activation", o->activation, "none|relu|sigmoid|tanh")
        ->capture_default_str()
        ->check(CLI::IsMember({"none", "linear", "relu", "sigmoid", "tanh"}));
    c->add_option("--n", o->n, "shared input count")->capture_default_str();
    c->add_option("--seed", o->seed, "rng seed")->capture_default_str();
    c->add_option("--plot", o->plot, "scatter SVG of the 2D projection");
    c->add_option("--json", o->json, "JSON report path");
    wire(c, [o, &ctx] { run_multi_cones(*o, ctx); });
  }
  {
    auto o = std::make_shared<CapFractionOpts>();
    auto* c = app.add_subcommand("cap-fraction", "hypersphere cap surface fraction");
    c->add_option("--dim", o->dim, "ambient dimension")->required();
    c->add_option("--cos", o->cos_floor, "cosine floor (cap of directions with cos >= floor)");
    c->add_option("--angle-deg", o->angle_deg, "cap half-angle in degrees");
    c->add_option("--json", o->json, "JSON report path");
    wire(c, [o, &ctx] { run_cap_fraction(*o, ctx); });
  }
  {
    auto o = std::make_shared<Theorem1Opts>();
    auto* c = app.add_subcommand("theorem1",
                                 "cosine-increase success rate through one rectified layer");
    c->add_option("--d-in", o->d_in, "input dimension")->capture_default_str();
    c->add_option("--d-out", o->d_out, "output dimension")->capture_default_str();
    c->add_option("--cos", o->cos, "pair cosine")->capture_default_str();
    c->add_option("--r", o->r, "norm ratio |u|/|v|")->capture_default_str();
    c->add_option("--trials", o->trials, "number of trials")->capture_default_str();
    c->add_option("--seed", o->seed, "rng seed")->capture_default_str();
    c->add_option("--d-out-sweep", o->d_out_sweep, "comma list of d_out values");
    c->add_option("--json", o->json, "JSON report path");
    wire(c, [o, &ctx] { run_theorem1(*o, ctx); });
  }
  {
    auto o = std::make_shared<Lemma1Opts>();
    auto* c = app.add_subcommand("lemma1", "affine/rectified inner-product inequality check");
    c->add_option("--d-in", o->d_in, "input dimension")->capture_default_str();
    c->add_option("--d-out", o->d_out, "layer width")->capture_default_str();
    c->add_option("--samples", o->samples, "Monte-Carlo samples per pair")->capture_default_str();
    c->add_option("--pairs", o->pairs, "random unit pairs")->capture_default_str();
    c->add_option("--seed", o->seed, "rng seed")->capture_default_str();
    c->add_option("--json", o->json, "JSON report path");
    wire(c, [o, &ctx] { run_lemma1(*o, ctx); });
  }
  {
    auto o = std::make_shared<VarianceOpts>();
    auto* c = app.add_subcommand("variance-decomp",
                                 "within/between variance split over network seeds");
    c->add_option("--dim", o->dim, "width and input dimension")->capture_default_str();
    c->add_option("--depth", o->depth, "number of layers")->capture_default_str();
    c->add_option("--activation", o->activation, "none|relu|sigmoid|tanh")
        ->capture_default_str()
        ->check(CLI::IsMember({"none", "linear", "relu", "sigmoid", "tanh"}));
    c->add_option("--k", o->k, "output coordinate")->capture_default_str();
    c->add_option("--seeds", o->seeds, "number of network seeds")->capture_default_str();
    c->add_option("--n", o->n, "sphere-uniform inputs per seed")->capture_default_str();
    c->add_option("--seed", o->seed, "rng seed")->capture_default_str();
    c->add_option("--json", o->json, "JSON report path");
    wire(c, [o, &ctx] { run_variance(*o, ctx); });
  }
  {
    auto o = std::make_shared<RectifiedOpts>();
    auto* c = app.add_subcommand("rectified-moments", "moments of max(N(mu, sigma^2), 0)");
    c->add_option("--mu", o->mu, "mean")->required();
    c->add_option("--sigma", o->sigma, "standard deviation")->required();
    c->add_option("--json", o->json, "JSON report path");
    wire(c, [o, &ctx] { run_rectified(*o, ctx); });
  }
  {
    auto o = std::make_shared<GapOpts>();
    auto* c = app.add_subcommand("gap", "centroid gap vector of a paired batch");
    add_batch_flags(c, o->batch);
    c->add_option("--json", o->json, "JSON report path");
    wire(c, [o, &ctx] { run_gap(*o, ctx); });
  }
  {
    auto o = std::make_shared<ClipLossOpts>();
    auto* c = app.add_subcommand("clip-loss", "symmetric contrastive loss of a paired batch");
    add_batch_flags(c, o->batch);
    c->add_option("--tau", o->tau, "temperature")->capture_default_str();
    c->add_option("--json", o->json, "JSON report path");
    wire(c, [o, &ctx] { run_clip_loss(*o, ctx); });
  }
  {
    auto o = std::make_shared<ShiftSweepOpts>();
    auto* c = app.add_subcommand("shift-sweep", "loss landscape along the gap direction");
    add_batch_flags(c, o->batch);
    c->add_option("--tau", o->tau, "temperature")->capture_default_str();
    c->add_option("--lambda-lo", o->lo, "grid start")->capture_default_str();
    c->add_option("--lambda-hi", o->hi, "grid end")->capture_default_str();
    c->add_option("--points", o->points, "grid points")->capture_default_str();
    c->add_option("--out", o->out, "landscape CSV path");
    c->add_option("--plot", o->plot, "SVG plot path");
    c->add_option("--json", o->json, "JSON report path");
    wire(c, [o, &ctx] { run_shift_sweep(*o, ctx); });
  }
  {
    auto o = std::make_shared<TempProfileOpts>();
    auto* c = app.add_subcommand("temp-profile", "loss-optimal gap per temperature");
    add_batch_flags(c, o->batch);
    c->add_option("--taus", o->taus, "comma list of temperatures, ascending")
        ->capture_default_str();
    c->add_option("--lambda-lo", o->lo, "grid start")->capture_default_str();
    c->add_option("--lambda-hi", o->hi, "grid end")->capture_default_str();
    c->add_option("--points", o->points, "grid points")->capture_default_str();
    c->add_option("--out", o->out, "profile CSV path");
    c->add_option("--plot", o->plot, "SVG plot path");
    c->add_option("--json", o->json, "JSON report path");
    wire(c, [o, &ctx] { run_temp_profile(*o, ctx); });
  }
  {
    auto o = std::make_shared<SphereSimOpts>();
    auto* c = app.add_subcommand("sphere-sim", "loss vs text polar angle on the 3D sphere");
    c->add_option("--tau", o->tau, "temperature")->capture_default_str();
    c->add_option("--n-pairs", o->n_pairs, "number of pairs")->capture_default_str();
    c->add_option("--delta-phi-deg", o->delta_phi_deg, "azimuth spacing, degrees")
        ->capture_default_str();
    c->add_flag("--mismatched", o->mismatched, "swap the azimuths of texts 0 and 1");
    c->add_option("--points", o->points, "theta grid points over (0, 90]")->capture_default_str();
    c->add_option("--out", o->out, "landscape CSV path");
    c->add_option("--plot", o->plot, "SVG plot path");
    c->add_option("--json", o->json, "JSON report path");
    wire(c, [o, &ctx] { run_sphere_sim(*o, ctx); });
  }
  {
    auto o = std::make_shared<TrainOpts>();
    auto* c = app.add_subcommand("train", "projected gradient descent on free embeddings");
    add_train_flags(c, o->cfg, o->activation);
    c->add_option("--init", o->init, "random-cones|amended|direct")
        ->capture_default_str()
        ->check(CLI::IsMember({"random-cones", "amended", "direct"}));
    c->add_option("--out", o->out, "trace CSV path");
    c->add_option("--plot", o->plot, "SVG plot path");
    c->add_option("--json", o->json, "JSON report path");
    wire(c, [o, &ctx] { run_train(*o, ctx); });
  }
  {
    auto o = std::make_shared<InitVsOptOpts>();
    auto* c = app.add_subcommand("init-vs-opt",
                                 "gap before/after training: random vs aligned init");
    add_train_flags(c, o->cfg, o->activation);
    c->add_option("--repeats", o->repeats, "repeat seeds")->capture_default_str();
    c->add_option("--json", o->json, "JSON report path");
    wire(c, [o, &ctx] { run_init_vs_opt(*o, ctx); });
  }
  {
    auto o = std::make_shared<ProcrustesOpts>();
    auto* c = app.add_subcommand("procrustes", "closest orthogonal map from one set to another");
    c->add_option("--x", o->x, "target embedding file")->required();
    c->add_option("--y", o->y, "source embedding file")->required();
    c->add_option("--out", o->out, "orthogonal map CSV path");
    c->add_option("--json", o->json, "JSON report path");
    wire(c, [o, &ctx] { run_procrustes(*o, ctx); });
  }
  {
    auto o = std::make_shared<Project2dOpts>();
    auto* c = app.add_subcommand("project-2d", "top-2 singular projection of embedding sets");
    c->add_option("--in", o->in, "embedding file (repeatable)")->required()->expected(-1);
    c->add_option("--out", o->out, "coordinates CSV path");
    c->add_option("--plot", o->plot, "scatter SVG path");
    c->add_option("--json", o->json, "JSON report path");
    wire(c, [o, &ctx] { run_project_2d(*o, ctx); });
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
    return 1;
  }

  if (!ctx.outputs.empty()) {
    RunManifest m = make_manifest(ctx);
    m.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
    m.fill_checksums();
    m.save(RunManifest::sidecar_path(ctx.outputs.front()));
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  try {
    return run_impl(args, true);
  } catch (const Error& e) {
    std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  args.reserve(argc > 0 ? static_cast<std::size_t>(argc - 1) : 0);
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace mgap
