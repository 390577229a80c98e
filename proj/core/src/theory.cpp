#include "mgap/theory.hpp"

#include <cmath>
#include <string>

#include "mgap/parallel.hpp"
#include "mgap/special.hpp"

namespace mgap {

double cosine_monotonicity_bound(double r) {
  require(std::isfinite(r) && r > 0.0, Errc::invalid_config, "norm ratio must be positive");
  return 1.0 / (0.5 * (r + 1.0 / r));
}

void Theorem1Config::validate() const {
  require(d_in >= 2 && d_out >= 1, Errc::invalid_config, "dimensions too small");
  require(n_trials >= 1, Errc::invalid_config, "n_trials must be >= 1");
  require(std::fabs(target_cos) < 1.0, Errc::invalid_cos, "target cosine must lie in (-1, 1)");
  double bound = cosine_monotonicity_bound(norm_ratio);
  require(target_cos < bound, Errc::precondition_violated,
          "target cosine " + std::to_string(target_cos) +
              " violates the monotonicity precondition cos < " + std::to_string(bound));
}

std::pair<Vec, Vec> make_pair_with_cos(std::size_t d_in, double target_cos, double r, Rng& rng) {
  require(d_in >= 2, Errc::invalid_config, "need d_in >= 2 to set an angle");
  require(std::fabs(target_cos) < 1.0, Errc::invalid_cos, "target cosine must lie in (-1, 1)");
  require(std::isfinite(r) && r > 0.0, Errc::invalid_config, "norm ratio must be positive");

  Vec v = normalize(gaussian_vector(d_in, 1.0, rng));
  // Random direction orthogonal to v.
  Vec w = gaussian_vector(d_in, 1.0, rng);
  double proj = dot(w, v);
  for (std::size_t i = 0; i < d_in; ++i) w[i] -= proj * v[i];
  w = normalize(w);

  double s = std::sqrt(1.0 - target_cos * target_cos);
  Vec u(d_in);
  for (std::size_t i = 0; i < d_in; ++i) u[i] = r * (target_cos * v[i] + s * w[i]);
  return {u, v};
}

Theorem1Trial theorem1_trial(const Vec& u, const Vec& v, std::size_t d_out, Rng& rng) {
  require(u.size() == v.size(), Errc::dimension_mismatch, "theorem1_trial dimension mismatch");
  const std::size_t d_in = u.size();
  double var = 1.0 / static_cast<double>(d_out);
  double sd = std::sqrt(var);

  Theorem1Trial trial;
  trial.cos_before = cosine(u, v);

  // Stream W row by row; each row also gets its bias entry.
  Vec a(d_out), b(d_out);
  Vec wrow(d_in);
  for (std::size_t o = 0; o < d_out; ++o) {
    for (std::size_t j = 0; j < d_in; ++j) wrow[j] = sd * rng.normal();
    double bias = sd * rng.normal();
    double au = dot(wrow.data(), u.data(), d_in) + bias;
    double av = dot(wrow.data(), v.data(), d_in) + bias;
    a[o] = au > 0.0 ? au : 0.0;
    b[o] = av > 0.0 ? av : 0.0;
  }

  double na = norm(a), nb = norm(b);
  // A fully rectified (all-zero) output carries no direction; its cosine
  // against anything is taken as 0.
  trial.cos_after = (na > 0.0 && nb > 0.0) ? cosine(a, b) : 0.0;
  trial.increased = trial.cos_after > trial.cos_before;
  return trial;
}

TrialReport theorem1_experiment(const Theorem1Config& cfg) {
  cfg.validate();
  Rng base = Rng::seeded(cfg.seed);

  std::vector<std::uint8_t> increased(cfg.n_trials, 0);
  std::vector<double> delta(cfg.n_trials, 0.0);
  parallel_for(cfg.n_trials, [&](std::size_t t) {
    Rng rng = base.child(t);
    auto [u, v] = make_pair_with_cos(cfg.d_in, cfg.target_cos, cfg.norm_ratio, rng);
    Theorem1Trial trial = theorem1_trial(u, v, cfg.d_out, rng);
    increased[t] = trial.increased ? 1 : 0;
    delta[t] = trial.cos_after - trial.cos_before;
  });

  TrialReport rep;
  rep.trials = cfg.n_trials;
  for (std::uint8_t x : increased) rep.successes += x;
  rep.rate = static_cast<double>(rep.successes) / static_cast<double>(rep.trials);
  Interval iv = wilson_interval(rep.successes, rep.trials, kZ95);
  rep.wilson_halfwidth_95 = 0.5 * (iv.hi - iv.lo);
  rep.mean_delta = mean(delta);
  rep.sd_delta = cfg.n_trials >= 2 ? sample_sd(delta) : 0.0;
  return rep;
}

Lemma1Report lemma1_check(const Vec& u, const Vec& v, std::size_t d_out, std::size_t n_samples,
                          Rng& rng, double z) {
  require(u.size() == v.size(), Errc::dimension_mismatch, "lemma1_check dimension mismatch");
  require(n_samples >= 100, Errc::invalid_config, "lemma1_check needs n_samples >= 100");
  const std::size_t d_in = u.size();
  double sd = std::sqrt(1.0 / static_cast<double>(d_out));

  std::vector<double> mid(n_samples), upper(n_samples);
  Rng base = rng.child(0x11);
  parallel_for(n_samples, [&](std::size_t s) {
    Rng r = base.child(s);
    double dot_affine = 0.0;
    double dot_relu = 0.0;
    Vec wrow(d_in);
    for (std::size_t o = 0; o < d_out; ++o) {
      for (std::size_t j = 0; j < d_in; ++j) wrow[j] = sd * r.normal();
      double bias = sd * r.normal();
      double au = dot(wrow.data(), u.data(), d_in) + bias;
      double av = dot(wrow.data(), v.data(), d_in) + bias;
      dot_affine += au * av;
      if (au > 0.0 && av > 0.0) dot_relu += au * av;
    }
    mid[s] = dot_affine;
    upper[s] = 2.0 * dot_relu;
  });

  Lemma1Report rep;
  rep.lhs = 1.0 + dot(u, v);
  rep.mid_est = mean(mid);
  rep.upper_est = mean(upper);
  rep.mid_ci = mean_ci_halfwidth(mid, z);
  std::vector<double> diff(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) diff[s] = upper[s] - mid[s];
  rep.diff_ci = mean_ci_halfwidth(diff, z);
  rep.holds = (rep.lhs <= rep.mid_est + rep.mid_ci) &&
              (rep.mid_est <= rep.upper_est + rep.diff_ci);
  return rep;
}

std::pair<double, double> rectified_gaussian_moments(double mu, double sigma) {
  require(std::isfinite(sigma) && sigma > 0.0, Errc::invalid_sigma, "sigma must be positive");
  double t = mu / sigma;
  double p = norm_cdf(t);
  double f = norm_pdf(t);
  double m1 = mu * p + sigma * f;
  double m2 = (mu * mu + sigma * sigma) * p + mu * sigma * f;
  return {m1, m2 - m1 * m1};
}

VarianceReport variance_decomposition(const MlpSpec& spec, std::size_t k,
                                      const std::vector<std::uint64_t>& net_seeds,
                                      std::size_t n_data, std::uint64_t data_seed) {
  spec.validate();
  const std::size_t n_seeds = net_seeds.size();
  require(n_seeds >= 2 && n_data >= 2, Errc::invalid_config,
          "variance decomposition needs n_seeds >= 2 and n_data >= 2");
  std::size_t out_dim = spec.layer_dims.empty() ? spec.input_dim : spec.layer_dims.back();
  require(k < out_dim, Errc::invalid_config, "coordinate k out of range");

  // Shared sphere-uniform inputs.
  Rng data_rng = Rng::seeded(data_seed).child(0xD);
  Mat u = gaussian_matrix(n_data, spec.input_dim, 1.0, data_rng);
  for (std::size_t i = 0; i < n_data; ++i) normalize_in_place(u.row(i), spec.input_dim);
  EmbeddingSet inputs = EmbeddingSet::from_mat(std::move(u), "sphere", true);

  std::size_t layers = spec.layer_dims.size();
  std::vector<double> seed_mean(n_seeds), seed_var(n_seeds), seed_trace(n_seeds);

  parallel_for(n_seeds, [&](std::size_t s) {
    Mlp mlp = build_mlp(spec, net_seeds[s]);
    EmbeddingSet penult = forward(mlp, inputs, layers == 0 ? 0 : layers - 1);
    EmbeddingSet out = layers == 0 ? penult : forward(mlp, inputs, layers);

    // Trace of the empirical covariance of the penultimate representation.
    double trace = 0.0;
    for (std::size_t j = 0; j < penult.dim(); ++j) {
      double m = 0.0;
      for (std::size_t i = 0; i < penult.n(); ++i) m += penult.row(i)[j];
      m /= static_cast<double>(penult.n());
      double ss = 0.0;
      for (std::size_t i = 0; i < penult.n(); ++i) {
        double d = penult.row(i)[j] - m;
        ss += d * d;
      }
      trace += ss / static_cast<double>(penult.n() - 1);
    }
    seed_trace[s] = trace;

    std::vector<double> hk(out.n());
    for (std::size_t i = 0; i < out.n(); ++i) hk[i] = out.row(i)[k];
    seed_mean[s] = mean(hk);
    seed_var[s] = sample_variance(hk);
  });

  VarianceReport rep;
  rep.within = mean(seed_var);
  // Sample variance of per-seed means overstates the between-component
  // by within/n_data (mean sampling noise); subtract it out.
  double naive_between = sample_variance(seed_mean);
  rep.between = naive_between - rep.within / static_cast<double>(n_data);
  double total = rep.within + rep.between;
  rep.low_budget_warning = rep.between < 0.0 || total <= 0.0;
  rep.ratio = total != 0.0 ? rep.between / total : 0.0;
  rep.beta_est = 1.0 - mean(seed_trace);
  return rep;
}

VarianceReport variance_decomposition(const MlpSpec& spec, std::size_t k, std::size_t n_seeds,
                                      std::size_t n_data, std::uint64_t seed) {
  Rng seed_rng = Rng::seeded(seed).child(0x5);
  std::vector<std::uint64_t> net_seeds(n_seeds);
  for (std::size_t s = 0; s < n_seeds; ++s) net_seeds[s] = seed_rng.next_u64();
  return variance_decomposition(spec, k, net_seeds, n_data, seed);
}

}  // namespace mgap
