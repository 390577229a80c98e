#pragma once

#include <cstdint>
#include <vector>

#include "mgap/gaploss.hpp"
#include "mgap/mlp.hpp"
#include "mgap/svd.hpp"

namespace mgap {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Six-point toy geometry: image i sits on the equator at azimuth
// i * delta_phi; text i shares the azimuth at polar angle theta. The
// mismatched variant swaps the azimuths of texts 0 and 1 only.
struct SimConfig {
  std::size_t n_pairs = 6;
  double delta_phi = deg_to_rad(15.0);
  bool mismatched = false;
  double theta = kPi / 2.0;  // (0, pi/2]

  void validate() const;
};

PairedBatch build_sphere_sim(const SimConfig& cfg);

// Loss as a function of theta with the images held fixed; curve control
// values are theta in radians.
LandscapeCurve sim_landscape(SimConfig cfg, double tau, const std::vector<double>& theta_grid);

struct OrthogonalMap {
  Mat w;  // d x d, w^T w = I
  bool underdetermined = false;  // fewer rows than columns in the inputs
};

// argmin over orthogonal W of |x - y W|_F via the SVD of y^T x.
OrthogonalMap procrustes_align(const Mat& x, const Mat& y);

enum class InitKind { random_cones, amended, direct };

const char* init_kind_name(InitKind k);
InitKind init_kind_from_name(const std::string& name);

struct TrainConfig {
  std::size_t n_pairs = 64;
  std::size_t dim = 64;
  double tau = 0.01;
  std::size_t steps = 500;
  double learning_rate = 0.5;
  InitKind init = InitKind::random_cones;
  std::size_t mlp_depth = 4;          // random_cones / amended
  Activation activation = Activation::relu;
  std::uint64_t seed = 42;

  void validate() const;
};

struct TrainStep {
  std::size_t step = 0;
  double loss = 0.0;
  double gap_distance = 0.0;
};

struct TrainTrace {
  std::vector<TrainStep> steps;  // steps + 1 entries, step 0 included
  PairedBatch final_batch;

  double initial_gap() const { return steps.front().gap_distance; }
  double final_gap() const { return steps.back().gap_distance; }
};

// Free embeddings under projected gradient descent on the unit sphere:
// analytic gradient step, then row renormalization.
TrainTrace train_embeddings(const TrainConfig& cfg);

// The initial batch train_embeddings would start from.
PairedBatch initial_batch(const TrainConfig& cfg);

struct GapBeforeAfter {
  std::vector<double> before;
  std::vector<double> after;
  double before_mean = 0.0, before_ci = 0.0;  // normal-approximation 95% CI
  double after_mean = 0.0, after_ci = 0.0;
};

struct InitVsOptReport {
  GapBeforeAfter random_init;
  GapBeforeAfter amended_init;
};

// Same repeat seeds for both arms: random-cones init vs the same init
// with the text side Procrustes-aligned to the image side first.
InitVsOptReport init_vs_opt_experiment(const TrainConfig& cfg, std::size_t n_repeats);

}  // namespace mgap
