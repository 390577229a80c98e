#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mgap/embedding.hpp"
#include "mgap/linalg.hpp"

namespace mgap {

enum class Activation { none, relu, sigmoid, tanh };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct MlpSpec {
  std::size_t input_dim = 512;
  std::vector<std::size_t> layer_dims;  // output width per layer; empty = identity
  Activation activation = Activation::relu;
  double weight_variance = 1.0 / 512.0;
  double bias_variance = 1.0 / 512.0;

  // depth layers of uniform width, variances 1/width.
  static MlpSpec dense(std::size_t dim, std::size_t depth, Activation act);

  void validate() const;
};

struct Mlp {
  MlpSpec spec;
  std::vector<Mat> weights;  // layer_dims[l] x prev_dim
  std::vector<Vec> biases;
  std::uint64_t seed = 0;
};

Mlp build_mlp(const MlpSpec& spec, std::uint64_t seed);

// h^(l) = act(W^(l) h^(l-1) + b^(l)) applied row-wise; up_to_layer
// truncates the composition (0 = raw inputs back).
EmbeddingSet forward(const Mlp& mlp, const EmbeddingSet& inputs,
                     std::optional<std::size_t> up_to_layer = std::nullopt);

// Input generators for cone experiments. Identical (kind, seed, shape)
// always materializes identical data.
struct InputSource {
  enum class Kind { gaussian_noise, integer_sequence_noise, file };

  Kind kind = Kind::gaussian_noise;
  std::size_t count = 0;
  std::uint64_t seed = 42;

  std::size_t dim = 512;  // gaussian_noise

  std::size_t vocab = 1000;  // integer_sequence_noise
  std::size_t seq_len = 16;
  std::size_t embed_dim = 512;

  std::string path;  // file

  static InputSource gaussian(std::size_t n, std::size_t dim, std::uint64_t seed = 42);
  static InputSource integer_sequences(std::size_t n, std::size_t vocab, std::size_t seq_len,
                                       std::size_t embed_dim, std::uint64_t seed = 42);
  static InputSource from_file(const std::string& path);
};

EmbeddingSet materialize(const InputSource& source);

struct LayerCurve {
  std::vector<ConeStats> per_layer;  // index 0 = raw inputs
};

LayerCurve layer_curve(const MlpSpec& spec, std::uint64_t seed, const InputSource& source);

struct SeparationReport {
  struct PairDistance {
    std::size_t a = 0;
    std::size_t b = 0;
    double centroid_distance = 0.0;
  };
  std::vector<PairDistance> between;   // all seed pairs a < b in index order
  std::vector<double> within_spread;   // per seed, mean distance to own centroid
  double min_between = 0.0;
  double max_within = 0.0;
  bool separated = false;  // min_between > max_within
};

struct MultiConeResult {
  std::vector<EmbeddingSet> cones;  // normalized outputs, one set per seed
  SeparationReport report;
};

// Push the same inputs through one freshly initialized network per seed.
MultiConeResult multi_seed_cones(const MlpSpec& spec, const std::vector<std::uint64_t>& seeds,
                                 const InputSource& source);

// Pairwise cosine statistics of an embedding file (any cli_io format).
ConeStats ingest_and_analyze(const std::string& path);

}  // namespace mgap
