#include "mgap/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "mgap/io.hpp"
#include "mgap/parallel.hpp"

namespace mgap {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::none: return "none";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
  }
  return "unknown";
}

Activation activation_from_name(const std::string& name) {
  if (name == "none" || name == "linear") return Activation::none;
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  fail(Errc::invalid_spec, "unknown activation '" + name + "'");
}

MlpSpec MlpSpec::dense(std::size_t dim, std::size_t depth, Activation act) {
  MlpSpec spec;
  spec.input_dim = dim;
  spec.layer_dims.assign(depth, dim);
  spec.activation = act;
  spec.weight_variance = 1.0 / static_cast<double>(dim);
  spec.bias_variance = 1.0 / static_cast<double>(dim);
  return spec;
}

void MlpSpec::validate() const {
  require(input_dim >= 1, Errc::invalid_spec, "input_dim must be >= 1");
  for (std::size_t d : layer_dims)
    require(d >= 1, Errc::invalid_spec, "layer widths must be >= 1");
  require(std::isfinite(weight_variance) && weight_variance > 0.0, Errc::invalid_spec,
          "weight_variance must be positive");
  require(std::isfinite(bias_variance) && bias_variance > 0.0, Errc::invalid_spec,
          "bias_variance must be positive");
}

Mlp build_mlp(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  Mlp mlp;
  mlp.spec = spec;
  mlp.seed = seed;
  Rng rng = Rng::seeded(seed);
  std::size_t prev = spec.input_dim;
  for (std::size_t width : spec.layer_dims) {
    mlp.weights.push_back(gaussian_matrix(width, prev, spec.weight_variance, rng));
    mlp.biases.push_back(gaussian_vector(width, spec.bias_variance, rng));
    prev = width;
  }
  return mlp;
}

namespace {

double apply_act(Activation act, double x) {
  switch (act) {
    case Activation::none: return x;
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case Activation::tanh: return std::tanh(x);
  }
  return x;
}

// One affine + activation layer applied row-wise.
EmbeddingSet apply_layer(const Mlp& mlp, const EmbeddingSet& h, std::size_t layer) {
  const Mat& w = mlp.weights[layer];
  const Vec& b = mlp.biases[layer];
  EmbeddingSet out;
  out.m = Mat(h.n(), w.rows);
  out.modality = h.modality;
  out.unit_norm = false;
  const Activation act = mlp.spec.activation;
  parallel_for(h.n(), [&](std::size_t i) {
    const double* hi = h.row(i);
    double* oi = out.m.row(i);
    for (std::size_t o = 0; o < w.rows; ++o)
      oi[o] = apply_act(act, dot(w.row(o), hi, w.cols) + b[o]);
  });
  return out;
}

}  // namespace

EmbeddingSet forward(const Mlp& mlp, const EmbeddingSet& inputs,
                     std::optional<std::size_t> up_to_layer) {
  require(inputs.dim() == mlp.spec.input_dim, Errc::dimension_mismatch,
          "input dim " + std::to_string(inputs.dim()) + " does not match spec input_dim " +
              std::to_string(mlp.spec.input_dim));
  std::size_t layers = mlp.weights.size();
  std::size_t upto = up_to_layer.value_or(layers);
  require(upto <= layers, Errc::invalid_spec, "up_to_layer exceeds the layer count");
  EmbeddingSet h = inputs;
  for (std::size_t l = 0; l < upto; ++l) h = apply_layer(mlp, h, l);
  return h;
}

InputSource InputSource::gaussian(std::size_t n, std::size_t dim, std::uint64_t seed) {
  InputSource s;
  s.kind = Kind::gaussian_noise;
  s.count = n;
  s.dim = dim;
  s.seed = seed;
  return s;
}

InputSource InputSource::integer_sequences(std::size_t n, std::size_t vocab, std::size_t seq_len,
                                           std::size_t embed_dim, std::uint64_t seed) {
  InputSource s;
  s.kind = Kind::integer_sequence_noise;
  s.count = n;
  s.vocab = vocab;
  s.seq_len = seq_len;
  s.embed_dim = embed_dim;
  s.seed = seed;
  return s;
}

InputSource InputSource::from_file(const std::string& path) {
  InputSource s;
  s.kind = Kind::file;
  s.path = path;
  return s;
}

EmbeddingSet materialize(const InputSource& source) {
  switch (source.kind) {
    case InputSource::Kind::gaussian_noise: {
      require(source.count >= 2, Errc::invalid_config, "input source needs count >= 2");
      Rng rng = Rng::seeded(source.seed).child(1);
      Mat m = gaussian_matrix(source.count, source.dim, 1.0, rng);
      return EmbeddingSet::from_mat(std::move(m), "noise");
    }
    case InputSource::Kind::integer_sequence_noise: {
      require(source.count >= 2, Errc::invalid_config, "input source needs count >= 2");
      require(source.vocab >= 1 && source.seq_len >= 1, Errc::invalid_config,
              "vocab and seq_len must be >= 1");
      // A seeded token table plus mean pooling: the same (seed, sequence)
      // always maps to the same vector.
      Rng table_rng = Rng::seeded(source.seed).child(2);
      Mat table = gaussian_matrix(source.vocab, source.embed_dim,
                                  1.0 / static_cast<double>(source.embed_dim), table_rng);
      Rng seq_rng = Rng::seeded(source.seed).child(3);
      Mat m(source.count, source.embed_dim);
      double inv_len = 1.0 / static_cast<double>(source.seq_len);
      for (std::size_t i = 0; i < source.count; ++i) {
        double* r = m.row(i);
        for (std::size_t t = 0; t < source.seq_len; ++t) {
          std::size_t tok = static_cast<std::size_t>(seq_rng.next_u64() % source.vocab);
          const double* tr = table.row(tok);
          for (std::size_t j = 0; j < source.embed_dim; ++j) r[j] += tr[j];
        }
        for (std::size_t j = 0; j < source.embed_dim; ++j) r[j] *= inv_len;
      }
      return EmbeddingSet::from_mat(std::move(m), "sequence-noise");
    }
    case InputSource::Kind::file:
      return read_embeddings(source.path);
  }
  fail(Errc::invalid_config, "unknown input source kind");
}

LayerCurve layer_curve(const MlpSpec& spec, std::uint64_t seed, const InputSource& source) {
  Mlp mlp = build_mlp(spec, seed);
  EmbeddingSet h = materialize(source);
  LayerCurve curve;
  curve.per_layer.push_back(pairwise_cosine_stats(h));
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    h = apply_layer(mlp, h, l);
    curve.per_layer.push_back(pairwise_cosine_stats(h));
  }
  return curve;
}

MultiConeResult multi_seed_cones(const MlpSpec& spec, const std::vector<std::uint64_t>& seeds,
                                 const InputSource& source) {
  require(!seeds.empty(), Errc::invalid_config, "multi_seed_cones needs at least one seed");
  EmbeddingSet inputs = materialize(source);

  MultiConeResult result;
  result.cones.resize(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t s) {
    Mlp mlp = build_mlp(spec, seeds[s]);
    result.cones[s] = forward(mlp, inputs).normalized_rows();
    result.cones[s].modality = "seed-" + std::to_string(seeds[s]);
  });

  std::vector<Vec> centroids;
  centroids.reserve(seeds.size());
  for (const auto& cone : result.cones) centroids.push_back(cone.centroid());

  SeparationReport& rep = result.report;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    const EmbeddingSet& cone = result.cones[s];
    double spread = 0.0;
    for (std::size_t i = 0; i < cone.n(); ++i) {
      double d2 = 0.0;
      const double* r = cone.row(i);
      for (std::size_t j = 0; j < cone.dim(); ++j) {
        double diff = r[j] - centroids[s][j];
        d2 += diff * diff;
      }
      spread += std::sqrt(d2);
    }
    rep.within_spread.push_back(spread / static_cast<double>(cone.n()));
  }
  for (std::size_t a = 0; a + 1 < seeds.size(); ++a) {
    for (std::size_t b = a + 1; b < seeds.size(); ++b) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < centroids[a].size(); ++j) {
        double diff = centroids[a][j] - centroids[b][j];
        d2 += diff * diff;
      }
      rep.between.push_back({a, b, std::sqrt(d2)});
    }
  }
  rep.max_within = *std::max_element(rep.within_spread.begin(), rep.within_spread.end());
  if (!rep.between.empty()) {
    rep.min_between = rep.between.front().centroid_distance;
    for (const auto& p : rep.between) rep.min_between = std::min(rep.min_between, p.centroid_distance);
    rep.separated = rep.min_between > rep.max_within;
  }
  return result;
}

ConeStats ingest_and_analyze(const std::string& path) {
  return pairwise_cosine_stats(read_embeddings(path));
}

}  // namespace mgap
