#include "mgap/project2d.hpp"

#include "mgap/errors.hpp"
#include "mgap/svd.hpp"

namespace mgap {

std::vector<Mat> project_2d(const std::vector<EmbeddingSet>& sets) {
  require(!sets.empty(), Errc::invalid_config, "no sets to project");
  std::size_t dim = sets[0].dim();
  require(dim >= 2, Errc::dim_too_small, "need dim >= 2 to project to 2D");
  std::size_t total = 0;
  for (const EmbeddingSet& s : sets) {
    require(s.dim() == dim, Errc::dimension_mismatch, "sets have differing dimensions");
    total += s.n();
  }
  require(total >= 2, Errc::too_few_vectors, "need at least two vectors");

  Mat stacked(total, dim);
  std::size_t r = 0;
  for (const EmbeddingSet& s : sets)
    for (std::size_t i = 0; i < s.n(); ++i, ++r)
      for (std::size_t j = 0; j < dim; ++j) stacked.at(r, j) = s.row(i)[j];

  Vec mean(dim, 0.0);
  for (std::size_t i = 0; i < total; ++i)
    for (std::size_t j = 0; j < dim; ++j) mean[j] += stacked.at(i, j);
  for (std::size_t j = 0; j < dim; ++j) mean[j] /= static_cast<double>(total);
  for (std::size_t i = 0; i < total; ++i)
    for (std::size_t j = 0; j < dim; ++j) stacked.at(i, j) -= mean[j];

  SvdResult s = svd(stacked);
  Mat basis(dim, 2);
  for (std::size_t j = 0; j < dim; ++j) {
    basis.at(j, 0) = s.v.at(j, 0);
    basis.at(j, 1) = s.sigma.size() > 1 ? s.v.at(j, 1) : 0.0;
  }

  std::vector<Mat> out;
  out.reserve(sets.size());
  r = 0;
  for (const EmbeddingSet& set : sets) {
    Mat coords(set.n(), 2);
    for (std::size_t i = 0; i < set.n(); ++i, ++r) {
      double c0 = 0.0, c1 = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        c0 += stacked.at(r, j) * basis.at(j, 0);
        c1 += stacked.at(r, j) * basis.at(j, 1);
      }
      coords.at(i, 0) = c0;
      coords.at(i, 1) = c1;
    }
    out.push_back(std::move(coords));
  }
  return out;
}

}  // namespace mgap
