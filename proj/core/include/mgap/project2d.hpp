#pragma once

#include <vector>

#include "mgap/embedding.hpp"

namespace mgap {

// Stacks the sets, centers on the global mean, and projects onto the
// top-2 right singular vectors. One n_i x 2 coordinate block per input
// set, in input order.
std::vector<Mat> project_2d(const std::vector<EmbeddingSet>& sets);

}  // namespace mgap
