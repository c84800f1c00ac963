#pragma once

#include <vector>

#include "gmix/linalg.hpp"
#include "gmix/rng.hpp"

namespace gmix {

struct KMeansResult {
  std::vector<int> labels;  // per row of the input, in [0, k)
  Matrix centers;           // k × d
  double within_ss = 0.0;
  int iterations = 0;
};

// Lloyd iterations from the given centers until assignments stop changing or
// max_iter is reached. Ties go to the lowest center index; a center that
// loses all its points stays where it was.
KMeansResult lloyd(const Matrix& points, Matrix centers, int max_iter = 100);

// Best of `restarts` Lloyd runs seeded by k-means++, by within-cluster sum of
// squares.
KMeansResult kmeans(const Matrix& points, int k, RngStream& rng, int restarts = 10,
                    int max_iter = 100);

}  // namespace gmix
