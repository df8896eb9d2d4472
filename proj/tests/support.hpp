#pragma once

#include "dssl/gram_store.hpp"
#include "dssl/types.hpp"

#include <random>

namespace dssl::fixtures {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = z(rng);
  return m;
}

/// Gram of `rows` samples of p correlated channels, built like a detector would see it.
inline SegmentGram random_segment(Eigen::Index rows, Eigen::Index p, std::mt19937_64& rng) {
  const Matrix mix = random_matrix(p, p, rng);
  const Matrix y = random_matrix(rows, p, rng) * mix;
  SegmentGram seg;
  seg.start = 0;
  seg.end = static_cast<TimeIndex>(rows);
  seg.gram = y.transpose() * y;
  return seg;
}

/// Stream with a planted change in the mixing matrix at each entry of `cps`.
inline Matrix planted_stream(Eigen::Index n, Eigen::Index p, const std::vector<Eigen::Index>& cps,
                             std::mt19937_64& rng, double noise = 0.05) {
  Matrix y(n, p);
  Eigen::Index start = 0;
  std::vector<Eigen::Index> bounds(cps);
  bounds.push_back(n);
  for (Eigen::Index end : bounds) {
    const Eigen::Index k = std::max<Eigen::Index>(1, p / 2);
    const Matrix load = random_matrix(k, p, rng);
    y.middleRows(start, end - start) =
        random_matrix(end - start, k, rng) * load + noise * random_matrix(end - start, p, rng);
    start = end;
  }
  return y;
}

}  // namespace dssl::fixtures
