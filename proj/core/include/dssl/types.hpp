#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dssl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Time index into a stream. Index t refers to the prefix Y_1..Y_t; 0 is the empty prefix.
using TimeIndex = std::size_t;

/// Rejected user input (bad dimensions, non-finite values, malformed files).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A broken internal invariant, e.g. a segment statistic requested after eviction.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace dssl
