#pragma once

#include "dssl/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dssl {

enum class BasisKind { BSpline, Fourier };

/// n_basis x n matrix of basis functions sampled at t_k = k / n, k = 0..n-1, each row
/// scaled to unit root-mean-square over the grid.
///
/// BSpline: uniform cubic B-splines whose centres are spread evenly over [0, 1]
/// (knot spacing 1 / (n_basis - 1)).
/// Fourier: sin(2 pi t), cos(2 pi t), sin(4 pi t), cos(4 pi t), ... truncated to n_basis.
Matrix basis_matrix(BasisKind kind, int n_basis, std::size_t n);

/// Same functions without the RMS scaling: B-spline bumps peak at 2/3, Fourier rows at 1.
Matrix raw_basis_matrix(BasisKind kind, int n_basis, std::size_t n);

/// Scales every row to unit root-mean-square.
Matrix normalized_basis(Matrix phi);

/// Random d x d correlation matrix from partial correlations on a C-vine.
/// Partial correlations at vine level k are drawn from Beta(b_k, b_k) rescaled to (-1, 1),
/// with b_k = concentration + (d - 2 - k) / 2.
Matrix vine_correlation(int d, std::uint64_t seed, double concentration = 2.0);

struct SubspaceSpec {
  BasisKind kind = BasisKind::BSpline;
  int n_basis = 3;
  int n_series = 20;
};

struct GroundTruth {
  std::vector<std::size_t> change_points;
  std::size_t length = 0;
  /// subspace_labels[r][i]: subspace (or covariance block) of channel i in regime r.
  std::vector<std::vector<int>> subspace_labels;
  /// Which covariance/coefficient draw each segment uses.
  std::vector<int> regime_of_segment;

  std::vector<double> gamma() const;
  /// Most recent true change-point at or before t; 0 before the first.
  std::size_t latest_change_point(std::size_t t) const;
};

/// A simulated stream: samples is N x p (rows are time steps).
struct SimulatedStream {
  Matrix samples;
  GroundTruth truth;
  int case_id = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Piecewise self-expressive stream. Each segment draws a fresh coefficient matrix
/// A ~ U[-0.5, 0.5] per subspace; channel i of subspace l is A_i * Phi_l plus N(0, sigma^2).
SimulatedStream gen_subspace_stream(const std::vector<SubspaceSpec>& subspaces, std::size_t n,
                                    const std::vector<std::size_t>& change_points, double sigma,
                                    std::uint64_t seed);

/// p = 40 (20 B-spline + 20 Fourier channels, 3 bases each), N = 128, changes at {32, 64}.
SimulatedStream gen_case1(double sigma, std::uint64_t seed);
/// p = 400 (200 + 200), N = 320, changes at 32, 64, ..., 288.
SimulatedStream gen_case2(double sigma, std::uint64_t seed);
/// Case II layout with a configurable channel count split evenly between the two subspaces.
SimulatedStream gen_case2_scaled(std::size_t p, double sigma, std::uint64_t seed);
/// Gaussian stream, N = 128, p = 40, changes at {32, 64}. Segment covariances are
/// sigma^2 * diag(S11, S22) with 20 x 20 vine blocks; each segment gets a fresh draw.
SimulatedStream gen_case3(double sigma, std::uint64_t seed);

/// Block-diagonal correlation matrix with a fresh vine draw per block.
Matrix block_vine_correlation(const std::vector<int>& block_sizes, std::uint64_t seed,
                              double concentration = 2.0);

/// len x d samples from N(0, sigma^2 * cov).
Matrix sample_gaussian(const Matrix& cov, double sigma, std::size_t len, std::uint64_t seed);

/// Case I, II or III by id; Case II honours the full p = 400 layout.
SimulatedStream simulate_case(int case_id, double sigma, std::uint64_t seed);

}  // namespace dssl
