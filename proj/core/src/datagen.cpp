#include "dssl/datagen.hpp"

#include <cmath>
#include <numbers>
#include <algorithm>
#include <random>

namespace dssl {

namespace {

// Cardinal cubic B-spline centred at 0 with support [-2, 2].
double cubic_bspline(double x) {
  const double a = std::abs(x);
  if (a >= 2.0) return 0.0;
  if (a >= 1.0) {
    const double u = 2.0 - a;
    return u * u * u / 6.0;
  }
  return (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0;
}

double beta_draw(std::mt19937_64& rng, double shape) {
  std::gamma_distribution<double> gamma(shape, 1.0);
  const double x = gamma(rng);
  const double y = gamma(rng);
  return x / (x + y);
}

void check_change_points(const std::vector<std::size_t>& cps, std::size_t n) {
  std::size_t prev = 0;
  for (std::size_t cp : cps) {
    if (cp <= prev || cp >= n) {
      throw InputError("change-points must be strictly increasing inside (0, N)");
    }
    prev = cp;
  }
}

}  // namespace

Matrix normalized_basis(Matrix phi) {
  const double n = static_cast<double>(phi.cols());
  for (Eigen::Index m = 0; m < phi.rows(); ++m) {
    const double rms = std::sqrt(phi.row(m).squaredNorm() / n);
    if (rms > 0.0) phi.row(m) /= rms;
  }
  return phi;
}

Matrix basis_matrix(BasisKind kind, int n_basis, std::size_t n) {
  return normalized_basis(raw_basis_matrix(kind, n_basis, n));
}

Matrix raw_basis_matrix(BasisKind kind, int n_basis, std::size_t n) {
  if (n_basis < 1) throw InputError("n_basis must be positive");
  Matrix phi(n_basis, static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(n);
    for (int m = 0; m < n_basis; ++m) {
      double v;
      if (kind == BasisKind::BSpline) {
        const double h = n_basis > 1 ? 1.0 / (n_basis - 1) : 1.0;
        const double centre = n_basis > 1 ? m * h : 0.5;
        v = cubic_bspline((t - centre) / h);
      } else {
        const double freq = 2.0 * std::numbers::pi * (m / 2 + 1);
        v = (m % 2 == 0) ? std::sin(freq * t) : std::cos(freq * t);
      }
      phi(m, static_cast<Eigen::Index>(k)) = v;
    }
  }
  return phi;
}

Matrix vine_correlation(int d, std::uint64_t seed, double concentration) {
  if (d < 1) throw InputError("correlation dimension must be positive");
  if (!(concentration > 0.0)) throw InputError("vine concentration must be positive");
  std::mt19937_64 rng(seed);
  Matrix partial = Matrix::Zero(d, d);
  Matrix corr = Matrix::Identity(d, d);
  double shape = concentration + (d - 1) / 2.0;
  for (int k = 0; k < d - 1; ++k) {
    shape -= 0.5;
    for (int i = k + 1; i < d; ++i) {
      partial(k, i) = 2.0 * beta_draw(rng, shape) - 1.0;
      // Convert the partial correlation to a raw correlation by peeling conditioning
      // variables k-1, ..., 0.
      double r = partial(k, i);
      for (int l = k - 1; l >= 0; --l) {
        r = r * std::sqrt((1.0 - partial(l, i) * partial(l, i)) *
                          (1.0 - partial(l, k) * partial(l, k))) +
            partial(l, i) * partial(l, k);
      }
      corr(k, i) = r;
      corr(i, k) = r;
    }
  }
  return corr;
}

Matrix block_vine_correlation(const std::vector<int>& block_sizes, std::uint64_t seed,
                              double concentration) {
  int total = 0;
  for (int b : block_sizes) total += b;
  Matrix out = Matrix::Zero(total, total);
  std::mt19937_64 seeder(seed);
  int offset = 0;
  for (int b : block_sizes) {
    out.block(offset, offset, b, b) = vine_correlation(b, seeder(), concentration);
    offset += b;
  }
  return out;
}

Matrix sample_gaussian(const Matrix& cov, double sigma, std::size_t len, std::uint64_t seed) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw InputError("covariance is not positive definite");
  const Matrix lower = llt.matrixL();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index d = cov.rows();
  Matrix z(d, static_cast<Eigen::Index>(len));
  for (Eigen::Index t = 0; t < z.cols(); ++t) {
    for (Eigen::Index i = 0; i < d; ++i) z(i, t) = normal(rng);
  }
  return (sigma * (lower * z)).transpose();
}

std::vector<double> GroundTruth::gamma() const {
  std::vector<double> out;
  for (std::size_t cp : change_points) {
    out.push_back(static_cast<double>(cp) / static_cast<double>(length));
  }
  return out;
}

std::size_t GroundTruth::latest_change_point(std::size_t t) const {
  std::size_t lcp = 0;
  for (std::size_t cp : change_points) {
    if (cp <= t) lcp = cp;
  }
  return lcp;
}

SimulatedStream gen_subspace_stream(const std::vector<SubspaceSpec>& subspaces, std::size_t n,
                                    const std::vector<std::size_t>& change_points, double sigma,
                                    std::uint64_t seed) {
  check_change_points(change_points, n);
  if (sigma < 0.0) throw InputError("sigma must be nonnegative");
  Eigen::Index p = 0;
  std::vector<Matrix> bases;
  std::vector<int> labels;
  for (std::size_t l = 0; l < subspaces.size(); ++l) {
    const auto& s = subspaces[l];
    if (s.n_series <= s.n_basis) {
      throw InputError("each subspace needs more series than basis functions");
    }
    bases.push_back(basis_matrix(s.kind, s.n_basis, n));
    labels.insert(labels.end(), s.n_series, static_cast<int>(l));
    p += s.n_series;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-0.5, 0.5);
  std::normal_distribution<double> noise(0.0, 1.0);

  SimulatedStream out;
  out.samples = Matrix::Zero(static_cast<Eigen::Index>(n), p);
  std::vector<std::size_t> bounds{0};
  bounds.insert(bounds.end(), change_points.begin(), change_points.end());
  bounds.push_back(n);
  for (std::size_t c = 0; c + 1 < bounds.size(); ++c) {
    const auto t0 = static_cast<Eigen::Index>(bounds[c]);
    const auto len = static_cast<Eigen::Index>(bounds[c + 1] - bounds[c]);
    Eigen::Index row0 = 0;
    for (std::size_t l = 0; l < subspaces.size(); ++l) {
      const auto& s = subspaces[l];
      Matrix a(s.n_series, s.n_basis);
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index q = 0; q < a.cols(); ++q) a(i, q) = coef(rng);
      }
      out.samples.block(t0, row0, len, s.n_series) =
          (a * bases[l].middleCols(t0, len)).transpose();
      row0 += s.n_series;
    }
    out.truth.regime_of_segment.push_back(static_cast<int>(c));
    out.truth.subspace_labels.push_back(labels);
  }
  for (Eigen::Index t = 0; t < out.samples.rows(); ++t) {
    for (Eigen::Index i = 0; i < p; ++i) out.samples(t, i) += sigma * noise(rng);
  }
  out.truth.change_points = change_points;
  out.truth.length = n;
  out.sigma = sigma;
  out.seed = seed;
  return out;
}

SimulatedStream gen_case1(double sigma, std::uint64_t seed) {
  auto s = gen_subspace_stream({{BasisKind::BSpline, 3, 20}, {BasisKind::Fourier, 3, 20}}, 128,
                               {32, 64}, sigma, seed);
  s.case_id = 1;
  return s;
}

SimulatedStream gen_case2_scaled(std::size_t p, double sigma, std::uint64_t seed) {
  const int half = static_cast<int>(p / 2);
  std::vector<std::size_t> cps;
  for (std::size_t i = 1; i <= 9; ++i) cps.push_back(i * 32);
  auto s = gen_subspace_stream({{BasisKind::BSpline, 3, half}, {BasisKind::Fourier, 3, half}},
                               320, cps, sigma, seed);
  s.case_id = 2;
  return s;
}

SimulatedStream gen_case2(double sigma, std::uint64_t seed) {
  return gen_case2_scaled(400, sigma, seed);
}

SimulatedStream gen_case3(double sigma, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw InputError("sigma must be positive");
  constexpr std::size_t n = 128;
  const std::vector<std::size_t> cps{32, 64};
  const std::vector<int> blocks{20, 20};
  std::mt19937_64 seeder(seed);

  SimulatedStream out;
  out.case_id = 3;
  out.sigma = sigma;
  out.seed = seed;
  out.samples = Matrix::Zero(n, 40);
  std::vector<int> labels(40, 0);
  std::fill(labels.begin() + 20, labels.end(), 1);
  std::vector<std::size_t> bounds{0, 32, 64, n};
  for (std::size_t c = 0; c + 1 < bounds.size(); ++c) {
    const Matrix cov = block_vine_correlation(blocks, seeder());
    const std::size_t len = bounds[c + 1] - bounds[c];
    out.samples.middleRows(static_cast<Eigen::Index>(bounds[c]), static_cast<Eigen::Index>(len)) =
        sample_gaussian(cov, sigma, len, seeder());
    out.truth.regime_of_segment.push_back(static_cast<int>(c));
    out.truth.subspace_labels.push_back(labels);
  }
  out.truth.change_points = cps;
  out.truth.length = n;
  return out;
}

SimulatedStream simulate_case(int case_id, double sigma, std::uint64_t seed) {
  switch (case_id) {
    case 1: return gen_case1(sigma, seed);
    case 2: return gen_case2(sigma, seed);
    case 3: return gen_case3(sigma, seed);
    default: throw InputError("case must be 1, 2 or 3");
  }
}

}  // namespace dssl
