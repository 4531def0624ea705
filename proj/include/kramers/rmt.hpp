#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "kramers/errors.hpp"
#include "kramers/rng.hpp"
#include "kramers/types.hpp"

namespace kramers {

/// Standard deviation of every independent off-diagonal quaternion
/// coefficient. Diagonal coefficients use sqrt(2) times this value, so the
/// GSE semicircle has radius 4*sigma*sqrt(n) and an n x n GUE sample has
/// radius 2*sigma*sqrt(2n).
inline constexpr Real kCoefficientSigma = 1.0;

Real gse_semicircle_radius(int n);
Real gue_semicircle_radius(int dim);

/// The time-reversal block matrix [[0, -1], [1, 0]] of size 2n.
MatrixXr symplectic_unit(int n);

/// Self-dual Hermitian matrix of quaternion dimension n, stored as a 2n x 2n
/// complex matrix in the basis (|1>..|n>, T|1>..T|n>):
///
///     H = [[H0, V], [-conj(V), conj(H0)]],  H0 = H0^dagger,  V = -V^T.
class QuaternionHermitian {
 public:
  /// Validates the symplectic structure at tolerance `tol`.
  explicit QuaternionHermitian(MatrixXc matrix, Real tol = 1e-12);

  int n() const { return static_cast<int>(matrix_.rows() / 2); }
  const MatrixXc& matrix() const { return matrix_; }

  /// 2x2 block (m, n) in the interleaved basis (|1>, T|1>, ..., |n>, T|n>).
  Eigen::Matrix2cd block(int row, int col) const;

  /// Real coefficients (h0, h1, h2, h3) of block(row, col) = h0*1 + h.tau,
  /// tau = -i*sigma.
  std::array<Real, 4> coefficients(int row, int col) const;

 private:
  struct Unchecked {};
  QuaternionHermitian(MatrixXc matrix, Unchecked) : matrix_(std::move(matrix)) {}
  friend QuaternionHermitian sample_gse(int n, RandomStream& rng);

  MatrixXc matrix_;
};

QuaternionHermitian sample_gse(int n, RandomStream& rng);

/// n x n GUE matrix with the same coefficient convention as sample_gse:
/// off-diagonal real and imaginary parts have sigma, diagonal sqrt(2) sigma.
MatrixXc sample_gue(int n, RandomStream& rng);

/// Real symmetric GOE reference sample (off-diagonal sigma, diagonal sqrt(2) sigma).
MatrixXr sample_goe(int n, RandomStream& rng);

/// True iff H is Hermitian and equals Y H^T Y^T, both to `tol` in max-norm.
template <typename Derived>
bool symplectic_check(const Eigen::MatrixBase<Derived>& h, Real tol) {
  if (h.rows() != h.cols() || h.rows() % 2 != 0) {
    fail(ErrorKind::kInvalidShape, "symplectic_check needs an even square matrix, got " +
                                       std::to_string(h.rows()) + "x" + std::to_string(h.cols()));
  }
  const MatrixXc m = h.template cast<Complex>();
  const MatrixXr y = symplectic_unit(static_cast<int>(m.rows() / 2));
  const MatrixXc dual = y * m.transpose() * y.transpose();
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol && (m - dual).cwiseAbs().maxCoeff() <= tol;
}

struct SpectrumLabel {
  std::string ensemble;
  std::uint64_t realization = 0;
  std::uint64_t seed = 0;
};

struct SpectrumSample {
  std::vector<Real> raw_levels;        // ascending, with multiplicity
  std::vector<Real> collapsed_levels;  // one per Kramers doublet
  std::vector<Real> unfolded;          // unit mean spacing on the analysis window
  Real max_splitting = 0.0;            // largest intra-doublet gap
  SpectrumLabel label;
};

struct HermitianEigen {
  Eigen::VectorXd values;  // ascending
  MatrixXc vectors;        // columns, empty unless requested
};

/// Hermitian eigendecomposition with retries on reordered copies; throws
/// numerical-failure if every attempt fails.
HermitianEigen hermitian_eigen(const MatrixXc& h, bool vectors = true);

/// Ascending eigenvalues of a Hermitian matrix; throws on solver failure.
std::vector<Real> hermitian_eigenvalues(const MatrixXc& h);

/// Pairs consecutive levels into doublets (mean of each pair) and records the
/// largest intra-pair splitting. Needs an even number of ascending levels.
SpectrumSample kramers_collapse(std::vector<Real> raw_levels);

SpectrumSample eigen_kramers(const QuaternionHermitian& h);

/// Even-dimensional plain Hermitian input, e.g. a GUE reference sample.
SpectrumSample eigen_kramers(const MatrixXc& h);

/// Fraction of a semicircle of the given radius lying below `energy`.
Real semicircle_cdf(Real energy, Real radius);

/// Unfolds ascending levels with the integrated semicircle law and keeps the
/// central `window_fraction` of the spectrum.
std::vector<Real> unfold_semicircle(const std::vector<Real>& levels, Real radius,
                                    Real window_fraction = 0.5);

}  // namespace kramers
