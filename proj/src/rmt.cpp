#include "kramers/rmt.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace kramers {

std::string_view to_string(SymmetryClass cls) {
  switch (cls) {
    case SymmetryClass::GOE: return "GOE";
    case SymmetryClass::GUE: return "GUE";
    case SymmetryClass::GSE: return "GSE";
  }
  return "?";
}

SymmetryClass parse_symmetry_class(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "goe") return SymmetryClass::GOE;
  if (lower == "gue") return SymmetryClass::GUE;
  if (lower == "gse") return SymmetryClass::GSE;
  fail(ErrorKind::kInvalidInput, "unknown symmetry class '" + std::string(text) + "'");
}

Real gse_semicircle_radius(int n) { return 4.0 * kCoefficientSigma * std::sqrt(static_cast<Real>(n)); }

Real gue_semicircle_radius(int dim) {
  return 2.0 * kCoefficientSigma * std::sqrt(2.0 * static_cast<Real>(dim));
}

MatrixXr symplectic_unit(int n) {
  MatrixXr y = MatrixXr::Zero(2 * n, 2 * n);
  y.topRightCorner(n, n) = -MatrixXr::Identity(n, n);
  y.bottomLeftCorner(n, n) = MatrixXr::Identity(n, n);
  return y;
}

QuaternionHermitian::QuaternionHermitian(MatrixXc matrix, Real tol) : matrix_(std::move(matrix)) {
  if (matrix_.rows() == 0) fail(ErrorKind::kInvalidDimension, "empty matrix");
  if (!symplectic_check(matrix_, tol)) {
    fail(ErrorKind::kInvalidInput, "matrix is not self-dual Hermitian");
  }
}

Eigen::Matrix2cd QuaternionHermitian::block(int row, int col) const {
  const int n = this->n();
  Eigen::Matrix2cd b;
  b << matrix_(row, col), matrix_(row, n + col), matrix_(n + row, col), matrix_(n + row, n + col);
  return b;
}

std::array<Real, 4> QuaternionHermitian::coefficients(int row, int col) const {
  // h0*1 - i(h1 sx + h2 sy + h3 sz) = [[h0 - i h3, -h2 - i h1], [h2 - i h1, h0 + i h3]]
  const auto b = block(row, col);
  const Real h0 = 0.5 * (b(0, 0) + b(1, 1)).real();
  const Real h3 = 0.5 * (b(1, 1) - b(0, 0)).imag();
  const Real h1 = -0.5 * (b(0, 1) + b(1, 0)).imag();
  const Real h2 = 0.5 * (b(1, 0) - b(0, 1)).real();
  return {h0, h1, h2, h3};
}

QuaternionHermitian sample_gse(int n, RandomStream& rng) {
  if (n < 1) fail(ErrorKind::kInvalidDimension, "quaternion dimension must be >= 1, got " + std::to_string(n));
  const Real s = kCoefficientSigma;
  const Real s_diag = std::sqrt(2.0) * kCoefficientSigma;
  MatrixXc h0 = MatrixXc::Zero(n, n);
  MatrixXc v = MatrixXc::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    h0(i, i) = s_diag * rng.normal();
    for (int j = i + 1; j < n; ++j) {
      const Real c0 = s * rng.normal(), c1 = s * rng.normal();
      const Real c2 = s * rng.normal(), c3 = s * rng.normal();
      h0(i, j) = Complex(c0, -c3);
      h0(j, i) = std::conj(h0(i, j));
      v(i, j) = Complex(-c2, -c1);
      v(j, i) = -v(i, j);
    }
  }
  MatrixXc h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = h0;
  h.topRightCorner(n, n) = v;
  h.bottomLeftCorner(n, n) = -v.conjugate();
  h.bottomRightCorner(n, n) = h0.conjugate();
  return QuaternionHermitian(std::move(h), QuaternionHermitian::Unchecked{});
}

MatrixXc sample_gue(int n, RandomStream& rng) {
  if (n < 1) fail(ErrorKind::kInvalidDimension, "dimension must be >= 1, got " + std::to_string(n));
  MatrixXc h(n, n);
  for (int i = 0; i < n; ++i) {
    h(i, i) = std::sqrt(2.0) * kCoefficientSigma * rng.normal();
    for (int j = i + 1; j < n; ++j) {
      h(i, j) = Complex(kCoefficientSigma * rng.normal(), kCoefficientSigma * rng.normal());
      h(j, i) = std::conj(h(i, j));
    }
  }
  return h;
}

MatrixXr sample_goe(int n, RandomStream& rng) {
  if (n < 1) fail(ErrorKind::kInvalidDimension, "dimension must be >= 1, got " + std::to_string(n));
  MatrixXr h(n, n);
  for (int i = 0; i < n; ++i) {
    h(i, i) = std::sqrt(2.0) * kCoefficientSigma * rng.normal();
    for (int j = i + 1; j < n; ++j) h(i, j) = h(j, i) = kCoefficientSigma * rng.normal();
  }
  return h;
}

HermitianEigen hermitian_eigen(const MatrixXc& h, bool vectors) {
  // The QR sweep occasionally stalls on exactly degenerate (Kramers) pairs;
  // a reordered copy takes a different tridiagonalization path.
  const Eigen::Index n = h.rows();
  const int options = vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
  for (int attempt = 0; attempt < 3; ++attempt) {
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      perm.indices()(i) = static_cast<int>(attempt == 0 ? i : attempt == 1 ? n - 1 - i : (i + n / 3) % n);
    }
    const MatrixXc hp = attempt == 0 ? h : MatrixXc(perm * h * perm.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXc> solver(hp, options);
    if (solver.info() != Eigen::Success) continue;
    HermitianEigen out;
    out.values = solver.eigenvalues();
    if (vectors) out.vectors = attempt == 0 ? solver.eigenvectors() : MatrixXc(perm.transpose() * solver.eigenvectors());
    return out;
  }
  fail(ErrorKind::kNumericalFailure, "Hermitian eigensolver did not converge (dimension " + std::to_string(n) +
                                         ", max |h| " + std::to_string(h.cwiseAbs().maxCoeff()) + ")");
}

std::vector<Real> hermitian_eigenvalues(const MatrixXc& h) {
  const auto ev = hermitian_eigen(h, false).values;
  return {ev.data(), ev.data() + ev.size()};
}

SpectrumSample kramers_collapse(std::vector<Real> raw_levels) {
  if (raw_levels.size() % 2 != 0) {
    fail(ErrorKind::kInvalidShape, "odd number of levels cannot be paired into doublets");
  }
  std::sort(raw_levels.begin(), raw_levels.end());
  SpectrumSample out;
  out.collapsed_levels.reserve(raw_levels.size() / 2);
  for (std::size_t i = 0; i + 1 < raw_levels.size(); i += 2) {
    out.collapsed_levels.push_back(0.5 * (raw_levels[i] + raw_levels[i + 1]));
    out.max_splitting = std::max(out.max_splitting, raw_levels[i + 1] - raw_levels[i]);
  }
  out.raw_levels = std::move(raw_levels);
  return out;
}

SpectrumSample eigen_kramers(const QuaternionHermitian& h) {
  auto out = kramers_collapse(hermitian_eigenvalues(h.matrix()));
  out.label.ensemble = "GSE";
  return out;
}

SpectrumSample eigen_kramers(const MatrixXc& h) {
  if (h.rows() != h.cols() || h.rows() % 2 != 0) {
    fail(ErrorKind::kInvalidShape, "eigen_kramers needs an even square matrix");
  }
  return kramers_collapse(hermitian_eigenvalues(h));
}

Real semicircle_cdf(Real energy, Real radius) {
  const Real t = std::clamp(energy / radius, -1.0, 1.0);
  return 0.5 + (t * std::sqrt(1.0 - t * t) + std::asin(t)) / kPi;
}

std::vector<Real> unfold_semicircle(const std::vector<Real>& levels, Real radius, Real window_fraction) {
  if (!(radius > 0.0)) fail(ErrorKind::kInvalidInput, "semicircle radius must be positive");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
    fail(ErrorKind::kInvalidInput, "window fraction must lie in (0, 1]");
  }
  const Real count = static_cast<Real>(levels.size());
  const Real lo = 0.5 - 0.5 * window_fraction;
  const Real hi = 0.5 + 0.5 * window_fraction;
  std::vector<Real> out;
  for (Real e : levels) {
    const Real f = semicircle_cdf(e, radius);
    if (f >= lo && f <= hi) out.push_back(count * f);
  }
  return out;
}

}  // namespace kramers
