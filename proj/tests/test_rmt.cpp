#include <doctest.h>

#include <cmath>

#include "kramers/rmt.hpp"
#include "kramers/stats.hpp"

using namespace kramers;

TEST_SUITE("rmt") {

TEST_CASE("n = 1 GSE sample is a real scalar times the 2x2 identity") {
  RandomStream rng(5, 0);
  const auto h = sample_gse(1, rng);
  const MatrixXc& m = h.matrix();
  CHECK(m(0, 1) == Complex(0.0));
  CHECK(m(1, 0) == Complex(0.0));
  CHECK(m(0, 0) == m(1, 1));
  CHECK(m(0, 0).imag() == 0.0);
  const auto s = eigen_kramers(h);
  REQUIRE(s.raw_levels.size() == 2);
  CHECK(s.raw_levels[0] == s.raw_levels[1]);
  CHECK(s.max_splitting == 0.0);
}

TEST_CASE("samples pass the symplectic check") {
  for (int r = 0; r < 20; ++r) {
    RandomStream rng(11, r);
    const auto h = sample_gse(1 + r, rng);
    CHECK(symplectic_check(h.matrix(), 1e-12));
  }
}

TEST_CASE("symplectic check rejects GUE samples and broken V") {
  RandomStream rng(2, 0);
  CHECK_FALSE(symplectic_check(sample_gue(20, rng), 1e-12));

  const auto h = sample_gse(6, rng);
  MatrixXc m = h.matrix();
  // V is the upper-right block; nudge one entry so V != -V^T, keeping H Hermitian.
  m(0, 6 + 2) += 0.1;
  m(6 + 2, 0) = std::conj(m(0, 6 + 2));
  CHECK_FALSE(symplectic_check(m, 1e-12));
  CHECK_THROWS_AS(QuaternionHermitian{m}, Error);
  CHECK_THROWS_AS(symplectic_check(MatrixXc::Zero(3, 3), 1e-12), Error);
}

TEST_CASE("quaternion coefficient variances follow the convention") {
  // Off-diagonal coefficients have sigma, diagonal scalars sqrt(2) sigma.
  Real off = 0.0, diag = 0.0, diag_vec = 0.0;
  long n_off = 0, n_diag = 0;
  for (int r = 0; r < 200; ++r) {
    RandomStream rng(3, r);
    const auto h = sample_gse(10, rng);
    for (int i = 0; i < 10; ++i) {
      const auto c = h.coefficients(i, i);
      diag += c[0] * c[0];
      diag_vec += c[1] * c[1] + c[2] * c[2] + c[3] * c[3];
      ++n_diag;
      for (int j = i + 1; j < 10; ++j) {
        for (Real x : h.coefficients(i, j)) off += x * x;
        n_off += 4;
      }
    }
  }
  CHECK(std::sqrt(off / n_off) == doctest::Approx(kCoefficientSigma).epsilon(0.02));
  CHECK(std::sqrt(diag / n_diag) == doctest::Approx(std::sqrt(2.0) * kCoefficientSigma).epsilon(0.05));
  CHECK(diag_vec < 1e-20);
}

TEST_CASE("GUE samples are exactly Hermitian; n = 1 is real") {
  RandomStream rng(4, 0);
  const auto one = sample_gue(1, rng);
  CHECK(one(0, 0).imag() == 0.0);
  for (int r = 0; r < 5; ++r) {
    const auto h = sample_gue(30, rng);
    CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("Kramers doublets are degenerate to round-off up to n = 200") {
  for (int n : {2, 50, 200}) {
    RandomStream rng(8, n);
    const auto s = eigen_kramers(sample_gse(n, rng));
    CHECK(s.collapsed_levels.size() == static_cast<std::size_t>(n));
    CHECK(s.max_splitting <= 1e-10 * gse_semicircle_radius(n));
  }
}

TEST_CASE("plain GUE spectra have no doublets") {
  RandomStream rng(9, 0);
  const auto h = sample_gue(40, rng);
  const auto levels = hermitian_eigenvalues(h);
  Real smallest = 1e300;
  for (std::size_t i = 0; i + 1 < levels.size(); i += 2) smallest = std::min(smallest, levels[i + 1] - levels[i]);
  CHECK(smallest > 1e-6);
}

TEST_CASE("spectral edge sits at the semicircle radius") {
  RandomStream rng(12, 0);
  const int n = 150;
  const auto s = eigen_kramers(sample_gse(n, rng));
  const Real radius = gse_semicircle_radius(n);
  CHECK(s.raw_levels.back() == doctest::Approx(radius).epsilon(0.05));
  CHECK(-s.raw_levels.front() == doctest::Approx(radius).epsilon(0.05));

  const auto g = hermitian_eigenvalues(sample_gue(2 * n, rng));
  CHECK(g.back() == doctest::Approx(gue_semicircle_radius(2 * n)).epsilon(0.05));
}

TEST_CASE("semicircle unfolding gives unit mean spacing on the central half") {
  Real total = 0.0;
  std::size_t count = 0;
  for (int r = 0; r < 40; ++r) {
    RandomStream rng(21, r);
    const auto s = eigen_kramers(sample_gse(100, rng));
    const auto u = unfold_semicircle(s.collapsed_levels, gse_semicircle_radius(100));
    total += u.back() - u.front();
    count += u.size() - 1;
  }
  CHECK(total / count == doctest::Approx(1.0).epsilon(0.01));
  CHECK(semicircle_cdf(0.0, 2.0) == doctest::Approx(0.5));
  CHECK(semicircle_cdf(-3.0, 2.0) == 0.0);
  CHECK(semicircle_cdf(3.0, 2.0) == 1.0);
}

namespace {

std::vector<std::vector<Real>> unfolded_spectra(SymmetryClass cls, int n, int count, std::uint64_t seed) {
  std::vector<std::vector<Real>> out;
  for (int r = 0; r < count; ++r) {
    RandomStream rng(seed, r);
    if (cls == SymmetryClass::GSE) {
      const auto s = eigen_kramers(sample_gse(n, rng));
      out.push_back(unfold_semicircle(s.collapsed_levels, gse_semicircle_radius(n)));
    } else {
      out.push_back(unfold_semicircle(hermitian_eigenvalues(sample_gue(n, rng)), gue_semicircle_radius(n)));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("n = 50 spacing distributions match their surmises") {
  for (auto cls : {SymmetryClass::GSE, SymmetryClass::GUE}) {
    CAPTURE(to_string(cls));
    const auto result = stats::nnsd(unfolded_spectra(cls, 50, 500, 31));
    const stats::ReferenceCdf surmise([cls](Real s) { return stats::surmise_density(cls, s); }, 0.0,
                                      std::numeric_limits<Real>::infinity());
    CHECK(stats::ks_distance(result.spacings, surmise) < 0.05);
  }
}

TEST_CASE("streams are reproducible and independent") {
  RandomStream a(1, 7), b(1, 7), c(1, 8);
  const Real x = a.normal();
  CHECK(x == b.normal());
  CHECK(x != c.normal());
  RandomStream d(1, 7);
  CHECK(d.split(1).normal() != x);
  CHECK(parse_symmetry_class("gse") == SymmetryClass::GSE);
  CHECK_THROWS_AS(parse_symmetry_class("xyz"), Error);
  CHECK_THROWS_AS(kramers_collapse({1.0, 2.0, 3.0}), Error);
}

}  // TEST_SUITE
