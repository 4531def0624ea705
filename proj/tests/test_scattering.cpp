#include <doctest.h>

#include <cmath>

#include "kramers/analytic.hpp"
#include "kramers/scattering.hpp"
#include "kramers/stats.hpp"

using namespace kramers;
using namespace kramers::scattering;

namespace {

EnsembleConfig small_config(SymmetryClass cls = SymmetryClass::GSE) {
  EnsembleConfig c;
  c.coupling.n = 40;
  c.coupling.lambda = 15;
  c.coupling.symmetry = cls;
  c.realizations = 60;
  c.energies = 10;
  c.seed = 17;
  return c;
}

}  // namespace

TEST_SUITE("scattering") {

TEST_CASE("transmission coefficient") {
  const Real d = 0.37;
  CHECK(transmission(0.0, d) == 0.0);
  CHECK(transmission(std::sqrt(d) / kPi, d) == doctest::Approx(1.0).epsilon(1e-15));
  for (Real t : {0.25, 0.5, 0.95}) {
    const Real w = inverse_transmission(t, d);
    CHECK(std::abs(transmission(w, d) - t) <= 1e-12);
    CHECK(kPi * kPi * w * w / d <= 1.0);
  }
  CHECK(kPi * kPi * std::pow(inverse_transmission(1.0, d), 2) / d == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(inverse_transmission(1e-10, d) < 1e-5);
  CHECK_THROWS_AS(inverse_transmission(0.0, d), Error);
  CHECK_THROWS_AS(inverse_transmission(1.5, d), Error);
}

TEST_CASE("coupling columns are orthogonal and carry the target weights") {
  CouplingSpec spec;
  spec.n = 30;
  spec.lambda = 8;
  spec.open_transmissions = {0.95};
  spec.fictitious_transmission = 0.4;
  const Real d = 0.21;
  RandomStream rng(3, 0);
  const auto c = build_coupling(spec, d, rng);
  REQUIRE(c.w.cols() == 2 * (spec.lambda + 1));
  const MatrixXc gram = c.w.adjoint() * c.w;
  const Real biggest = gram.diagonal().real().maxCoeff();
  MatrixXc off = gram;
  off.diagonal().setZero();
  CHECK(off.cwiseAbs().maxCoeff() <= 1e-10 * biggest);

  const auto weights = coupling_weights(c);
  REQUIRE(weights.size() == static_cast<std::size_t>(spec.lambda + 1));
  const Real w_open = inverse_transmission(0.95, d), w_f = inverse_transmission(0.4, d);
  CHECK(std::abs(weights[0] - w_open * w_open) <= 1e-10 * w_open * w_open);
  for (std::size_t i = 1; i < weights.size(); ++i) CHECK(std::abs(weights[i] - w_f * w_f) <= 1e-10 * w_f * w_f);

  spec.lambda = 0;
  RandomStream rng2(3, 1);
  CHECK(build_coupling(spec, d, rng2).w.cols() == 2);
}

TEST_CASE("coupling spec validation") {
  CouplingSpec spec;
  spec.n = 10;
  spec.lambda = 9;
  CHECK_THROWS_AS(spec.validate(), Error);  // Lambda + 1 < N
  spec.lambda = 3;
  spec.fictitious_transmission = 1.2;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.fictitious_transmission = 0.5;
  spec.symmetry = SymmetryClass::GOE;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.symmetry = SymmetryClass::GSE;
  CHECK_NOTHROW(spec.validate());
  CHECK(spec.tau_abs() == doctest::Approx(3.0));
}

TEST_CASE("Heidelberg S matrix basics") {
  RandomStream rng(5, 0);
  const auto h = sample_gse(20, rng);
  CHECK((heidelberg_smatrix(h.matrix(), MatrixXc::Zero(40, 2), 0.3) - MatrixXc::Identity(2, 2)).cwiseAbs().maxCoeff() ==
        0.0);

  CouplingSpec spec;
  spec.n = 20;
  spec.lambda = 0;
  const Real d = central_mean_spacing(hermitian_eigenvalues(h.matrix()));
  const auto c = build_coupling(spec, d, rng);
  for (Real e : {-1.0, 0.0, 0.7}) {
    const auto s = heidelberg_smatrix(h, c, e);
    CHECK((s.adjoint() * s - MatrixXc::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(std::abs(s(0, 1)) <= 1e-8);
    CHECK(std::abs(s(0, 0) - s(1, 1)) <= 1e-8);
  }

  spec.lambda = 5;
  spec.fictitious_transmission = 0.6;
  const auto absorbing = build_coupling(spec, d, rng);
  const auto s = heidelberg_smatrix(h, absorbing, 0.1);
  CHECK(std::abs(s(0, 1)) <= 1e-8);
  CHECK(std::abs(s(0, 0) - s(1, 1)) <= 1e-8);
  CHECK(std::norm(s(0, 0)) <= 1.0);
}

TEST_CASE("K matrix of a scalar S") {
  const auto one = k_matrix(1.0);
  CHECK(std::abs(one.k) == 0.0);
  const auto zero = k_matrix(0.0);
  CHECK(zero.u == doctest::Approx(0.0));
  CHECK(zero.v == doctest::Approx(1.0));
  CHECK(zero.x == doctest::Approx(1.0));
  const auto lossless = k_matrix(Complex(0.0, 1.0));
  CHECK(lossless.u == doctest::Approx(-1.0));
  CHECK(std::abs(lossless.v) < 1e-15);
  CHECK(std::isinf(lossless.x));
  CHECK_THROWS_AS(k_matrix(-1.0), Error);
  // x = (1 + R)/(1 - R)
  const Complex s(0.3, -0.2);
  const Real r = std::norm(s);
  CHECK(k_matrix(s).x == doctest::Approx((1 + r) / (1 - r)).epsilon(1e-12));
}

TEST_CASE("band-centre spacing of a semicircle spectrum") {
  // Levels at the quantiles of a semicircle of radius 2: density n * 2/(pi R^2) sqrt(R^2 - e^2) at 0.
  const int m = 4000;
  std::vector<Real> levels;
  for (int i = 0; i < m; ++i) {
    const Real target = (i + 0.5) / m;
    Real lo = -2.0, hi = 2.0;
    for (int it = 0; it < 80; ++it) {
      const Real mid = 0.5 * (lo + hi);
      (semicircle_cdf(mid, 2.0) < target ? lo : hi) = mid;
    }
    levels.push_back(0.5 * (lo + hi));
  }
  CHECK(central_mean_spacing(levels) == doctest::Approx(kPi * 2.0 / (2.0 * m)).epsilon(1e-3));
}

TEST_CASE("lossless ensemble: every record has R = 1") {
  auto config = small_config();
  config.coupling.fictitious_transmission = 0.0;
  const auto ens = run_ensemble(config);
  CHECK(ens.records.size() == static_cast<std::size_t>(config.realizations * config.energies) - ens.diagnostics.failures);
  for (const auto& r : ens.records) CHECK(std::abs(r.reflection - 1.0) <= 1e-10);
}

TEST_CASE("records are self-consistent") {
  auto config = small_config();
  config.coupling.fictitious_transmission = 0.5;
  const auto ens = run_ensemble(config);
  CHECK(ens.diagnostics.failures == 0);
  CHECK(ens.diagnostics.max_kramers_mismatch <= 1e-8);
  CHECK(ens.diagnostics.max_cross_element <= 1e-8);
  for (const auto& r : ens.records) {
    CHECK(r.reflection >= 0.0);
    CHECK(r.reflection <= 1.0);
    CHECK(r.v > 0.0);
    CHECK(r.x >= 1.0);
    CHECK(std::abs(r.x - (1.0 + r.reflection) / (1.0 - r.reflection)) <= 1e-10 * r.x);
  }
}

TEST_CASE("cache reduction matches the direct S matrix") {
  auto config = small_config();
  config.coupling.open_transmissions = {0.9};
  config.coupling.fictitious_transmission = 0.35;
  config.coupling.open_scale = 1.03;
  config.realizations = 3;
  const EnsembleCache cache(config);
  const auto ens = cache.evaluate(0.35, 1.03);
  const auto& spec = config.coupling;
  for (int r = 0; r < config.realizations; ++r) {
    const auto model = realization_model(config, r);
    MatrixXc w = model.columns;
    const Real scale = std::sqrt(2.0 * kPi * spec.dimension());
    w.leftCols(2) *= scale * 1.03 * inverse_transmission(0.9, model.d);
    w.rightCols(w.cols() - 2) *= scale * inverse_transmission(0.35, model.d);
    const MatrixXc h = model.levels.cast<Complex>().asDiagonal();
    for (const auto& rec : ens.records) {
      if (rec.realization != r) continue;
      const auto s = heidelberg_smatrix(h, w, rec.e);
      CHECK(std::abs(s(0, 0) - rec.s) <= 1e-10);
    }
  }
}

TEST_CASE("eigenbasis sampling agrees in distribution with full matrices") {
  // Full GSE Hamiltonians and coupling from an auxiliary sample, e = 0.
  EnsembleConfig config;
  config.coupling.n = 20;
  config.coupling.lambda = 5;
  config.coupling.fictitious_transmission = 0.3;
  config.realizations = 1500;
  config.energies = 1;
  config.seed = 23;
  const auto fast = run_ensemble(config).column(&ScatterRecord::reflection);

  std::vector<Real> direct;
  for (int r = 0; r < config.realizations; ++r) {
    RandomStream rng(99, r);
    const auto h = sample_gse(config.coupling.n, rng);
    const Real d = central_mean_spacing(hermitian_eigenvalues(h.matrix()));
    RandomStream crng = rng.split(1);
    const auto c = build_coupling(config.coupling, d, crng);
    direct.push_back(std::norm(heidelberg_smatrix(h, c, 0.0)(0, 0)));
  }
  CHECK(stats::ks_two_sample(fast, direct) < 0.08);
}

TEST_CASE("results do not depend on the worker count") {
  auto config = small_config();
  config.coupling.fictitious_transmission = 0.4;
  const auto a = run_ensemble(config);
  config.workers = 3;
  const auto b = run_ensemble(config);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i].s == b.records[i].s);
}

TEST_CASE("calibration") {
  const EnsembleCache cache(small_config());
  const auto c57 = calibrate_tau_abs(5.7, cache);
  const auto c128 = calibrate_tau_abs(12.8, cache);
  CHECK(c128.tau_abs > c57.tau_abs);
  CHECK(std::abs(c57.achieved_mean - analytic::mean_reflection({5.7, SymmetryClass::GSE})) < 0.01);
  CHECK(std::abs(c57.achieved_mean_s.real()) <= 1e-4);
  CHECK(c57.lambda == 15);
  CHECK(c57.tau_abs == doctest::Approx(2.0 * 15 * c57.fictitious_transmission));

  const auto weak = calibrate_tau_abs(0.05, cache);
  CHECK(weak.tau_abs < 0.2 * c57.tau_abs);

  auto config = small_config();
  const auto ens = cache.evaluate(c57.fictitious_transmission, c57.open_scale);
  c57.apply(config);
  CHECK(config.coupling.fictitious_transmission == c57.fictitious_transmission);
  CHECK(ens.mean_reflection() == doctest::Approx(c57.achieved_mean).epsilon(1e-12));

  CHECK_THROWS_AS(calibrate_tau_abs(0.0, cache), Error);
  try {
    calibrate_tau_abs(200.0, cache);
    FAIL("expected a calibration failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kCalibrationFailure);
  }
}

TEST_CASE("autocorrelation") {
  auto config = small_config();
  config.coupling.fictitious_transmission = 0.5;
  config.energies = 20;
  const auto ens = run_ensemble(config);
  const auto c = autocorrelation(ens, {0, 1, 2, 5, 10});
  CHECK(c.value[0] == Complex(1.0, 0.0));
  CHECK(c.modulus_error[0] == 0.0);
  for (std::size_t i = 1; i < c.lags.size(); ++i) {
    CHECK(c.modulus[i] <= 1.0 + 3.0 * c.modulus_error[i] + 1e-12);
    CHECK(c.epsilon[i] > c.epsilon[i - 1]);
  }
  CHECK(c.modulus[1] > c.modulus[4]);
  CHECK_THROWS_AS(autocorrelation(ens, {25}), Error);

  config.coupling.fictitious_transmission = 0.0;
  config.coupling.lambda = 0;
  config.energies = 2;
  config.realizations = 1;
  config.coupling.n = 2;
  config.coupling.open_transmissions = {1e-12};
  auto flat = run_ensemble(config);
  for (auto& r : flat.records) r.s = 1.0;
  CHECK_THROWS_AS(autocorrelation(flat, {0, 1}), Error);
}

}  // TEST_SUITE
