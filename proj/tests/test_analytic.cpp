#include <doctest.h>

#include <cmath>

#include "kramers/analytic.hpp"
#include "kramers/quadrature.hpp"
#include "kramers/stats.hpp"

using namespace kramers;
using namespace kramers::analytic;

namespace {

const AbsorptionParams kGse57{5.7, SymmetryClass::GSE};
const AbsorptionParams kGse128{12.8, SymmetryClass::GSE};
const AbsorptionParams kGue57{5.7, SymmetryClass::GUE};

bool close(Real a, Real b, Real rel) { return std::abs(a - b) <= rel * std::abs(b); }

}  // namespace

TEST_SUITE("analytic") {

// Reference values: tests/oracles/analytic_oracle.py (mpmath, 40 digits).

TEST_CASE("hyperbolic sine integral") {
  CHECK(shi(0.0) == 0.0);
  const Real g = 1e-3;
  CHECK(std::abs(shi(g) - (g + g * g * g / 18.0)) <= 1e-14 * g);
  CHECK(close(shi(1.0), 1.0572508753757285, 1e-12));
  CHECK(close(shi(0.5), 0.5069967498196672, 1e-12));
  CHECK(close(scaled_shi(12.8), 0.042767720725669519, 1e-11));
  CHECK(close(scaled_shi(50.0), 0.010208522777971994, 1e-11));
  CHECK(close(std::exp(-12.8) * shi(12.8), scaled_shi(12.8), 1e-12));
  CHECK_THROWS_AS(shi(-1.0), Error);
}

TEST_CASE("P0 against arbitrary-precision values") {
  CHECK(close(p0_x(1.0, {1.0, SymmetryClass::GSE}), 0.17872678040706513, 1e-11));
  CHECK(close(p0_x(1.0, kGse57), 4.5502654803655704, 1e-11));
  CHECK(close(p0_x(1.0, kGse128), 11.752573174715241, 1e-10));
  CHECK(close(p0_x(2.0, kGse57), 0.041174686230785263, 1e-10));
  CHECK(close(p0_x(1.3, kGue57), 1.1813272294888742, 1e-12));

  // At x = 1, C = -gamma: P0(1) = [2g(e^{2g} - 1) + 1 + 2g - e^{2g}] e^{-2g}/2 - g e^{-g} Shi(g).
  const Real g = 1.0;
  const Real reduced = 0.5 * (2 * g * (std::exp(2 * g) - 1) + 1 + 2 * g - std::exp(2 * g)) * std::exp(-2 * g) -
                       g * std::exp(-g) * shi(g);
  CHECK(close(p0_x(1.0, {g, SymmetryClass::GSE}), reduced, 1e-13));

  bool outside = false;
  CHECK(p0_x(0.5, kGse57, outside) == 0.0);
  CHECK(outside);
  CHECK_THROWS_AS(p0_x(2.0, {0.0, SymmetryClass::GSE}), Error);
  CHECK_THROWS_AS(p0_x(2.0, {1.0, SymmetryClass::GOE}), Error);
}

TEST_CASE("derived densities against arbitrary-precision values") {
  CHECK(close(p_reflection(0.1, kGse57), 4.1421157504295374, 1e-10));
  CHECK(close(p_imK(0.5, kGse57), 0.77111528864269695, 1e-9));
  CHECK(close(p_imK(2.0, kGse128), 0.025347719949984283, 1e-9));
  CHECK(close(p_reK(0.5, kGse57), 0.4523429076866291, 1e-9));
  CHECK(close(p_reK(0.5, kGue57), 0.44535206616263942, 1e-9));
  CHECK(p_amplitude(0.4, kGse57) == doctest::Approx(0.8 * p_reflection(0.16, kGse57)).epsilon(1e-14));
}

TEST_CASE("moments against arbitrary-precision values") {
  CHECK(close(mean_reflection({1.0, SymmetryClass::GSE}), 0.45783230234634928, 1e-9));
  CHECK(close(mean_reflection(kGse57), 0.089699344365720641, 1e-9));
  CHECK(close(mean_reflection(kGse128), 0.039197078741917646, 1e-9));
  CHECK(close(mean_reflection({1.0, SymmetryClass::GUE}), 0.52545893470359585, 1e-9));
  CHECK(close(mean_reflection(kGue57), 0.1519266688703736, 1e-9));
  CHECK(close(mean_reflection({12.8, SymmetryClass::GUE}), 0.072802601780564506, 1e-9));
  CHECK(close(mean_amplitude(kGse57), 0.27131294936189865, 1e-9));
}

TEST_CASE("normalizations") {
  for (Real g : {1.0, 5.7, 12.8}) {
    for (auto cls : {SymmetryClass::GSE, SymmetryClass::GUE}) {
      const AbsorptionParams p{g, cls};
      CAPTURE(g);
      CHECK(std::abs(normalization(Variable::kX, p) - 1.0) <= 1e-6);
      CHECK(std::abs(normalization(Variable::kReflection, p) - 1.0) <= 1e-6);
      CHECK(std::abs(normalization(Variable::kAmplitude, p) - 1.0) <= 1e-6);
      CHECK(std::abs(normalization(Variable::kImK, p) - 1.0) <= 1e-4);
      CHECK(std::abs(normalization(Variable::kReK, p) - 1.0) <= 1e-4);
    }
  }
}

TEST_CASE("P0 is non-negative until it underflows") {
  for (Real g : {0.5, 5.7, 12.8}) {
    const AbsorptionParams p{g, SymmetryClass::GSE};
    Real x = 1.0;
    int checked = 0;
    while (true) {
      const Real v = p0_x(x, p);
      CHECK(v >= 0.0);
      ++checked;
      if (v < 1e-30) break;
      x += 0.01;
    }
    CHECK(checked > 10);
  }
}

TEST_CASE("reciprocal symmetry of P(v) and evenness of P(u)") {
  for (const auto& p : {kGse57, kGse128, kGue57}) {
    for (Real v : {0.2, 0.5, 2.0, 5.0}) {
      CHECK(close(p_imK(1.0 / v, p), v * v * v * p_imK(v, p), 1e-8));
    }
    for (Real u : {0.5, 1.0, 3.0}) CHECK(std::abs(p_reK(u, p) - p_reK(-u, p)) <= 1e-12);
  }
}

TEST_CASE("mean reflection falls with absorption") {
  CHECK(mean_reflection({1e-3, SymmetryClass::GSE}) == doctest::Approx(1.0).epsilon(0.01));
  Real last = 1.0;
  for (Real g : {1.0, 2.0, 5.7, 12.8, 50.0}) {
    const Real m = mean_reflection({g, SymmetryClass::GSE});
    CHECK(m < last);
    last = m;
  }
  CHECK(mean_reflection(kGue57) > 1.5 * mean_reflection(kGse57));
}

TEST_CASE("GSE and GUE curves are distinguishable at gamma = 5.7") {
  Real sup = 0.0;
  for (Real v = 0.05; v < 5.0; v += 0.05) sup = std::max(sup, std::abs(p_imK(v, kGse57) - p_imK(v, kGue57)));
  CHECK(sup > 1e-6);
  CHECK(sup > 0.05);
}

TEST_CASE("Ericson limits") {
  CHECK(ericson_density(EricsonVariable::kReflection, 0.0) == 1.0);
  for (auto ev : {EricsonVariable::kReflection, EricsonVariable::kAmplitude}) {
    auto f = [ev](Real x) { return ericson_density(ev, x); };
    auto xf = [ev](Real x) { return x * ericson_density(ev, x); };
    CHECK(std::abs(quadrature::integrate_to_infinity(f, 0.0).value - 1.0) <= 1e-10);
    CHECK(std::abs(quadrature::integrate_to_infinity(xf, 0.0).value - 1.0) <= 1e-10);
  }
  // Rescaled P(R) at gamma = 50 against exp(-R~).
  const AbsorptionParams strong{50.0, SymmetryClass::GSE};
  const Real hi = analytic::support(Variable::kScaledReflection, strong).second;
  Real worst = 0.0;
  for (Real x = 0.0; x < std::min(hi, 12.0); x += 0.05) {
    worst = std::max(worst, std::abs(cdf(Variable::kScaledReflection, x, strong) - (1.0 - std::exp(-x))));
  }
  CHECK(worst < 0.01);
}

TEST_CASE("inverse-CDF samples of R map onto P0") {
  ReflectionSampler sampler(kGse57);
  RandomStream rng(41, 0);
  const auto r = sampler.sample(rng, 1000000);
  std::vector<Real> x;
  x.reserve(r.size());
  for (Real v : r) x.push_back((1.0 + v) / (1.0 - v));
  const stats::ReferenceCdf ref([](Real t) { return p0_x(t, kGse57); }, 1.0, std::numeric_limits<Real>::infinity());
  CHECK(stats::ks_distance(x, ref) < 0.01);
  CHECK(sampler.cdf(0.0) == 0.0);
  CHECK(sampler.cdf(1.0) == doctest::Approx(1.0));
}

TEST_CASE("tabulated curves carry their normalization") {
  const std::vector<Real> grid = {-2.0, 0.0, 2.0};
  const auto curve = tabulate(Variable::kReK, kGse57, grid);
  REQUIRE(curve.density.size() == 3);
  CHECK(curve.density[0] == doctest::Approx(curve.density[2]));
  CHECK(curve.normalization == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(parse_variable("R_tilde") == Variable::kScaledReflection);
  CHECK_THROWS_AS(parse_variable("w"), Error);
}

TEST_CASE("gamma fits recover the generating value") {
  for (const auto& [g, tol] : {std::pair{5.7, 0.1}, std::pair{12.8, 0.2}}) {
    ReflectionSampler sampler({g, SymmetryClass::GSE});
    RandomStream rng(7, static_cast<std::uint64_t>(g * 10));
    const auto samples = sampler.sample(rng, 100000);
    const auto fit = fit_gamma(samples, SymmetryClass::GSE);
    CAPTURE(g);
    CHECK(std::abs(fit.gamma - g) <= tol);
    CHECK(fit.stderr_bootstrap > 0.0);
    CHECK(fit.stderr_bootstrap < tol);

    FitOptions curve;
    curve.method = FitMethod::kCurveL2;
    curve.bootstrap = 20;
    CHECK(std::abs(fit_gamma(samples, SymmetryClass::GSE, curve).gamma - g) <= tol);

    std::vector<Real> amplitudes;
    for (Real r : samples) amplitudes.push_back(std::sqrt(r));
    FitOptions amp;
    amp.variable = FitVariable::kAmplitude;
    amp.bootstrap = 20;
    CHECK(std::abs(fit_gamma(amplitudes, SymmetryClass::GSE, amp).gamma - g) <= tol);
  }
}

TEST_CASE("fit error shrinks with sample count") {
  ReflectionSampler sampler(kGse57);
  Real last = 1e9;
  for (std::size_t n : {1000u, 10000u, 100000u}) {
    RandomStream rng(8, n);
    FitOptions opt;
    opt.bootstrap = 100;
    const auto fit = fit_gamma(sampler.sample(rng, n), SymmetryClass::GSE, opt);
    CHECK(fit.stderr_bootstrap < last);
    CHECK(std::abs(fit.gamma - 5.7) < 5.0 * fit.stderr_bootstrap + 1e-3);
    last = fit.stderr_bootstrap;
  }
}

TEST_CASE("degenerate fit input") {
  const std::vector<Real> flat(5000, 0.1);
  try {
    fit_gamma(flat, SymmetryClass::GSE);
    FAIL("expected a fit failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kFitFailure);
  }
  CHECK_THROWS_AS(fit_gamma({0.1, 0.2}, SymmetryClass::GSE), Error);
  CHECK(gamma_from_mean(mean_reflection(kGse57), SymmetryClass::GSE) == doctest::Approx(5.7).epsilon(1e-6));
}

}  // TEST_SUITE
