#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "kramers/errors.hpp"
#include "kramers/rng.hpp"
#include "kramers/types.hpp"

namespace kramers::analytic {

/// Loss strength of a single-channel system with uniform absorption.
struct AbsorptionParams {
  Real gamma = 1.0;
  SymmetryClass symmetry = SymmetryClass::GSE;
};

/// Hyperbolic sine integral, Shi(g) = int_0^g sinh(t)/t dt.
Real shi(Real g);

/// exp(-g) * Shi(g), finite for every g >= 0.
Real scaled_shi(Real g);

/// Density of x = (1 + R)/(1 - R) on [1, inf). Zero below the support; the
/// flag variant reports it. GUE uses the unitary-class closed form.
Real p0_x(Real x, const AbsorptionParams& params);
Real p0_x(Real x, const AbsorptionParams& params, bool& out_of_support);

/// Reflection coefficient R = |S|^2 on [0, 1).
Real p_reflection(Real r, const AbsorptionParams& params);
/// Amplitude r = |S| on [0, 1).
Real p_amplitude(Real r, const AbsorptionParams& params);
/// v = -Im K on (0, inf).
Real p_imK(Real v, const AbsorptionParams& params);
/// u = Re K on the real line.
Real p_reK(Real u, const AbsorptionParams& params);

Real mean_reflection(const AbsorptionParams& params);
Real mean_amplitude(const AbsorptionParams& params);

enum class EricsonVariable { kReflection, kAmplitude };

/// Large-absorption limits of the rescaled R/<R> and r/<r>.
Real ericson_density(EricsonVariable variable, Real value);

enum class Variable { kX, kReflection, kImK, kReK, kAmplitude, kScaledReflection, kScaledAmplitude };

std::string_view to_string(Variable v);
Variable parse_variable(std::string_view text);

/// Density of `variable`, with rescaled variables using the exact moments.
Real density(Variable variable, Real value, const AbsorptionParams& params);

/// Support [lo, hi] of a variable (hi may be +inf, lo may be -inf).
std::pair<Real, Real> support(Variable variable, const AbsorptionParams& params);

struct DistributionCurve {
  Variable variable = Variable::kReflection;
  AbsorptionParams params;
  bool ericson = false;  // true when the curve is the large-absorption limit
  std::vector<Real> grid;
  std::vector<Real> density;
  Real normalization = 0.0;  // integral over the full support
};

DistributionCurve tabulate(Variable variable, const AbsorptionParams& params, const std::vector<Real>& grid);
DistributionCurve tabulate_ericson(Variable variable, const std::vector<Real>& grid);

/// Integral of the density over its full support.
Real normalization(Variable variable, const AbsorptionParams& params);

/// Cumulative distribution of a variable by quadrature.
Real cdf(Variable variable, Real value, const AbsorptionParams& params);

/// Inverse-CDF sampler for R. The CDF is tabulated on an adaptively refined
/// grid of about `cells` cells and inverted by linear (monotone) interpolation.
class ReflectionSampler {
 public:
  explicit ReflectionSampler(const AbsorptionParams& params, int cells = 10000);

  Real sample(RandomStream& rng) const;
  std::vector<Real> sample(RandomStream& rng, std::size_t count) const;
  Real cdf(Real r) const;

  const std::vector<Real>& grid() const { return grid_; }

 private:
  AbsorptionParams params_;
  std::vector<Real> grid_;
  std::vector<Real> cumulative_;
};

enum class FitVariable { kReflection, kAmplitude };
enum class FitMethod { kMeanMatch, kCurveL2 };

struct GammaFit {
  Real gamma = 0.0;
  Real stderr_bootstrap = 0.0;
  Real sample_mean = 0.0;
  std::size_t samples = 0;
  FitMethod method = FitMethod::kMeanMatch;
};

struct FitOptions {
  FitVariable variable = FitVariable::kReflection;
  FitMethod method = FitMethod::kMeanMatch;
  int bootstrap = 200;
  std::uint64_t seed = 1;
  int histogram_bins = 40;  // curve mode only
};

/// gamma such that the analytic <R> (or <r>) equals the sample mean; the
/// uncertainty is the bootstrap standard deviation of the estimate.
GammaFit fit_gamma(const std::vector<Real>& samples, SymmetryClass cls, const FitOptions& options = {});

/// Solves mean_reflection(gamma) = target (or mean_amplitude) by bisection in log gamma.
Real gamma_from_mean(Real target, SymmetryClass cls, FitVariable variable = FitVariable::kReflection);

}  // namespace kramers::analytic
