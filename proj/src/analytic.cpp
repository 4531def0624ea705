#include "kramers/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kramers/quadrature.hpp"

namespace kramers::analytic {
namespace {

constexpr Real kInf = std::numeric_limits<Real>::infinity();

quadrature::Options tight() {
  quadrature::Options opt;
  opt.abs_tol = 1e-300;
  opt.rel_tol = 1e-12;
  return opt;
}

void check_gamma(const AbsorptionParams& p) {
  if (!(p.gamma > 0.0) || !std::isfinite(p.gamma)) {
    fail(ErrorKind::kInvalidInput, "absorption gamma must be positive, got " + std::to_string(p.gamma));
  }
  if (p.symmetry == SymmetryClass::GOE) {
    fail(ErrorKind::kInvalidInput, "no closed-form absorbing distribution for the GOE");
  }
}

Real shi_series(Real g) {
  // sum_k g^(2k+1) / ((2k+1) (2k+1)!)
  const Real g2 = g * g;
  Real term = g;  // g^(2k+1)/(2k+1)!
  Real sum = g;
  for (int k = 1; k < 200; ++k) {
    term *= g2 / ((2.0 * k) * (2.0 * k + 1.0));
    const Real add = term / (2.0 * k + 1.0);
    sum += add;
    if (add < 1e-18 * sum) break;
  }
  return sum;
}

// exp(-g) sinh(t)/t without overflow for large g.
Real scaled_sinhc(Real t, Real g) {
  if (t < 1e-8) return std::exp(-g);
  if (t < 1.0) return std::exp(-g) * std::sinh(t) / t;
  return 0.5 * (std::exp(t - g) - std::exp(-t - g)) / t;
}

Real scaled_shi_quadrature(Real g) {
  // The integrand peaks at t = g; split so the adaptive rule sees the peak.
  auto f = [g](Real t) { return scaled_sinhc(t, g); };
  const Real knee = std::max(0.0, g - 40.0);
  Real total = quadrature::integrate(f, knee, g, tight()).value;
  if (knee > 0.0) total += quadrature::integrate(f, 0.0, knee, tight()).value;
  return total;
}

}  // namespace

Real shi(Real g) {
  if (!(g >= 0.0)) fail(ErrorKind::kInvalidInput, "shi needs g >= 0");
  if (g < 12.0) return shi_series(g);
  return std::exp(g) * scaled_shi_quadrature(g);
}

Real scaled_shi(Real g) {
  if (!(g >= 0.0)) fail(ErrorKind::kInvalidInput, "shi needs g >= 0");
  if (g < 12.0) return std::exp(-g) * shi_series(g);
  // Densities call this with one gamma many times over.
  thread_local Real last_g = -1.0, last_value = 0.0;
  if (g != last_g) {
    last_value = scaled_shi_quadrature(g);
    last_g = g;
  }
  return last_value;
}

Real p0_x(Real x, const AbsorptionParams& params, bool& out_of_support) {
  check_gamma(params);
  out_of_support = !(x >= 1.0);
  if (out_of_support) return 0.0;
  if (std::isinf(x)) return 0.0;
  const Real g = params.gamma;
  if (params.symmetry == SymmetryClass::GUE) {
    const Real h = 0.5 * g;
    const Real grow = std::exp(h * (1.0 - x));
    const Real decay = std::exp(-h * (x + 1.0));
    return 0.5 * (h * (x + 1.0) * (grow - decay) + (1.0 + g) * decay - grow);
  }
  // exp(2g) and Shi(g) are folded into the exponentials so large g is safe.
  const Real grow = std::exp(g * (1.0 - x));
  const Real decay = std::exp(-g * (x + 1.0));
  const Real xp = x + 1.0;
  const Real c = 0.5 * g * g * xp * xp - g * (g + 1.0) * xp + g;
  return 0.5 * (g * xp * (grow - decay) + (1.0 + 2.0 * g) * decay - grow) + c * grow * scaled_shi(g);
}

Real p0_x(Real x, const AbsorptionParams& params) {
  bool ignored = false;
  return p0_x(x, params, ignored);
}

Real p_reflection(Real r, const AbsorptionParams& params) {
  if (!(r >= 0.0 && r < 1.0)) fail(ErrorKind::kOutOfSupport, "R must lie in [0, 1), got " + std::to_string(r));
  const Real one_minus = 1.0 - r;
  return 2.0 / (one_minus * one_minus) * p0_x((1.0 + r) / one_minus, params);
}

Real p_amplitude(Real r, const AbsorptionParams& params) {
  if (!(r >= 0.0 && r < 1.0)) fail(ErrorKind::kOutOfSupport, "r must lie in [0, 1), got " + std::to_string(r));
  return 2.0 * r * p_reflection(r * r, params);
}

Real p_imK(Real v, const AbsorptionParams& params) {
  if (!(v > 0.0) || std::isinf(v)) fail(ErrorKind::kOutOfSupport, "v must be positive, got " + std::to_string(v));
  check_gamma(params);
  const Real shift = 0.5 * (v + 1.0 / v);
  auto f = [&](Real q) { return p0_x(q * q + shift, params); };
  const Real integral = quadrature::integrate_to_infinity(f, 0.0, tight()).value;
  return std::sqrt(2.0) / (kPi * std::pow(v, 1.5)) * integral;
}

Real p_reK(Real u, const AbsorptionParams& params) {
  check_gamma(params);
  const Real root = std::sqrt(u * u + 1.0);
  auto f = [&](Real q) { return q > 0.0 ? p0_x(0.5 * root * (q + 1.0 / q), params) : 0.0; };
  const Real integral = quadrature::integrate_to_infinity(f, 0.0, tight()).value;
  return integral / (2.0 * kPi * root);
}

Real mean_reflection(const AbsorptionParams& params) {
  check_gamma(params);
  auto f = [&](Real r) { return r * p_reflection(r, params); };
  return quadrature::integrate(f, 0.0, 1.0, tight()).value;
}

Real mean_amplitude(const AbsorptionParams& params) {
  check_gamma(params);
  auto f = [&](Real r) { return std::sqrt(r) * p_reflection(r, params); };
  return quadrature::integrate(f, 0.0, 1.0, tight()).value;
}

Real ericson_density(EricsonVariable variable, Real value) {
  if (!(value >= 0.0)) fail(ErrorKind::kOutOfSupport, "rescaled variable must be >= 0");
  if (variable == EricsonVariable::kReflection) return std::exp(-value);
  return 0.5 * kPi * value * std::exp(-0.25 * kPi * value * value);
}

std::string_view to_string(Variable v) {
  switch (v) {
    case Variable::kX: return "x";
    case Variable::kReflection: return "R";
    case Variable::kImK: return "v";
    case Variable::kReK: return "u";
    case Variable::kAmplitude: return "r";
    case Variable::kScaledReflection: return "R_tilde";
    case Variable::kScaledAmplitude: return "r_tilde";
  }
  return "?";
}

Variable parse_variable(std::string_view text) {
  for (auto v : {Variable::kX, Variable::kReflection, Variable::kImK, Variable::kReK, Variable::kAmplitude,
                 Variable::kScaledReflection, Variable::kScaledAmplitude}) {
    if (text == to_string(v)) return v;
  }
  fail(ErrorKind::kInvalidInput, "unknown variable '" + std::string(text) + "' (x, R, r, u, v, R_tilde, r_tilde)");
}

std::pair<Real, Real> support(Variable variable, const AbsorptionParams& params) {
  switch (variable) {
    case Variable::kX: return {1.0, kInf};
    case Variable::kReflection:
    case Variable::kAmplitude: return {0.0, 1.0};
    case Variable::kImK: return {0.0, kInf};
    case Variable::kReK: return {-kInf, kInf};
    case Variable::kScaledReflection: return {0.0, 1.0 / mean_reflection(params)};
    case Variable::kScaledAmplitude: return {0.0, 1.0 / mean_amplitude(params)};
  }
  return {0.0, 0.0};
}

Real density(Variable variable, Real value, const AbsorptionParams& params) {
  switch (variable) {
    case Variable::kX: return p0_x(value, params);
    case Variable::kReflection: return value >= 0.0 && value < 1.0 ? p_reflection(value, params) : 0.0;
    case Variable::kAmplitude: return value >= 0.0 && value < 1.0 ? p_amplitude(value, params) : 0.0;
    case Variable::kImK: return value > 0.0 ? p_imK(value, params) : 0.0;
    case Variable::kReK: return p_reK(value, params);
    case Variable::kScaledReflection: {
      const Real m = mean_reflection(params);
      const Real r = value * m;
      return r >= 0.0 && r < 1.0 ? m * p_reflection(r, params) : 0.0;
    }
    case Variable::kScaledAmplitude: {
      const Real m = mean_amplitude(params);
      const Real r = value * m;
      return r >= 0.0 && r < 1.0 ? m * p_amplitude(r, params) : 0.0;
    }
  }
  return 0.0;
}

namespace {

// Integral of g over [lo, hi] where either end may be infinite.
template <typename F>
Real integrate_range(F&& g, Real lo, Real hi, const quadrature::Options& opt) {
  if (std::isinf(lo) && std::isinf(hi)) {
    auto mirrored = [&](Real t) { return g(-t); };
    return quadrature::integrate_to_infinity(mirrored, 0.0, opt).value +
           quadrature::integrate_to_infinity(g, 0.0, opt).value;
  }
  if (std::isinf(hi)) {
    return quadrature::integrate_to_infinity(g, lo, opt).value;
  }
  if (std::isinf(lo)) {
    auto mirrored = [&](Real t) { return g(-t); };
    return quadrature::integrate_to_infinity(mirrored, -hi, opt).value;
  }
  return quadrature::integrate(g, lo, hi, opt).value;
}

quadrature::Options loose() {
  quadrature::Options opt;
  opt.abs_tol = 1e-13;
  opt.rel_tol = 1e-9;
  return opt;
}

}  // namespace

Real normalization(Variable variable, const AbsorptionParams& params) {
  check_gamma(params);
  // Rescaled variables use a fixed moment so the inner quadrature is not repeated.
  if (variable == Variable::kScaledReflection || variable == Variable::kScaledAmplitude) {
    const bool refl = variable == Variable::kScaledReflection;
    const Real m = refl ? mean_reflection(params) : mean_amplitude(params);
    auto f = [&](Real t) {
      const Real r = t * m;
      return m * (refl ? p_reflection(r, params) : p_amplitude(r, params));
    };
    return quadrature::integrate(f, 0.0, 1.0 / m, tight()).value;
  }
  auto f = [&](Real t) { return density(variable, t, params); };
  if (variable == Variable::kImK) {
    return quadrature::integrate(f, 0.0, 1.0, loose()).value +
           quadrature::integrate_to_infinity(f, 1.0, loose()).value;
  }
  const auto [lo, hi] = support(variable, params);
  return integrate_range(f, lo, hi, variable == Variable::kReK ? loose() : tight());
}

Real cdf(Variable variable, Real value, const AbsorptionParams& params) {
  const auto [lo, hi] = support(variable, params);
  if (value <= lo) return 0.0;
  if (value >= hi) return 1.0;
  auto f = [&](Real t) { return density(variable, t, params); };
  return integrate_range(f, lo, value, loose());
}

DistributionCurve tabulate(Variable variable, const AbsorptionParams& params, const std::vector<Real>& grid) {
  check_gamma(params);
  DistributionCurve curve;
  curve.variable = variable;
  curve.params = params;
  curve.grid = grid;
  curve.density.reserve(grid.size());
  if (variable == Variable::kScaledReflection || variable == Variable::kScaledAmplitude) {
    const bool refl = variable == Variable::kScaledReflection;
    const Real m = refl ? mean_reflection(params) : mean_amplitude(params);
    for (Real g : grid) {
      const Real r = g * m;
      const bool inside = r >= 0.0 && r < 1.0;
      curve.density.push_back(!inside ? 0.0 : m * (refl ? p_reflection(r, params) : p_amplitude(r, params)));
    }
  } else {
    for (Real g : grid) curve.density.push_back(density(variable, g, params));
  }
  curve.normalization = normalization(variable, params);
  return curve;
}

DistributionCurve tabulate_ericson(Variable variable, const std::vector<Real>& grid) {
  if (variable != Variable::kScaledReflection && variable != Variable::kScaledAmplitude) {
    fail(ErrorKind::kInvalidInput, "large-absorption limit exists only for R_tilde and r_tilde");
  }
  const auto which =
      variable == Variable::kScaledReflection ? EricsonVariable::kReflection : EricsonVariable::kAmplitude;
  DistributionCurve curve;
  curve.variable = variable;
  curve.ericson = true;
  curve.grid = grid;
  for (Real g : grid) curve.density.push_back(g >= 0.0 ? ericson_density(which, g) : 0.0);
  auto f = [which](Real t) { return ericson_density(which, t); };
  curve.normalization = quadrature::integrate_to_infinity(f, 0.0, tight()).value;
  return curve;
}

ReflectionSampler::ReflectionSampler(const AbsorptionParams& params, int cells) : params_(params) {
  check_gamma(params);
  if (cells < 10) fail(ErrorKind::kInvalidInput, "sampler needs at least 10 cells");
  auto f = [&](Real r) { return p_reflection(r, params_); };
  auto mass = [&](Real a, Real b) { return quadrature::integrate(f, a, b, loose()).value; };

  const int coarse = std::max(10, cells / 50);
  std::vector<Real> edges;
  std::vector<Real> masses;
  for (int i = 0; i < coarse; ++i) {
    const Real a = static_cast<Real>(i) / coarse, b = static_cast<Real>(i + 1) / coarse;
    const Real m = mass(a, b);
    // Refine so no cell carries more than 1/cells of the probability.
    const int split = std::max(1, static_cast<int>(std::ceil(m * cells)));
    for (int j = 0; j < split; ++j) {
      const Real lo = a + (b - a) * j / split, hi = a + (b - a) * (j + 1) / split;
      edges.push_back(lo);
      masses.push_back(split == 1 ? m : mass(lo, hi));
    }
  }
  edges.push_back(1.0);
  grid_ = std::move(edges);
  cumulative_.assign(grid_.size(), 0.0);
  for (std::size_t i = 0; i < masses.size(); ++i) cumulative_[i + 1] = cumulative_[i] + masses[i];
  const Real total = cumulative_.back();
  for (auto& c : cumulative_) c /= total;
}

Real ReflectionSampler::sample(RandomStream& rng) const {
  const Real u = rng.uniform();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto i = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - cumulative_.begin() - 1, 0,
                                                                     static_cast<std::ptrdiff_t>(grid_.size()) - 2));
  const Real width = cumulative_[i + 1] - cumulative_[i];
  const Real t = width > 0.0 ? (u - cumulative_[i]) / width : 0.0;
  return std::min(grid_[i] + t * (grid_[i + 1] - grid_[i]), std::nextafter(1.0, 0.0));
}

std::vector<Real> ReflectionSampler::sample(RandomStream& rng, std::size_t count) const {
  std::vector<Real> out(count);
  for (auto& r : out) r = sample(rng);
  return out;
}

Real ReflectionSampler::cdf(Real r) const {
  if (r <= 0.0) return 0.0;
  if (r >= 1.0) return 1.0;
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), r);
  const auto i = static_cast<std::size_t>(it - grid_.begin() - 1);
  const Real t = (r - grid_[i]) / (grid_[i + 1] - grid_[i]);
  return cumulative_[i] + t * (cumulative_[i + 1] - cumulative_[i]);
}

namespace {

Real moment(Real gamma, SymmetryClass cls, FitVariable variable) {
  const AbsorptionParams p{gamma, cls};
  return variable == FitVariable::kReflection ? mean_reflection(p) : mean_amplitude(p);
}

constexpr Real kGammaMin = 1e-3;
constexpr Real kGammaMax = 1e3;

// Piecewise-linear inverse of the monotone moment curve on a log-gamma grid.
class MomentTable {
 public:
  MomentTable(Real center, SymmetryClass cls, FitVariable variable) {
    const Real lo = std::log(std::max(kGammaMin, center / 2.0));
    const Real hi = std::log(std::min(kGammaMax, center * 2.0));
    for (int i = 0; i <= 160; ++i) {
      const Real lg = lo + (hi - lo) * i / 160;
      log_gamma_.push_back(lg);
      moments_.push_back(moment(std::exp(lg), cls, variable));
    }
  }

  // NaN outside the tabulated range.
  Real invert(Real m) const {
    // moments_ is decreasing
    if (m > moments_.front() || m < moments_.back()) return std::numeric_limits<Real>::quiet_NaN();
    std::size_t i = 0;
    while (i + 2 < moments_.size() && moments_[i + 1] > m) ++i;
    const Real t = (moments_[i] - m) / (moments_[i] - moments_[i + 1]);
    return std::exp(log_gamma_[i] + t * (log_gamma_[i + 1] - log_gamma_[i]));
  }

 private:
  std::vector<Real> log_gamma_;
  std::vector<Real> moments_;
};

Real curve_loss(Real gamma, SymmetryClass cls, FitVariable variable, const std::vector<Real>& centers,
                const std::vector<Real>& heights) {
  const AbsorptionParams p{gamma, cls};
  Real loss = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const Real model = variable == FitVariable::kReflection ? p_reflection(centers[i], p) : p_amplitude(centers[i], p);
    loss += (model - heights[i]) * (model - heights[i]);
  }
  return loss;
}

Real fit_curve(const std::vector<Real>& samples, SymmetryClass cls, FitVariable variable, int bins, Real guess) {
  const Real top = *std::max_element(samples.begin(), samples.end());
  const Real width = std::min(1.0, top * 1.0000001) / bins;
  std::vector<Real> heights(bins, 0.0), centers(bins);
  for (Real s : samples) heights[std::min(bins - 1, static_cast<int>(s / width))] += 1.0;
  for (int i = 0; i < bins; ++i) {
    heights[i] /= samples.size() * width;
    centers[i] = (i + 0.5) * width;
  }
  // Golden-section search in log gamma.
  Real a = std::log(std::max(kGammaMin, guess / 3.0)), b = std::log(std::min(kGammaMax, guess * 3.0));
  const Real phi = 0.5 * (std::sqrt(5.0) - 1.0);
  Real c = b - phi * (b - a), d = a + phi * (b - a);
  Real fc = curve_loss(std::exp(c), cls, variable, centers, heights);
  Real fd = curve_loss(std::exp(d), cls, variable, centers, heights);
  while (b - a > 1e-7) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - phi * (b - a);
      fc = curve_loss(std::exp(c), cls, variable, centers, heights);
    } else {
      a = c, c = d, fc = fd;
      d = a + phi * (b - a);
      fd = curve_loss(std::exp(d), cls, variable, centers, heights);
    }
  }
  return std::exp(0.5 * (a + b));
}

}  // namespace

Real gamma_from_mean(Real target, SymmetryClass cls, FitVariable variable) {
  Real lo = std::log(kGammaMin), hi = std::log(kGammaMax);
  const Real m_lo = moment(kGammaMin, cls, variable), m_hi = moment(kGammaMax, cls, variable);
  if (!(target < m_lo && target > m_hi)) {
    fail(ErrorKind::kFitFailure, "sample mean " + std::to_string(target) + " outside the attainable range (" +
                                     std::to_string(m_hi) + ", " + std::to_string(m_lo) + ")");
  }
  for (int iter = 0; iter < 80 && hi - lo > 1e-12; ++iter) {
    const Real mid = 0.5 * (lo + hi);
    if (moment(std::exp(mid), cls, variable) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(0.5 * (lo + hi));
}

GammaFit fit_gamma(const std::vector<Real>& samples, SymmetryClass cls, const FitOptions& options) {
  if (samples.size() < 1000) {
    fail(ErrorKind::kFitFailure, "need at least 1000 samples, got " + std::to_string(samples.size()));
  }
  for (Real s : samples) {
    if (!(s >= 0.0 && s < 1.0)) fail(ErrorKind::kFitFailure, "sample " + std::to_string(s) + " outside [0, 1)");
  }
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  if (*lo_it == *hi_it) fail(ErrorKind::kFitFailure, "all samples are equal");

  GammaFit fit;
  fit.samples = samples.size();
  fit.method = options.method;
  fit.sample_mean = std::accumulate(samples.begin(), samples.end(), 0.0) / samples.size();
  const Real by_mean = gamma_from_mean(fit.sample_mean, cls, options.variable);
  fit.gamma = options.method == FitMethod::kMeanMatch
                  ? by_mean
                  : fit_curve(samples, cls, options.variable, options.histogram_bins, by_mean);

  if (options.bootstrap > 1) {
    RandomStream rng(options.seed, 0xb007);
    const std::size_t n = samples.size();
    std::vector<Real> estimates;
    std::vector<Real> resample(n);
    const MomentTable table(by_mean, cls, options.variable);
    for (int b = 0; b < options.bootstrap; ++b) {
      Real sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        resample[i] = samples[rng.index(n)];
        sum += resample[i];
      }
      Real g;
      if (options.method == FitMethod::kMeanMatch) {
        g = table.invert(sum / n);
        if (std::isnan(g)) g = gamma_from_mean(sum / n, cls, options.variable);
      } else {
        g = fit_curve(resample, cls, options.variable, options.histogram_bins, by_mean);
      }
      estimates.push_back(g);
    }
    const Real mean = std::accumulate(estimates.begin(), estimates.end(), 0.0) / estimates.size();
    Real var = 0.0;
    for (Real g : estimates) var += (g - mean) * (g - mean);
    fit.stderr_bootstrap = std::sqrt(var / (estimates.size() - 1));
  }
  return fit;
}

}  // namespace kramers::analytic
