#include "kramers/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kramers/quadrature.hpp"

namespace kramers::stats {

Histogram make_histogram(const std::vector<Real>& samples, int bins, Real lo, Real hi) {
  if (bins < 1) fail(ErrorKind::kInvalidInput, "histogram needs at least one bin");
  if (!(hi > lo)) fail(ErrorKind::kInvalidInput, "histogram range must be non-empty");
  Histogram h;
  h.edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i) h.edges[i] = lo + (hi - lo) * i / bins;
  h.counts.assign(bins, 0.0);
  const Real width = (hi - lo) / bins;
  for (Real s : samples) {
    if (!(s >= lo && s <= hi)) continue;
    const int i = std::min(bins - 1, static_cast<int>((s - lo) / width));
    h.counts[i] += 1.0;
    ++h.sample_count;
  }
  h.density.assign(bins, 0.0);
  if (h.sample_count > 0) {
    for (int i = 0; i < bins; ++i) h.density[i] = h.counts[i] / (h.sample_count * h.width(i));
  }
  return h;
}

Histogram make_histogram(const std::vector<Real>& samples, int bins) {
  if (samples.empty()) fail(ErrorKind::kInvalidInput, "histogram of an empty sample");
  auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  Real a = *lo, b = *hi;
  if (a == b) {
    a -= 0.5;
    b += 0.5;
  }
  return make_histogram(samples, bins, a, b);
}

NnsdResult nnsd(const std::vector<std::vector<Real>>& realizations, int bins, Real max_spacing) {
  NnsdResult out;
  for (const auto& levels : realizations) {
    if (levels.size() < 2) {
      ++out.skipped_realizations;
      continue;
    }
    for (std::size_t i = 0; i + 1 < levels.size(); ++i) out.spacings.push_back(levels[i + 1] - levels[i]);
  }
  if (out.spacings.empty()) fail(ErrorKind::kInvalidInput, "no realization has two or more levels");
  out.mean_spacing = std::accumulate(out.spacings.begin(), out.spacings.end(), 0.0) / out.spacings.size();
  out.histogram = make_histogram(out.spacings, bins, 0.0, max_spacing);
  return out;
}

StatCurve number_variance(const std::vector<std::vector<Real>>& realizations, const std::vector<Real>& lengths,
                          const NumberVarianceOptions& options) {
  StatCurve curve;
  curve.metadata["window_placement"] = "uniform random";
  curve.metadata["oversampling"] = std::to_string(options.oversampling);
  Real min_span = std::numeric_limits<Real>::infinity();
  int used = 0;
  for (const auto& levels : realizations) {
    if (levels.size() < 2) continue;
    min_span = std::min(min_span, levels.back() - levels.front());
    ++used;
  }
  if (used == 0) fail(ErrorKind::kInvalidInput, "no realization has two or more levels");

  RandomStream rng(options.seed, 0x5157);
  int truncated = 0;
  for (Real length : lengths) {
    if (length > 0.5 * min_span) {
      ++truncated;
      continue;
    }
    // Per-realization estimates give the spread for the standard error.
    std::vector<Real> per_realization;
    Real pooled_sum = 0.0, pooled_sq = 0.0;
    std::size_t pooled_n = 0;
    for (const auto& levels : realizations) {
      if (levels.size() < 2) continue;
      const Real lo = levels.front(), hi = levels.back() - length;
      const std::size_t windows = std::max<std::size_t>(10, options.oversampling * levels.size());
      Real sum = 0.0, sq = 0.0;
      for (std::size_t w = 0; w < windows; ++w) {
        const Real start = lo + (hi - lo) * rng.uniform();
        const auto a = std::lower_bound(levels.begin(), levels.end(), start);
        const auto b = std::lower_bound(a, levels.end(), start + length);
        const Real count = static_cast<Real>(b - a);
        sum += count;
        sq += count * count;
      }
      pooled_sum += sum;
      pooled_sq += sq;
      pooled_n += windows;
      const Real mean = sum / windows;
      per_realization.push_back(sq / windows - mean * mean);
    }
    const Real mean = pooled_sum / pooled_n;
    curve.grid.push_back(length);
    curve.values.push_back(pooled_sq / pooled_n - mean * mean);
    if (per_realization.size() > 1) {
      curve.errors.push_back(mean_with_error(per_realization).error);
    } else {
      // Overlapping windows in one spectrum: crude error from the count variance.
      curve.errors.push_back(curve.values.back() * std::sqrt(2.0 * length / (min_span - length)));
    }
  }
  curve.metadata["truncated"] = std::to_string(truncated);
  return curve;
}

std::vector<Real> thin_spectrum(const std::vector<Real>& levels, Real retain, RandomStream& rng) {
  if (!(retain > 0.0 && retain <= 1.0)) fail(ErrorKind::kInvalidInput, "retain fraction must lie in (0, 1]");
  std::vector<Real> out;
  out.reserve(levels.size());
  for (Real e : levels) {
    if (retain == 1.0 || rng.bernoulli(retain)) out.push_back(retain * e);
  }
  return out;
}

Real surmise_density(SymmetryClass cls, Real s) {
  if (s < 0.0) return 0.0;
  switch (cls) {
    case SymmetryClass::GOE: return 0.5 * kPi * s * std::exp(-0.25 * kPi * s * s);
    case SymmetryClass::GUE: return 32.0 / (kPi * kPi) * s * s * std::exp(-4.0 * s * s / kPi);
    case SymmetryClass::GSE: {
      const Real c = std::pow(2.0, 18) / (std::pow(3.0, 6) * std::pow(kPi, 3));
      return c * std::pow(s, 4) * std::exp(-64.0 * s * s / (9.0 * kPi));
    }
  }
  return 0.0;
}

StatCurve wigner_surmise(SymmetryClass cls, const std::vector<Real>& s_grid) {
  StatCurve curve;
  curve.grid = s_grid;
  for (Real s : s_grid) {
    curve.values.push_back(surmise_density(cls, s));
    curve.errors.push_back(0.0);
  }
  curve.metadata["class"] = std::string(to_string(cls));
  return curve;
}

ReferenceCdf::ReferenceCdf(std::function<Real(Real)> density, Real lo, Real hi, int cells, Real scale) {
  if (!(hi > lo)) fail(ErrorKind::kInvalidReference, "empty support");
  if (cells < 4) fail(ErrorKind::kInvalidReference, "need at least 4 cells");
  const bool lo_inf = std::isinf(lo), hi_inf = std::isinf(hi);
  // x(t) for t in [t0, t1]; tan mapping on infinite sides.
  const Real center = lo_inf && hi_inf ? 0.0 : (lo_inf ? hi : lo);
  const Real t0 = lo_inf ? -0.5 * kPi : (hi_inf ? 0.0 : lo);
  const Real t1 = hi_inf ? 0.5 * kPi : (lo_inf ? 0.0 : hi);
  const bool mapped = lo_inf || hi_inf;
  auto to_x = [&](Real t) { return mapped ? center + scale * std::tan(t) : t; };
  auto jac = [&](Real t) {
    if (!mapped) return 1.0;
    const Real c = std::cos(t);
    return scale / (c * c);
  };
  auto integrand = [&](Real t) {
    if (mapped && std::abs(std::cos(t)) < 1e-300) return 0.0;
    const Real f = density(to_x(t));
    return f == 0.0 ? 0.0 : f * jac(t);
  };

  nodes_.resize(cells + 1);
  cumulative_.assign(cells + 1, 0.0);
  slopes_.assign(cells + 1, 0.0);
  quadrature::Options opt;
  opt.abs_tol = 1e-15;
  opt.rel_tol = 1e-10;
  opt.max_intervals = 64;
  for (int i = 0; i <= cells; ++i) {
    const Real t = t0 + (t1 - t0) * i / cells;
    nodes_[i] = (mapped && (i == 0 || i == cells) && std::abs(std::cos(t)) < 1e-12)
                    ? (i == 0 ? -std::numeric_limits<Real>::infinity() : std::numeric_limits<Real>::infinity())
                    : to_x(t);
    slopes_[i] = std::isinf(nodes_[i]) ? 0.0 : density(nodes_[i]);
    if (i > 0) {
      const Real ta = t0 + (t1 - t0) * (i - 1) / cells;
      cumulative_[i] = cumulative_[i - 1] + quadrature::integrate(integrand, ta, t, opt).value;
    }
  }
  normalization_ = cumulative_.back();
  if (!(std::abs(normalization_ - 1.0) <= 1e-3)) {
    fail(ErrorKind::kInvalidReference, "reference density integrates to " + std::to_string(normalization_));
  }
  for (auto& c : cumulative_) c /= normalization_;
  for (auto& s : slopes_) s /= normalization_;
}

Real ReferenceCdf::operator()(Real x) const {
  if (x <= nodes_.front()) return 0.0;
  if (x >= nodes_.back()) return 1.0;
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  const auto i = static_cast<std::size_t>(it - nodes_.begin() - 1);
  const Real a = nodes_[i], b = nodes_[i + 1];
  if (std::isinf(a) || std::isinf(b)) {
    // Tail cell: linear in the mass towards the infinite end.
    return std::isinf(b) ? cumulative_[i] + (1.0 - cumulative_[i]) * 0.5 : cumulative_[i + 1] * 0.5;
  }
  const Real h = b - a;
  const Real t = (x - a) / h;
  const Real t2 = t * t, t3 = t2 * t;
  const Real value = (2 * t3 - 3 * t2 + 1) * cumulative_[i] + (t3 - 2 * t2 + t) * h * slopes_[i] +
                     (-2 * t3 + 3 * t2) * cumulative_[i + 1] + (t3 - t2) * h * slopes_[i + 1];
  return std::clamp(value, cumulative_[i], cumulative_[i + 1]);
}

Real ks_distance(std::vector<Real> samples, const std::function<Real(Real)>& reference_cdf) {
  if (samples.empty()) fail(ErrorKind::kInvalidInput, "KS distance of an empty sample");
  std::sort(samples.begin(), samples.end());
  const Real n = static_cast<Real>(samples.size());
  Real d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Real f = reference_cdf(samples[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

Real ks_distance(std::vector<Real> samples, const ReferenceCdf& reference) {
  return ks_distance(std::move(samples), [&reference](Real x) { return reference(x); });
}

Real ks_distance(const Histogram& histogram, const ReferenceCdf& reference) {
  if (histogram.sample_count == 0) fail(ErrorKind::kInvalidInput, "KS distance of an empty histogram");
  Real cumulative = 0.0;
  Real d = std::abs(reference(histogram.edges.front()));
  for (std::size_t i = 0; i < histogram.bins(); ++i) {
    cumulative += histogram.counts[i] / histogram.sample_count;
    d = std::max(d, std::abs(cumulative - reference(histogram.edges[i + 1])));
  }
  return d;
}

Real ks_two_sample(std::vector<Real> a, std::vector<Real> b) {
  if (a.empty() || b.empty()) fail(ErrorKind::kInvalidInput, "KS distance of an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const Real na = static_cast<Real>(a.size()), nb = static_cast<Real>(b.size());
  std::size_t i = 0, j = 0;
  Real d = 0.0;
  while (i < a.size() && j < b.size()) {
    const Real x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

Real l2_distance(const Histogram& histogram, const std::function<Real(Real)>& density, Real lo, Real hi) {
  Real total = 0.0;
  for (std::size_t i = 0; i < histogram.bins(); ++i) {
    const Real a = std::max(lo, histogram.edges[i]), b = std::min(hi, histogram.edges[i + 1]);
    if (!(b > a)) continue;
    const Real h = histogram.density[i];
    auto sq = [&](Real s) {
      const Real d = h - density(s);
      return d * d;
    };
    total += quadrature::integrate(sq, a, b).value;
  }
  return std::sqrt(total);
}

MeanWithError mean_with_error(const std::vector<Real>& values) {
  if (values.empty()) fail(ErrorKind::kInvalidInput, "mean of an empty set");
  MeanWithError out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  if (values.size() > 1) {
    Real var = 0.0;
    for (Real v : values) var += (v - out.mean) * (v - out.mean);
    out.error = std::sqrt(var / (values.size() - 1) / values.size());
  }
  return out;
}

}  // namespace kramers::stats
