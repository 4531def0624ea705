#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "kramers/errors.hpp"
#include "kramers/rng.hpp"
#include "kramers/types.hpp"

namespace kramers::stats {

struct Histogram {
  std::vector<Real> edges;    // ascending, bins + 1 entries
  std::vector<Real> counts;   // per bin
  std::vector<Real> density;  // counts / (in_range * width)
  std::size_t sample_count = 0;  // samples that fell inside [edges.front(), edges.back()]

  std::size_t bins() const { return counts.size(); }
  Real center(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
  Real width(std::size_t i) const { return edges[i + 1] - edges[i]; }
};

/// Uniform histogram on [lo, hi]; samples outside are ignored.
Histogram make_histogram(const std::vector<Real>& samples, int bins, Real lo, Real hi);

/// Uniform histogram over the occupied range [min, max].
Histogram make_histogram(const std::vector<Real>& samples, int bins = 40);

struct StatCurve {
  std::vector<Real> grid;
  std::vector<Real> values;
  std::vector<Real> errors;
  std::map<std::string, std::string> metadata;
};

struct NnsdResult {
  Histogram histogram;
  std::vector<Real> spacings;  // pooled
  Real mean_spacing = 0.0;
  int skipped_realizations = 0;  // fewer than two levels
};

/// Nearest-neighbour spacings pooled over realizations of unfolded levels.
NnsdResult nnsd(const std::vector<std::vector<Real>>& realizations, int bins = 40, Real max_spacing = 4.0);

struct NumberVarianceOptions {
  int oversampling = 10;  // windows per level
  std::uint64_t seed = 1;
};

/// Sigma^2(L): variance of the level count in windows of length L placed
/// uniformly at random, averaged within and across realizations. L values
/// beyond half the shortest spectrum span are dropped (metadata "truncated").
StatCurve number_variance(const std::vector<std::vector<Real>>& realizations, const std::vector<Real>& lengths,
                          const NumberVarianceOptions& options = {});

/// Keeps each level with probability `retain`, then rescales by `retain` to
/// restore unit mean spacing.
std::vector<Real> thin_spectrum(const std::vector<Real>& levels, Real retain, RandomStream& rng);

/// Wigner surmise with unit mean spacing.
Real surmise_density(SymmetryClass cls, Real s);
StatCurve wigner_surmise(SymmetryClass cls, const std::vector<Real>& s_grid);

/// Tabulated cumulative distribution of a reference density. The density is
/// integrated cell by cell with Gauss-Kronrod on a tan-mapped grid and
/// interpolated with cubic Hermite segments (the slopes are the density).
class ReferenceCdf {
 public:
  /// `scale` sets the width of the tan mapping on infinite supports.
  ReferenceCdf(std::function<Real(Real)> density, Real lo, Real hi, int cells = 2048, Real scale = 1.0);

  Real operator()(Real x) const;
  Real normalization() const { return normalization_; }

 private:
  std::vector<Real> nodes_;
  std::vector<Real> cumulative_;
  std::vector<Real> slopes_;
  Real normalization_ = 0.0;
};

/// sup |F_empirical - F_reference|.
Real ks_distance(std::vector<Real> samples, const ReferenceCdf& reference);
Real ks_distance(std::vector<Real> samples, const std::function<Real(Real)>& reference_cdf);
/// Histogram version: the empirical CDF is linear inside each bin.
Real ks_distance(const Histogram& histogram, const ReferenceCdf& reference);
/// Two-sample statistic.
Real ks_two_sample(std::vector<Real> a, std::vector<Real> b);

/// L2 distance between a histogram density and a reference density on [lo, hi].
Real l2_distance(const Histogram& histogram, const std::function<Real(Real)>& density, Real lo, Real hi);

struct MeanWithError {
  Real mean = 0.0;
  Real error = 0.0;
};

MeanWithError mean_with_error(const std::vector<Real>& values);

}  // namespace kramers::stats
