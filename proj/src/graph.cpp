#include "kramers/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace kramers {
namespace {

bool same_phase(Real a, Real b) {
  // Phases are compared modulo 2 pi.
  const Real d = std::remainder(a - b, 2.0 * kPi);
  return std::abs(d) < 1e-9;
}

bool same_length(Real a, Real b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

Real GraphSpec::total_length() const {
  Real total = 0.0;
  for (const auto& b : bonds) total += b.length;
  return total;
}

void GraphSpec::validate() const {
  if (vertex_count < 1) fail(ErrorKind::kInvalidInput, "graph needs at least one vertex");
  for (std::size_t i = 0; i < bonds.size(); ++i) {
    const auto& b = bonds[i];
    const std::string tag = "bond " + std::to_string(i);
    if (b.from < 0 || b.from >= vertex_count || b.to < 0 || b.to >= vertex_count) {
      fail(ErrorKind::kInvalidInput, tag + " references a vertex outside [0, " + std::to_string(vertex_count) + ")");
    }
    if (b.from == b.to) fail(ErrorKind::kInvalidInput, tag + " is a self-loop");
    if (!(b.length > 0.0) || !std::isfinite(b.length)) fail(ErrorKind::kInvalidInput, tag + " has non-positive length");
  }
  for (int v : leads) {
    if (v < 0 || v >= vertex_count) fail(ErrorKind::kInvalidInput, "lead attached to unknown vertex " + std::to_string(v));
  }
  if (!(absorption_eta >= 0.0)) fail(ErrorKind::kInvalidInput, "absorption eta must be >= 0");
  if (symmetry != GraphSymmetry::kGsePaired) return;

  if (vertex_count % 2 != 0) fail(ErrorKind::kInvalidInput, "GSE-paired graph needs an even vertex count");
  const int half = vertex_count / 2;
  auto side = [half](int v) { return v < half ? 0 : 1; };

  // Canonical orientation (low -> high) with the phase flipped accordingly.
  struct Canon {
    int lo, hi;
    Real length, vector_phase, extra_phase;
  };
  auto canon = [](const Bond& b) {
    if (b.from < b.to) return Canon{b.from, b.to, b.length, b.vector_phase, b.extra_phase};
    return Canon{b.to, b.from, b.length, -b.vector_phase, -b.extra_phase};
  };

  std::vector<Canon> first, second, connecting;
  for (const auto& b : bonds) {
    const auto c = canon(b);
    if (side(c.lo) != side(c.hi)) {
      connecting.push_back(c);
    } else if (side(c.lo) == 0) {
      first.push_back(c);
    } else {
      second.push_back(c);
    }
  }
  if (first.size() != second.size()) {
    fail(ErrorKind::kInvalidInput, "subgraphs have different bond counts");
  }
  std::vector<bool> used(second.size(), false);
  for (const auto& b : first) {
    bool found = false;
    for (std::size_t j = 0; j < second.size() && !found; ++j) {
      const auto& p = second[j];
      if (used[j] || p.lo != b.lo + half || p.hi != b.hi + half) continue;
      if (!same_length(p.length, b.length)) continue;
      if (!same_phase(p.vector_phase, -b.vector_phase) || !same_phase(p.extra_phase, b.extra_phase)) continue;
      used[j] = found = true;
    }
    if (!found) {
      fail(ErrorKind::kInvalidInput, "bond " + std::to_string(b.lo) + "-" + std::to_string(b.hi) +
                                         " has no partner with equal length and opposite vector phase");
    }
  }
  if (connecting.size() != 2) {
    fail(ErrorKind::kInvalidInput, "GSE-paired graph needs exactly two connecting bonds, found " +
                                       std::to_string(connecting.size()));
  }
  const auto& c0 = connecting[0];
  const auto& c1 = connecting[1];
  if (!same_length(c0.length, c1.length)) fail(ErrorKind::kInvalidInput, "connecting bonds differ in length");
  if (!same_phase(c0.vector_phase, 0.0) || !same_phase(c1.vector_phase, 0.0)) {
    fail(ErrorKind::kInvalidInput, "connecting bonds must not carry a vector potential");
  }
  // (i0, j0') and (j0, i0')
  const bool crossed = c0.lo == c1.hi - half && c1.lo == c0.hi - half;
  if (!crossed || c0.lo == c1.lo) {
    fail(ErrorKind::kInvalidInput, "connecting bonds must join (i, j') and (j, i') with i != j");
  }
  const bool pi0 = same_phase(c0.extra_phase, kPi), pi1 = same_phase(c1.extra_phase, kPi);
  const bool zero0 = same_phase(c0.extra_phase, 0.0), zero1 = same_phase(c1.extra_phase, 0.0);
  if (!((pi0 && zero1) || (pi1 && zero0))) {
    fail(ErrorKind::kInvalidInput, "exactly one connecting bond must carry the extra phase pi");
  }
}

GraphSpec make_path_graph(const std::vector<Real>& lengths) {
  GraphSpec spec;
  spec.vertex_count = static_cast<int>(lengths.size()) + 1;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    spec.bonds.push_back({static_cast<int>(i), static_cast<int>(i) + 1, lengths[i], 0.0, 0.0});
  }
  spec.validate();
  return spec;
}

GraphSpec make_gse_graph(int per_subgraph, Real total_length, bool with_leads) {
  if (per_subgraph < 3) fail(ErrorKind::kInvalidInput, "each subgraph needs at least three vertices");
  static constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                                    59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113};
  const int intra = per_subgraph * (per_subgraph - 1) / 2;
  if (intra + 1 > static_cast<int>(std::size(kPrimes))) fail(ErrorKind::kInvalidInput, "subgraph too large");

  GraphSpec spec;
  spec.symmetry = GraphSymmetry::kGsePaired;
  spec.vertex_count = 2 * per_subgraph;
  const int v = per_subgraph;
  int p = 0;
  for (int i = 0; i < v; ++i) {
    for (int j = i + 1; j < v; ++j) {
      const Real length = std::sqrt(static_cast<Real>(kPrimes[p++]));
      spec.bonds.push_back({i, j, length, 0.5 * kPi, 0.0});
      spec.bonds.push_back({i + v, j + v, length, -0.5 * kPi, 0.0});
    }
  }
  const Real link = std::sqrt(static_cast<Real>(kPrimes[p]));
  spec.bonds.push_back({0, 1 + v, link, 0.0, kPi});
  spec.bonds.push_back({1, 0 + v, link, 0.0, 0.0});

  const Real scale = total_length / spec.total_length();
  for (auto& b : spec.bonds) b.length *= scale;
  if (with_leads) spec.leads = {2, 2 + v};
  spec.validate();
  return spec;
}

std::vector<Real> h_eigenvalues(const GraphSpec& spec, Real k) {
  return hermitian_eigenvalues(h_matrix(spec, k));
}

namespace {

// Root of the increasing branch `index` of h(k) on [lo, hi], where the branch
// is negative at lo and non-negative at hi. Illinois-modified regula falsi.
Real refine_branch(const GraphSpec& spec, int index, Real lo, Real f_lo, Real hi, Real f_hi, Real tol) {
  int side = 0;
  Real x = lo;
  for (int iter = 0; iter < 200; ++iter) {
    const Real width = hi - lo;
    const Real eps = std::max(tol, 8.0 * std::numeric_limits<Real>::epsilon() * std::abs(hi));
    if (width <= eps) return 0.5 * (lo + hi);
    Real next = (f_hi - f_lo) != 0.0 ? (lo * f_hi - hi * f_lo) / (f_hi - f_lo) : 0.5 * (lo + hi);
    // Fall back to bisection when the secant lands on (or outside) an end.
    if (!(next > lo + 0.25 * eps && next < hi - 0.25 * eps) || iter % 8 == 7) next = 0.5 * (lo + hi);
    Real f;
    try {
      f = h_eigenvalues(spec, next)[index];
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kPoleProximity) throw;
      next = 0.5 * (lo + hi);
      f = h_eigenvalues(spec, next)[index];
    }
    if (f == 0.0) return next;
    if (std::abs(next - x) < 0.5 * eps && iter > 0) return next;
    x = next;
    if (f < 0.0) {
      lo = next;
      f_lo = f;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = next;
      f_hi = f;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
  }
  fail(ErrorKind::kNumericalFailure, "secular root refinement did not converge near k = " + std::to_string(x));
}

}  // namespace

SecularSpectrum secular_spectrum(const GraphSpec& spec, Real k_min, Real k_max, const SecularOptions& options) {
  spec.validate();
  if (!(k_min > 0.0) || !(k_max > k_min)) fail(ErrorKind::kInvalidInput, "need 0 < k_min < k_max");
  if (options.points_per_mean_spacing < 1) fail(ErrorKind::kInvalidInput, "scan density must be >= 1");
  if (spec.bonds.empty()) fail(ErrorKind::kInvalidInput, "graph has no bonds");

  const Real total = spec.total_length();
  const Real step = kPi / total / options.points_per_mean_spacing;
  Real min_length = std::numeric_limits<Real>::infinity();
  for (const auto& b : spec.bonds) min_length = std::min(min_length, b.length);
  const Real nudge = 10.0 * kPoleGuard / min_length;

  std::vector<Real> breaks{k_min, k_max};
  for (const auto& b : spec.bonds) {
    const auto first = static_cast<long>(std::ceil(k_min * b.length / kPi));
    const auto last = static_cast<long>(std::floor(k_max * b.length / kPi));
    for (long m = std::max(first, 1L); m <= last; ++m) breaks.push_back(m * kPi / b.length);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(), [&](Real a, Real c) { return c - a < nudge; }),
               breaks.end());

  SecularSpectrum out;
  for (std::size_t iv = 0; iv + 1 < breaks.size(); ++iv) {
    const Real a = iv == 0 ? k_min : breaks[iv] + nudge;
    const Real b = iv + 2 == breaks.size() ? k_max : breaks[iv + 1] - nudge;
    if (!(b > a)) continue;
    ++out.intervals;
    const int m = std::max(1, static_cast<int>(std::ceil((b - a) / step)));

    Real prev_k = 0.0;
    std::vector<Real> prev;
    int prev_neg = -1;
    for (int i = 0; i <= m; ++i) {
      const Real k = i == m ? b : a + (b - a) * i / m;
      std::vector<Real> ev;
      try {
        ev = h_eigenvalues(spec, k);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kPoleProximity) throw;
        ++out.skipped_grid_points;
        continue;
      }
      const int neg = static_cast<int>(std::lower_bound(ev.begin(), ev.end(), 0.0) - ev.begin());
      if (prev_neg >= 0) {
        for (int j = neg; j < prev_neg; ++j) {
          out.roots.push_back(refine_branch(spec, j, prev_k, prev[j], k, ev[j], options.tol));
        }
      }
      prev_k = k;
      prev = std::move(ev);
      prev_neg = neg;
    }
  }
  std::sort(out.roots.begin(), out.roots.end());

  if (spec.symmetry == GraphSymmetry::kGsePaired && out.roots.size() >= 2) {
    const Real spacing = 2.0 * kPi / total;
    for (std::size_t i = 0; i + 1 < out.roots.size(); i += 2) {
      out.max_doublet_splitting = std::max(out.max_doublet_splitting, out.roots[i + 1] - out.roots[i]);
      if (i + 2 < out.roots.size() && out.roots[i + 2] - out.roots[i + 1] < 1e-6 * spacing) {
        ++out.near_degenerate_flags;
      }
    }
  }
  return out;
}

SpectrumSample graph_spectrum_sample(const GraphSpec& spec, const SecularSpectrum& secular) {
  std::vector<Real> roots = secular.roots;
  if (roots.size() % 2 != 0) roots.pop_back();
  SpectrumSample out = kramers_collapse(std::move(roots));
  std::vector<Real> ghz;
  ghz.reserve(out.collapsed_levels.size());
  for (Real k : out.collapsed_levels) ghz.push_back(wavenumber_to_ghz(k));
  // One partner per doublet: half the optical length.
  out.unfolded = weyl_unfold_graph(ghz, 0.5 * spec.total_length());
  out.label.ensemble = "graph";
  return out;
}

GraphScatterSample graph_smatrix(const GraphSpec& spec, Real k, Real eta) {
  if (spec.leads.empty()) fail(ErrorKind::kInvalidInput, "graph has no leads");
  if (!(eta >= 0.0)) fail(ErrorKind::kInvalidInput, "eta must be >= 0");
  const int n = spec.vertex_count;
  const int m = static_cast<int>(spec.leads.size());
  MatrixXr w = MatrixXr::Zero(n, m);
  for (int l = 0; l < m; ++l) w(spec.leads[l], l) = 1.0;

  MatrixXc h = eta > 0.0 ? h_matrix(spec, Complex(k, k * eta)) : h_matrix(spec, k);
  h += Complex(0.0, 1.0) * (w * w.transpose()).cast<Complex>();
  Eigen::PartialPivLU<MatrixXc> lu(h);
  const MatrixXc x = lu.solve(w.cast<Complex>());
  if (!x.allFinite() || lu.rcond() < 1e-14) {
    fail(ErrorKind::kNumericalFailure, "singular open-graph resolvent at k = " + std::to_string(k));
  }
  GraphScatterSample out;
  out.k = k;
  out.leads = spec.leads;
  out.s = Complex(0.0, 2.0) * (w.transpose().cast<Complex>() * x) - MatrixXc::Identity(m, m);
  return out;
}

std::vector<Real> weyl_unfold_graph(const std::vector<Real>& frequencies_ghz, Real total_optical_length) {
  if (!(total_optical_length > 0.0)) fail(ErrorKind::kInvalidInput, "optical length must be positive");
  std::vector<Real> out;
  out.reserve(frequencies_ghz.size());
  for (std::size_t i = 0; i < frequencies_ghz.size(); ++i) {
    const Real nu = frequencies_ghz[i];
    if (!(nu > 0.0)) fail(ErrorKind::kInvalidInput, "frequencies must be positive");
    if (i > 0 && nu < frequencies_ghz[i - 1]) fail(ErrorKind::kInvalidInput, "frequencies must be ascending");
    out.push_back(2.0 * total_optical_length * nu * 1e9 / kSpeedOfLight);
  }
  return out;
}

}  // namespace kramers
