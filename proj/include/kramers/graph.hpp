#pragma once

#include <cmath>
#include <iosfwd>
#include <string>
#include <vector>

#include "kramers/errors.hpp"
#include "kramers/rmt.hpp"
#include "kramers/types.hpp"

namespace kramers {

/// |sin(kL)| below this is treated as sitting on a pole of h(k).
inline constexpr Real kPoleGuard = 1e-8;

struct Bond {
  int from = 0;
  int to = 0;
  Real length = 0.0;       // m
  Real vector_phase = 0.0; // A*L along from -> to, rad
  Real extra_phase = 0.0;  // phi along from -> to, rad
};

enum class GraphSymmetry { kFree, kGsePaired };

/// Quantum graph with Neumann vertices. For kGsePaired graphs vertex V + i is
/// the time-reversal partner of vertex i, where V = vertex_count / 2.
struct GraphSpec {
  int vertex_count = 0;
  std::vector<Bond> bonds;
  std::vector<int> leads;  // attachment vertex per lead
  GraphSymmetry symmetry = GraphSymmetry::kFree;
  Real absorption_eta = 0.0;

  Real total_length() const;

  /// Checks lengths, endpoints, self-loops and, for kGsePaired, the pairing
  /// rules (mirrored bonds with opposite vector phase, two equal connecting
  /// bonds without vector potential, exactly one of them carrying phase pi).
  void validate() const;
};

/// Bonds of the given lengths in series (vertices 0..n), no vector potential.
GraphSpec make_path_graph(const std::vector<Real>& lengths);

/// Two fully connected GUE subgraphs of `per_subgraph` vertices with
/// incommensurate (square-root-of-prime) bond lengths, opposite vector phases
/// of magnitude pi/2, joined by bonds (0, 1') and (1, 0') with a relative
/// phase pi. The whole graph is scaled to `total_length` metres. Leads are
/// attached to vertices 2 and 2' when `with_leads` is set.
GraphSpec make_gse_graph(int per_subgraph = 4, Real total_length = 7.09, bool with_leads = false);

/// Secular matrix h(k) of the Neumann graph. Scalar is Real or Complex.
template <typename Scalar>
Matrix<Complex> h_matrix(const GraphSpec& spec, Scalar k) {
  using std::cos;
  using std::sin;
  const int n = spec.vertex_count;
  Matrix<Complex> h = Matrix<Complex>::Zero(n, n);
  for (std::size_t b = 0; b < spec.bonds.size(); ++b) {
    const auto& bond = spec.bonds[b];
    const Complex s = Complex(sin(k * bond.length));
    if (std::abs(s) < kPoleGuard) {
      fail(ErrorKind::kPoleProximity, "bond " + std::to_string(b) + " (" + std::to_string(bond.from) + "-" +
                                          std::to_string(bond.to) + ") at k = " +
                                          std::to_string(std::real(Complex(k))));
    }
    const Complex cot = Complex(cos(k * bond.length)) / s;
    h(bond.from, bond.from) -= cot;
    h(bond.to, bond.to) -= cot;
    const Real theta = bond.vector_phase + bond.extra_phase;
    h(bond.from, bond.to) += std::polar(1.0, -theta) / s;
    h(bond.to, bond.from) += std::polar(1.0, theta) / s;
  }
  return h;
}

/// Ascending eigenvalues of the Hermitian h(k) at real k.
std::vector<Real> h_eigenvalues(const GraphSpec& spec, Real k);

struct SecularOptions {
  int points_per_mean_spacing = 20;
  Real tol = 1e-12;  // absolute bisection tolerance in k
};

struct SecularSpectrum {
  std::vector<Real> roots;       // ascending, doublets listed twice
  int skipped_grid_points = 0;   // grid points discarded for pole proximity
  int intervals = 0;             // pole-free intervals scanned
  Real max_doublet_splitting = 0.0;
  int near_degenerate_flags = 0; // neighbouring doublets closer than 1e-6 of the spacing
};

/// All roots of det h(k) = 0 in [k_min, k_max]. Between consecutive poles h(k)
/// is Hermitian and increasing, so each sorted eigenvalue branch crosses zero
/// at most once per root; sign changes on the scan grid are refined by bisection.
SecularSpectrum secular_spectrum(const GraphSpec& spec, Real k_min, Real k_max,
                                 const SecularOptions& options = {});

/// Builds a SpectrumSample (raw roots, collapsed doublets, Weyl-unfolded
/// collapsed levels) for a GSE-paired graph.
SpectrumSample graph_spectrum_sample(const GraphSpec& spec, const SecularSpectrum& secular);

struct GraphScatterSample {
  Real k = 0.0;
  MatrixXc s;             // leads x leads
  std::vector<int> leads; // lead -> vertex
};

/// S(k) = 2i W^T [h(k(1 + i eta)) + i W W^T]^{-1} W - 1, the Cayley form
/// (i G - 1)(i G + 1)^{-1} with G = W^T h^{-1} W. Unitary for eta = 0.
GraphScatterSample graph_smatrix(const GraphSpec& spec, Real k, Real eta);

/// e_j = 2 L nu_j / c for frequencies in GHz and optical length L in metres.
std::vector<Real> weyl_unfold_graph(const std::vector<Real>& frequencies_ghz, Real total_optical_length);

inline Real wavenumber_to_ghz(Real k) { return k * kSpeedOfLight / (2.0 * kPi) * 1e-9; }

GraphSpec read_graph_spec(std::istream& in, const std::string& source = "<stream>");
GraphSpec read_graph_spec_file(const std::string& path);
void write_graph_spec(std::ostream& out, const GraphSpec& spec);

}  // namespace kramers
