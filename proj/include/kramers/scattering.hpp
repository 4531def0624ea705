#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kramers/errors.hpp"
#include "kramers/rmt.hpp"
#include "kramers/types.hpp"

namespace kramers::scattering {

/// Channel couplings of a Heidelberg-model ensemble.
///
/// Channel weights follow the transmission convention T = 4x/(1+x)^2 with
/// x = pi^2 w^2 / d, where d is the mean spacing of the 2N raw levels. For a
/// symplectic ensemble every channel is Kramers-doubled into two columns.
struct CouplingSpec {
  int n = 100;                              // quaternion dimension (GUE: matrix size 2n)
  std::vector<Real> open_transmissions{1.0};
  int lambda = 30;                          // fictitious channel count
  Real fictitious_transmission = 0.0;       // T_f in [0, 1]
  std::optional<Real> mean_spacing;         // unset: measured per realization
  SymmetryClass symmetry = SymmetryClass::GSE;
  // Multiplies the open-channel amplitudes; calibration sets it so that the
  // absorbing ensemble's <S> has the unitarity deficit the targets ask for.
  Real open_scale = 1.0;

  Real tau_abs() const { return 2.0 * lambda * fictitious_transmission; }
  int channel_count() const { return static_cast<int>(open_transmissions.size()) + lambda; }
  /// Columns per channel: 2 for GSE, 1 for GUE.
  int multiplicity() const { return symmetry == SymmetryClass::GSE ? 2 : 1; }
  int dimension() const { return 2 * n; }
  void validate() const;
};

/// T for coupling amplitude w at mean spacing d.
Real transmission(Real w, Real d);
/// Sub-critical w (pi^2 w^2 / d <= 1) giving transmission T in (0, 1].
Real inverse_transmission(Real t, Real d);

/// Coupling matrix, one column per (channel, Kramers partner), 2N rows. The
/// complex columns of the symplectic case replace W^T by W^dagger.
struct Coupling {
  MatrixXc w;
  std::vector<Real> amplitudes;  // per channel
  int open_columns = 0;
  int multiplicity = 1;
};

/// Per-channel w_n^2 recovered from diag(W^dagger W).
std::vector<Real> coupling_weights(const Coupling& coupling);

/// Columns built from eigenvectors of an auxiliary sample of the spec's class,
/// scaled so that channel n realizes its target transmission at spacing d.
Coupling build_coupling(const CouplingSpec& spec, Real d, RandomStream& rng);

/// S = 1 - i W^dagger (e - H + (i/2) W W^dagger)^{-1} W over all columns.
MatrixXc heidelberg_smatrix(const MatrixXc& h, const MatrixXc& w, Real e);
MatrixXc heidelberg_smatrix(const QuaternionHermitian& h, const Coupling& coupling, Real e);

struct KMatrixValue {
  Complex k;  // u - i v
  Real u = 0.0;
  Real v = 0.0;
  Real x = 0.0;  // (u^2 + v^2 + 1) / (2 v); +inf when v = 0
};

/// K = i (S - 1) / (S + 1) for a scalar S.
KMatrixValue k_matrix(Complex s);

struct ScatterRecord {
  int realization = 0;
  int energy_index = 0;
  Real e = 0.0;
  Complex s;
  Real r = 0.0;
  Real reflection = 0.0;
  Real theta = 0.0;
  Real u = 0.0;
  Real v = 0.0;
  Real x = 0.0;
};

struct EnsembleConfig {
  CouplingSpec coupling;
  int realizations = 400;
  int energies = 60;
  Real band_fraction = 0.05;  // energies cover this fraction of the band width at the center
  std::uint64_t seed = 1;
  int workers = 1;
};

struct EnsembleDiagnostics {
  int failures = 0;
  Real max_kramers_mismatch = 0.0;  // max |S11 - S22| (GSE)
  Real max_cross_element = 0.0;     // max |S12| (GSE)
  Real mean_spacing = 0.0;          // average measured d
  std::vector<std::string> failure_log;
};

struct ScatteringEnsemble {
  EnsembleConfig config;
  std::vector<ScatterRecord> records;  // sorted by (realization, energy index)
  std::vector<Real> energy_grid;
  std::optional<Real> gamma;           // calibration target if any
  EnsembleDiagnostics diagnostics;

  std::vector<Real> column(Real ScatterRecord::*field) const;
  Real mean_reflection() const;
};

/// Uniform energy grid centred at e = 0 spanning band_fraction of the band.
std::vector<Real> energy_grid(const CouplingSpec& spec, int energies, Real band_fraction);

/// Level spacing at the band center, from the width of the central half of
/// the ascending raw levels with the semicircle curvature taken out.
Real central_mean_spacing(const std::vector<Real>& raw_levels);

/// One realization in the eigenbasis of H. The ensembles are invariant under
/// unitary (GSE: symplectic) rotations, so H is replaced by its eigenvalues
/// and the coupling columns, eigenvectors of an independent auxiliary sample,
/// are read in that basis. For GSE the basis is ordered (|1..N>, T|1..N>) and
/// `levels` repeats each doublet energy. Realization r draws H from stream
/// (seed, r) and the columns from its split(1).
struct RealizationModel {
  Eigen::VectorXd levels;  // diagonal of H, 2N entries
  MatrixXc columns;        // unit-norm coupling columns, channel-major
  Real d = 0.0;            // band-centre spacing used for the amplitudes
};

RealizationModel realization_model(const EnsembleConfig& config, int realization);

/// Per-energy open-channel reduction. The fictitious channels enter only
/// through a scale c (their common amplitude), so S_open can be re-evaluated
/// for any absorption without touching the Hamiltonian again.
class EnsembleCache {
 public:
  explicit EnsembleCache(const EnsembleConfig& config);

  const EnsembleConfig& config() const { return config_; }
  const std::vector<Real>& energy_grid() const { return grid_; }

  /// Ensemble at fictitious transmission t_f and open-amplitude scale (the
  /// cache's Lambda is fixed). The one-argument form uses the config's scale.
  ScatteringEnsemble evaluate(Real fictitious_transmission) const;
  ScatteringEnsemble evaluate(Real fictitious_transmission, Real open_scale) const;

  struct Moments {
    Complex mean_s;
    Real mean_reflection = 0.0;
  };
  /// <S> and <R> of the first open channel.
  Moments moments(Real fictitious_transmission, Real open_scale) const;

 private:
  struct Entry {
    int realization;
    int energy_index;
    Eigen::MatrixXcd k_oo;  // open block of K, unit open scale
    Eigen::MatrixXcd p;     // K_of Q at unit fictitious amplitude
    Eigen::VectorXd kappa;  // eigenvalues of K_ff
    bool failed = false;
  };
  struct Realization {
    Real d = 0.0;
    std::vector<Entry> entries;
    std::string failure;
  };

  Eigen::MatrixXcd open_smatrix(const Entry& entry, Real c, Real open_scale) const;

  EnsembleConfig config_;
  std::vector<Real> grid_;
  std::vector<Realization> realizations_;
  int failures_ = 0;
  std::vector<std::string> failure_log_;
};

/// Samples the ensemble. Realizations are independent streams merged in
/// realization order, so the result does not depend on `workers`.
ScatteringEnsemble run_ensemble(const EnsembleConfig& config);

struct CalibrationOptions {
  Real tolerance = 1e-5;    // on <R>
  Real s_tolerance = 1e-5;  // on Re <S>
  int max_iterations = 60;
  bool match_average_s = true;  // also tune open_scale
};

struct Calibration {
  Real tau_abs = 0.0;
  int lambda = 0;
  Real fictitious_transmission = 0.0;
  Real open_scale = 1.0;
  Real target_mean = 0.0;
  Real achieved_mean = 0.0;
  Complex achieved_mean_s;
  int iterations = 0;

  /// Copies the calibrated absorption and open scale into a config.
  void apply(EnsembleConfig& config) const;
};

/// tau_abs such that the Monte Carlo <R> of `config` matches the analytic
/// <R>(gamma_target) of the coupling's class. Lambda is held fixed, so
/// tau_abs is bracketed in (0, 2 Lambda]. With match_average_s the open
/// amplitude is rescaled at every step so that Re <S> = (1 - x)/(1 + x) for
/// the target transmission: at finite N the fictitious channels shift the
/// open channel's average coupling, and the analytic densities assume the
/// nominal one.
Calibration calibrate_tau_abs(Real gamma_target, const EnsembleConfig& config, const CalibrationOptions& options = {});
Calibration calibrate_tau_abs(Real gamma_target, const EnsembleCache& cache, const CalibrationOptions& options = {});

struct Autocorrelation {
  std::vector<int> lags;        // multiples of the grid step
  std::vector<Real> epsilon;    // lag * step / mean spacing
  std::vector<Complex> value;
  std::vector<Real> modulus;
  std::vector<Real> modulus_error;  // jackknife over realizations
};

/// C(eps) = [<S(e) S*(e+eps)> - |<S>|^2] / [<|S|^2> - |<S>|^2], averaged over
/// e inside each realization's grid and over realizations.
Autocorrelation autocorrelation(const ScatteringEnsemble& ensemble, const std::vector<int>& lags);

}  // namespace kramers::scattering
