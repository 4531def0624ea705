#include "kramers/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "kramers/analytic.hpp"

namespace kramers::scattering {
namespace {

constexpr Complex kI{0.0, 1.0};

// Unit-norm eigenvector columns of an auxiliary sample, one block of
// `multiplicity` columns per channel.
MatrixXc channel_columns(const CouplingSpec& spec, RandomStream& rng) {
  const int dim = spec.dimension();
  const int channels = spec.channel_count();
  MatrixXc cols(dim, channels * spec.multiplicity());
  if (spec.symmetry == SymmetryClass::GSE) {
    const QuaternionHermitian aux = sample_gse(spec.n, rng);
    const HermitianEigen es = hermitian_eigen(aux.matrix());
    const MatrixXr y = symplectic_unit(spec.n);
    for (int c = 0; c < channels; ++c) {
      const Eigen::VectorXcd psi = es.vectors.col(2 * c);
      cols.col(2 * c) = psi;
      cols.col(2 * c + 1) = y * psi.conjugate();
    }
  } else {
    cols = hermitian_eigen(sample_gue(dim, rng)).vectors.leftCols(channels);
  }
  return cols;
}

// Column norm^2 = 2 pi (2N) w^2 in the (i/2) W W^dagger convention.
Real column_scale(const CouplingSpec& spec) { return std::sqrt(2.0 * kPi * spec.dimension()); }

Real amplitude_for(Real t, Real d) { return t > 0.0 ? inverse_transmission(t, d) : 0.0; }

template <typename F>
void parallel_for(int count, int workers, F&& body) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

void CouplingSpec::validate() const {
  if (n < 1) fail(ErrorKind::kInvalidDimension, "n must be positive");
  if (lambda < 0) fail(ErrorKind::kInvalidInput, "lambda must be non-negative");
  if (open_transmissions.empty()) fail(ErrorKind::kInvalidInput, "at least one open channel is required");
  for (Real t : open_transmissions) {
    if (!(t > 0.0 && t <= 1.0)) fail(ErrorKind::kInvalidInput, "open transmissions must lie in (0, 1]");
  }
  if (!(fictitious_transmission >= 0.0 && fictitious_transmission <= 1.0)) {
    fail(ErrorKind::kInvalidInput, "fictitious transmission must lie in [0, 1]");
  }
  const int available = symmetry == SymmetryClass::GSE ? n : 2 * n;
  if (channel_count() >= available) {
    fail(ErrorKind::kInvalidDimension, "channel count " + std::to_string(channel_count()) +
                                           " must stay below the number of eigenvectors " + std::to_string(available));
  }
  if (symmetry == SymmetryClass::GOE) fail(ErrorKind::kInvalidInput, "orthogonal ensembles are not supported");
  if (mean_spacing && !(*mean_spacing > 0.0)) fail(ErrorKind::kInvalidInput, "mean spacing must be positive");
  if (!(open_scale > 0.0)) fail(ErrorKind::kInvalidInput, "open scale must be positive");
}

Real transmission(Real w, Real d) {
  if (!(d > 0.0)) fail(ErrorKind::kInvalidInput, "mean spacing must be positive");
  const Real x = kPi * kPi * w * w / d;
  return 4.0 * x / ((1.0 + x) * (1.0 + x));
}

Real inverse_transmission(Real t, Real d) {
  if (!(t > 0.0 && t <= 1.0)) fail(ErrorKind::kInvalidInput, "transmission must lie in (0, 1]");
  if (!(d > 0.0)) fail(ErrorKind::kInvalidInput, "mean spacing must be positive");
  const Real x = (2.0 - t - 2.0 * std::sqrt(1.0 - t)) / t;
  return std::sqrt(x * d) / kPi;
}

std::vector<Real> coupling_weights(const Coupling& coupling) {
  const Real norm = 2.0 * kPi * coupling.w.rows();
  std::vector<Real> out;
  for (std::size_t c = 0; c < coupling.amplitudes.size(); ++c) {
    out.push_back(coupling.w.col(c * coupling.multiplicity).squaredNorm() / norm);
  }
  return out;
}

Coupling build_coupling(const CouplingSpec& spec, Real d, RandomStream& rng) {
  spec.validate();
  Coupling out;
  out.multiplicity = spec.multiplicity();
  out.w = channel_columns(spec, rng);
  const Real scale = column_scale(spec);
  for (Real t : spec.open_transmissions) out.amplitudes.push_back(spec.open_scale * amplitude_for(t, d));
  for (int f = 0; f < spec.lambda; ++f) out.amplitudes.push_back(amplitude_for(spec.fictitious_transmission, d));
  for (std::size_t c = 0; c < out.amplitudes.size(); ++c) {
    out.w.middleCols(c * out.multiplicity, out.multiplicity) *= scale * out.amplitudes[c];
  }
  out.open_columns = static_cast<int>(spec.open_transmissions.size()) * out.multiplicity;
  return out;
}

MatrixXc heidelberg_smatrix(const MatrixXc& h, const MatrixXc& w, Real e) {
  if (h.rows() != h.cols() || w.rows() != h.rows()) fail(ErrorKind::kInvalidShape, "H and W dimensions disagree");
  MatrixXc a = -h + 0.5 * kI * w * w.adjoint();
  a.diagonal().array() += e;
  Eigen::PartialPivLU<MatrixXc> lu(a);
  const Real rcond = lu.rcond();
  if (!(rcond > 1e-14)) fail(ErrorKind::kNumericalFailure, "singular resolvent at e = " + std::to_string(e));
  MatrixXc s = -kI * (w.adjoint() * lu.solve(w));
  s.diagonal().array() += 1.0;
  if (!s.allFinite()) fail(ErrorKind::kNumericalFailure, "non-finite S at e = " + std::to_string(e));
  return s;
}

MatrixXc heidelberg_smatrix(const QuaternionHermitian& h, const Coupling& coupling, Real e) {
  return heidelberg_smatrix(h.matrix(), coupling.w, e);
}

KMatrixValue k_matrix(Complex s) {
  if (std::abs(s + 1.0) < 1e-12) fail(ErrorKind::kPoleProximity, "S = -1 is a pole of K");
  KMatrixValue out;
  out.k = kI * (s - 1.0) / (s + 1.0);
  out.u = out.k.real();
  out.v = -out.k.imag();
  out.x = out.v > 0.0 ? (out.u * out.u + out.v * out.v + 1.0) / (2.0 * out.v) : std::numeric_limits<Real>::infinity();
  return out;
}

std::vector<Real> ScatteringEnsemble::column(Real ScatterRecord::*field) const {
  std::vector<Real> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.*field);
  return out;
}

Real ScatteringEnsemble::mean_reflection() const {
  if (records.empty()) fail(ErrorKind::kDegenerateEnsemble, "empty ensemble");
  Real sum = 0.0;
  for (const auto& r : records) sum += r.reflection;
  return sum / records.size();
}

std::vector<Real> energy_grid(const CouplingSpec& spec, int energies, Real band_fraction) {
  if (energies < 1) fail(ErrorKind::kInvalidInput, "need at least one energy");
  if (!(band_fraction > 0.0 && band_fraction < 1.0)) fail(ErrorKind::kInvalidInput, "band fraction must lie in (0, 1)");
  const Real radius =
      spec.symmetry == SymmetryClass::GSE ? gse_semicircle_radius(spec.n) : gue_semicircle_radius(spec.dimension());
  const Real half = band_fraction * radius;
  std::vector<Real> grid(energies, 0.0);
  if (energies == 1) return grid;
  for (int j = 0; j < energies; ++j) grid[j] = -half + 2.0 * half * j / (energies - 1);
  return grid;
}

Real central_mean_spacing(const std::vector<Real>& raw_levels) {
  const std::size_t m = raw_levels.size();
  if (m < 4) fail(ErrorKind::kInvalidInput, "need at least 4 levels to measure the spacing");
  const std::size_t lo = m / 4, hi = (3 * m) / 4;
  // Half-width t (in units of the radius) of the symmetric window holding
  // this fraction of a semicircle; it converts the measured width into a
  // radius and hence into the spacing at e = 0.
  const Real fraction = static_cast<Real>(hi - lo) / m;
  Real a = 0.0, b = 1.0;
  for (int i = 0; i < 60; ++i) {
    const Real t = 0.5 * (a + b);
    (semicircle_cdf(t, 1.0) - semicircle_cdf(-t, 1.0) < fraction ? a : b) = t;
  }
  const Real radius = 0.5 * (raw_levels[hi] - raw_levels[lo]) / (0.5 * (a + b));
  return kPi * radius / (2.0 * m);
}

RealizationModel realization_model(const EnsembleConfig& config, int realization) {
  const CouplingSpec& spec = config.coupling;
  spec.validate();
  RandomStream rng(config.seed, static_cast<std::uint64_t>(realization));
  RandomStream coupling_rng = rng.split(1);
  RealizationModel model;
  if (spec.symmetry == SymmetryClass::GSE) {
    const std::vector<Real> raw = hermitian_eigenvalues(sample_gse(spec.n, rng).matrix());
    model.d = spec.mean_spacing ? *spec.mean_spacing : central_mean_spacing(raw);
    model.levels.resize(2 * spec.n);
    for (int k = 0; k < spec.n; ++k) {
      model.levels(k) = model.levels(k + spec.n) = 0.5 * (raw[2 * k] + raw[2 * k + 1]);
    }
  } else {
    const std::vector<Real> raw = hermitian_eigenvalues(sample_gue(spec.dimension(), rng));
    model.d = spec.mean_spacing ? *spec.mean_spacing : central_mean_spacing(raw);
    model.levels = Eigen::Map<const Eigen::VectorXd>(raw.data(), raw.size());
  }
  model.columns = channel_columns(spec, coupling_rng);
  return model;
}

EnsembleCache::EnsembleCache(const EnsembleConfig& config) : config_(config) {
  const CouplingSpec& spec = config_.coupling;
  spec.validate();
  if (config_.realizations < 1) fail(ErrorKind::kInvalidInput, "need at least one realization");
  grid_ = scattering::energy_grid(spec, config_.energies, config_.band_fraction);
  realizations_.resize(config_.realizations);

  const int m = spec.multiplicity();
  const int open_cols = static_cast<int>(spec.open_transmissions.size()) * m;
  const int fict_cols = spec.lambda * m;

  parallel_for(config_.realizations, config_.workers, [&](int r) {
    Realization& out = realizations_[r];
    try {
      const RealizationModel model = realization_model(config_, r);
      const Eigen::VectorXd& lambda = model.levels;
      out.d = model.d;
      const Real scale = column_scale(spec);
      MatrixXc b_open = scale * model.columns.leftCols(open_cols);
      for (std::size_t c = 0; c < spec.open_transmissions.size(); ++c) {
        b_open.middleCols(c * m, m) *= amplitude_for(spec.open_transmissions[c], out.d);
      }
      const MatrixXc b_fict = scale * model.columns.rightCols(fict_cols);

      for (int j = 0; j < static_cast<int>(grid_.size()); ++j) {
        Entry entry{r, j, {}, {}, {}, false};
        const Eigen::ArrayXd g = 0.5 / (grid_[j] - lambda.array());
        if (!g.allFinite()) {
          entry.failed = true;
          out.failure = "energy " + std::to_string(grid_[j]) + " hits an eigenvalue";
          out.entries.push_back(std::move(entry));
          continue;
        }
        const MatrixXc gb_open = g.matrix().asDiagonal() * b_open;
        entry.k_oo = b_open.adjoint() * gb_open;
        if (fict_cols > 0) {
          const MatrixXc gb_fict = g.matrix().asDiagonal() * b_fict;
          MatrixXc k_ff = b_fict.adjoint() * gb_fict;
          k_ff = 0.5 * (k_ff + k_ff.adjoint()).eval();
          HermitianEigen kes = hermitian_eigen(k_ff);
          entry.p = gb_open.adjoint() * b_fict * kes.vectors;
          entry.kappa = std::move(kes.values);
        }
        out.entries.push_back(std::move(entry));
      }
    } catch (const Error& e) {
      out.failure = e.what();
      out.entries.clear();
    }
  });

  for (std::size_t r = 0; r < realizations_.size(); ++r) {
    const auto& real = realizations_[r];
    int bad = real.entries.empty() ? static_cast<int>(grid_.size()) : 0;
    for (const auto& e : real.entries) bad += e.failed ? 1 : 0;
    if (bad > 0) {
      failures_ += bad;
      failure_log_.push_back("realization " + std::to_string(r) + ": " + real.failure);
    }
  }
}

Eigen::MatrixXcd EnsembleCache::open_smatrix(const Entry& entry, Real c, Real open_scale) const {
  const Real a2 = open_scale * open_scale;
  MatrixXc mtx = (kI * a2) * entry.k_oo;
  mtx.diagonal().array() += 1.0;
  if (c > 0.0 && entry.kappa.size() > 0) {
    const Real c2 = c * c;
    const Eigen::VectorXcd weight =
        (a2 * c2 / (1.0 + kI * c2 * entry.kappa.array().cast<Complex>())).matrix();
    mtx += entry.p * weight.asDiagonal() * entry.p.adjoint();
  }
  MatrixXc s = 2.0 * mtx.inverse();
  s.diagonal().array() -= 1.0;
  return s;
}

ScatteringEnsemble EnsembleCache::evaluate(Real fictitious_transmission) const {
  return evaluate(fictitious_transmission, config_.coupling.open_scale);
}

ScatteringEnsemble EnsembleCache::evaluate(Real fictitious_transmission, Real open_scale) const {
  if (!(fictitious_transmission >= 0.0 && fictitious_transmission <= 1.0)) {
    fail(ErrorKind::kInvalidInput, "fictitious transmission must lie in [0, 1]");
  }
  if (!(open_scale > 0.0)) fail(ErrorKind::kInvalidInput, "open scale must be positive");
  ScatteringEnsemble ens;
  ens.config = config_;
  ens.config.coupling.fictitious_transmission = fictitious_transmission;
  ens.config.coupling.open_scale = open_scale;
  ens.energy_grid = grid_;
  ens.diagnostics.failures = failures_;
  ens.diagnostics.failure_log = failure_log_;
  const bool gse = config_.coupling.symmetry == SymmetryClass::GSE;
  Real d_sum = 0.0;
  int d_count = 0;
  for (const auto& real : realizations_) {
    if (real.entries.empty()) continue;
    d_sum += real.d;
    ++d_count;
    const Real c = amplitude_for(fictitious_transmission, real.d);
    for (const auto& entry : real.entries) {
      if (entry.failed) continue;
      const MatrixXc s = open_smatrix(entry, c, open_scale);
      if (!s.allFinite()) {
        ++ens.diagnostics.failures;
        ens.diagnostics.failure_log.push_back("realization " + std::to_string(entry.realization) +
                                              ": singular open block at e = " + std::to_string(grid_[entry.energy_index]));
        continue;
      }
      if (gse) {
        ens.diagnostics.max_kramers_mismatch = std::max(ens.diagnostics.max_kramers_mismatch, std::abs(s(0, 0) - s(1, 1)));
        ens.diagnostics.max_cross_element =
            std::max({ens.diagnostics.max_cross_element, std::abs(s(0, 1)), std::abs(s(1, 0))});
      }
      ScatterRecord rec;
      rec.realization = entry.realization;
      rec.energy_index = entry.energy_index;
      rec.e = grid_[entry.energy_index];
      rec.s = s(0, 0);
      rec.r = std::abs(rec.s);
      rec.reflection = std::norm(rec.s);
      rec.theta = std::arg(rec.s);
      try {
        const KMatrixValue k = k_matrix(rec.s);
        rec.u = k.u;
        rec.v = k.v;
        rec.x = k.x;
      } catch (const Error& e) {
        ++ens.diagnostics.failures;
        ens.diagnostics.failure_log.push_back("realization " + std::to_string(entry.realization) + ": " + e.what());
        continue;
      }
      ens.records.push_back(rec);
    }
  }
  ens.diagnostics.mean_spacing = d_count > 0 ? d_sum / d_count : 0.0;
  const Real total = static_cast<Real>(config_.realizations) * grid_.size();
  if (ens.diagnostics.failures > 0.01 * total) {
    fail(ErrorKind::kNumericalFailure, std::to_string(ens.diagnostics.failures) + " of " +
                                           std::to_string(static_cast<long>(total)) + " records failed; first: " +
                                           (ens.diagnostics.failure_log.empty() ? "" : ens.diagnostics.failure_log.front()));
  }
  return ens;
}

EnsembleCache::Moments EnsembleCache::moments(Real fictitious_transmission, Real open_scale) const {
  Moments m;
  std::size_t count = 0;
  for (const auto& real : realizations_) {
    if (real.entries.empty()) continue;
    const Real c = amplitude_for(fictitious_transmission, real.d);
    for (const auto& entry : real.entries) {
      if (entry.failed) continue;
      const Complex s = open_smatrix(entry, c, open_scale)(0, 0);
      if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) continue;
      m.mean_s += s;
      m.mean_reflection += std::norm(s);
      ++count;
    }
  }
  if (count == 0) fail(ErrorKind::kDegenerateEnsemble, "no valid records");
  m.mean_s /= static_cast<Real>(count);
  m.mean_reflection /= count;
  return m;
}

ScatteringEnsemble run_ensemble(const EnsembleConfig& config) {
  const EnsembleCache cache(config);
  return cache.evaluate(config.coupling.fictitious_transmission);
}

void Calibration::apply(EnsembleConfig& config) const {
  config.coupling.lambda = lambda;
  config.coupling.fictitious_transmission = fictitious_transmission;
  config.coupling.open_scale = open_scale;
}

namespace {

// Illinois regula falsi for a decreasing f with f(a) > 0 > f(b).
template <typename F>
Real illinois(F&& f, Real a, Real b, Real fa, Real fb, Real tol, int max_iterations, int& iterations) {
  int side = 0;
  Real x = a, fx = fa;
  for (iterations = 1; iterations <= max_iterations; ++iterations) {
    x = (a * fb - b * fa) / (fb - fa);
    fx = f(x);
    if (std::abs(fx) <= tol || b - a < 1e-13 * std::max(1.0, std::abs(b))) return x;
    if (fx > 0.0) {
      a = x;
      fa = fx;
      if (side == 1) fb *= 0.5;
      side = 1;
    } else {
      b = x;
      fb = fx;
      if (side == -1) fa *= 0.5;
      side = -1;
    }
  }
  fail(ErrorKind::kCalibrationFailure, "no convergence after " + std::to_string(max_iterations) + " steps");
}

}  // namespace

Calibration calibrate_tau_abs(Real gamma_target, const EnsembleCache& cache, const CalibrationOptions& options) {
  if (!(gamma_target > 0.0)) fail(ErrorKind::kInvalidInput, "gamma target must be positive");
  const CouplingSpec& spec = cache.config().coupling;
  if (spec.lambda < 1) fail(ErrorKind::kCalibrationFailure, "calibration needs at least one fictitious channel");
  Calibration out;
  out.lambda = spec.lambda;
  out.target_mean = analytic::mean_reflection({gamma_target, spec.symmetry});

  // Re <S> for perfect coupling is 0; below it, (1 - x)/(1 + x) on the sub-critical branch.
  const Real t_open = spec.open_transmissions.front();
  const Real x_open = (2.0 - t_open - 2.0 * std::sqrt(1.0 - t_open)) / t_open;
  const Real s_target = (1.0 - x_open) / (1.0 + x_open);

  // Re <S> decreases with the open scale; solved in log scale.
  auto scale_for = [&](Real tf) {
    if (!options.match_average_s) return spec.open_scale;
    auto g = [&](Real log_a) { return cache.moments(tf, std::exp(log_a)).mean_s.real() - s_target; };
    Real lo = std::log(0.25), hi = std::log(4.0);
    const Real glo = g(lo), ghi = g(hi);
    if (!(glo > 0.0 && ghi < 0.0)) {
      fail(ErrorKind::kCalibrationFailure, "open coupling scale for Re <S> = " + std::to_string(s_target) +
                                               " not bracketed in [1/4, 4] at T_f = " + std::to_string(tf));
    }
    int it = 0;
    return std::exp(illinois(g, lo, hi, glo, ghi, options.s_tolerance, options.max_iterations, it));
  };

  // <R> decreases monotonically with T_f.
  auto f = [&](Real tf) { return cache.moments(tf, scale_for(tf)).mean_reflection - out.target_mean; };
  const Real fa = f(0.0), fb = f(1.0);
  if (!(fa > 0.0 && fb < 0.0)) {
    fail(ErrorKind::kCalibrationFailure,
         "target <R> = " + std::to_string(out.target_mean) + " not bracketed: <R>(tau_abs = 0) = " +
             std::to_string(fa + out.target_mean) + ", <R>(tau_abs = " + std::to_string(2.0 * spec.lambda) +
             ") = " + std::to_string(fb + out.target_mean) + "; increase lambda");
  }
  out.fictitious_transmission = illinois(f, 0.0, 1.0, fa, fb, options.tolerance, options.max_iterations, out.iterations);
  out.tau_abs = 2.0 * spec.lambda * out.fictitious_transmission;
  out.open_scale = scale_for(out.fictitious_transmission);
  const auto m = cache.moments(out.fictitious_transmission, out.open_scale);
  out.achieved_mean = m.mean_reflection;
  out.achieved_mean_s = m.mean_s;
  return out;
}

Calibration calibrate_tau_abs(Real gamma_target, const EnsembleConfig& config, const CalibrationOptions& options) {
  const EnsembleCache cache(config);
  return calibrate_tau_abs(gamma_target, cache, options);
}

Autocorrelation autocorrelation(const ScatteringEnsemble& ensemble, const std::vector<int>& lags) {
  const int energies = static_cast<int>(ensemble.energy_grid.size());
  const int realizations = ensemble.config.realizations;
  if (energies < 2) fail(ErrorKind::kInvalidInput, "autocorrelation needs a grid of at least two energies");
  for (int lag : lags) {
    if (lag < 0 || lag >= energies) fail(ErrorKind::kInvalidInput, "lag outside the energy grid");
  }

  // Dense per-realization table; missing records are NaN.
  const Complex missing(std::numeric_limits<Real>::quiet_NaN(), 0.0);
  std::vector<Complex> table(static_cast<std::size_t>(realizations) * energies, missing);
  for (const auto& r : ensemble.records) table[static_cast<std::size_t>(r.realization) * energies + r.energy_index] = r.s;
  auto valid = [](Complex z) { return !std::isnan(z.real()); };

  // Per-realization sums: S, count, and S(e) S*(e + lag) pair sums per lag.
  std::vector<Complex> s_sum(realizations, 0.0);
  std::vector<Real> s_count(realizations, 0.0);
  std::vector<std::vector<Complex>> pair_sum(lags.size() + 1, std::vector<Complex>(realizations, 0.0));
  std::vector<std::vector<Real>> pair_count(lags.size() + 1, std::vector<Real>(realizations, 0.0));
  std::vector<int> all_lags(lags);
  all_lags.push_back(0);  // the denominator uses the same estimator at lag 0
  for (int r = 0; r < realizations; ++r) {
    const Complex* row = &table[static_cast<std::size_t>(r) * energies];
    for (int j = 0; j < energies; ++j) {
      if (!valid(row[j])) continue;
      s_sum[r] += row[j];
      s_count[r] += 1.0;
    }
    for (std::size_t l = 0; l < all_lags.size(); ++l) {
      for (int j = 0; j + all_lags[l] < energies; ++j) {
        const Complex a = row[j], b = row[j + all_lags[l]];
        if (!valid(a) || !valid(b)) continue;
        pair_sum[l][r] += a * std::conj(b);
        pair_count[l][r] += 1.0;
      }
    }
  }

  auto estimate = [&](int skip, std::size_t l) {
    Complex s = 0.0, p = 0.0, p0 = 0.0;
    Real n = 0.0, np = 0.0, np0 = 0.0;
    for (int r = 0; r < realizations; ++r) {
      if (r == skip) continue;
      s += s_sum[r];
      n += s_count[r];
      p += pair_sum[l][r];
      np += pair_count[l][r];
      p0 += pair_sum.back()[r];
      np0 += pair_count.back()[r];
    }
    const Complex mean = s / n;
    const Real den = (p0 / np0).real() - std::norm(mean);
    if (!(den >= 1e-14)) fail(ErrorKind::kDegenerateEnsemble, "S does not fluctuate");
    return (p / np - std::norm(mean)) / den;
  };

  Autocorrelation out;
  const Real step = ensemble.energy_grid[1] - ensemble.energy_grid[0];
  const Real d = ensemble.diagnostics.mean_spacing > 0.0 ? ensemble.diagnostics.mean_spacing : 1.0;
  for (std::size_t l = 0; l < lags.size(); ++l) {
    out.lags.push_back(lags[l]);
    out.epsilon.push_back(lags[l] * step / d);
    const Complex c = estimate(-1, l);
    out.value.push_back(c);
    out.modulus.push_back(std::abs(c));
    Real err = 0.0;
    if (lags[l] != 0 && realizations > 1) {
      std::vector<Real> jack(realizations);
      Real mean = 0.0;
      for (int r = 0; r < realizations; ++r) mean += (jack[r] = std::abs(estimate(r, l)));
      mean /= realizations;
      for (Real v : jack) err += (v - mean) * (v - mean);
      err = std::sqrt(err * (realizations - 1) / realizations);
    }
    out.modulus_error.push_back(err);
  }
  // Degenerate ensembles must fail even if only lag 0 was requested.
  estimate(-1, lags.size());
  return out;
}

}  // namespace kramers::scattering
