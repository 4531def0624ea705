#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kramers/analytic.hpp"
#include "kramers/graph.hpp"
#include "kramers/io.hpp"
#include "kramers/rmt.hpp"
#include "kramers/scattering.hpp"
#include "kramers/stats.hpp"

namespace fs = std::filesystem;
using namespace kramers;
using io::Json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitAcceptance = 4;

// Thrown for checks that ran but did not hold (normalization, KS limits).
struct AcceptanceFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidDimension:
    case ErrorKind::kInvalidShape:
    case ErrorKind::kInvalidInput:
    case ErrorKind::kOutOfSupport:
    case ErrorKind::kParse: return kExitConfig;
    case ErrorKind::kInvalidReference: return kExitAcceptance;
    default: return kExitNumerical;
  }
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out = "out";
};

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open config");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path, 0, e.what());
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorKind::kParse, std::string("config key '") + key + "': " + e.what());
  }
}

// Paths inside a config are relative to the config file.
std::string resolve(const std::string& path, const std::string& config_path) {
  if (path.empty() || fs::path(path).is_absolute() || config_path.empty()) return path;
  return (fs::path(config_path).parent_path() / path).string();
}

std::uint64_t seed_of(const Common& c, const Json& cfg) {
  return c.seed ? *c.seed : get_or<std::uint64_t>(cfg, "seed", 1);
}

// Flag, then KRAMERS_WORKERS, then the config.
int workers_of(const Common& c, const Json& cfg) {
  if (c.workers) return std::max(1, *c.workers);
  if (const char* env = std::getenv("KRAMERS_WORKERS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      fail(ErrorKind::kInvalidInput, std::string("KRAMERS_WORKERS is not an integer: ") + env);
    }
  }
  return std::max(1, get_or<int>(cfg, "workers", 1));
}

std::string output_dir(const Common& c) {
  fs::create_directories(c.out);
  return c.out;
}

std::string fmt(Real x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

std::vector<Real> linspace(Real lo, Real hi, int n) {
  std::vector<Real> out(n);
  for (int i = 0; i < n; ++i) out[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return out;
}

// Reference CDF of an analytic variable over its support.
stats::ReferenceCdf reference_for(analytic::Variable v, const analytic::AbsorptionParams& p) {
  const auto [lo, hi] = analytic::support(v, p);
  return stats::ReferenceCdf([v, p](Real x) { return analytic::density(v, x, p); }, lo, hi, 1024);
}

stats::ReferenceCdf ericson_reference(analytic::Variable v) {
  const auto ev = v == analytic::Variable::kScaledReflection ? analytic::EricsonVariable::kReflection
                                                              : analytic::EricsonVariable::kAmplitude;
  return stats::ReferenceCdf([ev](Real x) { return analytic::ericson_density(ev, x); }, 0.0,
                             std::numeric_limits<Real>::infinity(), 1024);
}

// ---------------------------------------------------------------- graph-spectrum

int cmd_graph_spectrum(const Common& c, std::string spec_path, std::optional<Real> k_min_flag,
                       std::optional<Real> k_max_flag) {
  const Json cfg = load_config(c.config);
  if (spec_path.empty()) spec_path = resolve(get_or<std::string>(cfg, "spec", ""), c.config);
  if (spec_path.empty()) fail(ErrorKind::kInvalidInput, "no graph spec given (--spec or config 'spec')");
  const GraphSpec spec = read_graph_spec_file(spec_path);
  const Real k_min = k_min_flag ? *k_min_flag : get_or<Real>(cfg, "k_min", 1e-3);
  const Real k_max = k_max_flag ? *k_max_flag : get_or<Real>(cfg, "k_max", 200.0);
  SecularOptions opt;
  opt.points_per_mean_spacing = get_or<int>(cfg, "points_per_mean_spacing", opt.points_per_mean_spacing);
  opt.tol = get_or<Real>(cfg, "tol", opt.tol);
  const auto lengths = get_or<std::vector<Real>>(cfg, "number_variance_lengths", linspace(0.25, 5.0, 20));
  const int bins = get_or<int>(cfg, "bins", 40);

  const auto secular = secular_spectrum(spec, k_min, k_max, opt);
  const bool paired = spec.symmetry == GraphSymmetry::kGsePaired;
  SpectrumSample sample;
  if (paired) {
    sample = graph_spectrum_sample(spec, secular);
  } else {
    sample.raw_levels = secular.roots;
    sample.collapsed_levels = secular.roots;
    std::vector<Real> ghz;
    for (Real k : secular.roots) ghz.push_back(wavenumber_to_ghz(k));
    sample.unfolded = weyl_unfold_graph(ghz, spec.total_length());
  }

  const std::string dir = output_dir(c);
  io::Manifest manifest("graph-spectrum", 0);
  manifest.config() = {{"spec", fs::path(spec_path).filename().string()},
                       {"k_min", k_min},
                       {"k_max", k_max},
                       {"points_per_mean_spacing", opt.points_per_mean_spacing},
                       {"tol", opt.tol},
                       {"bins", bins}};
  auto write = [&](const std::string& name, const std::string& title, std::vector<std::string> comments,
                   std::vector<io::Column> cols, const std::string& label) {
    const std::string path = (fs::path(dir) / name).string();
    io::write_table(path, title, comments, cols);
    manifest.add_output(path, label);
  };
  write("raw_levels.dat", "graph eigen-wavenumbers, roots of det h(k) = 0",
        {"doublets listed twice for gse-paired graphs"}, {{"k_rad_per_m", sample.raw_levels}}, "raw roots");
  write("collapsed_levels.dat", "graph eigen-wavenumbers, one per Kramers doublet", {},
        {{"k_rad_per_m", sample.collapsed_levels}}, "collapsed roots");
  write("unfolded_levels.dat", "Weyl-unfolded graph levels", {}, {{"e", sample.unfolded}}, "unfolded levels");

  Json derived = {{"roots", secular.roots.size()},
                  {"levels", sample.collapsed_levels.size()},
                  {"intervals", secular.intervals},
                  {"skipped_grid_points", secular.skipped_grid_points},
                  {"max_doublet_splitting", secular.max_doublet_splitting},
                  {"near_degenerate_flags", secular.near_degenerate_flags}};
  if (sample.unfolded.size() >= 3) {
    const auto n = stats::nnsd({sample.unfolded}, bins, 4.0);
    std::vector<Real> centers, gse, gue;
    for (std::size_t i = 0; i < n.histogram.bins(); ++i) {
      centers.push_back(n.histogram.center(i));
      gse.push_back(stats::surmise_density(SymmetryClass::GSE, centers.back()));
      gue.push_back(stats::surmise_density(SymmetryClass::GUE, centers.back()));
    }
    write("nnsd.dat", "nearest-neighbour spacing distribution of the unfolded graph levels",
          {"reference columns: GSE and GUE Wigner surmises"},
          {{"s", centers}, {"density", n.histogram.density}, {"gse_surmise", gse}, {"gue_surmise", gue}}, "P(s)");
    auto gse_f = [](Real s) { return stats::surmise_density(SymmetryClass::GSE, s); };
    auto gue_f = [](Real s) { return stats::surmise_density(SymmetryClass::GUE, s); };
    derived["mean_spacing"] = n.mean_spacing;
    derived["l2_gse"] = stats::l2_distance(n.histogram, gse_f, 0.0, 4.0);
    derived["l2_gue"] = stats::l2_distance(n.histogram, gue_f, 0.0, 4.0);

    const auto sigma = stats::number_variance({sample.unfolded}, lengths, {10, seed_of(c, cfg)});
    write("number_variance.dat", "number variance Sigma^2(L) of the unfolded graph levels",
          {"windows placed uniformly at random"}, {{"L", sigma.grid}, {"sigma2", sigma.values}, {"error", sigma.errors}},
          "Sigma^2(L)");
    std::cout << "levels " << sample.collapsed_levels.size() << "  mean spacing " << fmt(n.mean_spacing) << "  L2(GSE) "
              << fmt(derived["l2_gse"].get<Real>()) << "  L2(GUE) " << fmt(derived["l2_gue"].get<Real>()) << "\n";
  } else {
    std::cout << "levels " << sample.collapsed_levels.size() << "\n";
  }
  manifest.derived() = derived;
  manifest.write((fs::path(dir) / "manifest.json").string());
  return 0;
}

// ---------------------------------------------------------------- scattering

scattering::EnsembleConfig ensemble_config(const Json& cfg, std::uint64_t seed, int workers) {
  const Json e = cfg.contains("ensemble") ? cfg["ensemble"] : Json::object();
  scattering::EnsembleConfig config;
  auto& cs = config.coupling;
  cs.n = get_or<int>(e, "n", cs.n);
  cs.lambda = get_or<int>(e, "lambda", cs.lambda);
  cs.open_transmissions = get_or<std::vector<Real>>(e, "open_transmissions", cs.open_transmissions);
  cs.symmetry = parse_symmetry_class(get_or<std::string>(e, "symmetry", "GSE"));
  if (e.contains("mean_spacing")) cs.mean_spacing = e["mean_spacing"].get<Real>();
  config.realizations = get_or<int>(e, "realizations", config.realizations);
  config.energies = get_or<int>(e, "energies", config.energies);
  config.band_fraction = get_or<Real>(e, "band_fraction", config.band_fraction);
  config.seed = seed;
  config.workers = workers;
  cs.validate();
  return config;
}

int cmd_scattering(const Common& c, std::optional<Real> gamma_flag, std::optional<Real> tau_flag) {
  const Json cfg = load_config(c.config);
  const std::uint64_t seed = seed_of(c, cfg);
  auto config = ensemble_config(cfg, seed, workers_of(c, cfg));
  const Json absorption = cfg.contains("absorption") ? cfg["absorption"] : Json::object();
  std::optional<Real> gamma = gamma_flag;
  std::optional<Real> tau = tau_flag;
  if (!gamma && !tau) {
    if (absorption.contains("gamma")) gamma = absorption["gamma"].get<Real>();
    if (absorption.contains("tau_abs")) tau = absorption["tau_abs"].get<Real>();
  }
  if (gamma && tau) fail(ErrorKind::kInvalidInput, "give either gamma or tau_abs, not both");
  if (!gamma && !tau) fail(ErrorKind::kInvalidInput, "no absorption given (gamma or tau_abs)");
  const int bins = get_or<int>(cfg, "bins", 40);
  const auto lags = get_or<std::vector<int>>(cfg, "lags", {0, 1, 2, 3, 4, 5, 6, 8, 10, 12});

  const scattering::EnsembleCache cache(config);
  Json derived;
  scattering::ScatteringEnsemble ensemble;
  if (gamma) {
    const auto cal = scattering::calibrate_tau_abs(*gamma, cache);
    cal.apply(config);
    ensemble = cache.evaluate(cal.fictitious_transmission, cal.open_scale);
    ensemble.gamma = *gamma;
    derived["calibration"] = {{"gamma", *gamma},
                              {"tau_abs", cal.tau_abs},
                              {"lambda", cal.lambda},
                              {"fictitious_transmission", cal.fictitious_transmission},
                              {"open_scale", cal.open_scale},
                              {"target_mean_reflection", cal.target_mean},
                              {"achieved_mean_reflection", cal.achieved_mean},
                              {"iterations", cal.iterations}};
  } else {
    if (!(*tau >= 0.0 && *tau <= 2.0 * config.coupling.lambda)) {
      fail(ErrorKind::kInvalidInput, "tau_abs must lie in [0, 2 Lambda]");
    }
    config.coupling.fictitious_transmission = config.coupling.lambda > 0 ? *tau / (2.0 * config.coupling.lambda) : 0.0;
    config.coupling.open_scale = get_or<Real>(absorption, "open_scale", 1.0);
    ensemble = cache.evaluate(config.coupling.fictitious_transmission, config.coupling.open_scale);
  }

  const std::string dir = output_dir(c);
  io::Manifest manifest("scattering", seed);
  manifest.config() = {{"n", config.coupling.n},
                       {"lambda", config.coupling.lambda},
                       {"open_transmissions", config.coupling.open_transmissions},
                       {"symmetry", std::string(to_string(config.coupling.symmetry))},
                       {"realizations", config.realizations},
                       {"energies", config.energies},
                       {"band_fraction", config.band_fraction},
                       {"bins", bins},
                       {"lags", lags}};
  if (gamma) manifest.config()["gamma"] = *gamma;
  if (tau) manifest.config()["tau_abs"] = *tau;
  auto write = [&](const std::string& name, const std::string& title, std::vector<std::string> comments,
                   std::vector<io::Column> cols, const std::string& label) {
    const std::string path = (fs::path(dir) / name).string();
    io::write_table(path, title, comments, cols);
    manifest.add_output(path, label);
  };

  std::vector<Real> real_s, imag_s, realization, energy_index;
  for (const auto& rec : ensemble.records) {
    realization.push_back(rec.realization);
    energy_index.push_back(rec.energy_index);
    real_s.push_back(rec.s.real());
    imag_s.push_back(rec.s.imag());
  }
  const auto reflection = ensemble.column(&scattering::ScatterRecord::reflection);
  const auto amplitude = ensemble.column(&scattering::ScatterRecord::r);
  const auto u = ensemble.column(&scattering::ScatterRecord::u);
  const auto v = ensemble.column(&scattering::ScatterRecord::v);
  write("records.dat", "Heidelberg-model S-matrix samples of the first open channel",
        {"K = i (S - 1)/(S + 1) = u - i v, R = |S|^2, r = |S|"},
        {{"realization", realization},
         {"energy_index", energy_index},
         {"e", ensemble.column(&scattering::ScatterRecord::e)},
         {"re_s", real_s},
         {"im_s", imag_s},
         {"R", reflection},
         {"r", amplitude},
         {"u", u},
         {"v", v}},
        "ensemble records");

  const Real mean_r = stats::mean_with_error(reflection).mean;
  const Real mean_a = stats::mean_with_error(amplitude).mean;
  std::vector<Real> r_tilde, a_tilde;
  for (Real x : reflection) r_tilde.push_back(mean_r > 0.0 ? x / mean_r : 0.0);
  for (Real x : amplitude) a_tilde.push_back(mean_a > 0.0 ? x / mean_a : 0.0);

  derived["records"] = ensemble.records.size();
  derived["mean_reflection"] = mean_r;
  derived["mean_amplitude"] = mean_a;
  derived["failures"] = ensemble.diagnostics.failures;
  derived["max_kramers_mismatch"] = ensemble.diagnostics.max_kramers_mismatch;
  derived["max_cross_element"] = ensemble.diagnostics.max_cross_element;
  derived["mean_level_spacing"] = ensemble.diagnostics.mean_spacing;

  using analytic::Variable;
  struct Target {
    Variable variable;
    const std::vector<Real>* samples;
    const char* file;
    const char* title;
    Real lo, hi;
  };
  const Real r_hi = std::max(4.0, *std::max_element(r_tilde.begin(), r_tilde.end()));
  const Real a_hi = std::max(3.0, *std::max_element(a_tilde.begin(), a_tilde.end()));
  const std::vector<Target> targets = {
      {Variable::kScaledReflection, &r_tilde, "hist_R_tilde.dat", "density of the rescaled reflection R/<R>", 0.0, r_hi},
      {Variable::kScaledAmplitude, &a_tilde, "hist_r_tilde.dat", "density of the rescaled amplitude r/<r>", 0.0, a_hi},
      {Variable::kImK, &v, "hist_v.dat", "density of v = -Im K", 0.0, 5.0},
      {Variable::kReK, &u, "hist_u.dat", "density of u = Re K", -5.0, 5.0},
  };
  const bool absorbing = gamma.has_value() || (tau && *tau > 0.0);
  Json ks = Json::object();
  for (const auto& t : targets) {
    const auto h = stats::make_histogram(*t.samples, bins, t.lo, t.hi);
    std::vector<io::Column> cols;
    std::vector<Real> centers;
    for (std::size_t i = 0; i < h.bins(); ++i) centers.push_back(h.center(i));
    cols.push_back({"center", centers});
    cols.push_back({"density", h.density});
    const std::string name(analytic::to_string(t.variable));
    if (gamma) {
      for (auto cls : {SymmetryClass::GSE, SymmetryClass::GUE}) {
        const analytic::AbsorptionParams p{*gamma, cls};
        std::vector<Real> curve;
        for (Real x : centers) curve.push_back(analytic::density(t.variable, x, p));
        cols.push_back({"analytic_" + std::string(to_string(cls)), curve});
        ks[name][std::string(to_string(cls))] = stats::ks_distance(*t.samples, reference_for(t.variable, p));
      }
    }
    if (absorbing && (t.variable == Variable::kScaledReflection || t.variable == Variable::kScaledAmplitude)) {
      std::vector<Real> curve;
      const auto ev = t.variable == Variable::kScaledReflection ? analytic::EricsonVariable::kReflection
                                                                 : analytic::EricsonVariable::kAmplitude;
      for (Real x : centers) curve.push_back(analytic::ericson_density(ev, x));
      cols.push_back({"ericson", curve});
      ks[name]["ericson"] = stats::ks_distance(*t.samples, ericson_reference(t.variable));
    }
    write(t.file, t.title, {"in-range samples " + std::to_string(h.sample_count)}, cols, name + " histogram");
  }
  if (gamma) derived["ks"] = ks;

  if (absorbing) {
    const auto ac = scattering::autocorrelation(ensemble, lags);
    std::vector<Real> lag, re, im;
    for (std::size_t i = 0; i < ac.lags.size(); ++i) {
      lag.push_back(ac.lags[i]);
      re.push_back(ac.value[i].real());
      im.push_back(ac.value[i].imag());
    }
    write("correlation.dat", "normalized S-matrix autocorrelation C(eps)",
          {"eps in units of the mean level spacing; errors are jackknife over realizations"},
          {{"lag", lag}, {"eps", ac.epsilon}, {"re_c", re}, {"im_c", im}, {"abs_c", ac.modulus},
           {"abs_c_error", ac.modulus_error}},
          "C(eps)");
  }
  manifest.derived() = derived;
  manifest.write((fs::path(dir) / "manifest.json").string());

  std::cout << "records " << ensemble.records.size() << "  <R> " << fmt(mean_r);
  if (gamma) std::cout << "  tau_abs " << fmt(derived["calibration"]["tau_abs"].get<Real>());
  std::cout << "\n";
  if (gamma) {
    for (const auto& [name, entry] : ks.items()) {
      std::cout << "KS " << name;
      for (const auto& [ref, value] : entry.items()) std::cout << "  " << ref << " " << fmt(value.get<Real>());
      std::cout << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------- analytic

std::pair<Real, Real> default_range(analytic::Variable v, const analytic::AbsorptionParams& p) {
  using analytic::Variable;
  switch (v) {
    case Variable::kX: return {1.0, 1.0 + 20.0 / p.gamma};
    case Variable::kReflection:
    case Variable::kAmplitude: return {0.0, 0.995};
    case Variable::kImK: return {0.02, 5.0};
    case Variable::kReK: return {-5.0, 5.0};
    case Variable::kScaledReflection: return {0.0, std::min(6.0, analytic::support(v, p).second)};
    case Variable::kScaledAmplitude: return {0.0, std::min(3.0, analytic::support(v, p).second)};
  }
  return {0.0, 1.0};
}

Real trapezoid(const std::vector<Real>& x, const std::vector<Real>& y) {
  Real s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

int cmd_analytic(const Common& c, const std::string& variable_name, std::vector<Real> gammas,
                 std::vector<std::string> classes, int points, std::optional<Real> lo, std::optional<Real> hi,
                 bool ericson) {
  const Json cfg = load_config(c.config);
  const auto variable = analytic::parse_variable(variable_name);
  if (gammas.empty()) gammas = get_or<std::vector<Real>>(cfg, "gamma", {});
  if (classes.empty()) classes = get_or<std::vector<std::string>>(cfg, "classes", {"GSE"});
  const std::string dir = output_dir(c);
  io::Manifest manifest("analytic", 0);
  manifest.config() = {{"variable", variable_name}, {"gamma", gammas}, {"classes", classes}, {"points", points},
                       {"ericson", ericson}};
  Json derived = Json::array();
  bool ok = true;

  if (ericson) {
    if (variable != analytic::Variable::kScaledReflection && variable != analytic::Variable::kScaledAmplitude) {
      fail(ErrorKind::kInvalidInput, "the large-absorption limit exists for R_tilde and r_tilde only");
    }
    const auto grid = linspace(lo.value_or(0.0), hi.value_or(variable == analytic::Variable::kScaledReflection ? 8.0 : 4.0),
                               points);
    const auto curve = analytic::tabulate_ericson(variable, grid);
    const std::string path = (fs::path(dir) / ("curve_" + variable_name + "_ericson.dat")).string();
    io::write_table(path, "large-absorption limit of the density of " + variable_name,
                    {"normalization over the full support " + fmt(curve.normalization)},
                    {{variable_name, grid}, {"density", curve.density}});
    manifest.add_output(path, "Ericson limit");
    ok = std::abs(curve.normalization - 1.0) <= 1e-3;
    derived.push_back({{"curve", "ericson"}, {"normalization", curve.normalization}});
  } else {
    if (gammas.empty()) fail(ErrorKind::kInvalidInput, "no gamma given");
    std::map<Real, std::vector<std::pair<std::string, std::vector<Real>>>> by_gamma;
    for (Real g : gammas) {
      if (!(g > 0.0)) fail(ErrorKind::kInvalidInput, "gamma must be positive, got " + fmt(g));
      // One grid per gamma so curves of different classes line up.
      const analytic::AbsorptionParams first{g, parse_symmetry_class(classes.front())};
      const auto [dlo, dhi] = default_range(variable, first);
      const auto grid = linspace(lo.value_or(dlo), hi.value_or(dhi), points);
      for (const auto& name : classes) {
        const analytic::AbsorptionParams p{g, parse_symmetry_class(name)};
        const auto curve = analytic::tabulate(variable, p, grid);
        const Real trap = trapezoid(grid, curve.density);
        const bool good = std::abs(curve.normalization - 1.0) <= 1e-3;
        ok = ok && good;
        std::ostringstream file;
        file << "curve_" << variable_name << "_" << to_string(p.symmetry) << "_g" << g << ".dat";
        const std::string path = (fs::path(dir) / file.str()).string();
        io::write_table(path,
                        "density of " + variable_name + " for " + std::string(to_string(p.symmetry)) +
                            " with absorption gamma = " + fmt(g),
                        {"normalization over the full support " + fmt(curve.normalization),
                         "trapezoid over this grid " + fmt(trap)},
                        {{variable_name, grid}, {"density", curve.density}});
        manifest.add_output(path, variable_name + " " + std::string(to_string(p.symmetry)) + " gamma " + fmt(g));
        derived.push_back({{"gamma", g},
                           {"class", std::string(to_string(p.symmetry))},
                           {"normalization", curve.normalization},
                           {"trapezoid_on_grid", trap},
                           {"normalization_ok", good}});
        by_gamma[g].push_back({std::string(to_string(p.symmetry)), curve.density});
      }
    }
    for (const auto& [g, curves] : by_gamma) {
      for (std::size_t i = 0; i + 1 < curves.size(); ++i) {
        Real sup = 0.0;
        for (std::size_t k = 0; k < curves[i].second.size(); ++k) {
          sup = std::max(sup, std::abs(curves[i].second[k] - curves[i + 1].second[k]));
        }
        std::cout << "gamma " << g << "  sup |" << curves[i].first << " - " << curves[i + 1].first << "| = " << fmt(sup)
                  << "\n";
        derived.push_back({{"gamma", g}, {"sup_distance", sup}, {"between", {curves[i].first, curves[i + 1].first}}});
      }
    }
  }
  manifest.derived() = {{"curves", derived}};
  manifest.write((fs::path(dir) / "manifest.json").string());
  if (!ok) throw AcceptanceFailure("normalization off by more than 1e-3");
  std::cout << "curves written to " << dir << "\n";
  return 0;
}

// ---------------------------------------------------------------- fit-gamma

int cmd_fit_gamma(const Common& c, const std::string& samples, int column, const std::string& cls_name,
                  const std::string& variable, const std::string& method, int bootstrap) {
  const Json cfg = load_config(c.config);
  const auto values = io::read_column(samples, column);
  if (values.empty()) fail(ErrorKind::kInvalidInput, samples + " holds no samples");
  analytic::FitOptions opt;
  if (variable == "R") {
    opt.variable = analytic::FitVariable::kReflection;
  } else if (variable == "r") {
    opt.variable = analytic::FitVariable::kAmplitude;
  } else {
    fail(ErrorKind::kInvalidInput, "fit variable must be R or r");
  }
  if (method == "mean") {
    opt.method = analytic::FitMethod::kMeanMatch;
  } else if (method == "curve") {
    opt.method = analytic::FitMethod::kCurveL2;
  } else {
    fail(ErrorKind::kInvalidInput, "fit method must be mean or curve");
  }
  opt.bootstrap = bootstrap;
  opt.seed = seed_of(c, cfg);
  const auto cls = parse_symmetry_class(cls_name);
  const auto fit = analytic::fit_gamma(values, cls, opt);

  const std::string dir = output_dir(c);
  io::Manifest manifest("fit-gamma", opt.seed);
  manifest.config() = {{"samples", fs::path(samples).filename().string()},
                       {"samples_fnv1a64", io::file_checksum(samples)},
                       {"column", column},
                       {"class", std::string(to_string(cls))},
                       {"variable", variable},
                       {"method", method},
                       {"bootstrap", bootstrap}};
  manifest.derived() = {{"gamma", fit.gamma},
                        {"stderr_bootstrap", fit.stderr_bootstrap},
                        {"sample_mean", fit.sample_mean},
                        {"samples", fit.samples}};
  manifest.write((fs::path(dir) / "manifest.json").string());
  std::cout.precision(6);
  std::cout << "gamma " << fit.gamma << " +- " << fit.stderr_bootstrap << "  (" << method << ", " << fit.samples
            << " samples)\n";
  return 0;
}

// ---------------------------------------------------------------- compare

int cmd_compare(const Common& c, const std::string& samples, int column, const std::string& variable_name,
                std::optional<Real> gamma, std::vector<std::string> classes, const std::string& reference,
                std::optional<Real> max_ks) {
  const auto values = io::read_column(samples, column);
  if (values.empty()) fail(ErrorKind::kInvalidInput, samples + " holds no samples");
  const std::string dir = output_dir(c);
  io::Manifest manifest("compare", 0);
  manifest.config() = {{"samples", fs::path(samples).filename().string()},
                       {"samples_fnv1a64", io::file_checksum(samples)},
                       {"column", column}};
  Json derived = Json::object();
  Real worst = 0.0;

  if (!reference.empty()) {
    const auto other = io::read_column(reference, column);
    const Real d = stats::ks_two_sample(values, other);
    derived["ks_two_sample"] = d;
    manifest.config()["reference"] = fs::path(reference).filename().string();
    std::cout << "two-sample KS " << fmt(d) << "\n";
    worst = d;
  } else {
    const auto variable = analytic::parse_variable(variable_name);
    manifest.config()["variable"] = variable_name;
    if (classes.empty()) classes = {"GSE", "GUE"};
    for (const auto& name : classes) {
      Real d = 0.0;
      if (name == "ericson") {
        d = stats::ks_distance(values, ericson_reference(variable));
      } else {
        if (!gamma) fail(ErrorKind::kInvalidInput, "comparison against " + name + " needs --gamma");
        const analytic::AbsorptionParams p{*gamma, parse_symmetry_class(name)};
        d = stats::ks_distance(values, reference_for(variable, p));
      }
      derived["ks"][name] = d;
      std::cout << "KS vs " << name << " " << fmt(d) << "\n";
    }
    if (gamma) manifest.config()["gamma"] = *gamma;
    // --max-ks applies to the first listed reference.
    worst = derived["ks"][classes.front()].get<Real>();
  }
  manifest.derived() = derived;
  if (max_ks) manifest.config()["max_ks"] = *max_ks;
  manifest.write((fs::path(dir) / "manifest.json").string());
  if (max_ks && worst > *max_ks) throw AcceptanceFailure("KS " + fmt(worst) + " exceeds " + fmt(*max_ks));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symplectic chaotic-scattering experiments: graph spectra, Heidelberg ensembles, analytic curves"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON run configuration");
    sub->add_option("--seed", common.seed, "master seed (overrides the config)");
    sub->add_option("--workers", common.workers, "worker threads (overrides KRAMERS_WORKERS and the config)");
    sub->add_option("--out", common.out, "output directory")->capture_default_str();
  };

  auto* graph = app.add_subcommand("graph-spectrum", "roots of det h(k) = 0 with spacing statistics");
  add_common(graph);
  std::string spec_path;
  std::optional<Real> k_min, k_max;
  graph->add_option("--spec", spec_path, "graph spec file");
  graph->add_option("--k-min", k_min, "lower wavenumber, rad/m");
  graph->add_option("--k-max", k_max, "upper wavenumber, rad/m");

  auto* scatter = app.add_subcommand("scattering", "Heidelberg-model ensemble with calibrated absorption");
  add_common(scatter);
  std::optional<Real> gamma, tau;
  scatter->add_option("--gamma", gamma, "target absorption gamma (calibrates tau_abs)");
  scatter->add_option("--tau-abs", tau, "fixed tau_abs = 2 Lambda T_f");

  auto* analytic_cmd = app.add_subcommand("analytic", "tabulate analytic densities");
  add_common(analytic_cmd);
  std::string variable = "R";
  std::vector<Real> gammas;
  std::vector<std::string> classes;
  int points = 401;
  std::optional<Real> lo, hi;
  bool ericson = false;
  analytic_cmd->add_option("--variable", variable, "x, R, r, u, v, R_tilde or r_tilde")->capture_default_str();
  analytic_cmd->add_option("--gamma", gammas, "absorption values")->delimiter(',');
  analytic_cmd->add_option("--class", classes, "GSE and/or GUE")->delimiter(',');
  analytic_cmd->add_option("--points", points, "grid points")->capture_default_str()->check(CLI::PositiveNumber);
  analytic_cmd->add_option("--lo", lo, "grid start");
  analytic_cmd->add_option("--hi", hi, "grid end");
  analytic_cmd->add_flag("--ericson", ericson, "large-absorption limit instead");

  auto* fit = app.add_subcommand("fit-gamma", "fit gamma to samples of R or r");
  add_common(fit);
  std::string samples, fit_class = "GSE", fit_variable = "R", method = "mean";
  int column = 0, bootstrap = 200;
  fit->add_option("--samples", samples, "table file with one sample per row")->required();
  fit->add_option("--column", column, "column index")->capture_default_str();
  fit->add_option("--class", fit_class, "GSE or GUE")->capture_default_str();
  fit->add_option("--variable", fit_variable, "R or r")->capture_default_str();
  fit->add_option("--method", method, "mean or curve")->capture_default_str();
  fit->add_option("--bootstrap", bootstrap, "bootstrap resamples")->capture_default_str();

  auto* compare = app.add_subcommand("compare", "KS distance of samples to analytic curves or to another sample");
  add_common(compare);
  std::string cmp_samples, cmp_variable = "R", reference;
  int cmp_column = 0;
  std::optional<Real> cmp_gamma, max_ks;
  std::vector<std::string> cmp_classes;
  compare->add_option("--samples", cmp_samples, "table file")->required();
  compare->add_option("--column", cmp_column, "column index")->capture_default_str();
  compare->add_option("--variable", cmp_variable, "analytic variable")->capture_default_str();
  compare->add_option("--gamma", cmp_gamma, "absorption of the analytic curves");
  compare->add_option("--class", cmp_classes, "GSE, GUE and/or ericson")->delimiter(',');
  compare->add_option("--reference", reference, "second sample file (two-sample KS)");
  compare->add_option("--max-ks", max_ks, "fail with exit 4 above this distance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (graph->parsed()) return cmd_graph_spectrum(common, spec_path, k_min, k_max);
    if (scatter->parsed()) return cmd_scattering(common, gamma, tau);
    if (analytic_cmd->parsed()) return cmd_analytic(common, variable, gammas, classes, points, lo, hi, ericson);
    if (fit->parsed()) return cmd_fit_gamma(common, samples, column, fit_class, fit_variable, method, bootstrap);
    if (compare->parsed()) {
      return cmd_compare(common, cmp_samples, cmp_column, cmp_variable, cmp_gamma, cmp_classes, reference, max_ks);
    }
  } catch (const AcceptanceFailure& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return kExitAcceptance;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const Json::exception& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
