#include "dissipair/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <map>

#include "dissipair/entanglement.hpp"
#include "dissipair/output_spectrum.hpp"
#include "dissipair/parallel.hpp"
#include "dissipair/stability.hpp"
#include "dissipair/steady_state.hpp"

#ifndef DISSIPAIR_VERSION
#define DISSIPAIR_VERSION "unknown"
#endif

namespace dissipair {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) { return format_number(v); }
std::string num(Eigen::Index v) { return std::to_string(v); }
std::string flag(bool v) { return v ? "1" : "0"; }

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::Config, path + ": " + what);
}

const DissipatorSpec& require_dissipator(const RunConfig& cfg) {
  if (!cfg.dissipator) config_error("dissipator", "this command needs a dissipator block");
  return *cfg.dissipator;
}

struct Sites {
  Eigen::Index cooling = 0;
  Eigen::Index heating = 0;
};

Sites resolve_sites(const DissipatorSpec& d, const LatticeGeometry& g) {
  Sites s{d.cooling.resolve(g), d.heating.resolve(g)};
  if (s.cooling == s.heating) config_error("dissipator", "cooling and heating sites coincide");
  return s;
}

bool is_chiral(const QuadraticSystem& system) {
  if (system.has_pairing()) return false;
  try {
    check_chiral(system);
    return true;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotChiral) return false;
    throw;
  }
}

QuadraticSystem dissipative_system(const LatticeModel& model, const DissipatorSpec& d, const Sites& s, double eta) {
  const Eigen::Index n = model.system.n_modes();
  if (d.comparator) return squeezed_noise_system(model.system, s.cooling, s.heating, d.kappa, eta);
  const JumpOperator jump = JumpOperator::pairing(n, s.cooling, s.heating, d.kappa, eta);
  QuadraticSystem sys = model.system.with_jump(jump);
  if (d.mirrored) sys = mirrored_dissipator(sys, jump);
  return sys;
}

/// Spectral threshold of the single pairing dissipator: doubling search for an
/// unstable eta, then bisection.
double spectral_eta_critical(const LatticeModel& model, const DissipatorSpec& d, const Sites& s) {
  DissipatorSpec single = d;
  single.comparator = false;
  auto family = [&](double eta) { return dissipative_system(model, single, s, eta); };
  double high = 0.5;
  while (system_spectrum(family(high)).stable) {
    high *= 2.0;
    if (high > 1e4) throw Error(ErrorCode::Domain, "no instability found below eta = 1e4; eta_ratio is undefined");
  }
  return eta_critical_spectral(family, 0.0, high).critical;
}

struct EtaChoice {
  double eta = 0.0;
  double eta_critical = kNaN;
};

/// eta from the dissipator block; eta_ratio needs the threshold, taken from
/// the eigenmodes when the lattice is chiral and by bisection otherwise.
EtaChoice resolve_eta(const LatticeModel& model, const DissipatorSpec& d, const Sites& s,
                      const EigenmodeSet* modes = nullptr) {
  EtaChoice c;
  if (d.eta) {
    c.eta = *d.eta;
    return c;
  }
  if (!d.eta_ratio) config_error("dissipator", "give eta or eta_ratio");
  if (d.comparator) config_error("dissipator.eta_ratio", "not defined for the squeezed-noise comparator; give eta");
  bool done = false;
  if (is_chiral(model.system)) {
    try {
      const EigenmodeSet local = modes ? EigenmodeSet() : eigenpairs(model.system);
      c.eta_critical = eta_critical_wavefunction(modes ? *modes : local, s.cooling, s.heating).critical;
      done = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Domain) throw;
    }
  }
  if (!done) c.eta_critical = spectral_eta_critical(model, d, s);
  if (!std::isfinite(c.eta_critical)) throw Error(ErrorCode::Domain, "threshold is infinite; eta_ratio is undefined");
  c.eta = *d.eta_ratio * c.eta_critical;
  return c;
}

Json base_metadata(const std::string& command, const RunConfig& cfg) {
  Json meta;
  meta["command"] = command;
  meta["config"] = cfg.raw;
  meta["seed"] = cfg.seed;
  meta["version"] = version_string();
  return meta;
}

// ---------------------------------------------------------------- stability

struct Axis1D {
  std::string name;
  std::vector<double> values;
};

Axis1D parse_axis(const Json& v, const std::string& path) {
  expect_keys(v, {"name", "grid"}, path);
  Axis1D a;
  a.name = get_string(v, "name", path, "");
  static const std::vector<std::string> known{"eta", "kappa", "j1", "j2", "j1_over_j2", "alpha"};
  if (std::find(known.begin(), known.end(), a.name) == known.end())
    config_error(path + ".name", "expected one of eta, kappa, j1, j2, j1_over_j2, alpha");
  if (!v.contains("grid")) config_error(path + ".grid", "missing");
  a.values = parse_grid(v["grid"], path + ".grid");
  return a;
}

struct Point {
  ModelSpec model;
  DissipatorSpec dissipator;
  std::optional<double> eta;
};

void apply_axis(Point& p, const std::string& name, double value) {
  if (name == "eta") p.eta = value;
  else if (name == "kappa") p.dissipator.kappa = value;
  else if (name == "j1") p.model.j1 = value;
  else if (name == "j2") p.model.j2 = value;
  else if (name == "j1_over_j2") p.model.j1 = value * p.model.j2;
  else if (name == "alpha") p.model.ssh.alpha = value;
}

void check_axis_applicable(const std::string& name, const RunConfig& cfg, const std::string& path) {
  const std::string& kind = cfg.model.kind;
  if ((name == "j1" || name == "j2" || name == "j1_over_j2") && kind != "three_mode" && kind != "dimer")
    config_error(path, name + " applies to three_mode and dimer models only");
  if (name == "alpha" && kind != "ssh") config_error(path, "alpha applies to ssh models only");
}

OutputSet cmd_stability(const RunConfig& cfg, int threads) {
  const Json& t = cfg.task;
  expect_keys(t, {"axes"}, "task");
  if (!t.contains("axes") || !t["axes"].is_array() || t["axes"].empty() || t["axes"].size() > 2)
    config_error("task.axes", "expected a list of one or two axes");
  std::vector<Axis1D> axes;
  for (std::size_t i = 0; i < t["axes"].size(); ++i) {
    const std::string path = "task.axes[" + std::to_string(i) + "]";
    axes.push_back(parse_axis(t["axes"][i], path));
    check_axis_applicable(axes.back().name, cfg, path);
  }
  if (axes.size() == 2 && axes[0].name == axes[1].name) config_error("task.axes", "axes must differ");
  if (axes.size() == 1) axes.push_back({"", {kNaN}});
  const DissipatorSpec& d0 = require_dissipator(cfg);
  const bool eta_axis = axes[0].name == "eta" || axes[1].name == "eta";
  if (!eta_axis && !d0.eta) config_error("dissipator.eta", "stability grids need eta (or an eta axis)");

  struct Row {
    double x, y, re_c, re_u;
    bool st_c, st_u;
  };
  std::vector<Row> rows(axes[0].values.size() * axes[1].values.size());
  parallel_for(rows.size(), threads, [&](std::size_t k) {
    const double x = axes[0].values[k / axes[1].values.size()];
    const double y = axes[1].values[k % axes[1].values.size()];
    Point p{cfg.model, d0, d0.eta};
    apply_axis(p, axes[0].name, x);
    if (!axes[1].name.empty()) apply_axis(p, axes[1].name, y);
    const LatticeModel model = build_model(p.model);
    const Sites s = resolve_sites(p.dissipator, model.geometry);
    const QuadraticSystem sys = dissipative_system(model, p.dissipator, s, *p.eta);
    const SpectrumReport c = system_spectrum(sys);
    const SpectrumReport u = system_spectrum(uncorrelated_variant(sys));
    rows[k] = {x, y, c.max_real_part, u.max_real_part, c.stable, u.stable};
  });

  OutputSet out(cfg.output.directory, base_metadata("stability", cfg));
  std::vector<std::string> header{axes[0].name};
  if (!axes[1].name.empty()) header.push_back(axes[1].name);
  for (const char* h : {"max_re_correlated", "stable_correlated", "max_re_uncorrelated", "stable_uncorrelated"})
    header.push_back(h);
  CsvTable grid(header);
  for (const Row& r : rows) {
    std::vector<std::string> cells{num(r.x)};
    if (!axes[1].name.empty()) cells.push_back(num(r.y));
    for (const std::string& c : {num(r.re_c), flag(r.st_c), num(r.re_u), flag(r.st_u)}) cells.push_back(c);
    grid.row(cells);
  }
  out.add_csv("stability.csv", grid);

  if (eta_axis) {
    // Threshold per value of the other axis, within the scanned eta range.
    const int e = axes[0].name == "eta" ? 0 : 1;
    const Axis1D& other = axes[1 - e];
    const double eta_max = *std::max_element(axes[e].values.begin(), axes[e].values.end());
    std::vector<std::array<double, 2>> thresholds(other.values.size());
    parallel_for(other.values.size(), threads, [&](std::size_t k) {
      Point p{cfg.model, d0, std::nullopt};
      if (!other.name.empty()) apply_axis(p, other.name, other.values[k]);
      const LatticeModel model = build_model(p.model);
      const Sites s = resolve_sites(p.dissipator, model.geometry);
      for (int variant = 0; variant < 2; ++variant) {
        auto family = [&](double eta) {
          const QuadraticSystem sys = dissipative_system(model, p.dissipator, s, eta);
          return variant == 0 ? sys : uncorrelated_variant(sys);
        };
        try {
          thresholds[k][variant] = eta_critical_spectral(family, 0.0, eta_max).critical;
        } catch (const Error&) {
          thresholds[k][variant] = kNaN;  // not bracketed by the scanned range
        }
      }
    });
    std::vector<std::string> bh;
    if (!other.name.empty()) bh.push_back(other.name);
    bh.push_back("eta_c_correlated");
    bh.push_back("eta_c_uncorrelated");
    CsvTable boundary(bh);
    for (std::size_t k = 0; k < other.values.size(); ++k) {
      std::vector<std::string> cells;
      if (!other.name.empty()) cells.push_back(num(other.values[k]));
      cells.push_back(num(thresholds[k][0]));
      cells.push_back(num(thresholds[k][1]));
      boundary.row(cells);
    }
    out.add_csv("boundary.csv", boundary);
  }
  return out;
}

// ----------------------------------------------------------------- ep-scan

OutputSet cmd_ep_scan(const RunConfig& cfg, int threads) {
  const Json& t = cfg.task;
  expect_keys(t, {"eta", "variants", "gap_tol", "gram_tol"}, "task");
  if (!t.contains("eta")) config_error("task.eta", "missing eta grid");
  const std::vector<double> grid = parse_grid(t["eta"], "task.eta");
  if (grid.size() < 3) config_error("task.eta", "need at least 3 grid points");
  std::vector<std::string> variants{"correlated", "uncorrelated"};
  if (t.contains("variants")) {
    variants.clear();
    if (!t["variants"].is_array()) config_error("task.variants", "expected a list");
    for (const auto& v : t["variants"]) {
      if (!v.is_string() || (v != "correlated" && v != "uncorrelated"))
        config_error("task.variants", "entries must be 'correlated' or 'uncorrelated'");
      variants.push_back(v.get<std::string>());
    }
  }
  EpScanOptions opts;
  opts.gap_tol = get_number(t, "gap_tol", "task", opts.gap_tol);
  opts.gram_tol = get_number(t, "gram_tol", "task", opts.gram_tol);

  const DissipatorSpec& d = require_dissipator(cfg);
  const LatticeModel model = build_model(cfg.model);
  const Sites s = resolve_sites(d, model.geometry);

  OutputSet out(cfg.output.directory, base_metadata("ep-scan", cfg));
  CsvTable spec({"variant", "eta", "index", "re", "im"});
  Json points = Json::object();
  for (const std::string& variant : variants) {
    auto system_at = [&](double eta) {
      const QuadraticSystem sys = dissipative_system(model, d, s, eta);
      return variant == "correlated" ? sys : uncorrelated_variant(sys);
    };
    std::vector<CVector> eigs(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t k) { eigs[k] = spectrum(build_drift(system_at(grid[k]))).eigenvalues; });
    for (std::size_t k = 0; k < grid.size(); ++k) {
      std::vector<cplx> ev(eigs[k].data(), eigs[k].data() + eigs[k].size());
      std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real(); });
      for (std::size_t i = 0; i < ev.size(); ++i)
        spec.row({variant, num(grid[k]), std::to_string(i), num(ev[i].real()), num(ev[i].imag())});
    }
    const auto eps = ep_scan([&](double eta) { return build_drift(system_at(eta)).matrix; }, grid, opts);
    Json list = Json::array();
    for (const auto& ep : eps)
      list.push_back({{"eta", ep.parameter},
                      {"re", ep.eigenvalue.real()},
                      {"im", ep.eigenvalue.imag()},
                      {"gap", ep.gap},
                      {"gram_determinant", ep.gram_determinant}});
    points[variant] = list;
  }
  Json summary{{"exceptional_points", points}};
  if (cfg.model.kind == "dimer" && cfg.model.j1 * cfg.model.j1 > cfg.model.j2 * cfg.model.j2) {
    // The dimer closed forms are written for jump sqrt(2 kappa).
    const DimerThresholds th = dimer_bs_pa_thresholds(cfg.model.j1, cfg.model.j2, 0.5 * d.kappa);
    summary["closed_form"] = {{"exceptional_eta", th.exceptional_eta}, {"instability_eta", th.instability_eta}};
  }
  out.add_csv("drift_spectrum.csv", spec);
  out.add_json("ep_points.json", summary);
  return out;
}

// ------------------------------------------------------------------ steady

OutputSet cmd_steady(const RunConfig& cfg, int /*threads*/, bool expect_unstable) {
  const Json& t = cfg.task;
  expect_keys(t, {"correlations", "order", "line_cuts"}, "task");
  const bool correlations = get_bool(t, "correlations", "task", false);
  const std::string order = get_string(t, "order", "task", "site");
  if (order != "site" && order != "spiral") config_error("task.order", "expected 'site' or 'spiral'");
  const DissipatorSpec& d = require_dissipator(cfg);
  const LatticeModel model = build_model(cfg.model);
  const LatticeGeometry& g = model.geometry;
  if (order == "spiral" && !g.is_square()) config_error("task.order", "spiral order needs a square lattice");
  struct Cut {
    LinePath path;
    SiteSpec reference;
    std::string label;
  };
  std::vector<Cut> cuts;
  if (t.contains("line_cuts")) {
    if (!g.is_square()) config_error("task.line_cuts", "line cuts need a square lattice");
    if (!t["line_cuts"].is_array()) config_error("task.line_cuts", "expected a list");
    for (std::size_t i = 0; i < t["line_cuts"].size(); ++i) {
      const std::string path = "task.line_cuts[" + std::to_string(i) + "]";
      const Json& c = t["line_cuts"][i];
      expect_keys(c, {"path", "reference"}, path);
      Cut cut;
      cut.label = get_string(c, "path", path, "");
      if (cut.label == "edge") {
        cut.path = {PathKind::EdgeWalk, 0};
      } else {
        const auto sites = parse_region(cut.label, g);  // validates the expression
        const auto [x0, y0] = g.coords(sites.front());
        cut.path = cut.label.rfind("row", 0) == 0 ? LinePath{PathKind::Row, y0} : LinePath{PathKind::Column, x0};
      }
      if (!c.contains("reference")) config_error(path + ".reference", "missing");
      cut.reference = parse_site(c["reference"], path + ".reference");
      cuts.push_back(cut);
    }
  }

  const Sites s = resolve_sites(d, g);
  // The mode-by-mode solution needs a chiral lattice with both sites on one
  // sublattice; everything else goes through the Lyapunov equation.
  const bool chiral = is_chiral(model.system);
  EigenmodeSet modes;
  if (chiral) modes = eigenpairs(model.system);
  const bool bogoliubov = chiral && !d.mirrored && !d.comparator &&
                          modes.sublattice_sign(s.cooling) == modes.sublattice_sign(s.heating);
  const EtaChoice eta = resolve_eta(model, d, s, chiral ? &modes : nullptr);

  OutputSet out(cfg.output.directory, base_metadata("steady", cfg));
  Json summary{{"eta", eta.eta}, {"eta_critical", std::isfinite(eta.eta_critical) ? Json(eta.eta_critical) : Json()}};
  CovarianceState state;
  std::optional<SqueezeParameters> squeeze;
  try {
    if (bogoliubov) {
      const SteadyState ss = bogoliubov_steady_state(modes, JumpOperator::pairing(g.size(), s.cooling, s.heating, d.kappa, eta.eta));
      state = ss.covariance;
      squeeze = ss.squeeze;
      summary["method"] = "bogoliubov";
    } else {
      state = lyapunov_steady_state(dissipative_system(model, d, s, eta.eta));
      summary["method"] = "lyapunov";
    }
  } catch (const Error& e) {
    if (expect_unstable && e.code() == ErrorCode::Unstable) {
      summary["status"] = "unstable";
      summary["message"] = e.what();
      out.add_json("summary.json", summary);
      return out;
    }
    throw;
  }
  if (expect_unstable) throw Error(ErrorCode::Numerical, "expected an unstable configuration but found a steady state");

  const ObservableSet o = observables(state);
  summary["status"] = "stable";
  summary["total"] = o.total;
  summary["purity"] = o.purity;

  CsvTable density({"site", "x", "y", "density"});
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const auto [x, y] = g.coords(i);
    density.row({num(i), num(x), num(y), num(o.density(i))});
  }
  out.add_csv("density.csv", density);

  if (squeeze) {
    CsvTable sq({"kind", "energy", "r", "phase"});
    for (const auto& p : squeeze->pairs) sq.row({"pair", num(p.energy), num(p.r), num(p.phase)});
    for (const auto& p : squeeze->zero_modes) sq.row({"zero", num(p.energy), num(p.r), num(p.phase)});
    out.add_csv("squeeze.csv", sq);
  }

  if (correlations) {
    std::vector<Eigen::Index> ids(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) ids[i] = i;
    if (order == "spiral") ids = spiral_order(g);
    CsvTable corr({"i", "j", "site_i", "site_j", "number_abs", "pairing_abs"});
    for (std::size_t a = 0; a < ids.size(); ++a)
      for (std::size_t b = 0; b < ids.size(); ++b)
        corr.row({std::to_string(a), std::to_string(b), num(ids[a]), num(ids[b]),
                  num(std::abs(o.number(ids[a], ids[b]))), num(std::abs(o.pairing(ids[a], ids[b])))});
    out.add_csv("correlations.csv", corr);
  }

  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const auto rows = line_cut(o, g, cuts[k].path, cuts[k].reference.resolve(g));
    CsvTable lc({"step", "site", "x", "y", "density", "number_abs", "pairing_abs"});
    for (const auto& r : rows)
      lc.row({num(r.step), num(r.site), num(r.x), num(r.y), num(r.density), num(r.number_corr), num(r.pairing_corr)});
    out.add_csv("line_cut_" + std::to_string(k) + ".csv", lc);
  }
  out.add_json("summary.json", summary);
  return out;
}

// ------------------------------------------------------------ entanglement

OutputSet cmd_entanglement(const RunConfig& cfg, int threads) {
  const Json& t = cfg.task;
  expect_keys(t, {"sizes", "angles", "mutual_information"}, "task");
  if (cfg.model.kind != "hofstadter") config_error("model.kind", "entanglement needs a square (hofstadter) lattice");
  const DissipatorSpec& d = require_dissipator(cfg);
  if (d.mirrored || d.comparator) config_error("dissipator", "entanglement uses a single pairing dissipator");
  std::vector<Eigen::Index> sizes;
  if (t.contains("sizes")) {
    for (double v : parse_grid(t["sizes"], "task.sizes")) {
      if (v != std::floor(v) || v < 4) config_error("task.sizes", "sizes must be integers >= 4");
      sizes.push_back(static_cast<Eigen::Index>(v));
    }
  }
  const bool scaling = !sizes.empty();
  if (!scaling) sizes.push_back(0);  // model as configured
  const long long angle_count = get_int(t, "angles", "task", 0);
  if (angle_count < 0) config_error("task.angles", "must be positive");
  std::vector<std::pair<std::string, std::string>> mi_pairs;
  if (t.contains("mutual_information")) {
    if (!t["mutual_information"].is_array()) config_error("task.mutual_information", "expected a list");
    for (std::size_t i = 0; i < t["mutual_information"].size(); ++i) {
      const std::string path = "task.mutual_information[" + std::to_string(i) + "]";
      const Json& e = t["mutual_information"][i];
      expect_keys(e, {"a", "b"}, path);
      mi_pairs.emplace_back(get_string(e, "a", path, ""), get_string(e, "b", path, ""));
    }
  }
  // Validate every size up front so a bad site expression fails before any work.
  for (Eigen::Index n : sizes) {
    const LatticeGeometry g = build_model(cfg.model, n).geometry;
    resolve_sites(d, g);
    for (const auto& [a, b] : mi_pairs) {
      parse_region(a, g);
      parse_region(b, g);
    }
  }

  struct SizeResult {
    Eigen::Index n = 0;
    bool stable = false;
    double eta = 0.0, eta_c = kNaN;
    std::vector<std::pair<double, double>> angles;  // (angle, entropy)
    std::vector<std::pair<Eigen::Index, Eigen::Index>> region;  // (sites in A, edge sites in A)
    std::vector<double> mi;
    Eigen::Index edge_sites = 0;
  };
  std::vector<SizeResult> results;
  for (Eigen::Index n : sizes) {
    const LatticeModel model = build_model(cfg.model, n);
    const LatticeGeometry& g = model.geometry;
    const Sites s = resolve_sites(d, g);
    SizeResult r;
    r.n = g.nx;
    r.edge_sites = static_cast<Eigen::Index>(parse_region("edge", g).size());
    const EigenmodeSet modes = eigenpairs(model.system);
    const EtaChoice eta = [&] {
      if (d.eta) {
        EtaChoice c{*d.eta, eta_critical_wavefunction(modes, s.cooling, s.heating).critical};
        return c;
      }
      return resolve_eta(model, d, s, &modes);
    }();
    r.eta = eta.eta;
    r.eta_c = eta.eta_critical;
    CovarianceState state;
    try {
      state = bogoliubov_steady_state(modes, JumpOperator::pairing(g.size(), s.cooling, s.heating, d.kappa, eta.eta)).covariance;
      r.stable = true;
    } catch (const Error& e) {
      // Scaling runs keep only stable sizes; a single run reports the error.
      if (!scaling || (e.code() != ErrorCode::Unstable && e.code() != ErrorCode::NonUnique)) throw;
      warn("size " + std::to_string(r.n) + " skipped: " + e.what());
      results.push_back(r);
      continue;
    }
    const auto cuts = angled_bipartitions(g, angle_count > 0 ? static_cast<int>(angle_count) : static_cast<int>(g.nx));
    r.angles.resize(cuts.size());
    r.region.resize(cuts.size());
    const auto edge = parse_region("edge", g);
    parallel_for(cuts.size(), threads, [&](std::size_t k) {
      r.angles[k] = {cuts[k].angle, entanglement_entropy(state, cuts[k])};
      Eigen::Index on_edge = 0;
      for (auto site : cuts[k].members) on_edge += std::binary_search(edge.begin(), edge.end(), site) ? 1 : 0;
      r.region[k] = {static_cast<Eigen::Index>(cuts[k].members.size()), on_edge};
    });
    for (const auto& [a, b] : mi_pairs) r.mi.push_back(mutual_information(state, parse_region(a, g), parse_region(b, g)));
    results.push_back(r);
  }

  OutputSet out(cfg.output.directory, base_metadata("entanglement", cfg));
  CsvTable angles({"size", "angle", "entropy", "region_sites", "region_edge_sites"});
  CsvTable scale({"size", "edge_sites", "eta", "eta_c", "stable", "mean_entropy", "min_entropy", "max_entropy",
                  "angle_variation"});
  CsvTable mi({"size", "a", "b", "mutual_information"});
  std::vector<double> fx, fy;
  for (const auto& r : results) {
    double mean = kNaN, lo = kNaN, hi = kNaN, var = kNaN;
    if (r.stable) {
      mean = 0.0;
      lo = std::numeric_limits<double>::infinity();
      hi = -lo;
      for (std::size_t k = 0; k < r.angles.size(); ++k) {
        const double e = r.angles[k].second;
        angles.row({num(r.n), num(r.angles[k].first), num(e), num(r.region[k].first), num(r.region[k].second)});
        mean += e;
        lo = std::min(lo, e);
        hi = std::max(hi, e);
      }
      mean /= static_cast<double>(r.angles.size());
      var = (hi - lo) / mean;
      fx.push_back(static_cast<double>(r.edge_sites));
      fy.push_back(mean);
      for (std::size_t k = 0; k < mi_pairs.size(); ++k)
        mi.row({num(r.n), mi_pairs[k].first, mi_pairs[k].second, num(r.mi[k])});
    }
    scale.row({num(r.n), num(r.edge_sites), num(r.eta), num(r.eta_c), flag(r.stable), num(mean), num(lo), num(hi), num(var)});
  }
  out.add_csv("entropy_angles.csv", angles);
  out.add_csv("entropy_scaling.csv", scale);
  if (!mi_pairs.empty()) out.add_csv("mutual_information.csv", mi);
  Json summary{{"stable_sizes", fx.size()}};
  if (fx.size() >= 3) {
    const LinearFit f = volume_law_fit(fx, fy);
    summary["fit"] = {{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
  }
  out.add_json("summary.json", summary);
  return out;
}

// ----------------------------------------------------------------- disorder

OutputSet cmd_disorder(const RunConfig& cfg, int threads) {
  const Json& t = cfg.task;
  expect_keys(t, {"alphas", "sigmas", "sigma_over_alpha", "realizations"}, "task");
  if (cfg.model.kind != "ssh") config_error("model.kind", "disorder sweeps need an ssh model");
  const DissipatorSpec& d = require_dissipator(cfg);
  if (!d.eta_ratio) config_error("dissipator.eta_ratio", "disorder sweeps set eta per realization; give eta_ratio");
  if (d.mirrored || d.comparator) config_error("dissipator", "disorder sweeps use a single pairing dissipator");
  if (*d.eta_ratio <= 0.0 || *d.eta_ratio >= 1.0) config_error("dissipator.eta_ratio", "must lie in (0, 1)");
  if (!t.contains("alphas")) config_error("task.alphas", "missing");
  const std::vector<double> alphas = parse_grid(t["alphas"], "task.alphas");
  if (t.contains("sigmas") == t.contains("sigma_over_alpha"))
    config_error("task", "give exactly one of sigmas and sigma_over_alpha");
  const bool relative = t.contains("sigma_over_alpha");
  const std::vector<double> sig = parse_grid(relative ? t["sigma_over_alpha"] : t["sigmas"],
                                             relative ? "task.sigma_over_alpha" : "task.sigmas");
  for (double v : sig)
    if (v < 0.0) config_error("task", "sigma values must be non-negative");
  const long long r = get_int(t, "realizations", "task", 100);
  if (r < 1) config_error("task.realizations", "must be positive");
  const LatticeGeometry g = LatticeGeometry::chain(cfg.model.ssh.n);
  const Sites s = resolve_sites(d, g);

  OutputSet out(cfg.output.directory, base_metadata("disorder", cfg));
  CsvTable table({"alpha", "sigma", "mean_s", "stderr", "used", "skipped", "flagged"});
  CsvTable cross({"alpha", "sigma_crossover"});
  for (std::size_t ia = 0; ia < alphas.size(); ++ia) {
    DisorderSweepSpec spec;
    spec.chain = cfg.model.ssh;
    spec.cooling_site = s.cooling;
    spec.heating_site = s.heating;
    spec.kappa = d.kappa;
    spec.eta_ratio = *d.eta_ratio;
    spec.alphas = {alphas[ia]};
    for (double v : sig) spec.sigmas.push_back(relative ? v * std::abs(alphas[ia]) : v);
    spec.realizations = static_cast<int>(r);
    spec.seed = realization_seed(cfg.seed, 0xA000000000000000ULL + ia);
    const DisorderSweepResult res = disorder_sweep(spec, threads);
    for (const auto& p : res.points)
      table.row({num(p.alpha), num(p.sigma), num(p.mean), num(p.std_error), std::to_string(p.used),
                 std::to_string(p.skipped), flag(p.flagged)});
    const auto c = crossover_sigma(res, alphas[ia]);
    cross.row({num(alphas[ia]), num(c ? *c : kNaN)});
  }
  out.add_csv("disorder.csv", table);
  out.add_csv("crossover.csv", cross);
  return out;
}

// ---------------------------------------------------------------- spectrum

OutputSet cmd_spectrum(const RunConfig& cfg, int threads) {
  const Json& t = cfg.task;
  expect_keys(t, {"coupling", "ancilla_loss", "output_site", "output_rate", "grid", "eta_sweep", "optimize"}, "task");
  const DissipatorSpec& d = require_dissipator(cfg);
  if (d.mirrored || d.comparator) config_error("dissipator", "the spectrum task uses a single ancilla dissipator");
  const bool optimize = get_bool(t, "optimize", "task", false);
  if (optimize && (d.eta || d.eta_ratio)) config_error("task.optimize", "optimize replaces eta; drop eta and eta_ratio");
  if (!optimize && !d.eta && !d.eta_ratio) config_error("dissipator", "give eta, eta_ratio or task.optimize");

  const LatticeModel model = build_model(cfg.model);
  const Sites s = resolve_sites(d, model.geometry);
  IoSetup setup;
  setup.lattice = model.system;
  setup.cooling_site = s.cooling;
  setup.heating_site = s.heating;
  setup.coupling = get_number(t, "coupling", "task", 4.0);
  setup.ancilla_loss = get_number(t, "ancilla_loss", "task", 10.0);
  setup.output_rate = get_number(t, "output_rate", "task", 1e-3);
  const long long site = get_int(t, "output_site", "task", 0);
  if (site < 0 || site >= model.system.n_modes()) config_error("task.output_site", "out of range");
  setup.output_site = site;
  if (!(setup.coupling >= 0.0)) config_error("task.coupling", "must be non-negative");
  if (!(setup.ancilla_loss > 0.0)) config_error("task.ancilla_loss", "must be positive");
  if (!(setup.output_rate > 0.0)) config_error("task.output_rate", "must be positive");
  std::vector<double> omega = default_frequency_grid();
  if (t.contains("grid")) {
    const Json& gj = t["grid"];
    if (gj.is_object() && !gj.contains("start")) {
      expect_keys(gj, {"extent", "points"}, "task.grid");
      const long long pts = get_int(gj, "points", "task.grid", 801);
      if (pts < 3 || pts % 2 == 0) config_error("task.grid.points", "must be odd and >= 3");
      const double extent = get_number(gj, "extent", "task.grid", 5.0);
      if (!(extent > 0.0)) config_error("task.grid.extent", "must be positive");
      omega = default_frequency_grid(extent, static_cast<int>(pts));
    } else {
      omega = parse_grid(gj, "task.grid");
    }
  }
  std::vector<double> sweep;
  if (t.contains("eta_sweep")) sweep = parse_grid(t["eta_sweep"], "task.eta_sweep");

  double eta_c = kNaN;
  try {
    eta_c = io_eta_critical(setup, 1.0);
  } catch (const Error&) {
    // No instability below eta = 1 (for instance g = 0).
  }
  Json summary;
  if (optimize) {
    if (!std::isfinite(eta_c)) config_error("task.optimize", "no instability below eta = 1 to bracket the search");
    const EtaOptimum opt = eta_opt_search(setup, 0.0, (1.0 - 1e-7) * eta_c);
    setup.eta = opt.eta;
    summary["eta_opt"] = opt.eta;
    summary["p0_opt"] = opt.p0;
    summary["flat"] = opt.flat;
  } else if (d.eta) {
    setup.eta = *d.eta;
  } else {
    if (!std::isfinite(eta_c)) config_error("dissipator.eta_ratio", "extended system has no threshold below eta = 1");
    setup.eta = *d.eta_ratio * eta_c;
  }
  summary["eta"] = setup.eta;
  summary["eta_critical_extended"] = std::isfinite(eta_c) ? Json(eta_c) : Json();

  const SqueezeSpectrumResult res = squeezing_spectrum(setup, omega, threads);
  OutputSet out(cfg.output.directory, base_metadata("spectrum", cfg));
  CsvTable sp({"omega", "P", "theta_opt"});
  for (std::size_t k = 0; k < res.omega.size(); ++k) sp.row({num(res.omega[k]), num(res.squeezed[k]), num(res.theta[k])});
  out.add_csv("spectrum.csv", sp);
  if (!sweep.empty()) {
    CsvTable sw({"eta", "P0", "stable"});
    for (const auto& row : eta_sweep(setup, sweep, threads)) sw.row({num(row.eta), num(row.p0), flag(row.stable)});
    out.add_csv("eta_sweep.csv", sw);
  }
  const auto zero = std::find(res.omega.begin(), res.omega.end(), 0.0);
  if (zero != res.omega.end()) summary["p0"] = res.squeezed[zero - res.omega.begin()];
  out.add_json("summary.json", summary);
  return out;
}

// --------------------------------------------------------------------- gap

OutputSet cmd_gap(const RunConfig& cfg, int threads) {
  const Json& t = cfg.task;
  expect_keys(t, {"sizes", "mirrored"}, "task");
  if (cfg.model.kind != "ssh") config_error("model.kind", "gap scans need an ssh model");
  const DissipatorSpec& d = require_dissipator(cfg);
  if (d.mirrored || d.comparator) config_error("dissipator", "set task.mirrored instead of dissipator flags");
  if (!t.contains("sizes")) config_error("task.sizes", "missing");
  std::vector<Eigen::Index> sizes;
  for (double v : parse_grid(t["sizes"], "task.sizes")) {
    if (v != std::floor(v) || v < 2) config_error("task.sizes", "sizes must be integers >= 2");
    sizes.push_back(static_cast<Eigen::Index>(v));
  }
  std::string mode = "both";
  if (t.contains("mirrored")) {
    const Json& m = t["mirrored"];
    if (m.is_boolean()) mode = m.get<bool>() ? "mirrored" : "single";
    else if (m.is_string() && m == "both") mode = "both";
    else config_error("task.mirrored", "expected true, false or \"both\"");
  }
  const bool do_single = mode != "mirrored";
  const bool do_mirror = mode != "single";
  if (do_mirror)
    for (auto n : sizes)
      if (n % 2 != 0) config_error("task.sizes", "mirrored dissipators need even sizes");
  for (auto n : sizes) resolve_sites(d, LatticeGeometry::chain(n));

  struct Row {
    double eta = kNaN, gap = kNaN, gap_m = kNaN;
    bool stable = false, stable_m = false;
  };
  std::vector<Row> rows(sizes.size());
  parallel_for(sizes.size(), threads, [&](std::size_t k) {
    const LatticeModel model = build_model(cfg.model, sizes[k]);
    const Sites s = resolve_sites(d, model.geometry);
    const EtaChoice eta = resolve_eta(model, d, s);
    rows[k].eta = eta.eta;
    const JumpOperator jump = JumpOperator::pairing(sizes[k], s.cooling, s.heating, d.kappa, eta.eta);
    const QuadraticSystem single = model.system.with_jump(jump);
    if (do_single) {
      const SpectrumReport r = system_spectrum(single);
      rows[k].gap = r.dissipative_gap;
      rows[k].stable = r.stable;
    }
    if (do_mirror) {
      const SpectrumReport r = system_spectrum(mirrored_dissipator(single, jump));
      rows[k].gap_m = r.dissipative_gap;
      rows[k].stable_m = r.stable;
    }
  });
  OutputSet out(cfg.output.directory, base_metadata("gap", cfg));
  CsvTable table({"size", "eta", "gap", "stable", "gap_mirrored", "stable_mirrored"});
  for (std::size_t k = 0; k < sizes.size(); ++k)
    table.row({num(sizes[k]), num(rows[k].eta), num(rows[k].gap), do_single ? flag(rows[k].stable) : "nan",
               num(rows[k].gap_m), do_mirror ? flag(rows[k].stable_m) : "nan"});
  out.add_csv("gap.csv", table);
  return out;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Unstable:
      return kExitUnstable;
    case ErrorCode::NonUnique:
      return kExitNonUnique;
    case ErrorCode::Config:
      return kExitConfig;
    default:
      return kExitFailure;
  }
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"stability", "steady", "entanglement", "disorder",
                                              "spectrum",  "gap",    "ep-scan"};
  return names;
}

int resolve_threads(const std::optional<int>& flag) {
  if (flag) {
    if (*flag < 1) throw Error(ErrorCode::Config, "--threads must be at least 1");
    return *flag;
  }
  if (const char* env = std::getenv("DISSIPAIR_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw Error(ErrorCode::Config, "DISSIPAIR_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  return 1;
}

OutputSet run_command(const std::string& command, const RunConfig& config, int threads, bool expect_unstable) {
  if (command == "stability") return cmd_stability(config, threads);
  if (command == "steady") return cmd_steady(config, threads, expect_unstable);
  if (command == "entanglement") return cmd_entanglement(config, threads);
  if (command == "disorder") return cmd_disorder(config, threads);
  if (command == "spectrum") return cmd_spectrum(config, threads);
  if (command == "gap") return cmd_gap(config, threads);
  if (command == "ep-scan") return cmd_ep_scan(config, threads);
  throw Error(ErrorCode::Config, "unknown command '" + command + "'");
}

int execute(const CommandOptions& options) {
  try {
    const int threads = resolve_threads(options.threads);
    RunConfig cfg = load_config(options.config_path);
    if (options.out) cfg.output.directory = *options.out;
    if (options.seed) {
      cfg.seed = *options.seed;
      cfg.raw["seed"] = *options.seed;
    }
    if (options.expect_unstable && options.command != "steady")
      throw Error(ErrorCode::Config, "--expect-unstable applies to the steady command only");
    const OutputSet out = run_command(options.command, cfg, threads, options.expect_unstable);
    out.commit();
    std::cerr << "wrote " << out.files().size() << " files to " << cfg.output.directory << "\n";
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

std::string version_string() { return DISSIPAIR_VERSION; }

}  // namespace dissipair
