#include "dissipair/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace dissipair {

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::Config, path + ": " + what);
}

std::string child(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

const Json* find(const Json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

CoordSpec parse_coord(const Json& v, const std::string& path) {
  CoordSpec c;
  if (v.is_number_integer()) {
    c.offset = v.get<long long>();
    return c;
  }
  if (!v.is_string()) config_error(path, "expected an integer or a coordinate expression");
  const std::string s = v.get<std::string>();
  std::string rest;
  if (s.rfind("half", 0) == 0) {
    c.anchor = CoordSpec::Anchor::Half;
    rest = s.substr(4);
  } else if (s.rfind("end", 0) == 0) {
    c.anchor = CoordSpec::Anchor::End;
    rest = s.substr(3);
  } else {
    config_error(path, "unknown coordinate expression '" + s + "'");
  }
  if (rest.empty()) return c;
  if ((rest[0] != '+' && rest[0] != '-') || rest.size() < 2 ||
      !std::all_of(rest.begin() + 1, rest.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
    config_error(path, "malformed coordinate expression '" + s + "'");
  c.offset = std::stoll(rest.substr(1)) * (rest[0] == '-' ? -1 : 1);
  return c;
}

std::string join_path(const std::string& a, std::size_t i) { return a + "[" + std::to_string(i) + "]"; }

}  // namespace

void expect_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
  if (!obj.is_object()) config_error(path.empty() ? "<root>" : path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
    if (!known) config_error(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
  }
}

double get_number(const Json& obj, const char* key, const std::string& path) {
  const Json* v = find(obj, key);
  if (v == nullptr) config_error(child(path, key), "missing required number");
  if (!v->is_number()) config_error(child(path, key), "expected a number");
  const double d = v->get<double>();
  if (!std::isfinite(d)) config_error(child(path, key), "must be finite");
  return d;
}

double get_number(const Json& obj, const char* key, const std::string& path, double fallback) {
  return find(obj, key) == nullptr ? fallback : get_number(obj, key, path);
}

long long get_int(const Json& obj, const char* key, const std::string& path) {
  const Json* v = find(obj, key);
  if (v == nullptr) config_error(child(path, key), "missing required integer");
  if (!v->is_number_integer()) config_error(child(path, key), "expected an integer");
  return v->get<long long>();
}

long long get_int(const Json& obj, const char* key, const std::string& path, long long fallback) {
  return find(obj, key) == nullptr ? fallback : get_int(obj, key, path);
}

bool get_bool(const Json& obj, const char* key, const std::string& path, bool fallback) {
  const Json* v = find(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_boolean()) config_error(child(path, key), "expected true or false");
  return v->get<bool>();
}

std::string get_string(const Json& obj, const char* key, const std::string& path, const std::string& fallback) {
  const Json* v = find(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_string()) config_error(child(path, key), "expected a string");
  return v->get<std::string>();
}

std::vector<double> parse_grid(const Json& value, const std::string& path) {
  std::vector<double> out;
  if (value.is_array()) {
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (!value[i].is_number()) config_error(join_path(path, i), "expected a number");
      out.push_back(value[i].get<double>());
    }
  } else if (value.is_object()) {
    expect_keys(value, {"start", "stop", "count", "step"}, path);
    const double start = get_number(value, "start", path);
    const double stop = get_number(value, "stop", path);
    const bool has_count = value.contains("count");
    if (has_count == value.contains("step")) config_error(path, "give exactly one of count and step");
    if (has_count) {
      const long long count = get_int(value, "count", path);
      if (count < 1 || count > 10000000) config_error(child(path, "count"), "must lie in [1, 1e7]");
      for (long long i = 0; i < count; ++i)
        out.push_back(count == 1 ? start : start + (stop - start) * static_cast<double>(i) / (count - 1));
    } else {
      const double step = get_number(value, "step", path);
      if (!(step > 0.0)) config_error(child(path, "step"), "must be positive");
      const double span = stop - start;
      if (span < 0.0) config_error(path, "stop must not be below start");
      const long long count = static_cast<long long>(std::floor(span / step + 1e-9)) + 1;
      if (count > 10000000) config_error(path, "too many grid points");
      for (long long i = 0; i < count; ++i) out.push_back(start + step * static_cast<double>(i));
    }
  } else {
    config_error(path, "expected a list or {start, stop, count|step}");
  }
  if (out.empty()) config_error(path, "grid is empty");
  for (double d : out)
    if (!std::isfinite(d)) config_error(path, "grid values must be finite");
  return out;
}

Eigen::Index CoordSpec::resolve(Eigen::Index extent) const {
  long long base = 0;
  if (anchor == Anchor::Half) base = extent / 2;
  if (anchor == Anchor::End) base = extent - 1;
  const long long v = base + offset;
  if (v < 0 || v >= extent)
    throw Error(ErrorCode::Config, "site coordinate " + std::to_string(v) + " outside [0, " + std::to_string(extent) + ")");
  return static_cast<Eigen::Index>(v);
}

Eigen::Index SiteSpec::resolve(const LatticeGeometry& geometry) const {
  if (geometry.is_square()) {
    if (coords.size() != 2) throw Error(ErrorCode::Config, "square lattice sites need [x, y]");
    return geometry.index(coords[0].resolve(geometry.nx), coords[1].resolve(geometry.ny));
  }
  if (coords.size() != 1) throw Error(ErrorCode::Config, "chain sites take a single index");
  return coords[0].resolve(geometry.size());
}

SiteSpec parse_site(const Json& value, const std::string& path) {
  SiteSpec s;
  if (value.is_array()) {
    if (value.size() != 2) config_error(path, "expected [x, y]");
    s.coords = {parse_coord(value[0], join_path(path, 0)), parse_coord(value[1], join_path(path, 1))};
  } else {
    s.coords = {parse_coord(value, path)};
  }
  return s;
}

LatticeModel build_model(const ModelSpec& spec, Eigen::Index size) {
  if (spec.kind == "three_mode") return build_three_mode(spec.j1, spec.j2);
  if (spec.kind == "dimer") {
    CMatrix h = CMatrix::Zero(2, 2), k = CMatrix::Zero(2, 2);
    h(0, 1) = h(1, 0) = spec.j1;
    k(0, 1) = k(1, 0) = spec.j2;
    return {LatticeGeometry::chain(2), QuadraticSystem(h, {}, k)};
  }
  if (spec.kind == "ssh") {
    SshParams p = spec.ssh;
    if (size > 0) p.n = size;
    return build_ssh(p);
  }
  if (spec.kind == "hofstadter") {
    const Eigen::Index nx = size > 0 ? size : spec.nx;
    const Eigen::Index ny = size > 0 ? size : spec.ny;
    return build_hofstadter(nx, ny, spec.lattice, spec.periodic_axis);
  }
  throw Error(ErrorCode::Config, "unknown model kind '" + spec.kind + "'");
}

RunConfig parse_config(const Json& doc) {
  expect_keys(doc, {"model", "dissipator", "task", "output", "seed"}, "");
  RunConfig cfg;
  cfg.raw = doc;

  if (!doc.contains("model")) config_error("model", "missing required block");
  const Json& m = doc["model"];
  if (!m.is_object()) config_error("model", "expected an object");
  cfg.model.kind = get_string(m, "kind", "model", "");
  ModelSpec& ms = cfg.model;
  if (ms.kind == "three_mode" || ms.kind == "dimer") {
    expect_keys(m, {"kind", "j1", "j2"}, "model");
    ms.j1 = get_number(m, "j1", "model");
    ms.j2 = get_number(m, "j2", "model");
  } else if (ms.kind == "ssh") {
    expect_keys(m, {"kind", "n", "alpha", "hopping", "sigma", "convention"}, "model");
    const long long n = get_int(m, "n", "model", 2);
    if (n < 2) config_error("model.n", "must be at least 2");
    ms.ssh.n = n;
    ms.ssh.alpha = get_number(m, "alpha", "model", 0.0);
    ms.ssh.hopping = get_number(m, "hopping", "model", 1.0);
    ms.ssh.sigma = get_number(m, "sigma", "model", 0.0);
    if (ms.ssh.sigma < 0.0) config_error("model.sigma", "must be non-negative");
    const std::string conv = get_string(m, "convention", "model", "plus");
    if (conv == "plus") ms.ssh.convention = BondConvention::Plus;
    else if (conv == "minus") ms.ssh.convention = BondConvention::Minus;
    else config_error("model.convention", "expected 'plus' or 'minus'");
  } else if (ms.kind == "hofstadter") {
    expect_keys(m, {"kind", "nx", "ny", "boundary", "periodic_axis"}, "model");
    ms.nx = get_int(m, "nx", "model", 24);
    ms.ny = get_int(m, "ny", "model", ms.nx);
    if (ms.nx < 2 || ms.ny < 2) config_error("model", "nx and ny must be at least 2");
    const std::string b = get_string(m, "boundary", "model", "open");
    if (b == "open") ms.lattice = LatticeKind::SquareOpen;
    else if (b == "cylinder") ms.lattice = LatticeKind::SquareCylinder;
    else config_error("model.boundary", "expected 'open' or 'cylinder'");
    const std::string ax = get_string(m, "periodic_axis", "model", "y");
    if (ax == "x") ms.periodic_axis = Axis::X;
    else if (ax == "y") ms.periodic_axis = Axis::Y;
    else config_error("model.periodic_axis", "expected 'x' or 'y'");
  } else {
    config_error("model.kind", "expected one of three_mode, dimer, ssh, hofstadter");
  }

  if (doc.contains("dissipator")) {
    const Json& d = doc["dissipator"];
    expect_keys(d, {"cooling", "heating", "eta", "eta_ratio", "kappa", "mirrored", "comparator"}, "dissipator");
    DissipatorSpec ds;
    if (!d.contains("cooling") || !d.contains("heating"))
      config_error("dissipator", "cooling and heating sites are required");
    ds.cooling = parse_site(d["cooling"], "dissipator.cooling");
    ds.heating = parse_site(d["heating"], "dissipator.heating");
    if (d.contains("eta") && d.contains("eta_ratio"))
      config_error("dissipator", "eta and eta_ratio are mutually exclusive");
    if (d.contains("eta")) {
      ds.eta = get_number(d, "eta", "dissipator");
      if (*ds.eta < 0.0) config_error("dissipator.eta", "must be non-negative");
    }
    if (d.contains("eta_ratio")) {
      ds.eta_ratio = get_number(d, "eta_ratio", "dissipator");
      if (*ds.eta_ratio < 0.0) config_error("dissipator.eta_ratio", "must be non-negative");
    }
    ds.kappa = get_number(d, "kappa", "dissipator", 1.0);
    if (!(ds.kappa > 0.0)) config_error("dissipator.kappa", "must be positive");
    ds.mirrored = get_bool(d, "mirrored", "dissipator", false);
    ds.comparator = get_bool(d, "comparator", "dissipator", false);
    if (ds.mirrored && ds.comparator) config_error("dissipator", "mirrored and comparator are mutually exclusive");
    const bool square = ms.kind == "hofstadter";
    for (const SiteSpec* s : {&ds.cooling, &ds.heating})
      if ((s->coords.size() == 2) != square)
        config_error("dissipator", square ? "square lattice sites need [x, y]" : "chain sites take a single index");
    cfg.dissipator = ds;
  }

  if (doc.contains("task")) {
    cfg.task = doc["task"];
    if (!cfg.task.is_object()) config_error("task", "expected an object");
  }

  if (doc.contains("output")) {
    const Json& o = doc["output"];
    expect_keys(o, {"directory", "formats"}, "output");
    // CSV data plus JSON summaries are the only formats; the list exists so a
    // config asking for anything else fails loudly.
    if (o.contains("formats")) {
      if (!o["formats"].is_array()) config_error("output.formats", "expected a list");
      for (const auto& f : o["formats"])
        if (!f.is_string() || (f != "csv" && f != "json")) config_error("output.formats", "supported formats are csv and json");
    }
    cfg.output.directory = get_string(o, "directory", "output", "out");
    if (cfg.output.directory.empty()) config_error("output.directory", "must not be empty");
  }

  if (doc.contains("seed")) {
    const Json& s = doc["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      config_error("seed", "expected a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Config, "config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

std::vector<Eigen::Index> parse_region(const std::string& spec, const LatticeGeometry& geometry) {
  if (!geometry.is_square()) throw Error(ErrorCode::Config, "regions need a square lattice");
  std::vector<Eigen::Index> sites;
  if (spec == "edge") {
    for (Eigen::Index s = 0; s < geometry.size(); ++s) {
      const auto [x, y] = geometry.coords(s);
      const bool rows = geometry.kind != LatticeKind::SquareCylinder || geometry.periodic_axis == Axis::X;
      const bool cols = geometry.kind != LatticeKind::SquareCylinder || geometry.periodic_axis == Axis::Y;
      if ((rows && (y == 0 || y == geometry.ny - 1)) || (cols && (x == 0 || x == geometry.nx - 1))) sites.push_back(s);
    }
    return sites;
  }
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::Config, "region '" + spec + "': expected row:K, column:K or edge");
  const std::string kind = spec.substr(0, colon);
  const std::string arg = spec.substr(colon + 1);
  Json coord;
  if (!arg.empty() && std::all_of(arg.begin(), arg.end(), [](char c) { return c >= '0' && c <= '9'; }))
    coord = std::stoll(arg);
  else
    coord = arg;
  const CoordSpec c = parse_coord(coord, "region '" + spec + "'");
  if (kind == "row") {
    const Eigen::Index y = c.resolve(geometry.ny);
    for (Eigen::Index x = 0; x < geometry.nx; ++x) sites.push_back(geometry.index(x, y));
  } else if (kind == "column") {
    const Eigen::Index x = c.resolve(geometry.nx);
    for (Eigen::Index y = 0; y < geometry.ny; ++y) sites.push_back(geometry.index(x, y));
  } else {
    throw Error(ErrorCode::Config, "region '" + spec + "': expected row:K, column:K or edge");
  }
  std::sort(sites.begin(), sites.end());
  return sites;
}

}  // namespace dissipair
