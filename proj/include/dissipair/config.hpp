#ifndef DISSIPAIR_CONFIG_HPP
#define DISSIPAIR_CONFIG_HPP

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dissipair/lattice_models.hpp"

namespace dissipair {

using Json = nlohmann::json;

/// Throws Error(Config) naming `path` when `obj` is not an object or holds a
/// key outside `allowed`.
void expect_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& path);

/// Typed field access; all throw Error(Config) with the key path on mismatch.
double get_number(const Json& obj, const char* key, const std::string& path);
double get_number(const Json& obj, const char* key, const std::string& path, double fallback);
long long get_int(const Json& obj, const char* key, const std::string& path);
long long get_int(const Json& obj, const char* key, const std::string& path, long long fallback);
bool get_bool(const Json& obj, const char* key, const std::string& path, bool fallback);
std::string get_string(const Json& obj, const char* key, const std::string& path, const std::string& fallback);

/// Either a list of numbers, {"start", "stop", "count"} (inclusive, count >= 1)
/// or {"start", "stop", "step"}.
std::vector<double> parse_grid(const Json& value, const std::string& path);

/// One coordinate of a site: an integer or "half", "half+K", "half-K",
/// "end", "end-K", resolved against the lattice extent.
struct CoordSpec {
  enum class Anchor { Zero, Half, End } anchor = Anchor::Zero;
  long long offset = 0;
  Eigen::Index resolve(Eigen::Index extent) const;
};

/// Chain site (one coordinate) or square site [x, y].
struct SiteSpec {
  std::vector<CoordSpec> coords;
  Eigen::Index resolve(const LatticeGeometry& geometry) const;
};
SiteSpec parse_site(const Json& value, const std::string& path);

struct ModelSpec {
  std::string kind;  // three_mode | dimer | ssh | hofstadter
  double j1 = 1.0;
  double j2 = 1.0;
  SshParams ssh;
  Eigen::Index nx = 0;
  Eigen::Index ny = 0;
  LatticeKind lattice = LatticeKind::SquareOpen;
  Axis periodic_axis = Axis::Y;
};

/// Builds the lattice; `size` (if positive) overrides n for chains and nx = ny
/// for square lattices. The dimer carries its pairing term in K.
LatticeModel build_model(const ModelSpec& spec, Eigen::Index size = 0);

struct DissipatorSpec {
  SiteSpec cooling;
  SiteSpec heating;
  std::optional<double> eta;
  std::optional<double> eta_ratio;
  double kappa = 1.0;
  bool mirrored = false;
  bool comparator = false;
};

struct OutputSpec {
  std::string directory = "out";
};

struct RunConfig {
  ModelSpec model;
  std::optional<DissipatorSpec> dissipator;
  Json task = Json::object();
  OutputSpec output;
  std::uint64_t seed = 0;
  Json raw;  // the validated document, echoed into sidecars
};

/// Strict parse: unknown keys, wrong types and eta together with eta_ratio
/// throw Error(Config).
RunConfig parse_config(const Json& doc);
RunConfig load_config(const std::string& path);

/// Region on a square lattice: "row:K" (fixed y), "column:K" (fixed x) with
/// K an integer or coordinate expression, or "edge" (open boundary sites; a
/// cylinder only has the two rings along its periodic axis).
std::vector<Eigen::Index> parse_region(const std::string& spec, const LatticeGeometry& geometry);

}  // namespace dissipair

#endif  // DISSIPAIR_CONFIG_HPP
