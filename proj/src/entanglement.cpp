#include "dissipair/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include "dissipair/parallel.hpp"
#include "dissipair/stability.hpp"

namespace dissipair {

namespace {

constexpr double kClamp = 1e-9;

double entropy_term(double nu) {
  if (nu < 0.5 - kClamp) throw Error(ErrorCode::Domain, "symplectic eigenvalue below 1/2: " + std::to_string(nu));
  nu = std::max(nu, 0.5);
  const double plus = nu + 0.5;
  const double minus = nu - 0.5;
  double s = plus * std::log(plus);
  if (minus > 0.0) s -= minus * std::log(minus);
  return s;
}

void check_modes(const std::vector<Eigen::Index>& modes, Eigen::Index n) {
  for (Eigen::Index m : modes)
    if (m < 0 || m >= n) throw Error(ErrorCode::InvalidArgument, "mode index out of range");
}

}  // namespace

double entanglement_entropy(const CovarianceState& state, const std::vector<Eigen::Index>& modes) {
  if (modes.empty()) return 0.0;
  check_modes(modes, state.n_modes());
  const RVector nu = symplectic_eigenvalues(state.reduce(modes));
  double s = 0.0;
  for (Eigen::Index k = 0; k < nu.size(); ++k) s += entropy_term(nu(k));
  return s;
}

double entanglement_entropy(const CovarianceState& state, const Bipartition& part) {
  return entanglement_entropy(state, part.members);
}

double mutual_information(const CovarianceState& state, const std::vector<Eigen::Index>& a,
                          const std::vector<Eigen::Index>& b) {
  std::vector<Eigen::Index> joint = a;
  joint.insert(joint.end(), b.begin(), b.end());
  std::sort(joint.begin(), joint.end());
  if (std::adjacent_find(joint.begin(), joint.end()) != joint.end())
    throw Error(ErrorCode::InvalidArgument, "mutual information needs disjoint regions");
  return entanglement_entropy(state, a) + entanglement_entropy(state, b) - entanglement_entropy(state, joint);
}

std::vector<Eigen::Index> complement(const std::vector<Eigen::Index>& modes, Eigen::Index n) {
  std::vector<bool> in(n, false);
  for (Eigen::Index m : modes) {
    if (m < 0 || m >= n) throw Error(ErrorCode::InvalidArgument, "mode index out of range");
    in[m] = true;
  }
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!in[i]) out.push_back(i);
  return out;
}

std::vector<Bipartition> angled_bipartitions(const LatticeGeometry& geometry, int count) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "need at least one cut");
  const double cx = 0.5 * static_cast<double>(geometry.nx - 1);
  const double cy = 0.5 * static_cast<double>(geometry.ny - 1);
  std::vector<Bipartition> cuts;
  for (int i = 0; i < count; ++i) {
    Bipartition b;
    b.angle = std::numbers::pi * i / count;
    const double nx = -std::sin(b.angle);
    const double ny = std::cos(b.angle);
    for (Eigen::Index s = 0; s < geometry.size(); ++s) {
      const auto [x, y] = geometry.coords(s);
      const double d = nx * (static_cast<double>(x) - cx) + ny * (static_cast<double>(y) - cy);
      if (d >= -1e-12) b.members.push_back(s);
    }
    cuts.push_back(std::move(b));
  }
  return cuts;
}

LinearFit volume_law_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "fit inputs differ in length");
  if (x.size() < 3) throw Error(ErrorCode::InvalidArgument, "fit needs at least 3 points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) throw Error(ErrorCode::InvalidArgument, "fit needs distinct x values");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.slope * x[i] - f.intercept;
    ssr += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  f.slope_stderr = std::sqrt(ssr / (n - 2.0) / sxx);
  return f;
}

double edge_localization(const RVector& density) {
  const Eigen::Index n = density.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty density profile");
  const double total = density.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::Domain, "density profile has no weight");
  const double nn = static_cast<double>(n);
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = 1.0 - 4.0 * static_cast<double>(i) * (nn - static_cast<double>(i)) / (nn * nn);
    s += std::sqrt(std::max(density(i), 0.0) * std::max(density(n - 1 - i), 0.0)) * w;
  }
  return s / total;
}

std::uint64_t realization_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

DisorderSweepResult disorder_sweep(const DisorderSweepSpec& spec, int threads) {
  if (spec.realizations < 1) throw Error(ErrorCode::InvalidArgument, "need at least one realization");
  if (spec.alphas.empty() || spec.sigmas.empty()) throw Error(ErrorCode::InvalidArgument, "empty disorder grid");
  if (!(spec.eta_ratio > 0.0 && spec.eta_ratio < 1.0))
    throw Error(ErrorCode::InvalidArgument, "eta_ratio must lie in (0, 1)");
  for (double s : spec.sigmas)
    if (s < 0.0) throw Error(ErrorCode::InvalidArgument, "sigma must be non-negative");

  const std::size_t n_sigma = spec.sigmas.size();
  const std::size_t r_count = static_cast<std::size_t>(spec.realizations);
  const std::size_t total = spec.alphas.size() * n_sigma * r_count;
  // NaN marks a skipped realization.
  std::vector<double> values(total, 0.0);

  parallel_for(total, threads, [&](std::size_t k) {
    const std::size_t point = k / r_count;
    SshParams p = spec.chain;
    p.alpha = spec.alphas[point / n_sigma];
    p.sigma = spec.sigmas[point % n_sigma];
    p.seed = realization_seed(spec.seed, k);
    try {
      const LatticeModel model = build_ssh(p);
      const EigenmodeSet modes = eigenpairs(model.system);
      const double eta_c = eta_critical_wavefunction(modes, spec.cooling_site, spec.heating_site).critical;
      if (!std::isfinite(eta_c)) throw Error(ErrorCode::Unstable, "no finite threshold");
      const JumpOperator jump =
          JumpOperator::pairing(p.n, spec.cooling_site, spec.heating_site, spec.kappa, spec.eta_ratio * eta_c);
      const SteadyState s = bogoliubov_steady_state(modes, jump, {.warn = false});
      values[k] = edge_localization(observables(s.covariance).density);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Unstable && e.code() != ErrorCode::NonUnique && e.code() != ErrorCode::Domain) throw;
      values[k] = std::numeric_limits<double>::quiet_NaN();
    }
  });

  DisorderSweepResult result;
  result.realizations = spec.realizations;
  result.seed = spec.seed;
  for (std::size_t point = 0; point < spec.alphas.size() * n_sigma; ++point) {
    DisorderPoint d;
    d.alpha = spec.alphas[point / n_sigma];
    d.sigma = spec.sigmas[point % n_sigma];
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t r = 0; r < r_count; ++r) {
      const double v = values[point * r_count + r];
      if (std::isnan(v)) {
        ++d.skipped;
        continue;
      }
      ++d.used;
      sum += v;
      sum2 += v * v;
    }
    if (d.used > 0) {
      d.mean = sum / d.used;
      if (d.used > 1) {
        const double var = std::max(0.0, (sum2 - d.used * d.mean * d.mean) / (d.used - 1));
        d.std_error = std::sqrt(var / d.used);
      }
    } else {
      d.mean = std::numeric_limits<double>::quiet_NaN();
    }
    d.flagged = 2 * d.skipped > spec.realizations;
    if (d.flagged)
      warn("disorder point alpha=" + std::to_string(d.alpha) + " sigma=" + std::to_string(d.sigma) + ": " +
           std::to_string(d.skipped) + " of " + std::to_string(spec.realizations) + " realizations skipped");
    result.points.push_back(d);
  }
  return result;
}

std::optional<double> crossover_sigma(const DisorderSweepResult& result, double alpha) {
  const DisorderPoint* prev = nullptr;
  for (const auto& p : result.points) {
    if (p.alpha != alpha || std::isnan(p.mean)) continue;
    if (prev != nullptr && (prev->mean - 0.5) * (p.mean - 0.5) <= 0.0 && prev->mean != p.mean) {
      const double t = (0.5 - prev->mean) / (p.mean - prev->mean);
      return prev->sigma + t * (p.sigma - prev->sigma);
    }
    prev = &p;
  }
  return std::nullopt;
}

std::vector<Eigen::Index> spiral_order(const LatticeGeometry& geometry) {
  if (geometry.nx != geometry.ny || geometry.ny < 2)
    throw Error(ErrorCode::InvalidArgument, "spiral order needs a square lattice");
  const Eigen::Index n = geometry.nx;
  auto site = [&](Eigen::Index row, Eigen::Index col) { return geometry.index(col, n - 1 - row); };
  std::vector<Eigen::Index> order;
  order.reserve(n * n);
  Eigen::Index top = 0, bottom = n - 1, left = 0, right = n - 1;
  while (top <= bottom && left <= right) {
    for (Eigen::Index c = left; c <= right; ++c) order.push_back(site(top, c));
    for (Eigen::Index r = top + 1; r <= bottom; ++r) order.push_back(site(r, right));
    if (top < bottom)
      for (Eigen::Index c = right - 1; c >= left; --c) order.push_back(site(bottom, c));
    if (left < right)
      for (Eigen::Index r = bottom - 1; r > top; --r) order.push_back(site(r, left));
    ++top;
    --bottom;
    ++left;
    --right;
  }
  return order;
}

std::vector<LineCutRow> line_cut(const ObservableSet& obs, const LatticeGeometry& geometry, const LinePath& path,
                                 Eigen::Index reference) {
  if (obs.density.size() != geometry.size())
    throw Error(ErrorCode::DimensionMismatch, "observables do not match the geometry");
  if (reference < 0 || reference >= geometry.size()) throw Error(ErrorCode::InvalidArgument, "reference out of range");
  std::vector<Eigen::Index> sites;
  switch (path.kind) {
    case PathKind::Row:
      if (path.index < 0 || path.index >= geometry.ny) throw Error(ErrorCode::InvalidArgument, "row out of range");
      for (Eigen::Index x = 0; x < geometry.nx; ++x) sites.push_back(geometry.index(x, path.index));
      break;
    case PathKind::Column:
      if (path.index < 0 || path.index >= geometry.nx) throw Error(ErrorCode::InvalidArgument, "column out of range");
      for (Eigen::Index y = 0; y < geometry.ny; ++y) sites.push_back(geometry.index(path.index, y));
      break;
    case PathKind::EdgeWalk: {
      const auto spiral = spiral_order(geometry);
      sites.assign(spiral.begin(), spiral.begin() + 4 * (geometry.nx - 1));
      break;
    }
  }
  std::vector<LineCutRow> rows;
  for (std::size_t k = 0; k < sites.size(); ++k) {
    LineCutRow r;
    r.step = static_cast<Eigen::Index>(k);
    r.site = sites[k];
    std::tie(r.x, r.y) = geometry.coords(r.site);
    r.density = obs.density(r.site);
    r.number_corr = std::abs(obs.number(reference, r.site));
    r.pairing_corr = std::abs(obs.pairing(reference, r.site));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace dissipair
