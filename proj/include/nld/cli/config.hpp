#ifndef NLD_CLI_CONFIG_HPP
#define NLD_CLI_CONFIG_HPP

// JSON run configuration. Every key is validated; unknown keys are rejected
// with their JSON-pointer location.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "nld/coefficients.hpp"
#include "nld/domain.hpp"
#include "nld/error.hpp"
#include "nld/sis.hpp"

namespace nld::cli {

using nlohmann::json;

/// Malformed configuration: missing key, type mismatch, unknown key, bad value.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : InvalidArgument(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Hex SHA-256 of the given bytes.
inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

/// Object view that tracks which keys were read, so leftovers can be reported.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where(), "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string child(const std::string& key) const { return path_ + "/" + key; }
  std::string where() const { return path_.empty() ? "/" : path_; }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError(child(key), "missing required key");
    seen_.insert(key);
    return j_.at(key);
  }

  template <class T>
  T get(const std::string& key) {
    const json& v = raw(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(child(key), "type mismatch (got " + std::string(v.type_name()) + ")");
    }
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(child(key), "expected a number");
    return v.get<double>();
  }

  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) throw ConfigError(child(key), "must be positive");
    return v;
  }

  Section section(const std::string& key) { return Section(raw(key), child(key)); }

  /// Rejects any key not read so far.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(child(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

enum class ProblemKind { system, sis };

struct SweepSpec {
  std::string parameter;  // "d_I" or "K"
  std::vector<double> values;
};

struct SimulationSpec {
  double t_end = 50.0;
  double dt = 0.0;  // 0 selects the stability bound
  int record_every = 10;
  Eigen::VectorXd s0;
  Eigen::VectorXd i0;
};

struct SolverSpec {
  /// Relative bisection tolerance for mu0.
  double tol = 1e-10;
  /// Power-iteration tolerance.
  double spectral_tol = 1e-12;
  long max_iter = kDefaultMaxIter;
  /// Target Collatz-Wielandt gap for certificates.
  double cw_tol = 1e-10;
  bool certificate = true;
  std::vector<double> eps{0.2, 0.1, 0.05};
};

struct RunConfig {
  std::string source;
  std::string config_hash;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = ".";

  ProblemKind kind = ProblemKind::sis;
  SpatialGrid grid;
  std::vector<Kernel> kernels;

  // system problems
  std::vector<double> dispersal;
  std::optional<CoefficientField> m_field;
  std::optional<CoefficientField> a_field;
  std::optional<CoefficientField> f_field;

  // SIS problems; mu selects the operator for `spectral` (+inf is hat L_inf).
  std::optional<SISParameters> sis;
  std::optional<double> mu;

  SolverSpec solver;
  std::vector<SweepSpec> sweeps;
  std::optional<SimulationSpec> simulation;
};

namespace detail {

inline Point read_point(Section& s, const std::string& key, int dim, Point fallback) {
  if (!s.has(key)) return fallback;
  const json& v = s.raw(key);
  Point p{0.0, 0.0};
  if (v.is_number() && dim == 1) {
    p[0] = v.get<double>();
    return p;
  }
  if (!v.is_array() || static_cast<int>(v.size()) != dim)
    throw ConfigError(s.child(key), "expected " + std::to_string(dim) + " coordinates");
  for (int a = 0; a < dim; ++a) {
    if (!v[a].is_number()) throw ConfigError(s.child(key), "expected numbers");
    p[a] = v[a].get<double>();
  }
  return p;
}

inline std::string resolve(const std::string& base_dir, const std::string& file) {
  std::filesystem::path p(file);
  if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
  return p.string();
}

inline ScalarField parse_scalar(const json& j, const std::string& path, const SpatialGrid& grid,
                                const std::string& base_dir) {
  if (j.is_number()) return ScalarField::constant(grid, j.get<double>());
  Section s(j, path);
  const auto type = s.get<std::string>("type");
  ScalarField out;
  try {
    if (type == "constant") {
      out = ScalarField::constant(grid, s.number("value"));
    } else if (type == "affine") {
      out = ScalarField::affine(grid, s.number("value", 0.0),
                                read_point(s, "gradient", grid.dimension(), {0.0, 0.0}));
    } else if (type == "gaussian-bump") {
      out = ScalarField::gaussian_bump(grid, s.number("base", 0.0), s.number("amplitude"),
                                       read_point(s, "center", grid.dimension(), {0.0, 0.0}),
                                       s.number("width"));
    } else if (type == "tabulated") {
      out = ScalarField::tabulated(grid, s.get<std::vector<double>>("values"));
    } else if (type == "file") {
      out = ScalarField::from_file(grid, resolve(base_dir, s.get<std::string>("path")));
    } else {
      throw ConfigError(s.child("type"),
                        "unknown scalar field type '" + type +
                            "' (constant, affine, gaussian-bump, tabulated, file)");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(path, e.what());
  }
  s.finish();
  return out;
}

inline Eigen::MatrixXd read_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a square array of arrays");
  const int m = static_cast<int>(v.size());
  Eigen::MatrixXd a(m, m);
  for (int i = 0; i < m; ++i) {
    if (!v[i].is_array() || static_cast<int>(v[i].size()) != m)
      throw ConfigError(path, "expected a square array of arrays");
    for (int k = 0; k < m; ++k) {
      if (!v[i][k].is_number()) throw ConfigError(path, "expected numbers");
      a(i, k) = v[i][k].get<double>();
    }
  }
  return a;
}

inline CoefficientField parse_matrix_field(const json& j, const std::string& path,
                                           const SpatialGrid& grid, const std::string& base_dir) {
  if (j.is_array()) return CoefficientField::constant(grid.size(), read_matrix(j, path));
  Section s(j, path);
  const auto type = s.get<std::string>("type");
  CoefficientField out;
  try {
    if (type == "constant") {
      out = CoefficientField::constant(grid.size(), read_matrix(s.raw("value"), s.child("value")));
    } else if (type == "entries") {
      const json& e = s.raw("entries");
      const std::string ep = s.child("entries");
      if (!e.is_array() || e.empty()) throw ConfigError(ep, "expected a square array of field specs");
      const int m = static_cast<int>(e.size());
      std::vector<std::vector<ScalarField>> f(m);
      for (int i = 0; i < m; ++i) {
        if (!e[i].is_array() || static_cast<int>(e[i].size()) != m)
          throw ConfigError(ep, "expected a square array of field specs");
        for (int k = 0; k < m; ++k)
          f[i].push_back(parse_scalar(e[i][k], ep + "/" + std::to_string(i) + "/" + std::to_string(k),
                                      grid, base_dir));
      }
      std::vector<Eigen::MatrixXd> samples(grid.size(), Eigen::MatrixXd(m, m));
      for (int j2 = 0; j2 < grid.size(); ++j2)
        for (int i = 0; i < m; ++i)
          for (int k = 0; k < m; ++k) samples[j2](i, k) = f[i][k][j2];
      out = CoefficientField(m, std::move(samples));
    } else if (type == "file") {
      out = CoefficientField::from_file(grid, resolve(base_dir, s.get<std::string>("path")));
    } else {
      throw ConfigError(s.child("type"),
                        "unknown matrix field type '" + type + "' (constant, entries, file)");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(path, e.what());
  }
  s.finish();
  return out;
}

inline Kernel parse_kernel(const json& j, const std::string& path, int dim) {
  Section s(j, path);
  const auto family = s.get<std::string>("family");
  Kernel k = Kernel::uniform(1.0, dim);
  try {
    if (family == "uniform") {
      k = Kernel::uniform(s.number("radius"), dim);
    } else if (family == "tent") {
      k = Kernel::tent(s.number("radius"), dim);
    } else if (family == "truncated-gaussian") {
      const double sigma = s.number("sigma");
      k = Kernel::truncated_gaussian(sigma, dim, s.number("radius", 3.0 * sigma));
    } else {
      throw ConfigError(s.child("family"), "unknown kernel family '" + family +
                                               "' (uniform, tent, truncated-gaussian)");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(path, e.what());
  }
  s.finish();
  return k;
}

inline SpatialGrid parse_grid(Section g) {
  const json& b = g.raw("bounds");
  Bounds bounds;
  auto pair = [&](const json& v, const std::string& p) -> std::pair<double, double> {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ConfigError(p, "expected [lower, upper]");
    return {v[0].get<double>(), v[1].get<double>()};
  };
  if (b.is_array() && b.size() == 2 && b[0].is_number()) {
    auto [lo, hi] = pair(b, g.child("bounds"));
    bounds = Bounds::interval(lo, hi);
  } else if (b.is_array() && b.size() == 2 && b[0].is_array()) {
    auto [x0, x1] = pair(b[0], g.child("bounds") + "/0");
    auto [y0, y1] = pair(b[1], g.child("bounds") + "/1");
    bounds = Bounds::rectangle(x0, x1, y0, y1);
  } else {
    throw ConfigError(g.child("bounds"), "expected [a, b] or [[x0, x1], [y0, y1]]");
  }
  const int n = g.get<int>("n", 64);
  g.finish();
  try {
    return build_grid(bounds, n);
  } catch (const InvalidArgument& e) {
    throw ConfigError(g.where(), e.what());
  }
}

inline double parse_mu(Section& s, const std::string& key) {
  const json& v = s.raw(key);
  if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity"))
    return std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw ConfigError(s.child(key), "expected a positive number or \"inf\"");
  const double mu = v.get<double>();
  if (!(mu > 0.0)) throw ConfigError(s.child(key), "mu must be positive");
  return mu;
}

inline double tolerance(Section& s, const std::string& key, double fallback) {
  const double v = s.number(key, fallback);
  if (!(v > 0.0 && v <= 1e-2)) throw ConfigError(s.child(key), "tolerance must lie in (0, 1e-2]");
  return v;
}

}  // namespace detail

/// Parses an in-memory configuration. base_dir resolves relative file paths.
inline RunConfig parse_config_text(const std::string& text, const std::string& base_dir = ".",
                                   const std::string& source = "<memory>") {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("malformed JSON: ") + e.what());
  }
  RunConfig cfg;
  cfg.source = source;
  cfg.config_hash = sha256_hex(text);
  Section root(j, "");

  const auto kind = root.get<std::string>("problem");
  if (kind == "sis")
    cfg.kind = ProblemKind::sis;
  else if (kind == "system")
    cfg.kind = ProblemKind::system;
  else
    throw ConfigError("/problem", "expected \"sis\" or \"system\"");

  cfg.seed = root.get<std::uint64_t>("seed", 0);
  cfg.threads = root.get<int>("threads", 1);
  if (cfg.threads < 1) throw ConfigError("/threads", "must be at least 1");
  cfg.out_dir = root.get<std::string>("out", ".");

  cfg.grid = detail::parse_grid(root.section("grid"));
  const int dim = cfg.grid.dimension();

  if (root.has("solver")) {
    Section s = root.section("solver");
    cfg.solver.tol = detail::tolerance(s, "tol", cfg.solver.tol);
    cfg.solver.spectral_tol = detail::tolerance(s, "spectral_tol", cfg.solver.spectral_tol);
    cfg.solver.cw_tol = detail::tolerance(s, "cw_tol", cfg.solver.cw_tol);
    cfg.solver.max_iter = s.get<long>("max_iter", cfg.solver.max_iter);
    if (cfg.solver.max_iter < 1) throw ConfigError(s.child("max_iter"), "must be at least 1");
    cfg.solver.certificate = s.get<bool>("certificate", cfg.solver.certificate);
    if (s.has("eps")) {
      cfg.solver.eps = s.get<std::vector<double>>("eps");
      for (double e : cfg.solver.eps)
        if (!(e > 0.0)) throw ConfigError(s.child("eps"), "eps values must be positive");
    }
    s.finish();
  }

  if (cfg.kind == ProblemKind::sis) {
    Section s = root.section("sis");
    SISParameters p;
    p.grid = cfg.grid;
    p.kernel = detail::parse_kernel(s.raw("kernel"), s.child("kernel"), dim);
    p.d_s = s.number("d_S", 1.0);
    p.d_i = s.number("d_I", 1.0);
    if (!(p.d_s >= 0.0)) throw ConfigError(s.child("d_S"), "must be nonnegative");
    if (!(p.d_i >= 0.0)) throw ConfigError(s.child("d_I"), "must be nonnegative");
    p.k = s.positive("K", 1.0);
    p.beta = detail::parse_scalar(s.raw("beta"), s.child("beta"), cfg.grid, base_dir);
    p.gamma = detail::parse_scalar(s.raw("gamma"), s.child("gamma"), cfg.grid, base_dir);
    p.m_sat = detail::parse_scalar(s.raw("m"), s.child("m"), cfg.grid, base_dir);
    if (s.has("mu")) cfg.mu = detail::parse_mu(s, "mu");
    s.finish();
    try {
      p.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError("/sis", e.what());
    }
    cfg.kernels = {p.kernel};
    cfg.sis = std::move(p);
  } else {
    Section s = root.section("system");
    cfg.dispersal = s.get<std::vector<double>>("dispersal");
    const int m = static_cast<int>(cfg.dispersal.size());
    if (m < 1) throw ConfigError(s.child("dispersal"), "needs at least one species");
    for (double d : cfg.dispersal)
      if (!(d >= 0.0)) throw ConfigError(s.child("dispersal"), "rates must be nonnegative");
    const json& kj = s.raw("kernels");
    if (kj.is_array()) {
      for (std::size_t i = 0; i < kj.size(); ++i)
        cfg.kernels.push_back(
            detail::parse_kernel(kj[i], s.child("kernels") + "/" + std::to_string(i), dim));
      if (static_cast<int>(cfg.kernels.size()) != m && cfg.kernels.size() != 1)
        throw ConfigError(s.child("kernels"), "expected 1 or " + std::to_string(m) + " kernels");
    } else {
      cfg.kernels.push_back(detail::parse_kernel(kj, s.child("kernels"), dim));
    }
    auto field = [&](const char* key) -> std::optional<CoefficientField> {
      if (!s.has(key)) return std::nullopt;
      auto f = detail::parse_matrix_field(s.raw(key), s.child(key), cfg.grid, base_dir);
      if (f.species() != m)
        throw ConfigError(s.child(key), "has " + std::to_string(f.species()) +
                                            " species, dispersal has " + std::to_string(m));
      return f;
    };
    cfg.m_field = field("M");
    cfg.a_field = field("A");
    cfg.f_field = field("F");
    if (s.has("mu")) cfg.mu = detail::parse_mu(s, "mu");
    s.finish();
    if (!cfg.m_field && !cfg.a_field)
      throw ConfigError(s.where(), "needs M (spectral problems) or A and F (mu0 problems)");
    if (cfg.a_field.has_value() != cfg.f_field.has_value())
      throw ConfigError(s.where(), "A and F must be given together");
    if (cfg.a_field && !cfg.a_field->cooperative())
      throw ConfigError(s.child("A"), "must be cooperative (nonnegative off-diagonal)");
    if (cfg.f_field && !cfg.f_field->nonnegative())
      throw ConfigError(s.child("F"), "must be entrywise nonnegative");
  }

  if (root.has("sweeps")) {
    const json& arr = root.raw("sweeps");
    if (!arr.is_array()) throw ConfigError("/sweeps", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section s(arr[i], "/sweeps/" + std::to_string(i));
      SweepSpec sw;
      sw.parameter = s.get<std::string>("parameter");
      if (sw.parameter != "d_I" && sw.parameter != "K")
        throw ConfigError(s.child("parameter"), "expected \"d_I\" or \"K\"");
      if (s.has("values")) {
        sw.values = s.get<std::vector<double>>("values");
      } else {
        const double lo = s.positive("from", 1.0);
        const double hi = s.positive("to", 1.0);
        const int per = s.get<int>("per_decade", 8);
        try {
          sw.values = log_grid(lo, hi, per);
        } catch (const InvalidArgument& e) {
          throw ConfigError(s.where(), e.what());
        }
      }
      s.finish();
      cfg.sweeps.push_back(std::move(sw));
    }
    if (cfg.kind != ProblemKind::sis && !cfg.sweeps.empty())
      throw ConfigError("/sweeps", "sweeps apply to SIS problems only");
  }

  if (root.has("simulate")) {
    if (cfg.kind != ProblemKind::sis) throw ConfigError("/simulate", "simulation needs an SIS problem");
    Section s = root.section("simulate");
    SimulationSpec sim;
    sim.t_end = s.positive("t_end", sim.t_end);
    sim.dt = s.number("dt", 0.0);
    if (sim.dt < 0.0) throw ConfigError(s.child("dt"), "must be nonnegative (0 = automatic)");
    sim.record_every = s.get<int>("record_every", sim.record_every);
    if (sim.record_every < 1) throw ConfigError(s.child("record_every"), "must be at least 1");
    const double k = cfg.sis->k;
    sim.i0 = s.has("I0") ? detail::parse_scalar(s.raw("I0"), s.child("I0"), cfg.grid, base_dir).samples()
                         : Eigen::VectorXd::Constant(cfg.grid.size(), 1e-3 * k);
    sim.s0 = s.has("S0") ? detail::parse_scalar(s.raw("S0"), s.child("S0"), cfg.grid, base_dir).samples()
                         : (Eigen::VectorXd::Constant(cfg.grid.size(), k) - sim.i0).cwiseMax(0.0);
    s.finish();
    cfg.simulation = std::move(sim);
  }

  root.finish();
  return cfg;
}

/// Reads and validates a configuration file.
inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "file not found or unreadable");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path().string();
  return parse_config_text(ss.str(), dir.empty() ? "." : dir, path);
}

}  // namespace nld::cli

#endif  // NLD_CLI_CONFIG_HPP
