#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "modent/errors.hpp"

namespace modent::cli {

json Tolerances::to_json() const {
  return json{{"rank", rank},       {"property", property}, {"dmp", dmp},
              {"oracle", oracle},   {"infinity", infinity}, {"quad_abs", quad_abs},
              {"quad_rel", quad_rel}, {"fd_h", fd_h},       {"jump", jump},
              {"derivative_rel", derivative_rel}};
}

namespace {

double* tolerance_slot(Tolerances& t, const std::string& key) {
  if (key == "rank") return &t.rank;
  if (key == "property") return &t.property;
  if (key == "dmp") return &t.dmp;
  if (key == "oracle") return &t.oracle;
  if (key == "infinity") return &t.infinity;
  if (key == "quad_abs") return &t.quad_abs;
  if (key == "quad_rel") return &t.quad_rel;
  if (key == "fd_h") return &t.fd_h;
  if (key == "jump") return &t.jump;
  if (key == "derivative_rel") return &t.derivative_rel;
  return nullptr;
}

}  // namespace

Tolerances parse_tolerances(const json& j, Tolerances base) {
  if (j.is_null()) return base;
  if (!j.is_object()) throw ConfigError("tolerances must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    double* slot = tolerance_slot(base, it.key());
    if (!slot) throw ConfigError("unknown tolerance '" + it.key() + "'");
    if (!it.value().is_number()) throw ConfigError("tolerance '" + it.key() + "' must be a number");
    *slot = it.value().get<double>();
  }
  return base;
}

void apply_override(Tolerances& tol, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("--tol-override expects KEY=VAL, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string val = assignment.substr(eq + 1);
  double* slot = tolerance_slot(tol, key);
  if (!slot) throw ConfigError("unknown tolerance '" + key + "'");
  double v = 0.0;
  const auto res = std::from_chars(val.data(), val.data() + val.size(), v);
  if (res.ec != std::errc() || res.ptr != val.data() + val.size())
    throw ConfigError("bad value for tolerance '" + key + "': '" + val + "'");
  *slot = v;
}

const json& require(const json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError("missing key '" + key + "'");
  return j.at(key);
}

double get_double(const json& j, const std::string& key) {
  const json& v = require(j, key);
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  return v.get<double>();
}

double get_double(const json& j, const std::string& key, double fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return get_double(j, key);
}

int get_int(const json& j, const std::string& key, int fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
  return j.at(key).get<int>();
}

std::string get_string(const json& j, const std::string& key, const std::string& fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ConfigError("'" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

std::vector<double> parse_doubles(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(what + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Eigen::VectorXd parse_vector(const json& j, const std::string& what) {
  const auto v = parse_doubles(j, what);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd parse_matrix(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto row = parse_doubles(j[i], what);
    if (i == 0) m.resize(rows, static_cast<Eigen::Index>(row.size()));
    if (static_cast<Eigen::Index>(row.size()) != m.cols())
      throw DimensionMismatch(what + ": ragged rows");
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(i, c) = row[c];
  }
  return m;
}

std::vector<double> parse_grid(const json& j, const std::string& what) {
  std::vector<double> g;
  if (j.is_object() && j.contains("linspace")) {
    const auto p = parse_doubles(j.at("linspace"), what + ".linspace");
    if (p.size() != 3 || p[2] < 1 || p[2] != std::floor(p[2]))
      throw ConfigError(what + ": linspace expects [a, b, n]");
    const int n = static_cast<int>(p[2]);
    for (int k = 0; k < n; ++k) g.push_back(n == 1 ? p[0] : p[0] + (p[1] - p[0]) * k / (n - 1));
  } else {
    g = parse_doubles(j, what);
  }
  if (g.empty()) throw ConfigError(what + ": empty grid");
  if (!std::is_sorted(g.begin(), g.end())) throw ConfigError(what + ": grid must be sorted");
  return g;
}

Domain parse_domain(const json& j, const std::string& what) {
  const auto p = parse_doubles(j, what);
  if (p.size() != 2 || !(p[0] < p[1])) throw ConfigError(what + ": expected [lo, hi] with lo < hi");
  return {p[0], p[1]};
}

SpaceSpec parse_space(const json& j, const Tolerances& tol) {
  if (!j.is_object()) throw ConfigError("space must be an object");
  SpaceSpec spec;
  spec.model = get_string(j, "model", "custom");
  if (spec.model == "custom") {
    spec.space = std::make_shared<SymplecticHilbertSpace>(parse_matrix(require(j, "tau"), "tau"),
                                                          parse_matrix(require(j, "sigma"), "sigma"),
                                                          tol.rank);
  } else if (spec.model == "oscillator") {
    spec.m = parse_doubles(require(j, "m"), "m");
    spec.space = std::make_shared<SymplecticHilbertSpace>(oscillator_space(spec.m));
  } else if (spec.model == "abelian") {
    spec.mu = parse_doubles(require(j, "mu"), "mu");
    spec.space = std::make_shared<SymplecticHilbertSpace>(abelian_space(spec.mu));
  } else if (spec.model == "u1_discretized") {
    const Domain w = parse_domain(require(j, "window"), "window");
    std::optional<double> beta;
    if (j.contains("beta") && !j.at("beta").is_null()) beta = get_double(j, "beta");
    const int n = get_int(j, "resolution", 32);
    spec.disc = std::make_shared<DiscretizedU1>(
        discretize_u1(n, w.first, w.second, beta, tol.quadrature()));
    spec.space = std::make_shared<SymplecticHilbertSpace>(spec.disc->space);
  } else if (spec.model == "direct_sum") {
    const json& blocks = require(j, "blocks");
    if (!blocks.is_array() || blocks.empty()) throw ConfigError("direct_sum needs blocks");
    std::vector<SymplecticHilbertSpace> spaces;
    for (const auto& b : blocks) {
      spec.blocks.push_back(parse_space(b, tol));
      spaces.push_back(*spec.blocks.back().space);
    }
    DirectSum ds = direct_sum(spaces);
    spec.maps = ds.maps;
    spec.space = std::make_shared<SymplecticHilbertSpace>(ds.space);
  } else {
    throw ConfigError("unknown space model '" + spec.model + "'");
  }
  return spec;
}

SpaceSpec space_of(const json& config, const Tolerances& tol) {
  if (config.contains("space")) return parse_space(config.at("space"), tol);
  const std::string model = get_string(config, "model", "");
  if (model == "oscillator" || model == "abelian" || model == "u1_discretized" ||
      model == "direct_sum")
    return parse_space(config, tol);
  throw ConfigError("config has no 'space'");
}

namespace {

std::vector<bool> index_mask(const json& j, int count, const std::string& what) {
  std::vector<bool> mask(count, false);
  for (const auto& x : j) {
    if (!x.is_number_integer()) throw ConfigError(what + ": indices must be integers");
    const int k = x.get<int>();
    if (k < 0 || k >= count) throw ConfigError(what + ": index out of range");
    mask[k] = true;
  }
  return mask;
}

}  // namespace

std::optional<std::vector<bool>> subspace_mask(const json& j, const SpaceSpec& spec) {
  if (spec.model == "oscillator" && j.contains("modes"))
    return index_mask(j.at("modes"), static_cast<int>(spec.m.size()), "modes");
  if (spec.model == "abelian" && j.contains("points"))
    return index_mask(j.at("points"), static_cast<int>(spec.mu.size()), "points");
  return std::nullopt;
}

Eigen::MatrixXd parse_subspace(const json& j, const SpaceSpec& spec) {
  const int n = spec.dim();
  if (!j.is_object()) throw ConfigError("subspace must be an object");
  if (j.contains("full") && j.at("full").get<bool>()) return Eigen::MatrixXd::Identity(n, n);
  if (j.contains("generators")) {
    const json& g = j.at("generators");
    if (g.is_array() && g.empty()) return Eigen::MatrixXd::Zero(n, 0);
    Eigen::MatrixXd rows = parse_matrix(g, "generators");
    if (rows.cols() != n) throw DimensionMismatch("generators must have length " + std::to_string(n));
    return rows.transpose();
  }
  if (spec.model == "oscillator" && j.contains("modes"))
    return oscillator_modes(static_cast<int>(spec.m.size()), *subspace_mask(j, spec));
  if (spec.model == "abelian" && j.contains("points")) {
    const auto mask = *subspace_mask(j, spec);
    Eigen::MatrixXd g(n, 0);
    for (int k = 0; k < n; ++k)
      if (mask[k]) {
        g.conservativeResize(n, g.cols() + 1);
        g.col(g.cols() - 1) = Eigen::VectorXd::Unit(n, k);
      }
    return g;
  }
  if (spec.model == "u1_discretized" && j.contains("left_of"))
    return spec.disc->generators(get_double(j, "left_of"));
  if (spec.model == "direct_sum" && j.contains("blocks")) {
    const json& b = j.at("blocks");
    if (!b.is_array() || b.size() != spec.blocks.size())
      throw ConfigError("subspace.blocks must match the space blocks");
    std::vector<Eigen::MatrixXd> parts;
    Eigen::Index cols = 0;
    for (std::size_t k = 0; k < spec.blocks.size(); ++k) {
      parts.push_back(parse_subspace(b[k], spec.blocks[k]));
      cols += parts.back().cols();
    }
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, cols);
    Eigen::Index c = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      g.block(spec.maps[k].offset, c, parts[k].rows(), parts[k].cols()) = parts[k];
      c += parts[k].cols();
    }
    return g;
  }
  throw ConfigError("subspace: expected full, generators, modes, points, left_of or blocks");
}

SmoothProbe parse_smooth_probe(const json& j) {
  if (!j.is_object()) throw ConfigError("probe function must be an object");
  const std::string kind = get_string(j, "kind", "bump");
  if (kind == "bump")
    return SmoothProbe::bump(get_double(j, "center", 0.0), get_double(j, "halfwidth", 1.0),
                             get_double(j, "amplitude", 1.0));
  if (kind == "piecewise_polynomial") {
    std::vector<std::vector<double>> coeffs;
    for (const auto& c : require(j, "derivative_coeffs")) coeffs.push_back(parse_doubles(c, "derivative_coeffs"));
    return SmoothProbe::piecewise_polynomial(parse_doubles(require(j, "knots"), "knots"), coeffs);
  }
  if (kind == "sampled")
    return SmoothProbe::sampled(get_double(j, "x0"), get_double(j, "dx"),
                                parse_doubles(require(j, "values"), "values"));
  throw ConfigError("unknown probe kind '" + kind + "'");
}

Reparam parse_reparam(const json& j) {
  if (j.is_null()) return Reparam::identity();
  const std::string kind = get_string(j, "kind", "identity");
  if (kind == "identity") return Reparam::identity();
  if (kind == "affine") return Reparam::affine(get_double(j, "a"), get_double(j, "b", 0.0));
  if (kind == "cubic") return Reparam::cubic(get_double(j, "c"));
  throw ConfigError("unknown reparametrization '" + kind + "'");
}

VectorKplus parse_probe(const json& j, const SpaceSpec& spec, const PureSpace& pure,
                        const Tolerances& tol) {
  const int n = spec.dim();
  if (j.is_array()) {
    Eigen::VectorXd v = parse_vector(j, "probe");
    if (v.size() != n && v.size() != 2 * n)
      throw DimensionMismatch("probe must have length " + std::to_string(n) + " or " +
                              std::to_string(2 * n));
    return VectorKplus(v);
  }
  if (!j.is_object()) throw ConfigError("probe must be an array or an object");
  if (j.contains("re") || j.contains("im")) {
    Eigen::VectorXd re = j.contains("re") ? parse_vector(j.at("re"), "probe.re") : Eigen::VectorXd::Zero(n);
    Eigen::VectorXd im = j.contains("im") ? parse_vector(j.at("im"), "probe.im") : Eigen::VectorXd::Zero(n);
    if (re.size() != n || im.size() != n) throw DimensionMismatch("probe re/im must have length " + std::to_string(n));
    return complex_vector(pure, re, im);
  }
  if (j.contains("function")) {
    if (!spec.disc) throw ConfigError("probe.function needs a u1_discretized space");
    return VectorKplus(spec.disc->project_probe(parse_smooth_probe(j.at("function")), tol.quadrature()));
  }
  throw ConfigError("probe: expected an array, re/im or function");
}

std::optional<U1Params> u1_params_of(const json& config) {
  const std::string model = get_string(config, "model", "");
  if (model == "u1_vacuum") return U1Params{std::nullopt, parse_reparam(config.value("reparam", json()))};
  if (model == "u1_kms") return U1Params{get_double(config, "beta"), parse_reparam(config.value("reparam", json()))};
  return std::nullopt;
}

SurfaceSpec build_surface(const json& config, const Tolerances& tol) {
  SurfaceSpec out;
  if (auto u1 = u1_params_of(config)) {
    const Domain dom = parse_domain(require(config, "domain"), "domain");
    out.u1 = u1;
    out.u1_probe = parse_smooth_probe(require(config, "probe"));
    out.surface = std::make_shared<U1Surface>(*out.u1_probe, *u1, dom, tol.quadrature());
    out.kind = config.at("model").get<std::string>();
    return out;
  }
  const json& fam = require(config, "family");
  out.kind = get_string(fam, "kind", "");
  if (out.kind == "abelian_line") {
    const Domain dom = parse_domain(require(fam, "domain"), "family.domain");
    out.surface = std::make_shared<AbelianLineSurface>(parse_smooth_probe(require(config, "probe")),
                                                       dom, tol.quadrature());
    return out;
  }
  SpaceSpec spec = space_of(config, tol);
  auto pure = PureSpace::purify(*spec.space, {true, tol.rank});
  if (out.kind == "spectral") {
    if (spec.model != "oscillator") throw ConfigError("spectral family needs an oscillator space");
    out.family = spectral_family(spec.m, parse_domain(require(fam, "domain"), "family.domain"));
  } else if (out.kind == "two_point") {
    out.family = two_point_family(pure, parse_subspace(require(fam, "l0"), spec),
                                  parse_subspace(require(fam, "l1"), spec),
                                  get_double(fam, "switch_at"),
                                  parse_domain(require(fam, "domain"), "family.domain"));
  } else if (out.kind == "steps") {
    std::vector<FamilyStep> steps;
    for (const auto& s : require(fam, "steps"))
      steps.push_back({get_double(s, "threshold"), parse_subspace(require(s, "subspace"), spec)});
    out.family = step_family(pure, std::move(steps),
                             parse_domain(require(fam, "domain"), "family.domain"),
                             fam.value("inclusive", false), tol.rank);
  } else if (out.kind == "u1_discretized") {
    if (!spec.disc) throw ConfigError("u1_discretized family needs a u1_discretized space");
    out.family = discretized_u1_family(*spec.disc);
  } else {
    throw ConfigError("unknown family kind '" + out.kind + "'");
  }
  // the family purifies on its own; probes are plain coordinates so either works
  auto fpure = out.family->pure();
  VectorKplus f = parse_probe(require(config, "probe"), spec, *fpure, tol);
  out.surface = std::make_shared<MatrixSurface>(out.family, f, out.kind + " family");
  return out;
}

}  // namespace modent::cli
