#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "modent/families.hpp"

namespace modent::cli {

using json = nlohmann::json;

struct Tolerances {
  double rank = kDefaultRelTol;
  double property = 0.0;   // <= 0: 1e-8 * (1 + max T)
  double dmp = 1e-8;
  double oracle = 1e-8;
  double infinity = 1e-8;
  double quad_abs = 1e-13;
  double quad_rel = 1e-12;
  double fd_h = 0.0;       // <= 0: 1e-3 * domain length
  double jump = 1e3;
  double derivative_rel = 1e-3;

  QuadratureParams quadrature() const { return {quad_abs, quad_rel, 18}; }
  json to_json() const;
};

Tolerances parse_tolerances(const json& j, Tolerances base = {});
/// KEY=VAL; unknown keys are a ConfigError.
void apply_override(Tolerances& tol, const std::string& assignment);

// Typed accessors; all failures are ConfigError naming the key.
double get_double(const json& j, const std::string& key);
double get_double(const json& j, const std::string& key, double fallback);
int get_int(const json& j, const std::string& key, int fallback);
std::string get_string(const json& j, const std::string& key, const std::string& fallback);
const json& require(const json& j, const std::string& key);

Eigen::MatrixXd parse_matrix(const json& j, const std::string& what);
Eigen::VectorXd parse_vector(const json& j, const std::string& what);
std::vector<double> parse_doubles(const json& j, const std::string& what);
/// Sorted grid: an array or {"linspace": [a, b, n]}.
std::vector<double> parse_grid(const json& j, const std::string& what);
Domain parse_domain(const json& j, const std::string& what);

/// A space together with the model it came from (for closed-form oracles).
struct SpaceSpec {
  std::string model = "custom";  // custom, oscillator, abelian, u1_discretized, direct_sum
  std::shared_ptr<SymplecticHilbertSpace> space;
  std::vector<double> m, mu;
  std::shared_ptr<DiscretizedU1> disc;
  std::vector<SpaceSpec> blocks;
  std::vector<IndexMap> maps;

  int dim() const { return space->dim(); }
};

SpaceSpec parse_space(const json& j, const Tolerances& tol);
/// The space of a config: "space", or the root itself when it names a
/// finite-dimensional model.
SpaceSpec space_of(const json& config, const Tolerances& tol);

/// Generator columns (user coordinates of K) of a subspace spec.
Eigen::MatrixXd parse_subspace(const json& j, const SpaceSpec& spec);
/// The oscillator/abelian mode mask, if the spec is given by modes/points.
std::optional<std::vector<bool>> subspace_mask(const json& j, const SpaceSpec& spec);

SmoothProbe parse_smooth_probe(const json& j);
Reparam parse_reparam(const json& j);
VectorKplus parse_probe(const json& j, const SpaceSpec& spec, const PureSpace& pure,
                        const Tolerances& tol);

/// U(1) model parameters from the root: "model" u1_vacuum or u1_kms.
std::optional<U1Params> u1_params_of(const json& config);

struct SurfaceSpec {
  std::shared_ptr<TfSurface> surface;
  MatrixFamilyPtr family;                 // set for matrix families
  std::optional<U1Params> u1;             // set for closed-form U(1) surfaces
  std::optional<SmoothProbe> u1_probe;
  std::string kind;
};

SurfaceSpec build_surface(const json& config, const Tolerances& tol);

}  // namespace modent::cli
