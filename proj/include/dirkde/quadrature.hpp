#pragma once

#include "dirkde/geometry.hpp"
#include "dirkde/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace dirkde {

enum class RuleKind
{
  simpson_circle,
  lebedev,
  monte_carlo
};

std::string to_string(RuleKind kind);

struct QuadratureRule
{
  RuleKind kind = RuleKind::simpson_circle;
  int q = 1;
  PointSet nodes;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

using SphereFunction = std::function<double(std::span<const double>)>;

//! Sizes default to 2000 (Simpson), 5810 (Lebedev), 10000 (Monte Carlo).
QuadratureRule build_rule(int q,
                          RuleKind kind,
                          std::optional<std::size_t> size = std::nullopt,
                          std::optional<std::uint64_t> seed = std::nullopt);

//! The ISE protocol rule for dimension q: Simpson-2000, Lebedev-5810, or
//! Monte Carlo with 10000 points drawn from mc_seed.
QuadratureRule protocol_rule(int q, std::uint64_t mc_seed = 0);

//! Process-wide cached protocol rule (immutable, shared across threads).
const QuadratureRule& cached_protocol_rule(int q, std::uint64_t mc_seed = 0);

double integrate(const QuadratureRule& rule, const SphereFunction& f);

//! Sum w_i v_i for values already evaluated at the rule's nodes.
double integrate_values(const QuadratureRule& rule, std::span<const double> values);

//! Independent uniform draws (normalized standard Gaussian vectors).
PointSet uniform_sphere_sample(int q, std::size_t n, Rng& rng);
//! One uniform draw on the sphere of dimension out.size() - 1 (size 1 gives +-1).
void uniform_sphere_draw(Rng& rng, std::span<double> out);

//! Reads and validates a Lebedev table ("x y z w" rows, 5810 nodes, weights summing to 4 pi).
QuadratureRule load_lebedev_rule(const std::string& path);

//! Path of the packaged Lebedev table, overridable by DIRKDE_LEBEDEV_FILE.
std::string lebedev_asset_path();

} // namespace dirkde
