#include "dirkde/quadrature.hpp"

#include "dirkde/errors.hpp"
#include "dirkde/special_functions.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#ifndef DIRKDE_LEBEDEV_PATH
#define DIRKDE_LEBEDEV_PATH "data/lebedev_5810.txt"
#endif

namespace dirkde {

namespace {

QuadratureRule simpson_circle(std::size_t n)
{
  if (n < 2 || n % 2 != 0)
    throw DomainError("Simpson circle rule needs an even node count");
  QuadratureRule rule;
  rule.kind = RuleKind::simpson_circle;
  rule.q = 1;
  rule.nodes = PointSet(1);
  rule.nodes.reserve(n);
  rule.weights.resize(n);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    double theta = step * static_cast<double>(k);
    double xy[2] = {std::cos(theta), std::sin(theta)};
    rule.nodes.push_back(xy);
    rule.weights[k] = (k % 2 == 0 ? 2.0 / 3.0 : 4.0 / 3.0) * step;
  }
  return rule;
}

} // namespace

QuadratureRule load_lebedev_rule(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open Lebedev table '" + path + "'");
  QuadratureRule rule;
  rule.kind = RuleKind::lebedev;
  rule.q = 2;
  rule.nodes = PointSet(2);
  rule.nodes.reserve(5810);
  std::string line;
  std::size_t lineno = 0;
  double wsum = 0.0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    std::istringstream fields(line);
    double x[3];
    double w;
    if (!(fields >> x[0] >> x[1] >> x[2] >> w))
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected four numbers");
    rule.nodes.push_back(normalize(std::span<const double>(x, 3)).coords());
    rule.weights.push_back(w);
    wsum += w;
  }
  if (rule.weights.size() != 5810)
    throw ParseError(path + ": expected 5810 nodes, found " +
                     std::to_string(rule.weights.size()));
  if (std::abs(wsum - 4.0 * std::numbers::pi) > 1e-6)
    throw ParseError(path + ": weights do not sum to 4*pi");
  return rule;
}

namespace {

const QuadratureRule& lebedev_5810()
{
  static const QuadratureRule rule = load_lebedev_rule(lebedev_asset_path());
  return rule;
}

QuadratureRule monte_carlo(int q, std::size_t n, std::uint64_t seed)
{
  if (n == 0)
    throw DomainError("Monte Carlo rule needs at least one node");
  Rng rng(seed);
  QuadratureRule rule;
  rule.kind = RuleKind::monte_carlo;
  rule.q = q;
  rule.nodes = uniform_sphere_sample(q, n, rng);
  rule.weights.assign(n, sphere_area(q) / static_cast<double>(n));
  return rule;
}

} // namespace

std::string to_string(RuleKind kind)
{
  switch (kind) {
    case RuleKind::simpson_circle:
      return "simpson-circle";
    case RuleKind::lebedev:
      return "lebedev";
    case RuleKind::monte_carlo:
      return "monte-carlo";
  }
  return "unknown";
}

std::string lebedev_asset_path()
{
  if (const char* env = std::getenv("DIRKDE_LEBEDEV_FILE"))
    return env;
  return DIRKDE_LEBEDEV_PATH;
}

QuadratureRule build_rule(int q,
                          RuleKind kind,
                          std::optional<std::size_t> size,
                          std::optional<std::uint64_t> seed)
{
  if (q < 1)
    throw DomainError("build_rule: q must be >= 1");
  switch (kind) {
    case RuleKind::simpson_circle:
      if (q != 1)
        throw UnsupportedError("simpson-circle rule requires q = 1");
      return simpson_circle(size.value_or(2000));
    case RuleKind::lebedev:
      if (q != 2)
        throw UnsupportedError("lebedev rule requires q = 2");
      if (size.value_or(5810) != 5810)
        throw UnsupportedError("only the 5810-node Lebedev rule is packaged");
      return lebedev_5810();
    case RuleKind::monte_carlo:
      return monte_carlo(q, size.value_or(10000), seed.value_or(0));
  }
  throw UnsupportedError("unknown rule kind");
}

QuadratureRule protocol_rule(int q, std::uint64_t mc_seed)
{
  if (q == 1)
    return build_rule(1, RuleKind::simpson_circle);
  if (q == 2)
    return build_rule(2, RuleKind::lebedev);
  return build_rule(q, RuleKind::monte_carlo, 10000, mc_seed);
}

const QuadratureRule& cached_protocol_rule(int q, std::uint64_t mc_seed)
{
  static std::mutex mutex;
  static std::map<std::pair<int, std::uint64_t>, std::unique_ptr<QuadratureRule>>
    cache;
  std::uint64_t key_seed = q <= 2 ? 0 : mc_seed;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{q, key_seed}];
  if (!slot)
    slot = std::make_unique<QuadratureRule>(protocol_rule(q, key_seed));
  return *slot;
}

double integrate(const QuadratureRule& rule, const SphereFunction& f)
{
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    double v = f(rule.nodes.row(i));
    if (!std::isfinite(v))
      throw EvaluationError("integrand is not finite at node " +
                            std::to_string(i));
    sum += rule.weights[i] * v;
  }
  return sum;
}

double integrate_values(const QuadratureRule& rule, std::span<const double> values)
{
  if (values.size() != rule.size())
    throw DomainError("integrate_values: value count does not match the rule");
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw EvaluationError("integrand is not finite at node " +
                            std::to_string(i));
    sum += rule.weights[i] * values[i];
  }
  return sum;
}

void uniform_sphere_draw(Rng& rng, std::span<double> out)
{
  for (;;) {
    double ss = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = standard_normal(rng);
      ss += out[i] * out[i];
    }
    if (ss > 1e-300) {
      double r = 1.0 / std::sqrt(ss);
      for (double& x : out)
        x *= r;
      return;
    }
  }
}

PointSet uniform_sphere_sample(int q, std::size_t n, Rng& rng)
{
  if (q < 1)
    throw DomainError("uniform_sphere_sample: q must be >= 1");
  std::vector<double> values(n * static_cast<std::size_t>(q + 1));
  for (std::size_t i = 0; i < n; ++i)
    uniform_sphere_draw(
      rng, {values.data() + i * (q + 1), static_cast<std::size_t>(q + 1)});
  return PointSet(q, std::move(values));
}

} // namespace dirkde
