#include "dirkde/risk.hpp"

#include "dirkde/errors.hpp"
#include "dirkde/kde.hpp"
#include "dirkde/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace dirkde {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_rule(const VonMisesMixture& mixture, const QuadratureRule& rule)
{
  if (mixture.size() == 0)
    throw DomainError("empty mixture");
  if (rule.q != mixture.dim())
    throw DomainError("quadrature rule dimension does not match the mixture");
}

// Copy of a deterministic rule with every node moved by a fixed rotation.
QuadratureRule rotated(const QuadratureRule& rule)
{
  QuadratureRule out = rule;
  if (rule.q == 1) {
    double a = kPi / static_cast<double>(rule.size());
    double c = std::cos(a), s = std::sin(a);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      auto src = rule.nodes.row(i);
      auto dst = out.nodes.row(i);
      dst[0] = c * src[0] - s * src[1];
      dst[1] = s * src[0] + c * src[1];
    }
    return out;
  }
  // Rodrigues rotation by 0.3 rad about (1, 2, 3)/sqrt(14).
  const double k[3] = {1.0 / std::sqrt(14.0), 2.0 / std::sqrt(14.0), 3.0 / std::sqrt(14.0)};
  const double c = std::cos(0.3), s = std::sin(0.3);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    auto v = rule.nodes.row(i);
    double kv = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
    double cross[3] = {k[1] * v[2] - k[2] * v[1], k[2] * v[0] - k[0] * v[2],
                       k[0] * v[1] - k[1] * v[0]};
    auto dst = out.nodes.row(i);
    for (int d = 0; d < 3; ++d)
      dst[d] = v[d] * c + cross[d] * s + k[d] * kv * (1.0 - c);
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, int points)
{
  std::vector<double> g(static_cast<std::size_t>(points));
  double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < points; ++i)
    g[i] = std::exp(a + (b - a) * i / (points - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

} // namespace

double psi(const VonMisesMixture& mixture, std::span<const double> x)
{
  const int q = mixture.dim();
  double sum = 0.0;
  for (std::size_t j = 0; j < mixture.size(); ++j) {
    double kappa = mixture.kappas()[j];
    if (kappa == 0.0)
      continue;
    double t = dot(x, mixture.means()[j].coords());
    double base = std::exp(mixture.log_constants()[j] + kappa * t);
    sum += mixture.weights()[j] * kappa * base * (-t + kappa / q * (1.0 - t * t));
  }
  return sum;
}

double curvature_vm(int q, double kappa)
{
  if (q < 1)
    throw DomainError("curvature_vm: q must be >= 1");
  if (!(kappa >= 0.0) || !std::isfinite(kappa))
    throw DomainError("curvature_vm: kappa must be finite and >= 0");
  if (kappa == 0.0)
    return 0.0;
  const double nu = 0.5 * (q - 1);
  // e^{2 kappa} cancels between I_nu(kappa)^2 and the I(2 kappa) terms.
  double s0 = log_bessel_i_scaled(nu, kappa);
  double a = std::exp(log_bessel_i_scaled(nu + 1.0, 2.0 * kappa));
  double b = std::exp(log_bessel_i_scaled(nu + 2.0, 2.0 * kappa));
  double bracket = 2.0 * q * a + (2.0 + q) * kappa * b;
  double log_r = 0.5 * (q + 1) * std::log(kappa) - (q + 2) * std::numbers::ln2 -
                 0.5 * (q + 1) * std::log(kPi) - std::log(static_cast<double>(q)) -
                 2.0 * s0 + std::log(bracket);
  return std::exp(log_r);
}

std::string to_string(CurvatureMethod method)
{
  switch (method) {
    case CurvatureMethod::closed_form:
      return "closed-form";
    case CurvatureMethod::quadrature:
      return "quadrature";
    case CurvatureMethod::monte_carlo:
      return "monte-carlo";
  }
  return "unknown";
}

CurvatureReport curvature_mixture(const VonMisesMixture& mixture, const QuadratureRule& rule)
{
  check_rule(mixture, rule);
  auto sq = [&](std::span<const double> x) {
    double v = psi(mixture, x);
    return v * v;
  };
  CurvatureReport report;
  report.value = integrate(rule, sq);
  if (rule.kind == RuleKind::monte_carlo) {
    report.method = CurvatureMethod::monte_carlo;
    double m = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      double v = sq(rule.nodes.row(i));
      m += v;
      m2 += v * v;
    }
    double n = static_cast<double>(rule.size());
    m /= n;
    double var = std::max(0.0, m2 / n - m * m);
    report.error = sphere_area(rule.q) * std::sqrt(var / n);
  } else {
    report.method = CurvatureMethod::quadrature;
    report.error = std::abs(integrate(rotated(rule), sq) - report.value);
  }
  return report;
}

CurvatureReport curvature(const VonMisesMixture& mixture, const QuadratureRule& rule)
{
  if (mixture.size() == 1)
    return {curvature_vm(mixture.dim(), mixture.kappas()[0]), CurvatureMethod::closed_form, 0.0};
  return curvature_mixture(mixture, rule);
}

double h_amise(int q, double n, double curvature)
{
  if (!(curvature > 0.0) || !std::isfinite(curvature))
    throw DomainError("h_amise: curvature must be finite and > 0");
  if (!(n >= 1.0))
    throw DomainError("h_amise: n must be >= 1");
  auto c = vm_kernel_constants(q);
  return std::pow(q * c.d / (4.0 * c.b * c.b * c.lambda * curvature * n), 1.0 / (4.0 + q));
}

double h_amise_vm(int q, double n, double curvature)
{
  if (!(curvature > 0.0) || !std::isfinite(curvature))
    throw DomainError("h_amise: curvature must be finite and > 0");
  if (!(n >= 1.0))
    throw DomainError("h_amise: n must be >= 1");
  return std::pow(q * std::pow(2.0, q) * std::pow(kPi, 0.5 * q) * curvature * n,
                  -1.0 / (4.0 + q));
}

double kernel_square_integral(int q, double h)
{
  double k = 1.0 / (h * h);
  return std::exp(2.0 * log_cq(q, k) - log_cq(q, 2.0 * k));
}

ExactMise::ExactMise(VonMisesMixture mixture, double n, const QuadratureRule& rule)
  : mixture_(std::move(mixture)), n_(n), rule_(&rule)
{
  check_rule(mixture_, rule);
  if (!(n >= 1.0))
    throw DomainError("exact MISE needs n >= 1");
  const std::size_t m = mixture_.size();
  f_.resize(rule.size());
  t_.resize(rule.size() * m);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    auto x = rule.nodes.row(i);
    f_[i] = mixture_.density(x);
    for (std::size_t j = 0; j < m; ++j)
      t_[i * m + j] = dot(x, mixture_.means()[j].coords());
  }
}

std::vector<double> ExactMise::expected_estimate(double h) const
{
  if (!(h > 0.0) || !std::isfinite(h))
    throw DomainError("bandwidth must be finite and > 0");
  const int q = mixture_.dim();
  const std::size_t m = mixture_.size();
  const double k = 1.0 / (h * h);
  const double log_ck = log_cq(q, k);
  std::vector<double> base(m);
  for (std::size_t j = 0; j < m; ++j)
    base[j] = std::log(mixture_.weights()[j]) + mixture_.log_constants()[j] + log_ck;
  std::vector<double> e(f_.size());
  for (std::size_t i = 0; i < f_.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double kj = mixture_.kappas()[j];
      double r2 = k * k + kj * kj + 2.0 * k * kj * t_[i * m + j];
      double r = std::sqrt(std::max(r2, 0.0));
      acc += std::exp(base[j] - log_cq(q, r));
    }
    e[i] = acc;
  }
  return e;
}

double ExactMise::operator()(double h) const
{
  auto e = expected_estimate(h);
  std::vector<double> v(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    double d = e[i] - f_[i];
    v[i] = d * d - e[i] * e[i] / n_;
  }
  return kernel_square_integral(mixture_.dim(), h) / n_ + integrate_values(*rule_, v);
}

double exact_mise(const VonMisesMixture& mixture, double n, double h, const QuadratureRule& rule)
{
  return ExactMise(mixture, n, rule)(h);
}

double exact_mise_matrix(const VonMisesMixture& mixture,
                         double n,
                         double h,
                         const QuadratureRule& rule)
{
  check_rule(mixture, rule);
  const int q = mixture.dim();
  const std::size_t m = mixture.size();
  const double k = 1.0 / (h * h);
  const double log_ck = log_cq(q, k);
  // Per-component densities and their kernel smooths at the nodes.
  std::vector<std::vector<double>> fj(m, std::vector<double>(rule.size()));
  std::vector<std::vector<double>> ej(m, std::vector<double>(rule.size()));
  for (std::size_t j = 0; j < m; ++j) {
    const auto& mu = mixture.means()[j];
    double kj = mixture.kappas()[j];
    double lc = mixture.log_constants()[j];
    for (std::size_t i = 0; i < rule.size(); ++i) {
      double t = dot(rule.nodes.row(i), mu.coords());
      fj[j][i] = std::exp(lc + kj * t);
      double r = std::sqrt(std::max(k * k + kj * kj + 2.0 * k * kj * t, 0.0));
      ej[j][i] = std::exp(lc + log_ck - log_cq(q, r));
    }
  }
  auto inner = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      s += rule.weights[i] * a[i] * b[i];
    return s;
  };
  double total = 0.0;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      // Psi0 in closed form: C_a C_b / C_q(|kappa_a mu_a + kappa_b mu_b|).
      double ka = mixture.kappas()[a], kb = mixture.kappas()[b];
      double t = dot(mixture.means()[a].coords(), mixture.means()[b].coords());
      double r = std::sqrt(std::max(ka * ka + kb * kb + 2.0 * ka * kb * t, 0.0));
      double psi0 = std::exp(mixture.log_constants()[a] + mixture.log_constants()[b] - log_cq(q, r));
      double psi1 = inner(ej[a], fj[b]);
      double psi2 = inner(ej[a], ej[b]);
      total += mixture.weights()[a] * mixture.weights()[b] *
               ((1.0 - 1.0 / n) * psi2 - 2.0 * psi1 + psi0);
    }
  return total + kernel_square_integral(q, h) / n;
}

double circular_roughness(const VonMisesMixture& mixture)
{
  if (mixture.dim() != 1)
    throw UnsupportedError("circular_roughness requires q = 1");
  const auto rule = build_rule(1, RuleKind::simpson_circle, 2000);
  std::vector<double> m(mixture.size());
  for (std::size_t j = 0; j < mixture.size(); ++j)
    m[j] = std::atan2(mixture.means()[j][1], mixture.means()[j][0]);
  return integrate(rule, [&](std::span<const double> x) {
    double theta = std::atan2(x[1], x[0]);
    double d2 = 0.0;
    for (std::size_t j = 0; j < mixture.size(); ++j) {
      double k = mixture.kappas()[j];
      double c = std::cos(theta - m[j]), s = std::sin(theta - m[j]);
      d2 += mixture.weights()[j] * std::exp(mixture.log_constants()[j] + k * c) *
            (k * k * s * s - k * c);
    }
    return d2 * d2;
  });
}

double circular_amise_oli(double roughness, double n, double h)
{
  if (!(h > 0.0) || !std::isfinite(h))
    throw DomainError("bandwidth must be finite and > 0");
  if (!(n >= 1.0))
    throw DomainError("n must be >= 1");
  double a = 1.0 / std::sqrt(h);
  double ratio = std::exp(log_bessel_i(2.0, a) - log_bessel_i(0.0, a));
  double bias = (1.0 - ratio) * (1.0 - ratio) * roughness / 16.0;
  double var = std::exp(log_bessel_i(0.0, 2.0 * a) - 2.0 * log_bessel_i(0.0, a)) / (2.0 * n * kPi);
  return bias + var;
}

double circular_amise_oli(const VonMisesMixture& mixture, double n, double h)
{
  return circular_amise_oli(circular_roughness(mixture), n, h);
}

MinimizeResult minimize_risk(const RiskObjective& objective, double lo, double hi, int grid, double rtol)
{
  if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi))
    throw DomainError("minimize_risk: need 0 < lo < hi < inf");
  if (grid < 3)
    throw DomainError("minimize_risk: grid needs at least 3 points");
  MinimizeResult res;
  res.lo = lo;
  res.hi = hi;
  auto eval = [&](double h) {
    ++res.evaluations;
    double v = objective(h);
    return std::isfinite(v) ? v : kInf;
  };
  res.grid_h = log_grid(lo, hi, grid);
  res.grid_values.resize(res.grid_h.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < res.grid_h.size(); ++i) {
    res.grid_values[i] = eval(res.grid_h[i]);
    if (res.grid_values[i] < res.grid_values[best])
      best = i;
  }
  if (res.grid_values[best] == kInf)
    throw EvaluationError("objective is not finite anywhere on [" + std::to_string(lo) +
                          ", " + std::to_string(hi) + "]");
  res.h = res.grid_h[best];
  res.value = res.grid_values[best];
  if (best == 0) {
    res.at_lower = true;
    return res;
  }
  if (best + 1 == res.grid_h.size()) {
    res.at_upper = true;
    return res;
  }

  // Golden section in log h on the bracketing grid cell pair.
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = std::log(res.grid_h[best - 1]);
  double b = std::log(res.grid_h[best + 1]);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = eval(std::exp(c));
  double fd = eval(std::exp(d));
  const double tol = std::log1p(rtol);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = eval(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = eval(std::exp(d));
    }
  }
  double hc = std::exp(c), hd = std::exp(d);
  if (fc < res.value) {
    res.h = hc;
    res.value = fc;
  }
  if (fd < res.value) {
    res.h = hd;
    res.value = fd;
  }
  return res;
}

MinimizeResult minimize_risk_widening(const RiskObjective& objective, double lo, double hi, int max_widen)
{
  int widen_lo = 0, widen_hi = 0, evaluations = 0;
  for (;;) {
    MinimizeResult res = minimize_risk(objective, lo, hi);
    evaluations += res.evaluations;
    if (res.at_lower && widen_lo < max_widen) {
      lo /= 10.0;
      ++widen_lo;
      continue;
    }
    if (res.at_upper && widen_hi < max_widen) {
      hi *= 10.0;
      ++widen_hi;
      continue;
    }
    res.evaluations = evaluations;
    return res;
  }
}

std::string to_string(CurveSource source)
{
  switch (source) {
    case CurveSource::exact:
      return "exact";
    case CurveSource::asymptotic:
      return "asymptotic";
    case CurveSource::empirical:
      return "empirical";
  }
  return "unknown";
}

namespace {

MiseCurve tabulate(const RiskObjective& f, double n, int q, CurveSource source,
                   double lo, double hi, int points)
{
  MiseCurve curve;
  curve.n = n;
  curve.q = q;
  curve.source = source;
  curve.h = log_grid(lo, hi, points);
  curve.mise.reserve(curve.h.size());
  for (double h : curve.h)
    curve.mise.push_back(f(h));
  auto best = minimize_risk(f, lo, hi, points);
  curve.h_min = best.h;
  curve.min_value = best.value;
  curve.boundary = best.on_boundary();
  return curve;
}

} // namespace

MiseCurve exact_mise_curve(const VonMisesMixture& mixture, double n, const QuadratureRule& rule,
                           double lo, double hi, int points)
{
  ExactMise f(mixture, n, rule);
  return tabulate(std::cref(f), n, mixture.dim(), CurveSource::exact, lo, hi, points);
}

MiseCurve amise_curve(const VonMisesMixture& mixture, double n, const QuadratureRule& rule,
                      double lo, double hi, int points)
{
  const int q = mixture.dim();
  const double r = curvature(mixture, rule).value;
  const auto c = vm_kernel_constants(q);
  auto f = [&](double h) {
    return c.b * c.b * r * std::pow(h, 4) +
           std::exp(log_normalizing_constant(q, h)) * c.d / n;
  };
  return tabulate(f, n, q, CurveSource::asymptotic, lo, hi, points);
}

} // namespace dirkde
