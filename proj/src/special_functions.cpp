#include "dirkde/special_functions.hpp"

#include "dirkde/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace dirkde {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr int kSeriesTerms = 200;
constexpr int kTabulatedOrders = 16; // 2*nu = 0, 1, ..., 15

// Reciprocals 1 / (k (k + nu)) for the power series, tabulated for the
// integer and half-integer orders that the sphere dimensions produce.
struct SeriesTables
{
  std::array<std::array<double, kSeriesTerms + 1>, kTabulatedOrders> inv{};

  SeriesTables()
  {
    for (int m = 0; m < kTabulatedOrders; ++m) {
      double nu = 0.5 * m;
      inv[m][0] = 0.0;
      for (int k = 1; k <= kSeriesTerms; ++k)
        inv[m][k] = 1.0 / (k * (k + nu));
    }
  }
};

const SeriesTables& series_tables()
{
  static const SeriesTables tables;
  return tables;
}

double asymptotic_threshold(double nu)
{
  return 17.5 + nu * nu;
}

// Sum_k t_k with t_0 = 1, t_k = t_{k-1} (z^2/4) / (k (k + nu)).
double bessel_series_sum(double nu, double z)
{
  double x = 0.25 * z * z;
  double sum = 1.0;
  double term = 1.0;
  double twice = 2.0 * nu;
  int m = static_cast<int>(twice);
  if (twice == m && m < kTabulatedOrders) {
    const auto& inv = series_tables().inv[m];
    for (int k = 1; k <= kSeriesTerms; ++k) {
      term *= x * inv[k];
      sum += term;
      if (term < 1e-17 * sum)
        break;
    }
  } else {
    for (int k = 1; k <= kSeriesTerms; ++k) {
      term *= x / (k * (k + nu));
      sum += term;
      if (term < 1e-17 * sum)
        break;
    }
  }
  return sum;
}

// Hankel expansion of I_nu(z) e^{-z} sqrt(2 pi z).
double bessel_asymptotic_sum(double nu, double z)
{
  double mu = 4.0 * nu * nu;
  double sum = 1.0;
  double term = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    double odd = 2.0 * k - 1.0;
    double next = -term * (mu - odd * odd) / (8.0 * k * z);
    if (next == 0.0)
      break;
    if (std::abs(next) >= prev)
      break;
    sum += next;
    prev = std::abs(next);
    term = next;
    if (std::abs(term) < 1e-17 * std::abs(sum))
      break;
  }
  return sum;
}

double log_sinh(double z)
{
  if (z < 20.0)
    return std::log(std::sinh(z));
  return z - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * z));
}

double log_cosh(double z)
{
  return z - std::numbers::ln2 + std::log1p(std::exp(-2.0 * z));
}

void check_order(double nu, double z)
{
  if (!(nu >= -0.5) || !std::isfinite(nu))
    throw DomainError("log_bessel_i: order must be finite and >= -1/2, got " +
                      std::to_string(nu));
  if (!(z >= 0.0) || std::isnan(z))
    throw DomainError("log_bessel_i: argument must be >= 0, got " +
                      std::to_string(z));
}

} // namespace

double log_bessel_i(double nu, double z)
{
  check_order(nu, z);
  if (std::isinf(z))
    return std::numeric_limits<double>::infinity();
  if (z >= asymptotic_threshold(nu) && std::abs(nu) != 0.5)
    return z + log_bessel_i_scaled(nu, z);
  if (z == 0.0) {
    if (nu == 0.0)
      return 0.0;
    if (nu < 0.0)
      return std::numeric_limits<double>::infinity();
    return -std::numeric_limits<double>::infinity();
  }
  if (nu == 0.5)
    return 0.5 * (std::log(2.0 / (kPi * z))) + log_sinh(z);
  if (nu == -0.5)
    return 0.5 * (std::log(2.0 / (kPi * z))) + log_cosh(z);
  if (z < asymptotic_threshold(nu))
    return nu * std::log(0.5 * z) - std::lgamma(nu + 1.0) +
           std::log(bessel_series_sum(nu, z));
  return z - 0.5 * (kLog2Pi + std::log(z)) +
         std::log(bessel_asymptotic_sum(nu, z));
}

double log_bessel_i_scaled(double nu, double z)
{
  check_order(nu, z);
  if (std::isinf(z))
    return 0.0;
  if (z >= asymptotic_threshold(nu) || (std::abs(nu) == 0.5 && z > 20.0)) {
    if (nu == 0.5)
      return -0.5 * std::log(2.0 * kPi * z) + std::log1p(-std::exp(-2.0 * z));
    if (nu == -0.5)
      return -0.5 * std::log(2.0 * kPi * z) + std::log1p(std::exp(-2.0 * z));
    return -0.5 * (kLog2Pi + std::log(z)) +
           std::log(bessel_asymptotic_sum(nu, z));
  }
  return log_bessel_i(nu, z) - z;
}

double log_sphere_area(int q)
{
  if (q < 0)
    throw DomainError("sphere dimension must be >= 0");
  double a = 0.5 * (q + 1);
  return std::numbers::ln2 + a * std::log(kPi) - std::lgamma(a);
}

double sphere_area(int q)
{
  return std::exp(log_sphere_area(q));
}

double log_cq(int q, double kappa)
{
  if (q < 1)
    throw DomainError("log_cq: q must be >= 1");
  if (!(kappa >= 0.0) || !std::isfinite(kappa))
    throw DomainError("log_cq: kappa must be finite and >= 0");
  if (kappa == 0.0)
    return -log_sphere_area(q);
  if (q == 1)
    return -kLog2Pi - log_bessel_i(0.0, kappa);
  if (q == 2)
    return std::log(kappa) - std::log(4.0 * kPi) - log_sinh(kappa);
  double nu = 0.5 * (q - 1);
  if (kappa < 1e-3) {
    // nu log(kappa) cancels against the leading series factor.
    return nu * std::numbers::ln2 + std::lgamma(nu + 1.0) -
           0.5 * (q + 1) * kLog2Pi - std::log(bessel_series_sum(nu, kappa));
  }
  return nu * std::log(kappa) - 0.5 * (q + 1) * kLog2Pi -
         log_bessel_i(nu, kappa);
}

KernelConstants vm_kernel_constants(int q)
{
  if (q < 1)
    throw DomainError("vm_kernel_constants: q must be >= 1");
  return {std::pow(2.0 * kPi, 0.5 * q), 0.5 * q, std::pow(2.0, -0.5 * q)};
}

double mean_resultant_ratio(int q, double kappa)
{
  if (q < 1)
    throw DomainError("mean_resultant_ratio: q must be >= 1");
  if (!(kappa >= 0.0))
    throw DomainError("mean_resultant_ratio: kappa must be >= 0");
  if (kappa == 0.0)
    return 0.0;
  if (std::isinf(kappa))
    return 1.0;
  double nu = 0.5 * (q - 1);
  if (q == 2) {
    if (kappa < 0.1) {
      double k2 = kappa * kappa;
      return kappa * (1.0 / 3.0 +
                      k2 * (-1.0 / 45.0 +
                            k2 * (2.0 / 945.0 +
                                  k2 * (-1.0 / 4725.0 + k2 * 2.0 / 93555.0))));
    }
    return 1.0 / std::tanh(kappa) - 1.0 / kappa;
  }
  if (kappa < 1e-8)
    return kappa / (q + 1);
  if (kappa >= asymptotic_threshold(nu + 1.0))
    return bessel_asymptotic_sum(nu + 1.0, kappa) /
           bessel_asymptotic_sum(nu, kappa);
  return std::exp(log_bessel_i(nu + 1.0, kappa) - log_bessel_i(nu, kappa));
}

double solve_concentration(int q, double rbar)
{
  if (q < 1)
    throw DomainError("solve_concentration: q must be >= 1");
  if (std::isnan(rbar) || rbar < 0.0)
    throw DomainError("solve_concentration: rbar must be in [0, 1)");
  if (rbar >= 1.0)
    throw DegenerateInputError(
      "solve_concentration: mean resultant length >= 1 (all points identical)");
  if (rbar == 0.0)
    return 0.0;

  auto g = [&](double k) { return mean_resultant_ratio(q, k) - rbar; };

  double kappa = rbar * (q + 1 - rbar * rbar) / (1.0 - rbar * rbar);
  double lo = 0.0;
  double hi = kappa;
  while (g(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
  }

  for (int it = 0; it < 300; ++it) {
    double a = mean_resultant_ratio(q, kappa);
    double diff = a - rbar;
    if (std::abs(diff) < 1e-15)
      return kappa;
    if (diff < 0.0)
      lo = std::max(lo, kappa);
    else
      hi = std::min(hi, kappa);
    double deriv = 1.0 - a * a - q * a / kappa;
    double next = kappa - diff / deriv;
    if (!(deriv > 0.0) || !(next > lo && next < hi))
      next = 0.5 * (lo + hi);
    if (std::abs(next - kappa) <= 1e-15 * kappa)
      return next;
    kappa = next;
    if (hi - lo <= 1e-15 * hi)
      return kappa;
  }
  return kappa;
}

double normal_cdf(double x)
{
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

double log_normal_cdf(double x)
{
  if (x > -30.0)
    return std::log(normal_cdf(x));
  // Mills ratio expansion for the far left tail.
  double x2 = x * x;
  double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - 0.5 * kLog2Pi - std::log(-x) + std::log(series);
}

} // namespace dirkde
