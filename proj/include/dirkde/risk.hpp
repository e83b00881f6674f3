#pragma once

#include "dirkde/models.hpp"
#include "dirkde/quadrature.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dirkde {

//! Psi(f, x) = -x'grad f + (lap f - x'Hf x)/q for the radial extension of a vM mixture.
double psi(const VonMisesMixture& mixture, std::span<const double> x);

//! R(Psi(f, .)) for a single von Mises density, in closed form.
double curvature_vm(int q, double kappa);

enum class CurvatureMethod
{
  closed_form,
  quadrature,
  monte_carlo
};

std::string to_string(CurvatureMethod method);

struct CurvatureReport
{
  double value = 0.0;
  CurvatureMethod method = CurvatureMethod::quadrature;
  //! Closed form: 0. Deterministic rules: change under a fixed rotation of the
  //! nodes. Monte Carlo: one standard error.
  double error = 0.0;
};

//! Integral of psi^2 by the given rule.
CurvatureReport curvature_mixture(const VonMisesMixture& mixture, const QuadratureRule& rule);

//! Closed form for a single component, otherwise curvature_mixture.
CurvatureReport curvature(const VonMisesMixture& mixture, const QuadratureRule& rule);

//! AMISE-optimal bandwidth from the kernel constants (lambda_q, b_q, d_q).
double h_amise(int q, double n, double curvature);
//! The same bandwidth written directly for the von Mises kernel.
double h_amise_vm(int q, double n, double curvature);

//! Exact MISE of the von Mises KDE for samples of size n from a vM mixture.
class ExactMise
{
public:
  ExactMise(VonMisesMixture mixture, double n, const QuadratureRule& rule);

  double operator()(double h) const;

  //! E[f_h](x) at the rule nodes.
  std::vector<double> expected_estimate(double h) const;

  const VonMisesMixture& mixture() const { return mixture_; }
  double n() const { return n_; }

private:
  VonMisesMixture mixture_;
  double n_;
  const QuadratureRule* rule_;
  std::vector<double> f_;  // f_M at nodes
  std::vector<double> t_;  // node-major mu_j'x
};

double exact_mise(const VonMisesMixture& mixture,
                  double n,
                  double h,
                  const QuadratureRule& rule);

//! Matrix form p'[(1 - 1/n) Psi2 - 2 Psi1 + Psi0]p + V(h)/n with
//! quadrature-evaluated entries; a cross-check of exact_mise.
double exact_mise_matrix(const VonMisesMixture& mixture,
                         double n,
                         double h,
                         const QuadratureRule& rule);

//! C_q(1/h^2)^2 / C_q(2/h^2), the integral of the squared kernel.
double kernel_square_integral(int q, double h);

//! Integral of f''(theta)^2 over the circle for a q = 1 mixture (Simpson, 2000 nodes).
double circular_roughness(const VonMisesMixture& mixture);

//! Circular-kernel AMISE in which the kernel concentration is h^{-1/2}.
double circular_amise_oli(const VonMisesMixture& mixture, double n, double h);
double circular_amise_oli(double roughness, double n, double h);

struct MinimizeResult
{
  double h = 0.0;
  double value = 0.0;
  bool at_lower = false;
  bool at_upper = false;
  double lo = 0.0;  // final search window
  double hi = 0.0;
  std::vector<double> grid_h;
  std::vector<double> grid_values;
  int evaluations = 0;

  bool on_boundary() const { return at_lower || at_upper; }
};

using RiskObjective = std::function<double(double)>;

//! 60-point log grid on [lo, hi], then golden section between the neighbours
//! of the best grid point to relative tolerance rtol in h. Non-finite values
//! count as +inf; throws EvaluationError when no grid value is finite.
MinimizeResult minimize_risk(const RiskObjective& objective,
                             double lo,
                             double hi,
                             int grid = 60,
                             double rtol = 1e-4);

//! minimize_risk that widens a flagged side by a factor 10, at most
//! max_widen times per side.
MinimizeResult minimize_risk_widening(const RiskObjective& objective,
                                      double lo = 1e-2,
                                      double hi = 10.0,
                                      int max_widen = 2);

enum class CurveSource
{
  exact,
  asymptotic,
  empirical
};

std::string to_string(CurveSource source);

struct MiseCurve
{
  std::vector<double> h;
  std::vector<double> mise;
  double h_min = 0.0;
  double min_value = 0.0;
  bool boundary = false;
  double n = 0.0;
  int q = 0;
  CurveSource source = CurveSource::exact;
};

//! Exact MISE on a log grid plus the refined minimizer.
MiseCurve exact_mise_curve(const VonMisesMixture& mixture,
                           double n,
                           const QuadratureRule& rule,
                           double lo = 1e-2,
                           double hi = 10.0,
                           int points = 60);

//! AMISE b^2 R h^4 + c_{h,q} d / n on a log grid.
MiseCurve amise_curve(const VonMisesMixture& mixture,
                      double n,
                      const QuadratureRule& rule,
                      double lo = 1e-2,
                      double hi = 10.0,
                      int points = 60);

} // namespace dirkde
