#pragma once

#include "dirkde/geometry.hpp"
#include "dirkde/rng.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dirkde {

//! Finite mixture of von Mises densities on a common q-sphere.
class VonMisesMixture
{
public:
  VonMisesMixture() = default;

  //! Weights are renormalized (and renormalized() set) when they do not sum to one within 1e-12.
  VonMisesMixture(std::vector<double> weights,
                  std::vector<UnitVector> means,
                  std::vector<double> kappas);

  static VonMisesMixture single(UnitVector mean, double kappa);
  static VonMisesMixture uniform(int q);

  int dim() const { return q_; }
  std::size_t size() const { return weights_.size(); }

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<UnitVector>& means() const { return means_; }
  const std::vector<double>& kappas() const { return kappas_; }
  //! log C_q(kappa_j), cached at construction.
  const std::vector<double>& log_constants() const { return log_c_; }
  bool renormalized() const { return renormalized_; }

  double log_density(std::span<const double> x) const;
  double density(std::span<const double> x) const;

private:
  int q_ = 0;
  std::vector<double> weights_;
  std::vector<UnitVector> means_;
  std::vector<double> kappas_;
  std::vector<double> log_c_;
  bool renormalized_ = false;
};

//! Quantile function of the radial variable t = mu'x of a rotationally
//! symmetric density, tabulated at 2000 points and interpolated by a
//! monotone cubic.
class RadialQuantileTable
{
public:
  using LogRadial = std::function<double(double)>;

  RadialQuantileTable() = default;
  //! log_g is the unnormalized log radial density g(t) on (-1, 1).
  RadialQuantileTable(int q, const LogRadial& log_g, std::size_t points = 2000);

  int dim() const { return q_; }
  double quantile(double p) const;

  //! Grid pairs (p_k, t_k), nondecreasing in both coordinates.
  const std::vector<double>& probabilities() const { return p_; }
  const std::vector<double>& quantiles() const { return t_; }

private:
  int q_ = 0;
  std::vector<double> p_;
  std::vector<double> t_;
  // Interpolation of theta = arccos(t) against u = 1 - p.
  std::vector<double> u_;
  std::vector<double> theta_;
  std::vector<double> slope_;
};

enum class DensityKind
{
  uniform,
  vm_mixture,
  watson,
  small_circle,
  directional_cauchy,
  skew_normal_directional,
  projected_normal,
  mixture
};

std::string to_string(DensityKind kind);

//! Immutable density on the q-sphere with evaluation and sampling.
class DensityModel
{
public:
  static DensityModel uniform(int q);
  static DensityModel von_mises(UnitVector mu, double kappa);
  static DensityModel vm_mixture(VonMisesMixture mixture);
  static DensityModel watson(UnitVector mu, double kappa);
  static DensityModel small_circle(UnitVector mu, double tau, double nu);
  static DensityModel directional_cauchy(UnitVector mu, double kappa);
  static DensityModel skew_normal_directional(UnitVector mu,
                                              double m,
                                              double sigma,
                                              double lambda);
  static DensityModel projected_normal(std::vector<double> mu,
                                       const Eigen::MatrixXd& sigma);
  static DensityModel mixture(std::vector<double> weights,
                              std::vector<DensityModel> parts);

  DensityKind kind() const;
  int dim() const;

  double log_density(std::span<const double> x) const;
  double density(std::span<const double> x) const;

  PointSet sample(std::size_t n, Rng& rng) const;
  void sample_one(Rng& rng, std::span<double> out) const;

  //! True for single-axis families and single-component vM mixtures.
  bool rotationally_symmetric() const;
  //! Symmetry axis of a rotationally symmetric model.
  const UnitVector& axis() const;
  //! Log of the radial function: log f(x) = radial_log_density(mu'x).
  double radial_log_density(double t) const;
  //! Quantile table used by the sampler (rotationally symmetric models only).
  const RadialQuantileTable& radial_quantile_table() const;

  //! The mixture when kind() == vm_mixture (also single vM), else nullptr.
  const VonMisesMixture* as_vm_mixture() const;

  //! Log normalizing constant cached at construction.
  double log_normalizer() const;

  struct Impl;

private:
  explicit DensityModel(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

//! Builds the radial quantile table of a rotationally symmetric model.
RadialQuantileTable radial_quantile_table(const DensityModel& model);

//! I_p(alpha) = int_0^inf t^{p-1} exp(-(t-alpha)^2/2) dt.
double projected_normal_integral(int p, double alpha);
//! Adaptive quadrature evaluation of the same integral.
double projected_normal_integral_quadrature(int p, double alpha);

struct ScenarioInfo
{
  int id;
  std::string name;
  std::string description;
};

//! The 20 simulation scenarios M1..M20.
const std::vector<ScenarioInfo>& scenario_catalog();
DensityModel scenario(int id, int q);
//! Parses "M7" or "7".
int parse_scenario_id(const std::string& name);

//! One-dimensional integral of a radial function over the q-sphere:
//! omega_{q-1} int_{-1}^{1} exp(log_g(t)) (1-t^2)^{q/2-1} dt, returned as a log.
double log_radial_mass(int q, const std::function<double(double)>& log_g);

} // namespace dirkde
