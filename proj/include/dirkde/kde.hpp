#pragma once

#include "dirkde/geometry.hpp"

#include <vector>

namespace dirkde {

//! log c_{h,q} for the von Mises kernel: log C_q(1/h^2) + 1/h^2.
double log_normalizing_constant(int q, double h);

//! Bandwidths outside [kMinBandwidth, kMaxBandwidth] are clamped.
inline constexpr double kMinBandwidth = 1e-3;
inline constexpr double kMaxBandwidth = 1e3;

//! Von Mises kernel density estimator on the q-sphere.
class KdeModel
{
public:
  KdeModel(PointSet data, double h);

  int dim() const { return data_.dim(); }
  std::size_t size() const { return data_.size(); }
  const PointSet& data() const { return data_; }

  //! Bandwidth in use (after clamping) and the requested one.
  double bandwidth() const { return h_; }
  double requested_bandwidth() const { return requested_h_; }
  bool clamped() const { return h_ != requested_h_; }

  double concentration() const { return kappa_; }

  double log_eval(std::span<const double> x) const;
  double eval(std::span<const double> x) const;

  //! Estimate without the i-th observation, evaluated at it. Needs n >= 2.
  double log_eval_loo(std::size_t i) const;
  double eval_loo(std::size_t i) const;

  //! Density at every row of nodes.
  std::vector<double> eval_many(const PointSet& nodes) const;

private:
  PointSet data_;
  double requested_h_;
  double h_;
  double kappa_;
  double log_cq_; // log C_q(kappa)
};

} // namespace dirkde
