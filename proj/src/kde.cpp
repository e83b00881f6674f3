#include "dirkde/kde.hpp"

#include "dirkde/errors.hpp"
#include "dirkde/special_functions.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dirkde {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> as_matrix(const PointSet& x)
{
  return {x.values().data(), static_cast<Eigen::Index>(x.size()),
          static_cast<Eigen::Index>(x.ambient())};
}

void check_bandwidth(double h)
{
  if (!(h > 0.0) || !std::isfinite(h))
    throw DomainError("bandwidth must be finite and > 0, got " + std::to_string(h));
}

} // namespace

double log_normalizing_constant(int q, double h)
{
  check_bandwidth(h);
  double kappa = 1.0 / (h * h);
  return log_cq(q, kappa) + kappa;
}

KdeModel::KdeModel(PointSet data, double h) : data_(std::move(data)), requested_h_(h)
{
  check_bandwidth(h);
  if (data_.empty())
    throw DomainError("KdeModel needs at least one data point");
  h_ = std::clamp(h, kMinBandwidth, kMaxBandwidth);
  kappa_ = 1.0 / (h_ * h_);
  log_cq_ = log_cq(data_.dim(), kappa_);
}

double KdeModel::log_eval(std::span<const double> x) const
{
  if (x.size() != data_.ambient())
    throw DomainError("evaluation point has the wrong dimension");
  const std::size_t n = data_.size();
  double tmax = -std::numeric_limits<double>::infinity();
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = dot(x, data_.row(i));
    tmax = std::max(tmax, t[i]);
  }
  double s = 0.0;
  for (double ti : t)
    s += std::exp(kappa_ * (ti - tmax));
  return log_cq_ + kappa_ * tmax + std::log(s / static_cast<double>(n));
}

double KdeModel::eval(std::span<const double> x) const
{
  return std::exp(log_eval(x));
}

double KdeModel::log_eval_loo(std::size_t i) const
{
  const std::size_t n = data_.size();
  if (n < 2)
    throw DomainError("leave-one-out evaluation needs n >= 2");
  if (i >= n)
    throw DomainError("leave-one-out index out of range");
  auto xi = data_.row(i);
  double tmax = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j)
    if (j != i)
      tmax = std::max(tmax, dot(xi, data_.row(j)));
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    if (j != i)
      s += std::exp(kappa_ * (dot(xi, data_.row(j)) - tmax));
  return log_cq_ + kappa_ * tmax + std::log(s / static_cast<double>(n - 1));
}

double KdeModel::eval_loo(std::size_t i) const
{
  return std::exp(log_eval_loo(i));
}

std::vector<double> KdeModel::eval_many(const PointSet& nodes) const
{
  if (nodes.dim() != data_.dim())
    throw DomainError("evaluation nodes have the wrong dimension");
  const std::size_t m = nodes.size();
  const double log_n = std::log(static_cast<double>(data_.size()));
  std::vector<double> out(m);
  auto x = as_matrix(data_);
  constexpr std::size_t block = 256;
  RowMatrix t;
  for (std::size_t start = 0; start < m; start += block) {
    std::size_t len = std::min(block, m - start);
    auto y = as_matrix(nodes).middleRows(static_cast<Eigen::Index>(start),
                                         static_cast<Eigen::Index>(len));
    t.noalias() = y * x.transpose();
    for (std::size_t r = 0; r < len; ++r) {
      auto row = t.row(static_cast<Eigen::Index>(r));
      double tmax = row.maxCoeff();
      double s = (kappa_ * (row.array() - tmax)).exp().sum();
      out[start + r] = std::exp(log_cq_ + kappa_ * tmax + std::log(s) - log_n);
    }
  }
  return out;
}

} // namespace dirkde
