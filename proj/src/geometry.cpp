#include "dirkde/geometry.hpp"

#include "dirkde/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace dirkde {

namespace {

double norm(std::span<const double> v)
{
  double s = 0.0;
  for (double x : v)
    s += x * x;
  return std::sqrt(s);
}

} // namespace

UnitVector::UnitVector(std::vector<double> coords)
  : coords_(std::move(coords))
{
  if (coords_.size() < 2)
    throw DomainError("UnitVector needs at least two coordinates");
  for (double x : coords_)
    if (!std::isfinite(x))
      throw DomainError("UnitVector coordinates must be finite");
  double r = norm(coords_);
  if (std::abs(r - 1.0) > 1e-4)
    throw DomainError("UnitVector norm deviates from 1 by " +
                      std::to_string(r - 1.0));
  if (std::abs(r - 1.0) > 1e-15)
    for (double& x : coords_)
      x /= r;
}

UnitVector::UnitVector(std::initializer_list<double> coords)
  : UnitVector(std::vector<double>(coords))
{}

UnitVector UnitVector::operator-() const
{
  std::vector<double> c(coords_);
  for (double& x : c)
    x = -x;
  return UnitVector(std::move(c));
}

PointSet::PointSet(int q, std::vector<double> rowmajor)
  : q_(q)
  , data_(std::move(rowmajor))
{
  if (q < 1)
    throw DomainError("PointSet: q must be >= 1");
  if (data_.size() % ambient() != 0)
    throw DomainError("PointSet: storage is not a multiple of q+1");
}

PointSet::PointSet(const std::vector<UnitVector>& points)
{
  if (points.empty())
    throw DomainError("PointSet: empty point list");
  q_ = points.front().dim();
  reserve(points.size());
  for (const auto& p : points)
    push_back(p);
}

UnitVector PointSet::point(std::size_t i) const
{
  auto r = row(i);
  return UnitVector(std::vector<double>(r.begin(), r.end()));
}

void PointSet::push_back(std::span<const double> x)
{
  if (q_ < 0)
    q_ = static_cast<int>(x.size()) - 1;
  if (x.size() != ambient())
    throw DomainError("PointSet: dimension mismatch");
  data_.insert(data_.end(), x.begin(), x.end());
}

UnitVector normalize(std::span<const double> v)
{
  double r = norm(v);
  if (!(r > 1e-12))
    throw DegenerateInputError("normalize: vector norm below 1e-12");
  std::vector<double> c(v.begin(), v.end());
  for (double& x : c)
    x /= r;
  return UnitVector(std::move(c));
}

TangentBasis complete_basis(const UnitVector& mu)
{
  const int q = mu.dim();
  const std::size_t p = mu.size();
  // Reflector H = I - 2 v v^T / v^T v with v = e_{q+1} + s mu, s chosen so
  // that 1 + s mu_{q+1} >= 1 (no cancellation). H e_{q+1} = -s mu, so the
  // images of e_1..e_q are orthonormal and orthogonal to mu.
  double s = mu[q] >= 0.0 ? 1.0 : -1.0;
  std::vector<double> v(p);
  for (std::size_t i = 0; i < p; ++i)
    v[i] = s * mu[i];
  v[q] += 1.0;
  double vv = 0.0;
  for (double x : v)
    vv += x * x;

  TangentBasis basis;
  basis.q = q;
  basis.columns.assign(static_cast<std::size_t>(q) * p, 0.0);
  for (int k = 0; k < q; ++k) {
    double coef = 2.0 * v[k] / vv;
    double* col = basis.columns.data() + static_cast<std::size_t>(k) * p;
    for (std::size_t i = 0; i < p; ++i)
      col[i] = (static_cast<int>(i) == k ? 1.0 : 0.0) - coef * v[i];
  }
  return basis;
}

void tangent_normal(double t,
                    std::span<const double> xi,
                    const UnitVector& mu,
                    const TangentBasis& basis,
                    std::span<double> out)
{
  const std::size_t p = mu.size();
  double s = std::sqrt(std::max(0.0, 1.0 - t * t));
  for (std::size_t i = 0; i < p; ++i)
    out[i] = t * mu[i];
  for (int k = 0; k < basis.q; ++k) {
    auto col = basis.column(k);
    double c = s * xi[k];
    for (std::size_t i = 0; i < p; ++i)
      out[i] += c * col[i];
  }
}

UnitVector rho1(double theta)
{
  theta = std::fmod(theta, 2.0 * std::numbers::pi);
  return UnitVector({std::cos(theta), std::sin(theta)});
}

UnitVector rho2(double theta, double phi)
{
  theta = std::fmod(theta, 2.0 * std::numbers::pi);
  return UnitVector({std::cos(theta) * std::sin(phi),
                     std::sin(theta) * std::sin(phi),
                     std::cos(phi)});
}

UnitVector pad_front(int zeros, const UnitVector& v)
{
  std::vector<double> c(static_cast<std::size_t>(zeros), 0.0);
  c.insert(c.end(), v.coords().begin(), v.coords().end());
  return UnitVector(std::move(c));
}

UnitVector pad_back(const UnitVector& v, int zeros)
{
  std::vector<double> c(v.coords().begin(), v.coords().end());
  c.resize(c.size() + static_cast<std::size_t>(zeros), 0.0);
  return UnitVector(std::move(c));
}

UnitVector basis_vector(int q, int i)
{
  std::vector<double> c(static_cast<std::size_t>(q + 1), 0.0);
  c.at(static_cast<std::size_t>(i)) = 1.0;
  return UnitVector(std::move(c));
}

} // namespace dirkde
