#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace dirkde {

//! A point on the q-sphere, stored as q+1 coordinates of unit norm.
class UnitVector
{
public:
  UnitVector() = default;

  //! Accepts norms within 1e-4 of one (renormalized); throws DomainError otherwise.
  explicit UnitVector(std::vector<double> coords);
  UnitVector(std::initializer_list<double> coords);

  int dim() const { return static_cast<int>(coords_.size()) - 1; }
  std::size_t size() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const { return coords_; }
  const double* data() const { return coords_.data(); }

  UnitVector operator-() const;
  bool operator==(const UnitVector&) const = default;

private:
  std::vector<double> coords_;
};

//! n points on a common q-sphere, stored row-major.
class PointSet
{
public:
  PointSet() = default;
  explicit PointSet(int q) : q_(q) {}
  PointSet(int q, std::vector<double> rowmajor);
  PointSet(const std::vector<UnitVector>& points);

  int dim() const { return q_; }
  std::size_t ambient() const { return static_cast<std::size_t>(q_ + 1); }
  std::size_t size() const { return q_ < 0 ? 0 : data_.size() / ambient(); }
  bool empty() const { return data_.empty(); }

  std::span<const double> row(std::size_t i) const
  {
    return {data_.data() + i * ambient(), ambient()};
  }
  std::span<double> row(std::size_t i)
  {
    return {data_.data() + i * ambient(), ambient()};
  }
  UnitVector point(std::size_t i) const;

  void push_back(std::span<const double> x);
  void push_back(const UnitVector& x) { push_back(x.coords()); }
  void reserve(std::size_t n) { data_.reserve(n * ambient()); }

  const std::vector<double>& values() const { return data_; }

  bool operator==(const PointSet&) const = default;

private:
  int q_ = -1;
  std::vector<double> data_;
};

//! q orthonormal columns spanning the tangent space at mu.
struct TangentBasis
{
  int q = 0;
  std::vector<double> columns; // column k occupies [k*(q+1), (k+1)*(q+1))

  std::span<const double> column(int k) const
  {
    return {columns.data() + static_cast<std::size_t>(k) * (q + 1),
            static_cast<std::size_t>(q + 1)};
  }
};

inline double dot(std::span<const double> a, std::span<const double> b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

UnitVector normalize(std::span<const double> v);
inline UnitVector normalize(std::initializer_list<double> v)
{
  return normalize(std::span<const double>(v.begin(), v.size()));
}

//! Householder completion of mu; deterministic in mu.
TangentBasis complete_basis(const UnitVector& mu);

//! t mu + sqrt(1 - t^2) B xi, written into out (size q+1).
void tangent_normal(double t,
                    std::span<const double> xi,
                    const UnitVector& mu,
                    const TangentBasis& basis,
                    std::span<double> out);

UnitVector rho1(double theta);
UnitVector rho2(double theta, double phi);

//! Concatenates leading zeros and a unit vector: (0_k, v).
UnitVector pad_front(int zeros, const UnitVector& v);
//! (v, 0_k).
UnitVector pad_back(const UnitVector& v, int zeros);
//! The canonical basis vector e_i in dimension q+1 (0-based index).
UnitVector basis_vector(int q, int i);

} // namespace dirkde
