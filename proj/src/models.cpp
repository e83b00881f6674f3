#include "dirkde/models.hpp"

#include "dirkde/errors.hpp"
#include "dirkde/quadrature.hpp"
#include "dirkde/special_functions.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <variant>

namespace dirkde {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> v)
{
  double m = kNegInf;
  for (double x : v)
    m = std::max(m, x);
  if (!std::isfinite(m))
    return m;
  double s = 0.0;
  for (double x : v)
    s += std::exp(x - m);
  return m + std::log(s);
}

void require_finite(double v, const char* what)
{
  if (!std::isfinite(v))
    throw DomainError(std::string(what) + " must be finite");
}

// Largest value of log_g on a coarse grid, used to scale integrands.
double radial_shift(const std::function<double(double)>& log_g)
{
  double m = kNegInf;
  for (int k = 0; k <= 2000; ++k) {
    double theta = kPi * k / 2000.0;
    m = std::max(m, log_g(std::cos(theta)));
  }
  if (!std::isfinite(m))
    throw DomainError("radial function is not finite on (-1, 1)");
  return m;
}

// Monotone cubic (Fritsch-Carlson) slopes.
std::vector<double> pchip_slopes(const std::vector<double>& x,
                                 const std::vector<double>& y)
{
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0);
  if (n < 2)
    return d;
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }
  if (n == 2) {
    d[0] = d[1] = delta[0];
    return d;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      d[i] = 0.0;
    } else {
      double w1 = 2.0 * h[i] + h[i - 1];
      double w2 = h[i] + 2.0 * h[i - 1];
      d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  auto endpoint = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0.0)
      return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(s) > std::abs(3.0 * d0))
      return 3.0 * d0;
    return s;
  };
  d[0] = endpoint(h[0], h[1], delta[0], delta[1]);
  d[n - 1] = endpoint(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  return d;
}

} // namespace

// ---------------------------------------------------------------------------
// VonMisesMixture

VonMisesMixture::VonMisesMixture(std::vector<double> weights,
                                 std::vector<UnitVector> means,
                                 std::vector<double> kappas)
  : weights_(std::move(weights))
  , means_(std::move(means))
  , kappas_(std::move(kappas))
{
  if (weights_.empty())
    throw DomainError("VonMisesMixture needs at least one component");
  if (weights_.size() != means_.size() || weights_.size() != kappas_.size())
    throw DomainError("VonMisesMixture: parameter lengths differ");
  q_ = means_.front().dim();
  double total = 0.0;
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    require_finite(weights_[j], "mixture weight");
    require_finite(kappas_[j], "concentration");
    if (weights_[j] < 0.0)
      throw DomainError("mixture weights must be nonnegative");
    if (kappas_[j] < 0.0)
      throw DomainError("concentrations must be nonnegative");
    if (means_[j].dim() != q_)
      throw DomainError("mixture means have different dimensions");
    total += weights_[j];
  }
  if (!(total > 0.0))
    throw DomainError("mixture weights sum to zero");
  if (std::abs(total - 1.0) > 1e-12) {
    renormalized_ = true;
    for (double& w : weights_)
      w /= total;
  }
  log_c_.reserve(kappas_.size());
  for (double k : kappas_)
    log_c_.push_back(log_cq(q_, k));
}

VonMisesMixture VonMisesMixture::single(UnitVector mean, double kappa)
{
  return VonMisesMixture({1.0}, {std::move(mean)}, {kappa});
}

VonMisesMixture VonMisesMixture::uniform(int q)
{
  return single(basis_vector(q, q), 0.0);
}

double VonMisesMixture::log_density(std::span<const double> x) const
{
  if (x.size() != static_cast<std::size_t>(q_ + 1))
    throw DomainError("evaluation point has the wrong dimension");
  if (size() == 1)
    return log_c_[0] + kappas_[0] * dot(x, means_[0].coords());
  double terms[64];
  std::vector<double> heap;
  double* t = terms;
  if (size() > 64) {
    heap.resize(size());
    t = heap.data();
  }
  for (std::size_t j = 0; j < size(); ++j)
    t[j] = std::log(weights_[j]) + log_c_[j] +
           kappas_[j] * dot(x, means_[j].coords());
  return log_sum_exp({t, size()});
}

double VonMisesMixture::density(std::span<const double> x) const
{
  return std::exp(log_density(x));
}

// ---------------------------------------------------------------------------
// Radial integrals and quantile tables

double log_radial_mass(int q, const std::function<double(double)>& log_g)
{
  if (q < 1)
    throw DomainError("log_radial_mass: q must be >= 1");
  double shift = radial_shift(log_g);
  auto f = [&](double theta) {
    double v = std::exp(log_g(std::cos(theta)) - shift);
    if (q > 1)
      v *= std::pow(std::sin(theta), q - 1);
    return v;
  };
  double err = 0.0;
  double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
    f, 0.0, kPi, 20, 1e-14, &err);
  if (!(value > 0.0) || !std::isfinite(value))
    throw EvaluationError("radial density is not integrable");
  return log_sphere_area(q - 1) + shift + std::log(value);
}

RadialQuantileTable::RadialQuantileTable(int q,
                                         const LogRadial& log_g,
                                         std::size_t points)
  : q_(q)
{
  if (q < 1)
    throw DomainError("RadialQuantileTable: q must be >= 1");
  if (points < 3)
    throw DomainError("RadialQuantileTable: need at least 3 points");
  const double shift = radial_shift(log_g);
  auto dens = [&](double theta) {
    double v = std::exp(log_g(std::cos(theta)) - shift);
    if (q > 1)
      v *= std::pow(std::sin(theta), q - 1);
    return v;
  };

  // Fine cumulative integral in theta (Simpson per panel).
  const std::size_t panels = 16384;
  const double step = kPi / panels;
  std::vector<double> grid(panels + 1), cum(panels + 1), f(panels + 1);
  for (std::size_t k = 0; k <= panels; ++k) {
    grid[k] = step * k;
    f[k] = dens(grid[k]);
  }
  cum[0] = 0.0;
  for (std::size_t k = 0; k < panels; ++k) {
    double mid = dens(grid[k] + 0.5 * step);
    cum[k + 1] = cum[k] + step / 6.0 * (f[k] + 4.0 * mid + f[k + 1]);
  }
  const double total = cum[panels];
  if (!(total > 0.0) || !std::isfinite(total))
    throw EvaluationError("radial density is not integrable");

  // Nodes equispaced in G = (F/total + theta/pi)/2 so both the mass and
  // the angular range are resolved.
  std::vector<double> g(panels + 1);
  for (std::size_t k = 0; k <= panels; ++k)
    g[k] = 0.5 * (cum[k] / total + grid[k] / kPi);

  theta_.resize(points);
  u_.resize(points);
  std::size_t j = 0;
  for (std::size_t i = 0; i < points; ++i) {
    double target = static_cast<double>(i) / (points - 1);
    if (i == 0) {
      theta_[i] = 0.0;
      u_[i] = 0.0;
      continue;
    }
    if (i == points - 1) {
      theta_[i] = kPi;
      u_[i] = 1.0;
      continue;
    }
    while (j + 1 < panels && g[j + 1] < target)
      ++j;
    double frac = (target - g[j]) / (g[j + 1] - g[j]);
    double theta = grid[j] + std::clamp(frac, 0.0, 1.0) * step;
    double h = theta - grid[j];
    double partial = h > 0.0 ? h / 6.0 *
                                 (f[j] + 4.0 * dens(grid[j] + 0.5 * h) + dens(theta))
                             : 0.0;
    theta_[i] = theta;
    u_[i] = std::clamp((cum[j] + partial) / total, 0.0, 1.0);
  }
  for (std::size_t i = 1; i < points; ++i)
    u_[i] = std::max(u_[i], u_[i - 1]);

  p_.resize(points);
  t_.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    p_[points - 1 - i] = 1.0 - u_[i];
    t_[points - 1 - i] = std::cos(theta_[i]);
  }

  // Drop flat segments (zero radial mass) before building the interpolant.
  std::vector<double> ux, tx;
  ux.reserve(points);
  tx.reserve(points);
  for (std::size_t i = 0; i < points; ++i) {
    if (!ux.empty() && u_[i] <= ux.back()) {
      if (i == points - 1)
        tx.back() = theta_[i];
      continue;
    }
    ux.push_back(u_[i]);
    tx.push_back(theta_[i]);
  }
  u_ = std::move(ux);
  theta_ = std::move(tx);
  slope_ = pchip_slopes(u_, theta_);
}

double RadialQuantileTable::quantile(double p) const
{
  if (u_.empty())
    throw DomainError("empty quantile table");
  double u = std::clamp(1.0 - p, 0.0, 1.0);
  if (u_.size() == 1)
    return std::cos(theta_[0]);
  auto it = std::upper_bound(u_.begin(), u_.end(), u);
  std::size_t i = it == u_.begin() ? 0 : static_cast<std::size_t>(it - u_.begin()) - 1;
  if (i >= u_.size() - 1)
    i = u_.size() - 2;
  double h = u_[i + 1] - u_[i];
  double s = std::clamp((u - u_[i]) / h, 0.0, 1.0);
  double s2 = s * s;
  double s3 = s2 * s;
  double theta = (2 * s3 - 3 * s2 + 1) * theta_[i] + (s3 - 2 * s2 + s) * h * slope_[i] +
                 (-2 * s3 + 3 * s2) * theta_[i + 1] + (s3 - s2) * h * slope_[i + 1];
  theta = std::clamp(theta, theta_[i], theta_[i + 1]);
  return std::cos(theta);
}

// ---------------------------------------------------------------------------
// Projected normal integral

double projected_normal_integral_quadrature(int p, double alpha)
{
  if (p < 1)
    throw DomainError("projected_normal_integral: p must be >= 1");
  double upper = std::max(alpha, 0.0) + 40.0;
  auto f = [&](double t) {
    return std::pow(t, p - 1) * std::exp(-0.5 * (t - alpha) * (t - alpha));
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
    f, 0.0, upper, 25, 1e-14);
}

double projected_normal_integral(int p, double alpha)
{
  if (p < 1)
    throw DomainError("projected_normal_integral: p must be >= 1");
  if (alpha < -3.0)
    return projected_normal_integral_quadrature(p, alpha);
  double i1 = std::sqrt(2.0 * kPi) * normal_cdf(alpha);
  if (p == 1)
    return i1;
  double i2 = std::exp(-0.5 * alpha * alpha) + alpha * i1;
  double prev = i1;
  double cur = i2;
  for (int k = 3; k <= p; ++k) {
    double next = (k - 2) * prev + alpha * cur;
    prev = cur;
    cur = next;
  }
  return cur;
}

// ---------------------------------------------------------------------------
// DensityModel

namespace {

struct UniformData
{};

struct RotationalData
{
  UnitVector mu;
  TangentBasis basis;
  std::function<double(double)> log_g;
  RadialQuantileTable table;
};

struct VmData
{
  VonMisesMixture mixture;
  std::vector<TangentBasis> bases;
  std::vector<RadialQuantileTable> tables;
  std::vector<double> cumulative;
};

struct PnData
{
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma_inv;
  Eigen::MatrixXd chol;
  Eigen::VectorXd w;
  double q3 = 0.0;
  double log_const = 0.0;
};

struct MixtureData
{
  std::vector<double> log_weights;
  std::vector<double> cumulative;
  std::vector<DensityModel> parts;
};

std::vector<double> cumulative_weights(const std::vector<double>& w)
{
  std::vector<double> c(w.size());
  std::partial_sum(w.begin(), w.end(), c.begin());
  for (double& x : c)
    x /= c.back();
  c.back() = 1.0;
  return c;
}

std::size_t pick(const std::vector<double>& cumulative, Rng& rng)
{
  double u = uniform01(rng);
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end())
    return cumulative.size() - 1;
  return static_cast<std::size_t>(it - cumulative.begin());
}

void sample_rotational(const UnitVector& mu,
                       const TangentBasis& basis,
                       const RadialQuantileTable& table,
                       Rng& rng,
                       std::span<double> out)
{
  const int q = mu.dim();
  double t = table.quantile(uniform01(rng));
  double xi[64];
  std::vector<double> heap;
  double* xp = xi;
  if (q > 64) {
    heap.resize(q);
    xp = heap.data();
  }
  uniform_sphere_draw(rng, {xp, static_cast<std::size_t>(q)});
  tangent_normal(t, {xp, static_cast<std::size_t>(q)}, mu, basis, out);
  double r = std::sqrt(dot(out, out));
  for (double& v : out)
    v /= r;
}

} // namespace

struct DensityModel::Impl
{
  DensityKind kind;
  int q;
  double log_norm = 0.0;
  std::variant<UniformData, RotationalData, VmData, PnData, MixtureData> data;
};

DensityModel::DensityModel(std::shared_ptr<const Impl> impl)
  : impl_(std::move(impl))
{}

std::string to_string(DensityKind kind)
{
  switch (kind) {
    case DensityKind::uniform:
      return "uniform";
    case DensityKind::vm_mixture:
      return "vm-mixture";
    case DensityKind::watson:
      return "watson";
    case DensityKind::small_circle:
      return "small-circle";
    case DensityKind::directional_cauchy:
      return "directional-cauchy";
    case DensityKind::skew_normal_directional:
      return "skew-normal-directional";
    case DensityKind::projected_normal:
      return "projected-normal";
    case DensityKind::mixture:
      return "mixture";
  }
  return "unknown";
}

DensityModel DensityModel::uniform(int q)
{
  if (q < 1)
    throw DomainError("uniform: q must be >= 1");
  auto impl = std::make_shared<Impl>();
  impl->kind = DensityKind::uniform;
  impl->q = q;
  impl->log_norm = -log_sphere_area(q);
  impl->data = UniformData{};
  return DensityModel(std::move(impl));
}

DensityModel DensityModel::von_mises(UnitVector mu, double kappa)
{
  return vm_mixture(VonMisesMixture::single(std::move(mu), kappa));
}

DensityModel DensityModel::vm_mixture(VonMisesMixture mixture)
{
  auto impl = std::make_shared<Impl>();
  impl->kind = DensityKind::vm_mixture;
  impl->q = mixture.dim();
  VmData data;
  for (std::size_t j = 0; j < mixture.size(); ++j) {
    double k = mixture.kappas()[j];
    data.bases.push_back(complete_basis(mixture.means()[j]));
    data.tables.emplace_back(mixture.dim(), [k](double t) { return k * t; });
  }
  data.cumulative = cumulative_weights(mixture.weights());
  data.mixture = std::move(mixture);
  impl->data = std::move(data);
  return DensityModel(std::move(impl));
}

namespace {

DensityModel::Impl make_rotational(DensityKind kind,
                                   UnitVector mu,
                                   std::function<double(double)> log_g,
                                   std::optional<double> log_norm = std::nullopt)
{
  DensityModel::Impl impl;
  impl.kind = kind;
  impl.q = mu.dim();
  impl.log_norm = log_norm ? *log_norm : -log_radial_mass(impl.q, log_g);
  RotationalData data;
  data.basis = complete_basis(mu);
  data.table = RadialQuantileTable(impl.q, log_g);
  data.mu = std::move(mu);
  data.log_g = std::move(log_g);
  impl.data = std::move(data);
  return impl;
}

} // namespace

DensityModel DensityModel::watson(UnitVector mu, double kappa)
{
  require_finite(kappa, "Watson concentration");
  return DensityModel(std::make_shared<Impl>(make_rotational(
    DensityKind::watson, std::move(mu), [kappa](double t) { return kappa * t * t; })));
}

DensityModel DensityModel::small_circle(UnitVector mu, double tau, double nu)
{
  require_finite(tau, "small circle tau");
  require_finite(nu, "small circle nu");
  if (!(nu > -1.0 && nu < 1.0))
    throw DomainError("small circle nu must lie in (-1, 1)");
  return DensityModel(std::make_shared<Impl>(make_rotational(
    DensityKind::small_circle, std::move(mu), [tau, nu](double t) {
      return -tau * (t - nu) * (t - nu);
    })));
}

DensityModel DensityModel::directional_cauchy(UnitVector mu, double kappa)
{
  require_finite(kappa, "directional Cauchy concentration");
  if (kappa < 0.0)
    throw DomainError("directional Cauchy concentration must be >= 0");
  const int q = mu.dim();
  auto log_g = [kappa](double t) { return -std::log1p(2.0 * kappa * (1.0 - t)); };
  std::optional<double> log_norm;
  if (kappa == 0.0)
    log_norm = -log_sphere_area(q);
  else if (q == 1)
    log_norm = -(std::log(2.0 * kPi) - 0.5 * std::log1p(4.0 * kappa));
  else if (q == 2)
    log_norm = -(std::log(kPi * std::log1p(4.0 * kappa) / kappa));
  return DensityModel(std::make_shared<Impl>(
    make_rotational(DensityKind::directional_cauchy, std::move(mu), log_g, log_norm)));
}

DensityModel DensityModel::skew_normal_directional(UnitVector mu,
                                                   double m,
                                                   double sigma,
                                                   double lambda)
{
  require_finite(m, "skew normal location");
  require_finite(sigma, "skew normal scale");
  require_finite(lambda, "skew normal shape");
  if (!(sigma > 0.0))
    throw DomainError("skew normal scale must be > 0");
  auto log_g = [m, sigma, lambda](double t) {
    double z = (t - m) / sigma;
    return std::numbers::ln2 - std::log(sigma) - 0.5 * z * z -
           0.5 * std::log(2.0 * kPi) + log_normal_cdf(lambda * z);
  };
  return DensityModel(std::make_shared<Impl>(
    make_rotational(DensityKind::skew_normal_directional, std::move(mu), log_g)));
}

DensityModel DensityModel::projected_normal(std::vector<double> mu,
                                            const Eigen::MatrixXd& sigma)
{
  const int p = static_cast<int>(mu.size());
  if (p < 2)
    throw DomainError("projected normal needs dimension >= 2");
  if (sigma.rows() != p || sigma.cols() != p)
    throw DomainError("projected normal covariance has the wrong shape");
  for (double v : mu)
    require_finite(v, "projected normal mean");
  if (!sigma.allFinite())
    throw DomainError("projected normal covariance must be finite");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw DomainError("projected normal covariance is not positive definite");
  PnData d;
  d.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), p);
  d.chol = llt.matrixL();
  d.sigma_inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
  d.w = d.sigma_inv * d.mu;
  d.q3 = d.mu.dot(d.w);
  double log_det = 2.0 * d.chol.diagonal().array().log().sum();
  d.log_const = -0.5 * p * std::log(2.0 * kPi) - 0.5 * log_det;
  auto impl = std::make_shared<Impl>();
  impl->kind = DensityKind::projected_normal;
  impl->q = p - 1;
  impl->log_norm = d.log_const;
  impl->data = std::move(d);
  return DensityModel(std::move(impl));
}

DensityModel DensityModel::mixture(std::vector<double> weights,
                                   std::vector<DensityModel> parts)
{
  if (parts.empty() || parts.size() != weights.size())
    throw DomainError("mixture: weights and parts must be nonempty and equal in length");
  const int q = parts.front().dim();
  double total = 0.0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    require_finite(weights[k], "mixture weight");
    if (weights[k] < 0.0)
      throw DomainError("mixture weights must be nonnegative");
    if (parts[k].dim() != q)
      throw DomainError("mixture parts have different dimensions");
    total += weights[k];
  }
  if (!(total > 0.0))
    throw DomainError("mixture weights sum to zero");
  MixtureData d;
  for (double& w : weights) {
    w /= total;
    d.log_weights.push_back(std::log(w));
  }
  d.cumulative = cumulative_weights(weights);
  d.parts = std::move(parts);
  auto impl = std::make_shared<Impl>();
  impl->kind = DensityKind::mixture;
  impl->q = q;
  impl->data = std::move(d);
  return DensityModel(std::move(impl));
}

DensityKind DensityModel::kind() const
{
  return impl_->kind;
}

int DensityModel::dim() const
{
  return impl_->q;
}

double DensityModel::log_normalizer() const
{
  return impl_->log_norm;
}

double DensityModel::log_density(std::span<const double> x) const
{
  if (x.size() != static_cast<std::size_t>(impl_->q + 1))
    throw DomainError("evaluation point has the wrong dimension");
  return std::visit(
    [&](const auto& d) -> double {
      using T = std::decay_t<decltype(d)>;
      if constexpr (std::is_same_v<T, UniformData>) {
        return impl_->log_norm;
      } else if constexpr (std::is_same_v<T, RotationalData>) {
        return impl_->log_norm + d.log_g(dot(x, d.mu.coords()));
      } else if constexpr (std::is_same_v<T, VmData>) {
        return d.mixture.log_density(x);
      } else if constexpr (std::is_same_v<T, PnData>) {
        Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
        double q1 = xv.dot(d.sigma_inv * xv);
        double q2 = d.w.dot(xv);
        int p = static_cast<int>(x.size());
        double alpha = q2 / std::sqrt(q1);
        return d.log_const - 0.5 * p * std::log(q1) +
               std::log(projected_normal_integral(p, alpha)) -
               0.5 * (d.q3 - q2 * q2 / q1);
      } else {
        std::vector<double> terms(d.parts.size());
        for (std::size_t k = 0; k < d.parts.size(); ++k)
          terms[k] = d.log_weights[k] + d.parts[k].log_density(x);
        return log_sum_exp(terms);
      }
    },
    impl_->data);
}

double DensityModel::density(std::span<const double> x) const
{
  return std::exp(log_density(x));
}

void DensityModel::sample_one(Rng& rng, std::span<double> out) const
{
  std::visit(
    [&](const auto& d) {
      using T = std::decay_t<decltype(d)>;
      if constexpr (std::is_same_v<T, UniformData>) {
        uniform_sphere_draw(rng, out);
      } else if constexpr (std::is_same_v<T, RotationalData>) {
        sample_rotational(d.mu, d.basis, d.table, rng, out);
      } else if constexpr (std::is_same_v<T, VmData>) {
        std::size_t j = d.mixture.size() == 1 ? 0 : pick(d.cumulative, rng);
        sample_rotational(d.mixture.means()[j], d.bases[j], d.tables[j], rng, out);
      } else if constexpr (std::is_same_v<T, PnData>) {
        const auto p = d.mu.size();
        Eigen::VectorXd z(p);
        for (Eigen::Index i = 0; i < p; ++i)
          z(i) = standard_normal(rng);
        Eigen::VectorXd v = d.mu + d.chol * z;
        double r = v.norm();
        for (Eigen::Index i = 0; i < p; ++i)
          out[i] = v(i) / r;
      } else {
        d.parts[pick(d.cumulative, rng)].sample_one(rng, out);
      }
    },
    impl_->data);
}

PointSet DensityModel::sample(std::size_t n, Rng& rng) const
{
  const std::size_t p = static_cast<std::size_t>(impl_->q + 1);
  std::vector<double> values(n * p);
  for (std::size_t i = 0; i < n; ++i)
    sample_one(rng, {values.data() + i * p, p});
  return PointSet(impl_->q, std::move(values));
}

bool DensityModel::rotationally_symmetric() const
{
  if (std::holds_alternative<RotationalData>(impl_->data))
    return true;
  if (const auto* d = std::get_if<VmData>(&impl_->data))
    return d->mixture.size() == 1;
  return false;
}

const UnitVector& DensityModel::axis() const
{
  if (const auto* d = std::get_if<RotationalData>(&impl_->data))
    return d->mu;
  if (const auto* d = std::get_if<VmData>(&impl_->data); d && d->mixture.size() == 1)
    return d->mixture.means()[0];
  throw UnsupportedError("model is not rotationally symmetric");
}

double DensityModel::radial_log_density(double t) const
{
  if (const auto* d = std::get_if<RotationalData>(&impl_->data))
    return impl_->log_norm + d->log_g(t);
  if (const auto* d = std::get_if<VmData>(&impl_->data); d && d->mixture.size() == 1)
    return d->mixture.log_constants()[0] + d->mixture.kappas()[0] * t;
  if (std::holds_alternative<UniformData>(impl_->data))
    return impl_->log_norm;
  throw UnsupportedError("model is not rotationally symmetric");
}

const RadialQuantileTable& DensityModel::radial_quantile_table() const
{
  if (const auto* d = std::get_if<RotationalData>(&impl_->data))
    return d->table;
  if (const auto* d = std::get_if<VmData>(&impl_->data); d && d->mixture.size() == 1)
    return d->tables[0];
  throw UnsupportedError("model is not rotationally symmetric");
}

const VonMisesMixture* DensityModel::as_vm_mixture() const
{
  if (const auto* d = std::get_if<VmData>(&impl_->data))
    return &d->mixture;
  return nullptr;
}

RadialQuantileTable radial_quantile_table(const DensityModel& model)
{
  if (model.kind() == DensityKind::uniform)
    return RadialQuantileTable(model.dim(), [](double) { return 0.0; });
  return model.radial_quantile_table();
}

} // namespace dirkde
