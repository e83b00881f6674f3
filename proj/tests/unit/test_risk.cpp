#include "dirkde/errors.hpp"
#include "dirkde/kde.hpp"
#include "dirkde/risk.hpp"
#include "dirkde/special_functions.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace dirkde;

namespace {

constexpr double pi = std::numbers::pi;

VonMisesMixture random_mixture(int q, std::size_t m, Rng& rng)
{
  std::vector<double> w, k;
  std::vector<UnitVector> mu;
  std::vector<double> buf(q + 1);
  for (std::size_t j = 0; j < m; ++j) {
    w.push_back(0.2 + uniform01(rng));
    k.push_back(0.5 + 8.0 * uniform01(rng));
    uniform_sphere_draw(rng, buf);
    mu.push_back(normalize(buf));
  }
  return VonMisesMixture(w, mu, k);
}

// Unnormalized extension sum_j p_j C_j exp(kappa_j mu_j'x) on R^{q+1}.
double extension(const VonMisesMixture& m, const std::vector<double>& x)
{
  double s = 0;
  for (std::size_t j = 0; j < m.size(); ++j)
    s += m.weights()[j] * std::exp(m.log_constants()[j] + m.kappas()[j] * dot(x, m.means()[j].coords()));
  return s;
}

double psi_finite_difference(const VonMisesMixture& m, std::span<const double> x)
{
  const int p = m.dim() + 1;
  const double e = 1e-4;
  std::vector<double> base(x.begin(), x.end());
  std::vector<double> grad(p);
  std::vector<std::vector<double>> hess(p, std::vector<double>(p));
  double f0 = extension(m, base);
  for (int a = 0; a < p; ++a) {
    auto xp = base, xm = base;
    xp[a] += e;
    xm[a] -= e;
    grad[a] = (extension(m, xp) - extension(m, xm)) / (2 * e);
    hess[a][a] = (extension(m, xp) - 2 * f0 + extension(m, xm)) / (e * e);
    for (int b = a + 1; b < p; ++b) {
      auto pp = base, pm = base, mp = base, mm = base;
      pp[a] += e, pp[b] += e;
      pm[a] += e, pm[b] -= e;
      mp[a] -= e, mp[b] += e;
      mm[a] -= e, mm[b] -= e;
      hess[a][b] = hess[b][a] =
        (extension(m, pp) - extension(m, pm) - extension(m, mp) + extension(m, mm)) / (4 * e * e);
    }
  }
  double xg = 0, lap = 0, xhx = 0;
  for (int a = 0; a < p; ++a) {
    xg += x[a] * grad[a];
    lap += hess[a][a];
    for (int b = 0; b < p; ++b)
      xhx += x[a] * hess[a][b] * x[b];
  }
  return -xg + (lap - xhx) / m.dim();
}

// Integral of psi^2 for a single vM via the one-dimensional radial reduction.
double curvature_oracle(int q, double kappa)
{
  double lc = log_cq(q, kappa);
  auto g = [&](double t) {
    double v = kappa * std::exp(lc + kappa * t) * (-t + kappa / q * (1 - t * t));
    return v * v;
  };
  return sphere_area(q - 1) * oracle::radial_integral(q, g);
}

double ise(const KdeModel& kde, const DensityModel& f, const QuadratureRule& rule)
{
  auto v = kde.eval_many(rule.nodes);
  for (std::size_t i = 0; i < v.size(); ++i) {
    double d = v[i] - f.density(rule.nodes.row(i));
    v[i] = d * d;
  }
  return integrate_values(rule, v);
}

} // namespace

TEST(Psi, UniformAndPole)
{
  auto u = VonMisesMixture::uniform(2);
  Rng rng(1);
  std::vector<double> x(3);
  uniform_sphere_draw(rng, x);
  EXPECT_EQ(psi(u, x), 0.0);
  for (int q : {1, 2, 5}) {
    auto mu = basis_vector(q, q);
    auto m = VonMisesMixture::single(mu, 3.0);
    EXPECT_NEAR(psi(m, mu.coords()), -3.0 * std::exp(log_cq(q, 3.0) + 3.0), 1e-12);
  }
}

TEST(Psi, MatchesFiniteDifferences)
{
  Rng rng(2);
  for (int q : {1, 2, 3}) {
    auto m = random_mixture(q, 3, rng);
    std::vector<double> x(q + 1);
    for (int rep = 0; rep < 5; ++rep) {
      uniform_sphere_draw(rng, x);
      double exact = psi(m, x);
      double fd = psi_finite_difference(m, x);
      EXPECT_NEAR(exact, fd, 1e-6 * std::max(std::abs(exact), 1e-3)) << "q=" << q;
    }
  }
}

TEST(CurvatureVm, ZeroAndQuadrature)
{
  EXPECT_EQ(curvature_vm(3, 0.0), 0.0);
  for (int q : {1, 2, 3})
    for (double k : {0.5, 2.0, 10.0}) {
      double ref = curvature_oracle(q, k);
      EXPECT_NEAR(curvature_vm(q, k) / ref, 1.0, 1e-8) << "q=" << q << " kappa=" << k;
    }
  auto rule = build_rule(1, RuleKind::simpson_circle);
  auto m = VonMisesMixture::single(normalize({0, 1}), 2.0);
  double quad = integrate(rule, [&](auto x) { return psi(m, x) * psi(m, x); });
  EXPECT_NEAR(curvature_vm(1, 2.0) / quad, 1.0, 1e-8);
}

TEST(CurvatureVm, SphereSpecialization)
{
  // q = 2 with half-integer Bessel functions written through sinh and cosh.
  for (long double k : {0.3L, 1.0L, 5.0L, 40.0L}) {
    long double x = 2 * k;
    auto pref = [](long double z) { return std::sqrt(2 / (std::numbers::pi_v<long double> * z)); };
    long double i_half = pref(k) * std::sinh(k);
    long double i_3 = pref(x) * (std::cosh(x) - std::sinh(x) / x);
    long double i_5 = pref(x) * ((1 + 3 / (x * x)) * std::sinh(x) - 3 * std::cosh(x) / x);
    long double r = std::pow(k, 1.5L) / (16 * std::pow(std::numbers::pi_v<long double>, 1.5L) *
                                         i_half * i_half * 2) *
                    (4 * i_3 + 4 * k * i_5);
    EXPECT_NEAR(curvature_vm(2, double(k)) / double(r), 1.0, 1e-12) << double(k);
  }
}

TEST(CurvatureMixture, SingleComponentAndUniform)
{
  auto rule = build_rule(1, RuleKind::simpson_circle);
  for (double k : {0.5, 2.0, 10.0}) {
    auto m = VonMisesMixture::single(rho1(0.7), k);
    auto rep = curvature_mixture(m, rule);
    EXPECT_EQ(rep.method, CurvatureMethod::quadrature);
    double closed = curvature_vm(1, k);
    EXPECT_NEAR(rep.value / closed, 1.0, 1e-8);
    EXPECT_LE(std::abs(rep.value - closed), rep.error + 1e-12 * closed);
  }
  auto sphere = build_rule(2, RuleKind::lebedev);
  auto m2 = VonMisesMixture::single(normalize({0.2, 0.3, -0.9}), 5.0);
  auto rep = curvature_mixture(m2, sphere);
  EXPECT_NEAR(rep.value / curvature_vm(2, 5.0), 1.0, 1e-8);
  EXPECT_LE(std::abs(rep.value - curvature_vm(2, 5.0)), rep.error + 1e-9 * rep.value);

  EXPECT_NEAR(curvature_mixture(VonMisesMixture::uniform(1), rule).value, 0.0, 1e-10);
  auto closed = curvature(m2, sphere);
  EXPECT_EQ(closed.method, CurvatureMethod::closed_form);
  EXPECT_EQ(closed.value, curvature_vm(2, 5.0));
}

TEST(CurvatureMixture, AntipodalAgainstMonteCarlo)
{
  VonMisesMixture m({0.5, 0.5}, {rho1(0.0), rho1(pi)}, {2.0, 2.0});
  double quad = curvature_mixture(m, build_rule(1, RuleKind::simpson_circle)).value;
  EXPECT_GT(quad, 0.0);
  auto mc = curvature_mixture(m, build_rule(1, RuleKind::monte_carlo, 200000, 5));
  EXPECT_EQ(mc.method, CurvatureMethod::monte_carlo);
  EXPECT_NEAR(mc.value, quad, 3 * mc.error);
}

TEST(CurvatureMixture, DimensionMismatch)
{
  EXPECT_THROW(curvature_mixture(VonMisesMixture::uniform(2), build_rule(1, RuleKind::simpson_circle)),
               DomainError);
}

TEST(HAmise, FormsAgreeAndScale)
{
  Rng rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    int q = 1 + rep % 6;
    double n = 10 + 1000 * uniform01(rng);
    double r = std::exp(8 * uniform01(rng) - 4);
    EXPECT_NEAR(h_amise(q, n, r) / h_amise_vm(q, n, r), 1.0, 1e-12);
    EXPECT_NEAR(h_amise(q, n, 2 * r) / h_amise(q, n, r), std::pow(2.0, -1.0 / (4 + q)), 1e-12);
  }
  EXPECT_NEAR(h_amise(1, 2000, 0.3) / h_amise(1, 500, 0.3), std::pow(4.0, -0.2), 1e-12);
  EXPECT_THROW(h_amise(1, 100, 0.0), DomainError);
  EXPECT_THROW(h_amise_vm(1, 100, -1.0), DomainError);
}

TEST(HAmise, StrictlyDecreasing)
{
  for (int q : {1, 2, 3}) {
    double prev = h_amise(q, 10, 0.01);
    for (double n : {20.0, 50.0, 100.0, 1000.0}) {
      double h = h_amise(q, n, 0.01);
      EXPECT_LT(h, prev);
      prev = h;
    }
    prev = h_amise(q, 100, 1e-3);
    for (double r : {1e-2, 0.1, 1.0, 10.0}) {
      double h = h_amise(q, 100, r);
      EXPECT_LT(h, prev);
      prev = h;
    }
  }
}

TEST(ExactMise, UniformLimit)
{
  auto rule = build_rule(1, RuleKind::simpson_circle);
  EXPECT_LT(exact_mise(VonMisesMixture::uniform(1), 500, 1e3, rule), 1e-6);
}

TEST(ExactMise, TableValueForM2)
{
  auto rule = build_rule(1, RuleKind::simpson_circle);
  ExactMise f(*scenario(2, 1).as_vm_mixture(), 500, rule);
  auto best = minimize_risk_widening(std::cref(f));
  EXPECT_FALSE(best.on_boundary());
  EXPECT_NEAR(best.value, 0.2298e-2, 0.05 * 0.2298e-2);
  for (std::size_t i = 0; i < best.grid_h.size(); ++i) {
    EXPECT_GE(best.grid_values[i], 0.0);
    EXPECT_LE(best.value, best.grid_values[i]);
  }
}

TEST(ExactMise, MatrixFormAgrees)
{
  Rng rng(12);
  auto rule = build_rule(1, RuleKind::simpson_circle);
  for (int rep = 0; rep < 5; ++rep) {
    auto m = random_mixture(1, 2, rng);
    for (double h : {0.1, 0.3, 1.0}) {
      double a = exact_mise(m, 250, h, rule);
      double b = exact_mise_matrix(m, 250, h, rule);
      EXPECT_NEAR(a / b, 1.0, 1e-6);
    }
  }
}

TEST(ExactMise, MonteCarloIse)
{
  // Three mixtures, two dimensions, two bandwidths, 500 replicates each.
  const std::size_t n = 100;
  const int reps = 500;
  for (int q : {1, 2}) {
    const auto& rule = cached_protocol_rule(q);
    for (int id : {2, 8, 14}) {
      auto model = scenario(id, q);
      for (double h : {0.2, 0.5}) {
        Rng rng(derive_seed(77, {std::uint64_t(q), std::uint64_t(id), std::uint64_t(h * 10)}));
        double mean = 0, m2 = 0;
        for (int r = 0; r < reps; ++r) {
          double v = ise(KdeModel(model.sample(n, rng), h), model, rule);
          mean += v;
          m2 += v * v;
        }
        mean /= reps;
        double se = std::sqrt((m2 / reps - mean * mean) / (reps - 1));
        double exact = exact_mise(*model.as_vm_mixture(), n, h, rule);
        EXPECT_NEAR(mean, exact, 3 * se) << "q=" << q << " M" << id << " h=" << h;
      }
    }
  }
}

TEST(ExactMise, M8AtOptimum)
{
  auto rule = build_rule(1, RuleKind::simpson_circle);
  auto model = scenario(8, 1);
  ExactMise f(*model.as_vm_mixture(), 100, rule);
  auto best = minimize_risk_widening(std::cref(f));
  Rng rng(31);
  double mean = 0, m2 = 0;
  for (int r = 0; r < 500; ++r) {
    double v = ise(KdeModel(model.sample(100, rng), best.h), model, rule);
    mean += v;
    m2 += v * v;
  }
  mean /= 500;
  double se = std::sqrt((m2 / 500 - mean * mean) / 499);
  EXPECT_NEAR(mean, best.value, 3 * se);
}

TEST(CircularAmise, Limits)
{
  auto m = VonMisesMixture::single(normalize({0, 1}), 2.0);
  double r = circular_roughness(m);
  double h = 0.01;
  double big = circular_amise_oli(r, 1e12, h);
  double bias_only = circular_amise_oli(r, 1e300, h);
  EXPECT_NEAR(big, bias_only, 1e-9);
  EXPECT_EQ(circular_roughness(VonMisesMixture::uniform(1)), 0.0);
  double var_only = circular_amise_oli(VonMisesMixture::uniform(1), 500, h);
  double a = 1 / std::sqrt(h);
  EXPECT_NEAR(var_only,
              std::exp(log_bessel_i(0, 2 * a) - 2 * log_bessel_i(0, a)) / (1000 * pi), 1e-15);
  EXPECT_THROW(circular_roughness(VonMisesMixture::uniform(2)), UnsupportedError);
}

TEST(CircularAmise, RoughnessAgainstFiniteDifferences)
{
  auto m = VonMisesMixture::single(normalize({0, 1}), 2.0);
  auto f = [&](double th) { return m.density(rho1(th).coords()); };
  const double e = 1e-3;
  auto d2 = [&](double th) { return (f(th + e) - 2 * f(th) + f(th - e)) / (e * e); };
  double fd = oracle::gk([&](double th) { return d2(th) * d2(th); }, 0, 2 * pi);
  EXPECT_NEAR(circular_roughness(m) / fd, 1.0, 1e-6);
}

TEST(MinimizeRisk, QuadraticInLogH)
{
  auto f = [](double h) { double u = std::log(h / 0.37); return 2.0 + u * u; };
  auto r = minimize_risk(f, 1e-2, 10.0);
  EXPECT_NEAR(r.h / 0.37, 1.0, 1e-4);
  EXPECT_FALSE(r.on_boundary());
  EXPECT_NEAR(r.value, 2.0, 1e-8);
}

TEST(MinimizeRisk, BoundaryFlags)
{
  auto dec = [](double h) { return 1.0 / h; };
  auto r = minimize_risk(dec, 1e-2, 10.0);
  EXPECT_TRUE(r.at_upper);
  EXPECT_DOUBLE_EQ(r.h, 10.0);
  auto w = minimize_risk_widening(dec);
  EXPECT_TRUE(w.at_upper);
  EXPECT_DOUBLE_EQ(w.hi, 1000.0);
  EXPECT_DOUBLE_EQ(w.h, 1000.0);

  auto f = [](double h) { double u = std::log(h / 0.002); return u * u; };
  auto wl = minimize_risk_widening(f);
  EXPECT_FALSE(wl.on_boundary());
  EXPECT_NEAR(wl.h / 0.002, 1.0, 1e-4);
  EXPECT_DOUBLE_EQ(wl.lo, 1e-3);
}

TEST(MinimizeRisk, NonFiniteValues)
{
  auto partly = [](double h) { return h < 0.1 ? NAN : (h - 1) * (h - 1); };
  auto r = minimize_risk(partly, 1e-2, 10.0);
  EXPECT_NEAR(r.h, 1.0, 1e-4);
  EXPECT_THROW(minimize_risk([](double) { return NAN; }, 1e-2, 10.0), EvaluationError);
  EXPECT_THROW(minimize_risk([](double h) { return h; }, 1.0, 0.5), DomainError);
}

TEST(MiseCurve, ExactAndAsymptotic)
{
  auto rule = build_rule(1, RuleKind::simpson_circle);
  auto m = *scenario(2, 1).as_vm_mixture();
  auto c = exact_mise_curve(m, 500, rule);
  EXPECT_EQ(c.h.size(), 60u);
  EXPECT_EQ(c.source, CurveSource::exact);
  for (double v : c.mise)
    EXPECT_GE(v, c.min_value);
  auto a = amise_curve(m, 500, rule);
  EXPECT_EQ(a.source, CurveSource::asymptotic);
  EXPECT_NEAR(a.h_min / h_amise(1, 500, curvature_vm(1, 2.0)), 1.0, 0.05);
}
