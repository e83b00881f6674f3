#include "dirkde/errors.hpp"
#include "dirkde/kde.hpp"
#include "dirkde/models.hpp"
#include "dirkde/quadrature.hpp"
#include "dirkde/special_functions.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace dirkde;

namespace {

constexpr double pi = std::numbers::pi;

PointSet sample(int id, int q, std::size_t n, std::uint64_t seed)
{
  Rng rng(seed);
  return scenario(id, q).sample(n, rng);
}

} // namespace

TEST(NormalizingConstant, IdentityWithVonMisesConstant)
{
  EXPECT_NEAR(log_normalizing_constant(1, 1.0), log_cq(1, 1.0) + 1.0, 1e-15);
  EXPECT_THROW(log_normalizing_constant(2, 0.0), DomainError);
  EXPECT_THROW(log_normalizing_constant(2, -1.0), DomainError);
  EXPECT_TRUE(std::isfinite(log_normalizing_constant(3, 1e-3)));
}

TEST(NormalizingConstant, KernelIntegratesToOne)
{
  for (int q : {1, 2, 3, 5})
    for (double h : {0.01, 0.1, 0.5, 1.0, 3.0, 100.0}) {
      double lc = log_normalizing_constant(q, h);
      double mass = sphere_area(q - 1) * oracle::radial_integral(q, [&](double t) {
                      return std::exp(lc - (1.0 - t) / (h * h));
                    });
      EXPECT_NEAR(mass, 1.0, 1e-6) << "q=" << q << " h=" << h;
    }
  double c = std::exp(log_normalizing_constant(2, 1e4));
  EXPECT_NEAR(c, 1.0 / (4 * pi), 1e-9);
}

TEST(KdeEval, SinglePointAtItself)
{
  for (int q : {1, 2, 4}) {
    PointSet x(q);
    x.push_back(basis_vector(q, 0));
    for (double h : {0.05, 0.4, 2.0}) {
      KdeModel kde(x, h);
      EXPECT_NEAR(kde.log_eval(x.row(0)), log_normalizing_constant(q, h),
                  1e-12 * std::abs(log_normalizing_constant(q, h)) + 1e-14);
    }
  }
}

TEST(KdeEval, FlatKernelLimit)
{
  auto x = sample(8, 2, 40, 1);
  KdeModel kde(x, 1e3);
  UnitVector y = normalize({0.3, -0.1, 0.2});
  EXPECT_NEAR(kde.eval(y.coords()), 1.0 / sphere_area(2), 1e-6);
}

TEST(KdeEval, IntegratesToOne)
{
  auto x1 = sample(9, 1, 200, 3);
  auto circle = build_rule(1, RuleKind::simpson_circle);
  KdeModel k1(x1, 0.3);
  EXPECT_NEAR(integrate_values(circle, k1.eval_many(circle.nodes)), 1.0, 1e-8);

  auto x2 = sample(11, 2, 200, 4);
  auto sphere = build_rule(2, RuleKind::lebedev);
  for (double h : {0.25, 0.5, 2.0}) {
    KdeModel k2(x2, h);
    EXPECT_NEAR(integrate_values(sphere, k2.eval_many(sphere.nodes)), 1.0, 1e-6) << h;
  }
}

TEST(KdeEval, BatchMatchesPointwise)
{
  auto x = sample(14, 3, 300, 5);
  KdeModel kde(x, 0.2);
  Rng rng(6);
  auto nodes = uniform_sphere_sample(3, 700, rng);
  auto batch = kde.eval_many(nodes);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    EXPECT_NEAR(batch[i], kde.eval(nodes.row(i)), 1e-12 * batch[i]);
}

TEST(KdeEval, RotationEquivariance)
{
  Rng rng(7);
  for (int q : {1, 2, 3}) {
    auto x = sample(10, q, 100, 8 + q);
    auto r = oracle::random_rotation(q + 1, rng);
    KdeModel a(x, 0.3), b(oracle::rotate(x, r), 0.3);
    auto y = uniform_sphere_sample(q, 20, rng);
    for (std::size_t i = 0; i < y.size(); ++i) {
      double la = a.log_eval(y.row(i));
      EXPECT_NEAR(la, b.log_eval(oracle::rotate(y.row(i), r)), 1e-12 * std::max(1.0, std::abs(la)));
    }
  }
}

TEST(KdeEval, SupDistanceToUniformShrinksWithBandwidth)
{
  auto rule = build_rule(1, RuleKind::simpson_circle, 720);
  for (int id : {2, 7, 9, 13}) {
    auto x = sample(id, 1, 150, 20 + id);
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 30; ++k) {
      double h = 0.02 * std::pow(10.0, k / 10.0);
      auto v = KdeModel(x, h).eval_many(rule.nodes);
      double sup = 0.0;
      for (double f : v)
        sup = std::max(sup, std::abs(f - 1.0 / (2 * pi)));
      EXPECT_LE(sup, prev * (1 + 1e-12)) << "M" << id << " h=" << h;
      prev = sup;
    }
  }
}

TEST(KdeLoo, TwoPoints)
{
  PointSet x(1);
  x.push_back(rho1(0.2));
  x.push_back(rho1(1.1));
  KdeModel kde(x, 0.4);
  double t = std::cos(0.9);
  EXPECT_NEAR(kde.eval_loo(0), std::exp(log_normalizing_constant(1, 0.4) - (1 - t) / 0.16), 1e-14);
  EXPECT_NEAR(kde.eval_loo(1), kde.eval_loo(0), 1e-16);
}

TEST(KdeLoo, AntipodalPairDecays)
{
  PointSet x(1);
  x.push_back(rho1(0.0));
  x.push_back(rho1(pi));
  KdeModel kde(x, 0.1);
  EXPECT_LT(kde.eval_loo(0), 1e-30);
  EXPECT_GT(kde.eval_loo(0), 0.0);
  EXPECT_TRUE(std::isfinite(kde.log_eval_loo(0)));
}

TEST(KdeLoo, MatchesReducedEstimator)
{
  auto x = sample(8, 2, 50, 30);
  KdeModel kde(x, 0.35);
  for (std::size_t i = 0; i < x.size(); ++i) {
    PointSet rest(2);
    for (std::size_t j = 0; j < x.size(); ++j)
      if (j != i)
        rest.push_back(x.row(j));
    EXPECT_NEAR(kde.log_eval_loo(i), KdeModel(rest, 0.35).log_eval(x.row(i)), 1e-12);
  }
}

TEST(KdeLoo, Errors)
{
  PointSet x(2);
  x.push_back(basis_vector(2, 0));
  KdeModel kde(x, 0.3);
  EXPECT_THROW(kde.eval_loo(0), DomainError);
}

TEST(KdeModel, ClampsAndValidates)
{
  auto x = sample(2, 1, 10, 1);
  KdeModel small(x, 1e-5);
  EXPECT_TRUE(small.clamped());
  EXPECT_DOUBLE_EQ(small.bandwidth(), kMinBandwidth);
  EXPECT_DOUBLE_EQ(small.requested_bandwidth(), 1e-5);
  KdeModel ok(x, 0.5);
  EXPECT_FALSE(ok.clamped());
  EXPECT_DOUBLE_EQ(ok.concentration(), 4.0);
  EXPECT_THROW(KdeModel(x, 0.0), DomainError);
  EXPECT_THROW(KdeModel(x, NAN), DomainError);
  EXPECT_THROW(KdeModel(PointSet(1), 0.5), DomainError);
  EXPECT_THROW(ok.eval(basis_vector(2, 0).coords()), DomainError);
}
