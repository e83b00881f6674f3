#include "dirkde/errors.hpp"
#include "dirkde/kde.hpp"
#include "dirkde/selectors.hpp"
#include "dirkde/special_functions.hpp"

#include "oracles.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace dirkde;

namespace {

constexpr double pi = std::numbers::pi;

PointSet draw(int id, int q, std::size_t n, std::uint64_t seed)
{
  Rng rng(seed);
  return scenario(id, q).sample(n, rng);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double literal_rot_q1(double k, double n, double first_term)
{
  using boost::math::cyl_bessel_i;
  double i0 = cyl_bessel_i(0, k);
  return std::pow(4 * std::sqrt(pi) * i0 * i0 /
                    (k * (first_term * cyl_bessel_i(1, 2 * k) + 3 * k * cyl_bessel_i(2, 2 * k)) * n),
                  0.2);
}

VonMisesMixture rotate_mixture(const VonMisesMixture& m, const Eigen::MatrixXd& r)
{
  std::vector<UnitVector> mu;
  for (const auto& u : m.means())
    mu.push_back(normalize(oracle::rotate(u.coords(), r)));
  return VonMisesMixture(m.weights(), mu, m.kappas());
}

} // namespace

TEST(SelectorId, RoundTrip)
{
  for (auto id : all_selectors())
    EXPECT_EQ(parse_selector(to_string(id)), id);
  EXPECT_THROW(parse_selector("bogus"), DomainError);
}

TEST(Rot, CircularLiteral)
{
  using boost::math::cyl_bessel_i;
  double expect = std::pow(4 * std::sqrt(pi) * std::pow(cyl_bessel_i(0, 2.0), 2) /
                             (2 * (2 * cyl_bessel_i(1, 4.0) + 6 * cyl_bessel_i(2, 4.0)) * 500),
                           0.2);
  EXPECT_LT(rel(rot_bandwidth(1, 500, 2.0), expect), 1e-12);
  for (double k : {0.01, 0.3, 5.0, 80.0, 300.0})
    EXPECT_LT(rel(rot_bandwidth(1, 300, k), literal_rot_q1(k, 300, 2.0)), 1e-10) << k;
}

TEST(Rot, SphericalBranch)
{
  long double k = 1.0L, n = 100.0L;
  long double b = (1 + 4 * k * k) * std::sinh(2 * k) - 2 * k * std::cosh(2 * k);
  long double expect = std::pow(8 * std::sinh(k) * std::sinh(k) / (k * b * n), 1.0L / 6);
  EXPECT_LT(rel(rot_bandwidth(2, 100, 1.0), static_cast<double>(expect)), 1e-12);

  for (double kk : {1e-3, 0.05, 0.5, 0.99, 1.01, 3.0, 40.0, 900.0, 5000.0})
    EXPECT_LT(rel(rot_bandwidth(2, 250, kk), rot_bandwidth_general(2, 250, kk)), 1e-10) << kk;
  for (double kk : {0.1, 2.0, 30.0})
    EXPECT_LT(rel(rot_bandwidth(1, 250, kk), rot_bandwidth_general(1, 250, kk)), 1e-10) << kk;
}

TEST(Rot, ZeroConcentrationIsBoundary)
{
  EXPECT_TRUE(std::isinf(rot_bandwidth(2, 100, 0.0)));
  PointSet x(2);
  for (int i = 0; i < 3; ++i) {
    x.push_back(basis_vector(2, i));
    x.push_back(-basis_vector(2, i));
  }
  auto r = h_rot(x);
  EXPECT_EQ(*r.kappa_hat, 0.0);
  EXPECT_EQ(r.h, kLargeBandwidth);
  EXPECT_TRUE(r.at_upper);
}

TEST(Rot, ReportUsesMaximumLikelihoodKappa)
{
  auto x = draw(2, 1, 500, 3);
  auto r = h_rot(x);
  EXPECT_DOUBLE_EQ(r.h, rot_bandwidth(1, 500, *r.kappa_hat));
  EXPECT_NEAR(*r.kappa_hat, 2.0, 0.4);
  EXPECT_THROW(h_rot(PointSet(1, {1.0, 0.0})), DomainError);
}

TEST(Tay, LiteralAndExtraTerm)
{
  using boost::math::cyl_bessel_i;
  double k = 2.0;
  double expect = std::pow(4 * std::sqrt(pi) * std::pow(cyl_bessel_i(0, k), 2) /
                             (3 * k * k * cyl_bessel_i(2, 2 * k) * 500),
                           0.2);
  EXPECT_LT(rel(tay_bandwidth(500, k), expect), 1e-12);
  // Dropping the 2 I_1(2k) term of the circular rule of thumb gives h_tay.
  for (double kk : {0.01, 0.5, 2.0, 25.0, 300.0})
    EXPECT_LT(rel(tay_bandwidth(500, kk), literal_rot_q1(kk, 500, 0.0)), 1e-12) << kk;
}

TEST(Tay, AgreesWithRotForLargeKappa)
{
  for (double k = 10.0; k <= 100.0; k += 2.5)
    EXPECT_LT(rel(tay_bandwidth(500, k), rot_bandwidth(1, 500, k)), 0.02) << k;
  double r2 = tay_bandwidth(500, 1e-2) / rot_bandwidth(1, 500, 1e-2);
  double r3 = tay_bandwidth(500, 1e-3) / rot_bandwidth(1, 500, 1e-3);
  EXPECT_GT(r2, 5.0);
  EXPECT_GT(r3, r2);
}

TEST(Tay, CircularOnly)
{
  auto x = draw(2, 2, 50, 1);
  EXPECT_THROW(h_tay(x), UnsupportedError);
  SelectionContext ctx(x, 1);
  EXPECT_THROW(h_oli(ctx), UnsupportedError);
  EXPECT_THROW(select_bandwidth(SelectorId::tay, ctx), UnsupportedError);
}

TEST(Cv2, MatchesDefinition)
{
  auto x = draw(8, 1, 20, 11);
  const auto rule = build_rule(1, RuleKind::simpson_circle, 4000);
  for (double h : {0.15, 0.4, 1.2}) {
    KdeModel kde(x, h);
    double loo = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
      loo += kde.eval_loo(i);
    double sq = integrate(rule, [&](std::span<const double> p) {
      double f = kde.eval(p);
      return f * f;
    });
    double expect = 2.0 / 20 * loo - sq;
    EXPECT_LT(rel(cv2(x, h), expect), 1e-6) << h;
  }
}

TEST(Cv2, MatchesDefinitionOnSphere)
{
  auto x = draw(9, 2, 15, 12);
  const auto& rule = cached_protocol_rule(2);
  for (double h : {0.3, 0.8}) {
    KdeModel kde(x, h);
    double loo = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
      loo += kde.eval_loo(i);
    double sq = integrate(rule, [&](std::span<const double> p) {
      double f = kde.eval(p);
      return f * f;
    });
    EXPECT_LT(rel(cv2(x, h), 2.0 / 15 * loo - sq), 1e-6) << h;
  }
}

TEST(CvKl, SumOfLeaveOneOutLogs)
{
  auto x = draw(2, 2, 50, 4);
  for (double h : {0.05, 0.3, 2.0}) {
    KdeModel kde(x, h);
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
      s += kde.log_eval_loo(i);
    EXPECT_NEAR(cv_kl(x, h), s, 1e-9 * std::abs(s)) << h;
  }
}

TEST(Lscv, DuplicatedPoints)
{
  auto base = draw(2, 1, 40, 5);
  PointSet x(1);
  for (std::size_t i = 0; i < base.size(); ++i) {
    x.push_back(base.row(i));
    x.push_back(base.row(i));
  }
  EXPECT_TRUE(std::isfinite(cv2(x, 0.01)));
  SelectionContext ctx(x, 0);
  auto r = h_lscv(ctx);
  EXPECT_TRUE(std::isfinite(r.h));
  EXPECT_GT(r.h, 0.0);
}

TEST(Lcv, AntipodalPair)
{
  PointSet x(1, {1.0, 0.0, -1.0, 0.0});
  EXPECT_TRUE(std::isfinite(cv_kl(x, 1e-2)));
  SelectionContext ctx(x, 0);
  auto r = h_lcv(ctx);
  EXPECT_TRUE(std::isfinite(r.h));
  EXPECT_TRUE(std::isfinite(r.objective));
  EXPECT_TRUE(r.h <= r.window_hi || r.at_upper);
}

TEST(CrossValidation, ReasonableOnModelData)
{
  auto x = draw(2, 1, 500, 21);
  SelectionContext ctx(x, 21);
  auto ls = h_lscv(ctx);
  auto lc = h_lcv(ctx);
  EXPECT_FALSE(ls.on_boundary());
  EXPECT_FALSE(lc.on_boundary());
  // M2 is vM(2): the MISE-optimal bandwidth is near 0.3 at n = 500.
  EXPECT_GT(ls.h, 0.1);
  EXPECT_LT(ls.h, 0.8);
  EXPECT_GT(lc.h, 0.1);
  EXPECT_LT(lc.h, 0.8);
  EXPECT_NEAR(ls.objective, cv2(x, ls.h), 1e-15);
}

TEST(Ami, SingleComponentEqualsRot)
{
  for (int q : {1, 2, 3}) {
    auto x = draw(2, q, 300, 30 + q);
    auto rot = h_rot(x);
    std::vector<double> s(q + 1, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i)
      for (int k = 0; k <= q; ++k)
        s[k] += x.row(i)[k];
    auto m = VonMisesMixture::single(normalize(s), *rot.kappa_hat);
    auto ami = ami_from_mixture(m, 300, cached_protocol_rule(q));
    EXPECT_LT(rel(ami.h, rot.h), 1e-6) << q;
  }
}

TEST(Ami, SampleSizeScaling)
{
  auto m_model = scenario(8, 1);
  auto m = m_model.as_vm_mixture();
  ASSERT_NE(m, nullptr);
  const auto& rule = cached_protocol_rule(1);
  double h1 = ami_from_mixture(*m, 500, rule).h;
  double h2 = ami_from_mixture(*m, 1000, rule).h;
  EXPECT_NEAR(h2 / h1, std::pow(2.0, -0.2), 1e-12);
}

TEST(Emi, TrueParametersReachTableMise)
{
  auto m_model = scenario(2, 1);
  auto m = m_model.as_vm_mixture();
  ASSERT_NE(m, nullptr);
  auto r = emi_from_mixture(*m, 500, cached_protocol_rule(1));
  EXPECT_FALSE(r.on_boundary());
  EXPECT_NEAR(r.objective, 0.2298e-2, 0.05 * 0.2298e-2);
}

TEST(Emi, UniformDataOversmooths)
{
  auto x = draw(1, 1, 500, 8);
  SelectionContext ctx(x, 8);
  auto emi = h_emi(ctx);
  ASSERT_TRUE(emi.fit.has_value());
  EXPECT_EQ(emi.fit->mixture.size(), 1u);
  EXPECT_LT(emi.fit->mixture.kappas()[0], 0.3);
  EXPECT_GT(emi.h, 0.5);
  auto oli = h_oli(ctx);
  EXPECT_TRUE(oli.at_upper || oli.h > 0.5) << oli.h;
}

TEST(Emi, ExactlyUniformMixtureIsBoundary)
{
  auto r = emi_from_mixture(VonMisesMixture::uniform(2), 500, cached_protocol_rule(2));
  EXPECT_TRUE(r.at_upper);
  auto a = ami_from_mixture(VonMisesMixture::uniform(2), 500, cached_protocol_rule(2));
  EXPECT_TRUE(a.at_upper);
  EXPECT_EQ(a.h, kLargeBandwidth);
}

TEST(Oli, UniformMixtureHasNoBias)
{
  auto r = oli_from_mixture(VonMisesMixture::uniform(1), 500);
  EXPECT_TRUE(r.at_upper);
  EXPECT_EQ(r.curvature->value, 0.0);
}

TEST(Selectors, RotationEquivariance)
{
  Rng rng(99);
  auto x = draw(9, 2, 120, 40);
  auto rot = oracle::random_rotation(3, rng);
  auto y = oracle::rotate(x, rot);
  SelectionContext cx(x, 1), cy(y, 1);
  for (auto id : {SelectorId::rot, SelectorId::lscv, SelectorId::lcv}) {
    double a = select_bandwidth(id, cx).h, b = select_bandwidth(id, cy).h;
    EXPECT_LT(rel(b, a), 1e-8) << to_string(id);
  }
  auto m_model = scenario(9, 2);
  auto m = m_model.as_vm_mixture();
  ASSERT_NE(m, nullptr);
  auto mr = rotate_mixture(*m, rot);
  const auto& rule = cached_protocol_rule(2);
  EXPECT_LT(rel(ami_from_mixture(mr, 120, rule).h, ami_from_mixture(*m, 120, rule).h), 1e-8);
  EXPECT_LT(rel(emi_from_mixture(mr, 120, rule).h, emi_from_mixture(*m, 120, rule).h), 1e-6);

  auto c = draw(8, 1, 100, 41);
  auto rc = oracle::random_rotation(2, rng);
  auto cr = oracle::rotate(c, rc);
  EXPECT_LT(rel(h_tay(cr).h, h_tay(c).h), 1e-8);
  auto m8_model = scenario(8, 1);
  auto m8 = m8_model.as_vm_mixture();
  EXPECT_LT(rel(oli_from_mixture(rotate_mixture(*m8, rc), 100).h, oli_from_mixture(*m8, 100).h), 1e-6);
}

TEST(Selectors, Deterministic)
{
  auto x = draw(8, 1, 200, 50);
  for (auto id : all_selectors()) {
    auto a = select_bandwidth(id, x, 7);
    auto b = select_bandwidth(id, x, 7);
    EXPECT_EQ(a.h, b.h) << to_string(id);
    EXPECT_EQ(a.objective, b.objective) << to_string(id);
    EXPECT_EQ(a.trace_values, b.trace_values) << to_string(id);
    EXPECT_EQ(a.fit.has_value(), b.fit.has_value());
    if (a.fit)
      EXPECT_EQ(a.fit->log_likelihood, b.fit->log_likelihood);
  }
}

TEST(Selectors, ReportedBandwidthInsideWindowOrFlagged)
{
  auto x = draw(13, 1, 200, 60);
  SelectionContext ctx(x, 60);
  for (auto id : all_selectors()) {
    auto r = select_bandwidth(id, ctx);
    EXPECT_GT(r.h, 0.0);
    EXPECT_TRUE(std::isfinite(r.h));
    bool inside = r.h >= r.window_lo && r.h <= r.window_hi;
    EXPECT_TRUE(inside || r.on_boundary()) << to_string(id);
  }
}

TEST(Selectors, SharedFitsAcrossMixtureSelectors)
{
  auto x = draw(8, 1, 200, 70);
  SelectionContext ctx(x, 70);
  h_ami(ctx);
  auto fits = ctx.fitter().cached_fits();
  h_emi(ctx);
  EXPECT_EQ(ctx.fitter().cached_fits(), fits);
}
