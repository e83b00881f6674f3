#include "dirkde/selectors.hpp"

#include "dirkde/errors.hpp"
#include "dirkde/special_functions.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <chrono>
#include <functional>
#include <cmath>
#include <limits>
#include <numbers>

namespace dirkde {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;
constexpr double kPairCutoff = 100.0;

void require_sample(const PointSet& data, const char* who)
{
  if (data.size() < 2)
    throw DomainError(std::string(who) + " needs n >= 2");
}

void require_circular(const PointSet& data, const char* who)
{
  if (data.dim() != 1)
    throw UnsupportedError(std::string(who) + " is defined for q = 1 only (got q = " +
                           std::to_string(data.dim()) + ")");
}

Eigen::MatrixXd gram_matrix(const PointSet& data)
{
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto p = static_cast<Eigen::Index>(data.ambient());
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
    data.values().data(), n, p);
  Eigen::MatrixXd g = x * x.transpose();
  return g.cwiseMax(-1.0).cwiseMin(1.0);
}

double log_sinh(double x)
{
  if (x < 1.0)
    return std::log(std::sinh(x));
  return x - kLn2 + std::log1p(-std::exp(-2.0 * x));
}

// log[(1 + 4k^2) sinh 2k - 2k cosh 2k]
double log_q2_bracket(double k)
{
  if (k < 1.0) {
    double sum = 0.0;
    double pw = 2.0 * k;  // (2k)^{2m+1}/(2m+1)!
    for (int m = 1; m < 60; ++m) {
      pw *= (2.0 * k) * (2.0 * k) / ((2.0 * m) * (2.0 * m + 1.0));
      double term = 4.0 * pw * static_cast<double>(m) * m;
      sum += term;
      if (term < 1e-17 * sum)
        break;
    }
    return std::log(sum);
  }
  double e = std::exp(-4.0 * k);
  return 2.0 * k - kLn2 + std::log((1.0 + 4.0 * k * k) * (1.0 - e) - 2.0 * k * (1.0 + e));
}

BandwidthReport closed_form_report(SelectorId id, double h, double kappa)
{
  BandwidthReport r;
  r.selector = id;
  r.kappa_hat = kappa;
  r.window_lo = 0.0;
  r.window_hi = kLargeBandwidth;
  if (!(h <= kLargeBandwidth)) {
    r.h = kLargeBandwidth;
    r.at_upper = true;
  } else {
    r.h = h;
  }
  return r;
}

void copy_search(BandwidthReport& r, const MinimizeResult& m, double sign = 1.0)
{
  r.h = m.h;
  r.objective = sign * m.value;
  r.window_lo = m.lo;
  r.window_hi = m.hi;
  r.at_lower = m.at_lower;
  r.at_upper = m.at_upper;
  r.trace_h = m.grid_h;
  r.trace_values = m.grid_values;
}

void attach_selection(BandwidthReport& r, const MixtureSelection& sel)
{
  r.fit = sel.fit;
  r.order_trace = sel.trace;
  r.fit_fallback = sel.trace.fallback;
}

} // namespace

std::string to_string(SelectorId id)
{
  switch (id) {
    case SelectorId::lcv: return "lcv";
    case SelectorId::lscv: return "lscv";
    case SelectorId::tay: return "tay";
    case SelectorId::oli: return "oli";
    case SelectorId::rot: return "rot";
    case SelectorId::ami: return "ami";
    case SelectorId::emi: return "emi";
  }
  return "?";
}

SelectorId parse_selector(const std::string& name)
{
  for (auto id : all_selectors())
    if (to_string(id) == name)
      return id;
  throw DomainError("unknown selector '" + name + "' (expected lcv, lscv, tay, oli, rot, ami or emi)");
}

const std::vector<SelectorId>& all_selectors()
{
  static const std::vector<SelectorId> ids{SelectorId::lcv, SelectorId::lscv, SelectorId::tay,
                                           SelectorId::oli, SelectorId::rot,  SelectorId::ami,
                                           SelectorId::emi};
  return ids;
}

SelectionContext::SelectionContext(PointSet data,
                                   std::uint64_t seed,
                                   std::uint64_t mc_seed,
                                   SelectOptions fit_options)
  : data_(std::move(data)), seed_(seed), mc_seed_(mc_seed), fit_options_(fit_options)
{
  require_sample(data_, "bandwidth selection");
}

MixtureFitter& SelectionContext::fitter()
{
  if (!fitter_)
    fitter_ = std::make_unique<MixtureFitter>(data_, seed_, fit_options_);
  return *fitter_;
}

const Eigen::MatrixXd& SelectionContext::inner_products()
{
  if (!gram_)
    gram_ = std::make_unique<Eigen::MatrixXd>(gram_matrix(data_));
  return *gram_;
}

const PairwiseProducts& SelectionContext::pairs()
{
  if (!pairs_)
    pairs_ = std::make_unique<PairwiseProducts>(pairwise_products(data_));
  return *pairs_;
}

const QuadratureRule& SelectionContext::rule() const
{
  return cached_protocol_rule(data_.dim(), mc_seed_);
}

double kappa_hat(const PointSet& data)
{
  require_sample(data, "kappa_hat");
  std::vector<double> s(data.ambient(), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto x = data.row(i);
    for (std::size_t k = 0; k < s.size(); ++k)
      s[k] += x[k];
  }
  double rbar = std::sqrt(dot(s, s)) / static_cast<double>(data.size());
  if (rbar >= mean_resultant_ratio(data.dim(), kKappaHatCap))
    return kKappaHatCap;
  return std::min(solve_concentration(data.dim(), rbar), kKappaHatCap);
}

double rot_bandwidth(int q, double n, double kappa)
{
  if (q < 1)
    throw DomainError("rot_bandwidth: q must be >= 1");
  if (!(n >= 1.0))
    throw DomainError("rot_bandwidth: n must be >= 1");
  if (!(kappa >= 0.0))
    throw DomainError("rot_bandwidth: kappa must be >= 0");
  if (kappa == 0.0)
    return std::numeric_limits<double>::infinity();
  if (q == 1) {
    double i0 = log_bessel_i(0.0, kappa);
    // scaled I_1(2k), I_2(2k) share the factor e^{2k}
    double a = std::exp(log_bessel_i_scaled(1.0, 2.0 * kappa));
    double b = std::exp(log_bessel_i_scaled(2.0, 2.0 * kappa));
    double log_h5 = std::log(4.0) + 0.5 * std::log(kPi) + 2.0 * i0 - std::log(kappa) -
                    (2.0 * kappa + std::log(2.0 * a + 3.0 * kappa * b)) - std::log(n);
    return std::exp(log_h5 / 5.0);
  }
  if (q == 2) {
    double log_h6 = std::log(8.0) + 2.0 * log_sinh(kappa) - std::log(kappa) -
                    log_q2_bracket(kappa) - std::log(n);
    return std::exp(log_h6 / 6.0);
  }
  return rot_bandwidth_general(q, n, kappa);
}

double rot_bandwidth_general(int q, double n, double kappa)
{
  if (kappa == 0.0)
    return std::numeric_limits<double>::infinity();
  return h_amise_vm(q, n, curvature_vm(q, kappa));
}

double tay_bandwidth(double n, double kappa)
{
  if (!(n >= 1.0))
    throw DomainError("tay_bandwidth: n must be >= 1");
  if (!(kappa >= 0.0))
    throw DomainError("tay_bandwidth: kappa must be >= 0");
  if (kappa == 0.0)
    return std::numeric_limits<double>::infinity();
  double log_h5 = std::log(4.0) + 0.5 * std::log(kPi) + 2.0 * log_bessel_i(0.0, kappa) -
                  std::log(3.0) - 2.0 * std::log(kappa) - log_bessel_i(2.0, 2.0 * kappa) -
                  std::log(n);
  return std::exp(log_h5 / 5.0);
}

PairwiseProducts pairwise_products(const PointSet& data)
{
  require_sample(data, "pairwise_products");
  const auto g = gram_matrix(data);
  const auto n = g.rows();
  std::vector<double> t;
  t.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index j = 1; j < n; ++j)
    for (Eigen::Index i = 0; i < j; ++i)
      t.push_back(g(i, j));
  std::sort(t.begin(), t.end(), std::greater<>());
  PairwiseProducts p;
  p.q = data.dim();
  p.n = data.size();
  p.t = Eigen::Map<const Eigen::ArrayXd>(t.data(), static_cast<Eigen::Index>(t.size()));
  p.r = (2.0 + 2.0 * p.t).max(0.0).sqrt();
  return p;
}

double cv2(const PairwiseProducts& pairs, double h)
{
  if (pairs.n < 2)
    throw DomainError("cv2 needs n >= 2");
  if (!(h > 0.0) || !std::isfinite(h))
    throw DomainError("cv2: bandwidth must be finite and > 0");
  const int q = pairs.q;
  const double kappa = 1.0 / (h * h);
  const double dn = static_cast<double>(pairs.n);
  const double log_c = log_cq(q, kappa);
  const double la0 = std::log(2.0 / (dn - 1.0)) + log_c;
  const double lb0 = 2.0 * log_c - std::log(dn);
  // Both pair terms are below e^{-kappa (1 - t) / 2} times their t = 1 value.
  const double t_min = 1.0 - kPairCutoff / kappa;
  const auto& ts = pairs.t;
  const Eigen::Index m =
    std::upper_bound(ts.data(), ts.data() + ts.size(), t_min, std::greater<>()) - ts.data();
  const auto t = ts.head(m);
  const auto r = pairs.r.head(m);
  double first = (la0 + kappa * t).exp().sum();
  double second = 0.0;
  if (q == 2) {
    // -log C_2(z) = log(4 pi) + log(sinh z / z)
    Eigen::ArrayXd z = kappa * r;
    Eigen::ArrayXd lsinhc = z - kLn2 + (-(-2.0 * z).expm1()).log() - z.log();
    second = (z > 1e-150).select(lsinhc, 0.0).unaryExpr([&](double v) {
      return std::exp(lb0 + std::log(4.0 * kPi) + v);
    }).sum();
  } else if (q == 1) {
    // -log C_1(z) = log(2 pi) + log I_0(z)
    const double scale = std::exp(lb0 + std::log(2.0 * kPi));
    for (Eigen::Index k = 0; k < m; ++k) {
      double z = kappa * r[k];
      second += z < 700.0 && scale > 1e-280 ? scale * boost::math::cyl_bessel_i(0, z)
                                         : std::exp(lb0 - log_cq(1, z));
    }
  } else {
    for (Eigen::Index k = 0; k < m; ++k)
      second += std::exp(lb0 - log_cq(q, kappa * r[k]));
  }
  return 2.0 / dn * (first - second) - std::exp(lb0 - log_cq(q, 2.0 * kappa));
}

double cv2(const PointSet& data, double h)
{
  return cv2(pairwise_products(data), h);
}

double cv_kl(const Eigen::MatrixXd& gram, int q, double h)
{
  const auto n = gram.rows();
  if (n < 2)
    throw DomainError("cv_kl needs n >= 2");
  if (!(h > 0.0) || !std::isfinite(h))
    throw DomainError("cv_kl: bandwidth must be finite and > 0");
  const double kappa = 1.0 / (h * h);
  const double base = log_cq(q, kappa) - std::log(static_cast<double>(n - 1));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double tmax = -2.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i)
        tmax = std::max(tmax, gram(j, i));
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i)
        s += std::exp(kappa * (gram(j, i) - tmax));
    total += base + kappa * tmax + std::log(s);
  }
  return total;
}

double cv_kl(const PointSet& data, double h)
{
  require_sample(data, "cv_kl");
  return cv_kl(gram_matrix(data), data.dim(), h);
}

BandwidthReport h_rot(const PointSet& data)
{
  auto start = std::chrono::steady_clock::now();
  require_sample(data, "h_rot");
  double k = kappa_hat(data);
  auto r = closed_form_report(SelectorId::rot,
                              rot_bandwidth(data.dim(), static_cast<double>(data.size()), k), k);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

BandwidthReport h_tay(const PointSet& data)
{
  auto start = std::chrono::steady_clock::now();
  require_circular(data, "h_tay");
  require_sample(data, "h_tay");
  double k = kappa_hat(data);
  auto r = closed_form_report(SelectorId::tay, tay_bandwidth(static_cast<double>(data.size()), k), k);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

BandwidthReport ami_from_mixture(const VonMisesMixture& mixture, double n, const QuadratureRule& rule)
{
  auto c = curvature(mixture, rule);
  double h = c.value > 0.0 ? h_amise_vm(mixture.dim(), n, c.value)
                           : std::numeric_limits<double>::infinity();
  auto r = closed_form_report(SelectorId::ami, h, 0.0);
  r.kappa_hat.reset();
  if (mixture.size() == 1)
    r.kappa_hat = mixture.kappas()[0];
  r.curvature = c;
  r.objective = c.value;
  return r;
}

BandwidthReport emi_from_mixture(const VonMisesMixture& mixture, double n, const QuadratureRule& rule)
{
  ExactMise mise(mixture, n, rule);
  BandwidthReport r;
  r.selector = SelectorId::emi;
  copy_search(r, minimize_risk_widening([&](double h) { return mise(h); }));
  if (mixture.size() == 1)
    r.kappa_hat = mixture.kappas()[0];
  return r;
}

BandwidthReport oli_from_mixture(const VonMisesMixture& mixture, double n)
{
  if (mixture.dim() != 1)
    throw UnsupportedError("h_oli is defined for q = 1 only (got q = " +
                           std::to_string(mixture.dim()) + ")");
  double rough = circular_roughness(mixture);
  BandwidthReport r;
  r.selector = SelectorId::oli;
  copy_search(r, minimize_risk_widening(
                   [&](double h) { return circular_amise_oli(rough, n, std::pow(h, 4)); }));
  r.curvature = CurvatureReport{rough, CurvatureMethod::quadrature, 0.0};
  if (mixture.size() == 1)
    r.kappa_hat = mixture.kappas()[0];
  return r;
}

BandwidthReport h_ami(SelectionContext& ctx)
{
  auto start = std::chrono::steady_clock::now();
  auto sel = ctx.fitter().select(OrderCriterion::bic);
  auto r = ami_from_mixture(sel.fit.mixture, static_cast<double>(ctx.data().size()), ctx.rule());
  attach_selection(r, sel);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

BandwidthReport h_emi(SelectionContext& ctx)
{
  auto start = std::chrono::steady_clock::now();
  auto sel = ctx.fitter().select(OrderCriterion::bic);
  auto r = emi_from_mixture(sel.fit.mixture, static_cast<double>(ctx.data().size()), ctx.rule());
  attach_selection(r, sel);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

BandwidthReport h_oli(SelectionContext& ctx)
{
  auto start = std::chrono::steady_clock::now();
  require_circular(ctx.data(), "h_oli");
  auto sel = ctx.fitter().select(OrderCriterion::aic);
  auto r = oli_from_mixture(sel.fit.mixture, static_cast<double>(ctx.data().size()));
  attach_selection(r, sel);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

BandwidthReport h_lscv(SelectionContext& ctx)
{
  auto start = std::chrono::steady_clock::now();
  const auto& p = ctx.pairs();
  BandwidthReport r;
  r.selector = SelectorId::lscv;
  copy_search(r, minimize_risk_widening([&](double h) { return -cv2(p, h); }), -1.0);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

BandwidthReport h_lcv(SelectionContext& ctx)
{
  auto start = std::chrono::steady_clock::now();
  const auto& g = ctx.inner_products();
  const int q = ctx.data().dim();
  BandwidthReport r;
  r.selector = SelectorId::lcv;
  try {
    copy_search(r, minimize_risk_widening([&](double h) { return -cv_kl(g, q, h); }), -1.0);
  } catch (const EvaluationError& e) {
    throw EvaluationError(std::string("likelihood cross-validation is -inf over the whole window (") +
                          e.what() + "); use lscv instead");
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

BandwidthReport select_bandwidth(SelectorId id, SelectionContext& ctx)
{
  switch (id) {
    case SelectorId::rot: return h_rot(ctx.data());
    case SelectorId::tay: return h_tay(ctx.data());
    case SelectorId::ami: return h_ami(ctx);
    case SelectorId::emi: return h_emi(ctx);
    case SelectorId::lscv: return h_lscv(ctx);
    case SelectorId::lcv: return h_lcv(ctx);
    case SelectorId::oli: return h_oli(ctx);
  }
  throw DomainError("unknown selector");
}

BandwidthReport select_bandwidth(SelectorId id,
                                 const PointSet& data,
                                 std::uint64_t seed,
                                 std::uint64_t mc_seed)
{
  SelectionContext ctx(data, seed, mc_seed);
  return select_bandwidth(id, ctx);
}

} // namespace dirkde
