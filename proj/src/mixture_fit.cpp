#include "dirkde/mixture_fit.hpp"

#include "dirkde/errors.hpp"
#include "dirkde/rng.hpp"
#include "dirkde/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dirkde {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxRbar = 1.0 - 1e-12;

struct Params
{
  std::vector<double> w;
  std::vector<std::vector<double>> mu;
  std::vector<double> kappa;
};

enum class Step
{
  ok,
  emptied,
  collapsed // some component's mean resultant length reached kMaxRbar
};

// M-step from responsibilities (n x m, row-major).
Step m_step(const PointSet& x, const std::vector<double>& gamma, int m, double empty_mass, Params& p)
{
  const std::size_t n = x.size();
  const std::size_t dim = x.ambient();
  const int q = x.dim();
  p.w.assign(m, 0.0);
  p.mu.assign(m, std::vector<double>(dim, 0.0));
  p.kappa.assign(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto xi = x.row(i);
    for (int j = 0; j < m; ++j) {
      double g = gamma[i * m + j];
      p.w[j] += g;
      for (std::size_t d = 0; d < dim; ++d)
        p.mu[j][d] += g * xi[d];
    }
  }
  Step status = Step::ok;
  for (int j = 0; j < m; ++j) {
    if (p.w[j] < empty_mass)
      return Step::emptied;
    double norm = std::sqrt(dot(p.mu[j], p.mu[j]));
    if (norm > 0.0) {
      for (double& v : p.mu[j])
        v /= norm;
    } else {
      std::fill(p.mu[j].begin(), p.mu[j].end(), 0.0);
      p.mu[j].back() = 1.0;
    }
    double rbar = norm / p.w[j];
    if (rbar >= kMaxRbar) {
      rbar = kMaxRbar;
      status = Step::collapsed;
    }
    p.kappa[j] = solve_concentration(q, rbar);
    p.w[j] /= static_cast<double>(n);
  }
  return status;
}

// E-step: fills log-responsibilities into gamma (normalized), returns the log-likelihood.
double e_step(const PointSet& x, const Params& p, std::vector<double>& gamma)
{
  const std::size_t n = x.size();
  const int m = static_cast<int>(p.w.size());
  const int q = x.dim();
  std::vector<double> base(m);
  for (int j = 0; j < m; ++j)
    base[j] = std::log(p.w[j]) + log_cq(q, p.kappa[j]);
  double ll = 0.0;
  std::vector<double> lg(m);
  for (std::size_t i = 0; i < n; ++i) {
    auto xi = x.row(i);
    double mx = -kInf;
    for (int j = 0; j < m; ++j) {
      lg[j] = base[j] + p.kappa[j] * dot(xi, p.mu[j]);
      mx = std::max(mx, lg[j]);
    }
    double s = 0.0;
    for (int j = 0; j < m; ++j)
      s += std::exp(lg[j] - mx);
    double lse = mx + std::log(s);
    ll += lse;
    for (int j = 0; j < m; ++j)
      gamma[i * m + j] = std::exp(lg[j] - lse);
  }
  return ll;
}

// k-means++ seeding on 1 - x'c, then hard assignment.
bool initialize(const PointSet& x, int m, Rng& rng, std::vector<double>& gamma)
{
  const std::size_t n = x.size();
  std::vector<std::size_t> centers;
  centers.push_back(static_cast<std::size_t>(uniform01(rng) * n) % n);
  std::vector<double> dist(n, kInf);
  while (static_cast<int>(centers.size()) < m) {
    auto c = x.row(centers.back());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], std::max(0.0, 1.0 - dot(x.row(i), c)));
      total += dist[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double u = uniform01(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += dist[i];
        if (u < acc && dist[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(uniform01(rng) * n) % n;
    }
    centers.push_back(pick);
  }
  std::fill(gamma.begin(), gamma.end(), 0.0);
  std::vector<int> count(m, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int best = 0;
    double bt = -kInf;
    for (int j = 0; j < m; ++j) {
      double t = dot(x.row(i), x.row(centers[j]));
      if (t > bt) {
        bt = t;
        best = j;
      }
    }
    gamma[i * m + best] = 1.0;
    ++count[best];
  }
  return std::all_of(count.begin(), count.end(), [](int c) { return c > 0; });
}

VonMisesMixture to_mixture(const Params& p)
{
  std::vector<UnitVector> mu;
  for (const auto& v : p.mu)
    mu.emplace_back(v);
  return VonMisesMixture(p.w, std::move(mu), p.kappa);
}

} // namespace

int mixture_parameter_count(int q, int m)
{
  return m * (q + 2) - 1;
}

void score_fit(FitResult& fit, std::size_t n)
{
  const double k = fit.n_params;
  const double nn = static_cast<double>(n);
  fit.bic = -2.0 * fit.log_likelihood + k * std::log(nn);
  fit.aic = -2.0 * fit.log_likelihood + 2.0 * k;
  fit.aicc = nn - k - 1.0 > 0.0 ? fit.aic + 2.0 * k * (k + 1.0) / (nn - k - 1.0) : kInf;
}

double mixture_log_likelihood(const VonMisesMixture& mixture, const PointSet& data)
{
  double ll = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
    ll += mixture.log_density(data.row(i));
  return ll;
}

FitResult em_fit(const PointSet& data, int m, std::uint64_t seed, const EmOptions& options)
{
  const std::size_t n = data.size();
  if (m < 1)
    throw DomainError("em_fit: number of components must be >= 1");
  if (n < static_cast<std::size_t>(m))
    throw DomainError("em_fit: need at least as many points as components");
  Rng rng(seed);
  std::vector<double> gamma(n * static_cast<std::size_t>(m));
  FitResult fit;
  fit.n_params = mixture_parameter_count(data.dim(), m);

  for (int attempt = 0; attempt <= options.max_restarts; ++attempt) {
    fit.restarts = attempt;
    fit.trace.clear();
    fit.degenerate = false;
    Params p;
    if (!initialize(data, m, rng, gamma) ||
        m_step(data, gamma, m, options.empty_mass, p) == Step::emptied)
      continue;
    bool emptied = false;
    double prev = -kInf;
    int it = 0;
    bool converged = false;
    Params last = p;
    for (it = 1; it <= options.max_iter; ++it) {
      double ll = e_step(data, p, gamma);
      fit.trace.push_back(ll);
      last = p;
      if (std::abs(ll - prev) <= options.tol * std::max(1.0, std::abs(ll))) {
        converged = true;
        break;
      }
      prev = ll;
      auto step = m_step(data, gamma, m, options.empty_mass, p);
      if (step == Step::emptied) {
        emptied = true;
        break;
      }
      if (step == Step::collapsed) {
        fit.degenerate = true;
        break;
      }
    }
    if (emptied)
      continue;
    fit.mixture = to_mixture(last);
    fit.log_likelihood = fit.trace.back();
    fit.converged = converged;
    fit.iterations = std::min(it, options.max_iter);
    score_fit(fit, n);
    return fit;
  }
  fit.failed = true;
  fit.log_likelihood = -kInf;
  score_fit(fit, n);
  return fit;
}

FitResult best_of_restarts(const PointSet& data, int m, int r, std::uint64_t seed, const EmOptions& options)
{
  if (r < 1)
    throw DomainError("best_of_restarts: need at least one run");
  FitResult best;
  bool have = false;
  for (int k = 0; k < r; ++k) {
    FitResult fit = em_fit(data, m, derive_seed(seed, {static_cast<std::uint64_t>(k)}), options);
    if (fit.failed)
      continue;
    if (!have || fit.log_likelihood > best.log_likelihood) {
      best = std::move(fit);
      have = true;
    }
  }
  if (!have)
    throw EvaluationError("every EM run for " + std::to_string(m) +
                          " components emptied a component");
  return best;
}

std::string to_string(OrderCriterion criterion)
{
  return criterion == OrderCriterion::bic ? "bic" : "aic";
}

MixtureFitter::MixtureFitter(PointSet data, std::uint64_t seed, SelectOptions options)
  : data_(std::move(data)), seed_(seed), options_(options)
{
  if (data_.size() < 2)
    throw DomainError("mixture selection needs n >= 2");
}

const FitResult& MixtureFitter::fit(int m)
{
  auto it = cache_.find(m);
  if (it != cache_.end())
    return it->second;
  FitResult result;
  try {
    result = best_of_restarts(data_, m, options_.restarts,
                              derive_seed(seed_, {static_cast<std::uint64_t>(m)}), options_.em);
  } catch (const EvaluationError&) {
    result.failed = true;
    result.log_likelihood = -kInf;
    result.n_params = mixture_parameter_count(data_.dim(), m);
    score_fit(result, data_.size());
  }
  return cache_.emplace(m, std::move(result)).first->second;
}

MixtureSelection MixtureFitter::select(OrderCriterion criterion)
{
  const int n = static_cast<int>(data_.size());
  const int mn = options_.neighbours;
  int mb = std::max(1, static_cast<int>(std::floor(std::log(static_cast<double>(n)))));
  mb = std::min(mb, n);

  auto score = [&](const FitResult& f) { return criterion == OrderCriterion::bic ? f.bic : f.aic; };
  auto pruned = [&](const FitResult& f) {
    return std::any_of(f.mixture.kappas().begin(), f.mixture.kappas().end(),
                       [&](double k) { return k > options_.kappa_cap; });
  };

  OrderSearchTrace trace;
  trace.criterion = criterion;
  trace.initial_frontier = mb;
  int chosen = 0;
  int explored = 0;
  for (;;) {
    for (int m = explored + 1; m <= mb; ++m) {
      const FitResult& f = fit(m);
      trace.explored.push_back({m, score(f), f.log_likelihood, !f.failed && pruned(f), f.failed});
    }
    explored = mb;
    chosen = 0;
    double best = kInf;
    for (const auto& s : trace.explored)
      if (!s.pruned && !s.failed && s.score < best) {
        best = s.score;
        chosen = s.m;
      }
    if (chosen != 0 && mb - mn < chosen && mb < n) {
      ++mb;
      continue;
    }
    break;
  }

  MixtureSelection out;
  if (chosen == 0) {
    // Every candidate was pruned: keep the M = 1 fit with its concentration capped.
    trace.fallback = true;
    chosen = 1;
    FitResult f = fit(1);
    if (f.failed)
      throw EvaluationError("mixture selection: the single-component fit failed");
    double k = std::min(f.mixture.kappas()[0], options_.kappa_cap);
    f.mixture = VonMisesMixture::single(f.mixture.means()[0], k);
    f.log_likelihood = mixture_log_likelihood(f.mixture, data_);
    score_fit(f, data_.size());
    out.fit = std::move(f);
  } else {
    out.fit = fit(chosen);
  }
  trace.chosen = chosen;
  out.trace = std::move(trace);
  return out;
}

MixtureSelection select_mixture(const PointSet& data,
                                std::uint64_t seed,
                                const SelectOptions& options,
                                OrderCriterion criterion)
{
  MixtureFitter fitter(data, seed, options);
  return fitter.select(criterion);
}

} // namespace dirkde
