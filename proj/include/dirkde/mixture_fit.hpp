#pragma once

#include "dirkde/geometry.hpp"
#include "dirkde/models.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dirkde {

struct EmOptions
{
  int max_iter = 200;
  double tol = 1e-8;        // relative log-likelihood change
  int max_restarts = 5;     // fresh initializations after an emptied component
  double empty_mass = 1e-8; // component mass below which it counts as empty
};

struct FitResult
{
  VonMisesMixture mixture;
  double log_likelihood = 0.0;
  int n_params = 0;
  double bic = 0.0;
  double aic = 0.0;
  double aicc = 0.0;
  bool converged = false;
  bool failed = false;
  //! EM stopped because a component collapsed onto a single direction; the
  //! mixture holds the parameters of the last regular iteration.
  bool degenerate = false;
  int iterations = 0;
  int restarts = 0;
  std::vector<double> trace; // log-likelihood after each E-step
};

//! M(q+2) - 1.
int mixture_parameter_count(int q, int m);

//! Fills n_params, bic, aic and aicc from log_likelihood.
void score_fit(FitResult& fit, std::size_t n);

//! Log-likelihood of the data under a mixture.
double mixture_log_likelihood(const VonMisesMixture& mixture, const PointSet& data);

//! EM for an M-component von Mises mixture, initialized by k-means++ seeding
//! on 1 - x'c followed by one hard-assignment M-step.
FitResult em_fit(const PointSet& data, int m, std::uint64_t seed, const EmOptions& options = {});

//! Best log-likelihood of r EM runs; run k uses seed derive_seed(seed, {k}).
FitResult best_of_restarts(const PointSet& data,
                           int m,
                           int r,
                           std::uint64_t seed,
                           const EmOptions& options = {});

enum class OrderCriterion
{
  bic,
  aic
};

struct OrderSearchStep
{
  int m;
  double score;
  double log_likelihood;
  bool pruned; // some kappa_j above the cap
  bool failed;
};

struct OrderSearchTrace
{
  OrderCriterion criterion = OrderCriterion::bic;
  std::vector<OrderSearchStep> explored; // in increasing m
  int initial_frontier = 0;
  int chosen = 0;
  bool fallback = false; // every fit pruned; chosen is the capped M = 1 fit
};

struct MixtureSelection
{
  FitResult fit;
  OrderSearchTrace trace;
};

struct SelectOptions
{
  int neighbours = 3; // M_N
  int restarts = 10;  // R
  double kappa_cap = 250.0;
  EmOptions em;
};

//! Order search with a cache of fitted mixtures, so the BIC and AIC searches
//! over the same data share their EM runs. Fit for order M uses seed
//! derive_seed(seed, {M}).
class MixtureFitter
{
public:
  MixtureFitter(PointSet data, std::uint64_t seed, SelectOptions options = {});

  const FitResult& fit(int m);
  MixtureSelection select(OrderCriterion criterion = OrderCriterion::bic);

  const PointSet& data() const { return data_; }
  const SelectOptions& options() const { return options_; }
  std::size_t cached_fits() const { return cache_.size(); }

private:
  PointSet data_;
  std::uint64_t seed_;
  SelectOptions options_;
  std::map<int, FitResult> cache_;
};

//! Frontier search: fit M = 1..M_B with M_B = floor(log n), take the best
//! score among fits with every kappa_j <= cap, and raise M_B while
//! M_B - M_N < chosen M.
MixtureSelection select_mixture(const PointSet& data,
                                std::uint64_t seed,
                                const SelectOptions& options = {},
                                OrderCriterion criterion = OrderCriterion::bic);

std::string to_string(OrderCriterion criterion);

} // namespace dirkde
