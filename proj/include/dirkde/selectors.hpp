#pragma once

#include "dirkde/mixture_fit.hpp"
#include "dirkde/quadrature.hpp"
#include "dirkde/risk.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dirkde {

enum class SelectorId
{
  lcv,
  lscv,
  tay,
  oli,
  rot,
  ami,
  emi
};

std::string to_string(SelectorId id);
SelectorId parse_selector(const std::string& name);
const std::vector<SelectorId>& all_selectors();

//! Concentration estimates above this are capped.
inline constexpr double kKappaHatCap = 1e4;
//! Bandwidth reported when the selector's objective has no interior minimum
//! towards large h (uniform-like data).
inline constexpr double kLargeBandwidth = 1e3;

struct BandwidthReport
{
  SelectorId selector = SelectorId::rot;
  double h = 0.0;
  std::optional<double> kappa_hat;
  std::optional<FitResult> fit;
  std::optional<OrderSearchTrace> order_trace;
  std::optional<CurvatureReport> curvature;
  //! Objective minimized over h (negated CV for the cross-validation selectors).
  std::vector<double> trace_h;
  std::vector<double> trace_values;
  double objective = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  bool at_lower = false;
  bool at_upper = false;
  bool fit_fallback = false;
  double seconds = 0.0;

  bool on_boundary() const { return at_lower || at_upper; }
};

//! Upper-triangle inner products t_ij (i < j) sorted in decreasing order,
//! with r_ij = |X_i + X_j| = sqrt(2 + 2 t_ij).
struct PairwiseProducts
{
  int q = 0;
  std::size_t n = 0;
  Eigen::ArrayXd t;
  Eigen::ArrayXd r;
};

PairwiseProducts pairwise_products(const PointSet& data);

//! Data plus lazily built state shared by the selectors on one sample:
//! the mixture fits, the pairwise inner products and the ISE/curvature rule.
class SelectionContext
{
public:
  SelectionContext(PointSet data,
                   std::uint64_t seed,
                   std::uint64_t mc_seed = 0,
                   SelectOptions fit_options = {});

  const PointSet& data() const { return data_; }
  std::uint64_t seed() const { return seed_; }
  MixtureFitter& fitter();
  //! X X' (n x n).
  const Eigen::MatrixXd& inner_products();
  const PairwiseProducts& pairs();
  const QuadratureRule& rule() const;

private:
  PointSet data_;
  std::uint64_t seed_;
  std::uint64_t mc_seed_;
  SelectOptions fit_options_;
  std::unique_ptr<MixtureFitter> fitter_;
  std::unique_ptr<Eigen::MatrixXd> gram_;
  std::unique_ptr<PairwiseProducts> pairs_;
};

//! Maximum likelihood concentration of a single vM fit, capped at kKappaHatCap.
double kappa_hat(const PointSet& data);

//! Rule-of-thumb bandwidth for a vM with concentration kappa: the q = 1 and
//! q = 2 closed forms and the general curvature form for q >= 3.
double rot_bandwidth(int q, double n, double kappa);
//! The general form h_amise_vm(q, n, curvature_vm(q, kappa)) for every q.
double rot_bandwidth_general(int q, double n, double kappa);
//! Circular-only bandwidth [4 pi^{1/2} I_0(k)^2 / (3 k^2 I_2(2k) n)]^{1/5}.
double tay_bandwidth(double n, double kappa);

//! Cross-validation criteria.
double cv2(const PointSet& data, double h);
double cv2(const PairwiseProducts& pairs, double h);
double cv_kl(const PointSet& data, double h);
double cv_kl(const Eigen::MatrixXd& gram, int q, double h);

BandwidthReport h_rot(const PointSet& data);
BandwidthReport h_tay(const PointSet& data);
BandwidthReport h_ami(SelectionContext& ctx);
BandwidthReport h_emi(SelectionContext& ctx);
BandwidthReport h_lscv(SelectionContext& ctx);
BandwidthReport h_lcv(SelectionContext& ctx);
BandwidthReport h_oli(SelectionContext& ctx);

//! Plug-in steps applied to a given mixture (n is the sample size).
BandwidthReport ami_from_mixture(const VonMisesMixture& mixture, double n, const QuadratureRule& rule);
BandwidthReport emi_from_mixture(const VonMisesMixture& mixture, double n, const QuadratureRule& rule);
BandwidthReport oli_from_mixture(const VonMisesMixture& mixture, double n);

BandwidthReport select_bandwidth(SelectorId id, SelectionContext& ctx);

//! Convenience overload with a fresh context.
BandwidthReport select_bandwidth(SelectorId id,
                                 const PointSet& data,
                                 std::uint64_t seed = 0,
                                 std::uint64_t mc_seed = 0);

} // namespace dirkde
