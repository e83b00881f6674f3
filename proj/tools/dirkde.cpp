#include "dirkde/bench.hpp"
#include "dirkde/errors.hpp"
#include "dirkde/kde.hpp"
#include "dirkde/mixture_fit.hpp"
#include "dirkde/risk.hpp"
#include "dirkde/selectors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace dirkde;
using nlohmann::json;

namespace {

json mixture_json(const VonMisesMixture& m)
{
  json comps = json::array();
  for (std::size_t j = 0; j < m.size(); ++j) {
    std::vector<double> mu(m.means()[j].coords().begin(), m.means()[j].coords().end());
    comps.push_back({{"weight", m.weights()[j]}, {"mean", mu}, {"kappa", m.kappas()[j]}});
  }
  return {{"q", m.dim()}, {"components", comps}};
}

json fit_json(const FitResult& f)
{
  return {{"mixture", mixture_json(f.mixture)},
          {"log_likelihood", f.log_likelihood},
          {"n_params", f.n_params},
          {"bic", f.bic},
          {"aic", f.aic},
          {"aicc", std::isfinite(f.aicc) ? json(f.aicc) : json(nullptr)},
          {"converged", f.converged},
          {"degenerate", f.degenerate},
          {"failed", f.failed},
          {"iterations", f.iterations},
          {"restarts", f.restarts}};
}

json order_json(const OrderSearchTrace& t)
{
  json steps = json::array();
  for (const auto& s : t.explored)
    steps.push_back({{"m", s.m},
                     {"score", s.score},
                     {"log_likelihood", s.log_likelihood},
                     {"pruned", s.pruned},
                     {"failed", s.failed}});
  return {{"criterion", to_string(t.criterion)},
          {"initial_frontier", t.initial_frontier},
          {"chosen", t.chosen},
          {"fallback", t.fallback},
          {"explored", steps}};
}

json report_json(const BandwidthReport& r)
{
  json j{{"selector", to_string(r.selector)},
         {"h", r.h},
         {"objective", r.objective},
         {"window", {r.window_lo, r.window_hi}},
         {"at_lower", r.at_lower},
         {"at_upper", r.at_upper},
         {"fit_fallback", r.fit_fallback},
         {"seconds", r.seconds},
         {"trace", {{"h", r.trace_h}, {"value", r.trace_values}}}};
  j["kappa_hat"] = r.kappa_hat ? json(*r.kappa_hat) : json(nullptr);
  j["fit"] = r.fit ? fit_json(*r.fit) : json(nullptr);
  j["order_search"] = r.order_trace ? order_json(*r.order_trace) : json(nullptr);
  if (r.curvature)
    j["curvature"] = {{"value", r.curvature->value},
                      {"method", to_string(r.curvature->method)},
                      {"error", r.curvature->error}};
  else
    j["curvature"] = nullptr;
  return j;
}

std::vector<std::string> split(const std::string& s)
{
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty())
      out.push_back(item);
  return out;
}

class Output
{
public:
  explicit Output(const std::string& path)
  {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_)
        throw std::runtime_error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
  std::ofstream file_;
};

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Kernel density estimation and bandwidth selection on the sphere"};
  app.require_subcommand(1);

  // scenario-list
  auto* list = app.add_subcommand("scenario-list", "List the simulation scenarios M1..M20");

  // simulate
  std::string model_name = "M1";
  int dim = 1;
  std::size_t n = 100;
  std::uint64_t seed = 0, mc_seed = 0;
  std::string out_path;
  auto* simulate = app.add_subcommand("simulate", "Draw a sample from a scenario as unit-vector CSV");
  simulate->add_option("--model", model_name, "Scenario id (M1..M20)")->required();
  simulate->add_option("--dim", dim, "Sphere dimension q")->check(CLI::PositiveNumber);
  simulate->add_option("--n", n, "Sample size")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "Random seed");
  simulate->add_option("--out", out_path, "Output file (default stdout)");

  // select
  std::string input, method = "emi", format = "unit-vectors";
  auto* select = app.add_subcommand("select", "Select a bandwidth and print the report as JSON");
  select->add_option("--input", input, "Data CSV")->required()->check(CLI::ExistingFile);
  select->add_option("--method", method, "emi|ami|rot|tay|oli|lscv|lcv");
  select->add_option("--format", format, "unit-vectors|angles-1d|angles-2d");
  select->add_option("--seed", seed, "Mixture fitting seed");
  select->add_option("--mc-seed", mc_seed, "Seed of the Monte Carlo rule (q >= 3)");

  // fit
  std::string components = "auto", criterion = "bic";
  auto* fit = app.add_subcommand("fit", "Fit a von Mises mixture and print it as JSON");
  fit->add_option("--input", input, "Data CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--components", components, "auto or a number of components");
  fit->add_option("--criterion", criterion, "bic|aic (with --components auto)");
  fit->add_option("--format", format, "unit-vectors|angles-1d|angles-2d");
  fit->add_option("--seed", seed, "Seed");

  // density
  double bandwidth = 0.0;
  std::string grid_path;
  auto* density = app.add_subcommand("density", "Evaluate the estimate on the quadrature nodes or a grid");
  density->add_option("--input", input, "Data CSV")->required()->check(CLI::ExistingFile);
  density->add_option("--format", format, "unit-vectors|angles-1d|angles-2d");
  auto* h_opt = density->add_option("--bandwidth", bandwidth, "Bandwidth")->check(CLI::PositiveNumber);
  density->add_option("--method", method, "Selector used when --bandwidth is absent");
  density->add_option("--grid", grid_path, "Evaluation points (unit-vector CSV)")->check(CLI::ExistingFile);
  density->add_option("--seed", seed, "Mixture fitting seed");
  density->add_option("--mc-seed", mc_seed, "Seed of the Monte Carlo rule (q >= 3)");
  density->add_option("--out", out_path, "Output file (default stdout)");

  // mise-curve
  double lo = 1e-2, hi = 10.0;
  int points = 60, replicates = 200;
  std::string source = "exact";
  auto* curve = app.add_subcommand("mise-curve", "MISE against h as CSV");
  curve->add_option("--model", model_name, "Scenario id")->required();
  curve->add_option("--dim", dim, "Sphere dimension q")->check(CLI::PositiveNumber);
  curve->add_option("--n", n, "Sample size")->check(CLI::PositiveNumber);
  curve->add_option("--lo", lo, "Smallest h")->check(CLI::PositiveNumber);
  curve->add_option("--hi", hi, "Largest h")->check(CLI::PositiveNumber);
  curve->add_option("--points", points, "Grid size")->check(CLI::Range(2, 100000));
  curve->add_option("--source", source, "exact|asymptotic|empirical");
  curve->add_option("--replicates", replicates, "Replicates for --source empirical");
  curve->add_option("--seed", seed, "Seed for --source empirical");
  curve->add_option("--mc-seed", mc_seed, "Seed of the Monte Carlo rule (q >= 3)");
  curve->add_option("--out", out_path, "Output file (default stdout)");

  // bench
  std::string dims = "1", sizes = "500", models = "M1,M2,M3", selectors = "rot,tay,ami,emi,lscv,lcv,oli";
  std::string out_dir = "bench_out";
  bool full = false, h_mise = false;
  auto* bench = app.add_subcommand("bench", "Monte Carlo comparison of the selectors");
  bench->add_option("--dim", dims, "Comma-separated dimensions");
  bench->add_option("--n", sizes, "Comma-separated sample sizes");
  bench->add_option("--models", models, "Comma-separated scenario ids");
  bench->add_option("--selectors", selectors, "Comma-separated selectors");
  bench->add_option("--replicates", replicates, "Replicates per cell")->check(CLI::PositiveNumber);
  bench->add_flag("--full", full, "1000 replicates per cell");
  bench->add_flag("--h-mise", h_mise, "Also minimize the replicate-mean ISE over h");
  bench->add_option("--seed", seed, "Master seed");
  bench->add_option("--mc-seed", mc_seed, "Seed of the Monte Carlo rule (q >= 3)");
  bench->add_option("--out", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      for (const auto& s : scenario_catalog())
        std::cout << s.name << '\t' << s.description << '\n';
    } else if (*simulate) {
      Rng rng(seed);
      auto x = scenario(parse_scenario_id(model_name), dim).sample(n, rng);
      Output out(out_path);
      write_points_csv(x, out.stream());
    } else if (*select) {
      auto x = ingest_csv(input, parse_csv_format(format));
      auto r = select_bandwidth(parse_selector(method), x, seed, mc_seed);
      std::cout << report_json(r).dump(2) << '\n';
    } else if (*fit) {
      auto x = ingest_csv(input, parse_csv_format(format));
      MixtureFitter fitter(x, seed);
      json j;
      if (components == "auto") {
        OrderCriterion c = criterion == "aic" ? OrderCriterion::aic : OrderCriterion::bic;
        if (criterion != "aic" && criterion != "bic")
          throw DomainError("unknown criterion '" + criterion + "' (expected bic or aic)");
        auto sel = fitter.select(c);
        j = fit_json(sel.fit);
        j["order_search"] = order_json(sel.trace);
      } else {
        int m = std::stoi(components);
        if (m < 1)
          throw DomainError("--components must be auto or >= 1");
        j = fit_json(fitter.fit(m));
      }
      std::cout << j.dump(2) << '\n';
    } else if (*density) {
      auto x = ingest_csv(input, parse_csv_format(format));
      double h = bandwidth;
      if (h_opt->count() == 0)
        h = select_bandwidth(parse_selector(method), x, seed, mc_seed).h;
      KdeModel kde(x, h);
      PointSet nodes = grid_path.empty() ? cached_protocol_rule(x.dim(), mc_seed).nodes
                                         : ingest_csv(grid_path);
      if (nodes.dim() != x.dim())
        throw DomainError("grid and data dimensions differ");
      auto f = kde.eval_many(nodes);
      Output out(out_path);
      auto& os = out.stream();
      os << std::setprecision(17);
      for (int k = 0; k <= x.dim(); ++k)
        os << 'x' << k + 1 << ',';
      os << "density\n";
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (double v : nodes.row(i))
          os << v << ',';
        os << f[i] << '\n';
      }
    } else if (*curve) {
      int id = parse_scenario_id(model_name);
      const auto truth = scenario(id, dim);
      MiseCurve c;
      if (source == "empirical") {
        c = empirical_mise_curve(id, dim, n, replicates, seed, mc_seed, lo, hi, points);
      } else {
        const auto* mix = truth.as_vm_mixture();
        if (!mix)
          throw UnsupportedError(model_name + " is not a von Mises mixture; use --source empirical");
        const auto& rule = cached_protocol_rule(dim, mc_seed);
        if (source == "exact")
          c = exact_mise_curve(*mix, static_cast<double>(n), rule, lo, hi, points);
        else if (source == "asymptotic")
          c = amise_curve(*mix, static_cast<double>(n), rule, lo, hi, points);
        else
          throw DomainError("unknown source '" + source + "' (expected exact, asymptotic or empirical)");
      }
      Output out(out_path);
      auto& os = out.stream();
      os << std::setprecision(17) << "h,mise\n";
      for (std::size_t i = 0; i < c.h.size(); ++i)
        os << c.h[i] << ',' << c.mise[i] << '\n';
      std::cerr << std::setprecision(4) << "minimum " << c.min_value << " at h = " << c.h_min
                << (c.boundary ? " (boundary)" : "") << '\n';
    } else if (*bench) {
      BenchConfig cfg;
      cfg.dims.clear();
      for (const auto& d : split(dims))
        cfg.dims.push_back(std::stoi(d));
      cfg.sample_sizes.clear();
      for (const auto& s : split(sizes))
        cfg.sample_sizes.push_back(static_cast<std::size_t>(std::stoul(s)));
      for (const auto& m : split(models))
        cfg.models.push_back(parse_scenario_id(m));
      for (const auto& s : split(selectors))
        cfg.selectors.push_back(parse_selector(s));
      cfg.replicates = full ? 1000 : replicates;
      cfg.seed = seed;
      cfg.mc_seed = mc_seed;
      cfg.empirical_h_mise = h_mise;
      cfg.out_dir = out_dir;
      auto res = run_bench(cfg);
      write_bench_outputs(res);
      for (int q : cfg.dims)
        for (auto nn : cfg.sample_sizes)
          print_table(res, q, nn, std::cout);
      if (!res.ok()) {
        std::cerr << "some cells have more than 1% failed replicates\n";
        return 3;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
